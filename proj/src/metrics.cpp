#include "critiq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

std::string to_string(SimBackend v) {
    return v == SimBackend::tfidf_cosine ? "tfidf_cosine" : "embedding_service";
}

SimBackend sim_backend_from(std::string_view s) {
    if (s == "tfidf_cosine") return SimBackend::tfidf_cosine;
    if (s == "embedding_service") return SimBackend::embedding_service;
    throw Error(Errc::invalid_config, "unknown similarity backend '" + std::string(s) + "'");
}

void MatchConfig::validate() const {
    if (theta < 0.0 || theta > 1.0) throw Error(Errc::invalid_config, "theta must lie in [0,1]");
}

// ---------------------------------------------------------------------------
// TF-IDF

void TfidfVectorizer::fit(const std::vector<std::string>& documents) {
    document_frequency_.clear();
    document_count_ = documents.size();
    for (const auto& doc : documents) {
        std::set<std::string> unique;
        for (auto& token : tokenize(doc)) unique.insert(std::move(token));
        for (const auto& token : unique) ++document_frequency_[token];
    }
}

std::map<std::string, double> TfidfVectorizer::transform(const std::string& text) const {
    std::map<std::string, std::size_t> counts;
    for (const auto& token : tokenize(text)) ++counts[token];

    std::map<std::string, double> vec;
    const double n = static_cast<double>(document_count_);
    for (const auto& [token, count] : counts) {
        auto it = document_frequency_.find(token);
        const double df = it != document_frequency_.end() ? static_cast<double>(it->second) : 0.0;
        const double idf = std::log((1.0 + n) / (1.0 + df)) + 1.0;
        vec[token] = static_cast<double>(count) * idf;
    }
    return vec;
}

namespace {

double sparse_cosine(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& [token, weight] : a) {
        norm_a += weight * weight;
        auto it = b.find(token);
        if (it != b.end()) dot += weight * it->second;
    }
    for (const auto& [token, weight] : b) norm_b += weight * weight;
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

}  // namespace

double TfidfVectorizer::cosine(const std::string& a, const std::string& b) const {
    if (a == b) return 1.0;  // self-similarity holds even for token-free text
    return sparse_cosine(transform(a), transform(b));
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error(Errc::invalid_config, "vector lengths differ");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double similarity(const std::string& a, const std::string& b, SimBackend backend,
                  const Gateway* gateway) {
    if (trim(a).empty() || trim(b).empty()) {
        throw Error(Errc::invalid_config, "similarity needs non-empty texts");
    }
    if (backend == SimBackend::tfidf_cosine) {
        TfidfVectorizer vectorizer;
        vectorizer.fit({a, b});
        return vectorizer.cosine(a, b);
    }
    if (!gateway) {
        throw Error(Errc::invalid_config, "embedding similarity needs a gateway");
    }
    auto vectors = gateway->embed({a, b});
    return cosine_similarity(vectors[0], vectors[1]);
}

// ---------------------------------------------------------------------------
// Matching

MetricReport match_and_score(const std::vector<std::string>& gen,
                             const std::vector<std::string>& gold, const MatchConfig& config,
                             const Gateway* gateway) {
    config.validate();

    MetricReport report;
    if (!gen.empty() && !gold.empty()) {
        // Pairwise similarity matrix.
        std::vector<std::vector<double>> sims(gen.size(), std::vector<double>(gold.size(), 0.0));
        if (config.sim_backend == SimBackend::tfidf_cosine) {
            std::vector<std::string> corpus = gen;
            corpus.insert(corpus.end(), gold.begin(), gold.end());
            TfidfVectorizer vectorizer;
            vectorizer.fit(corpus);
            for (std::size_t i = 0; i < gen.size(); ++i) {
                for (std::size_t j = 0; j < gold.size(); ++j) {
                    sims[i][j] = vectorizer.cosine(gen[i], gold[j]);
                }
            }
        } else {
            if (!gateway) throw Error(Errc::invalid_config, "embedding similarity needs a gateway");
            std::vector<std::string> all = gen;
            all.insert(all.end(), gold.begin(), gold.end());
            auto vectors = gateway->embed(all);
            for (std::size_t i = 0; i < gen.size(); ++i) {
                for (std::size_t j = 0; j < gold.size(); ++j) {
                    sims[i][j] = cosine_similarity(vectors[i], vectors[gen.size() + j]);
                }
            }
        }

        struct Candidate {
            double sim;
            int gen_index;
            int gold_index;
        };
        std::vector<Candidate> candidates;
        candidates.reserve(gen.size() * gold.size());
        for (std::size_t i = 0; i < gen.size(); ++i) {
            for (std::size_t j = 0; j < gold.size(); ++j) {
                if (sims[i][j] >= config.theta) {
                    candidates.push_back({sims[i][j], static_cast<int>(i), static_cast<int>(j)});
                }
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.sim != b.sim) return a.sim > b.sim;
            if (a.gen_index != b.gen_index) return a.gen_index < b.gen_index;
            return a.gold_index < b.gold_index;
        });

        std::vector<bool> gen_used(gen.size(), false);
        std::vector<bool> gold_used(gold.size(), false);
        for (const auto& c : candidates) {
            if (gen_used[c.gen_index] || gold_used[c.gold_index]) continue;
            gen_used[c.gen_index] = true;
            gold_used[c.gold_index] = true;
            report.pair_matches.push_back({c.gen_index, c.gold_index, c.sim});
        }
    }

    const double matches = static_cast<double>(report.pair_matches.size());
    report.precision = gen.empty() ? 0.0 : matches / static_cast<double>(gen.size());
    report.recall = gold.empty() ? 0.0 : matches / static_cast<double>(gold.size());
    report.f1 = (report.precision + report.recall) > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// Specificity

std::map<std::string, double> specificity(
    const std::map<std::string, std::vector<std::string>>& weaknesses_by_paper) {
    if (weaknesses_by_paper.size() < 2) {
        throw Error(Errc::insufficient_population,
                    "specificity needs at least two papers for document frequencies");
    }

    const double n = static_cast<double>(weaknesses_by_paper.size());
    std::map<std::string, std::size_t> df;
    for (const auto& [paper_id, weaknesses] : weaknesses_by_paper) {
        std::set<std::string> unique;
        for (const auto& text : weaknesses) {
            for (auto& token : tokenize(text)) unique.insert(std::move(token));
        }
        for (const auto& token : unique) ++df[token];
    }

    auto idf = [&](const std::string& token) {
        return std::log(n / (1.0 + static_cast<double>(df.at(token)))) + 1.0;
    };

    std::map<std::string, double> out;
    for (const auto& [paper_id, weaknesses] : weaknesses_by_paper) {
        double sum = 0.0;
        std::size_t counted = 0;
        for (const auto& text : weaknesses) {
            auto tokens = tokenize(text);
            if (tokens.empty()) continue;  // token-free bullets carry no signal
            double token_sum = 0.0;
            for (const auto& token : tokens) token_sum += idf(token);
            sum += token_sum / static_cast<double>(tokens.size());
            ++counted;
        }
        out[paper_id] = counted > 0 ? sum / static_cast<double>(counted) : 0.0;
    }
    return out;
}

double f1_inv(double f1_invalid, double p_valid, double r_valid, bool report_scale) {
    if (f1_invalid < 0.0 || f1_invalid > 1.0 || p_valid < 0.0 || p_valid > 1.0 || r_valid < 0.0 ||
        r_valid > 1.0) {
        throw Error(Errc::invalid_config, "f1_inv inputs must be fractions in [0,1]");
    }
    const double denominator = p_valid * r_valid;
    if (denominator <= 0.0) {
        throw Error(Errc::zero_denominator, "p_valid * r_valid must be positive");
    }
    const double value = f1_invalid / denominator;
    return report_scale ? value * 10.0 : value;
}

}  // namespace critiq
