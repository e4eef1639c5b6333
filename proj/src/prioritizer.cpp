#include "critiq/prioritizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

void SeverityConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0 || alpha + beta > 1.0 + 1e-12) {
        throw Error(Errc::invalid_config, "need alpha >= 0, beta >= 0, alpha + beta <= 1");
    }
    if (k < 1) throw Error(Errc::invalid_config, "k must be >= 1");
    if (unknown_category_imp < 0.0 || unknown_category_imp > 1.0) {
        throw Error(Errc::invalid_config, "unknown_category_imp must lie in [0,1]");
    }
}

namespace {

std::string classify_bullet(const std::string& text, const std::vector<std::string>& vocabulary,
                            const Gateway& gateway) {
    AgentRequest req;
    req.role = AgentRole::classifier();
    req.template_id = "category_classify";
    req.variables = {{"bullet_text", text}, {"categories", join(vocabulary, "; ")}};
    AgentResponse res = gateway.complete(req);
    return res.parsed.at("category").get<std::string>();
}

}  // namespace

ImpactTable fit_impact_table(const std::vector<ReviewCorpusRecord>& corpus, double smoothing,
                             const Gateway* classifier, FrequencyUnit unit) {
    if (smoothing < 0.0) throw Error(Errc::invalid_config, "smoothing must be >= 0");

    // Resolve labels first; the vocabulary for smoothing is the set of
    // distinct categories across both segments.
    struct LabeledRecord {
        Segment segment;
        std::vector<std::string> categories;  // one per bullet
    };
    std::vector<LabeledRecord> labeled;
    std::vector<std::string> pre_labeled_vocabulary;
    {
        std::set<std::string> seen;
        for (const auto& record : corpus) {
            for (const auto& bullet : record.bullets) {
                if (bullet.category && seen.insert(*bullet.category).second) {
                    pre_labeled_vocabulary.push_back(*bullet.category);
                }
            }
        }
    }
    for (const auto& record : corpus) {
        LabeledRecord lr;
        lr.segment = record.segment;
        for (const auto& bullet : record.bullets) {
            if (bullet.category) {
                lr.categories.push_back(*bullet.category);
            } else if (classifier) {
                lr.categories.push_back(
                    classify_bullet(bullet.text, pre_labeled_vocabulary, *classifier));
            } else {
                throw Error(Errc::missing_labels,
                            "corpus bullet lacks a category and no classifier backend was given");
            }
        }
        labeled.push_back(std::move(lr));
    }

    std::size_t meta_total = 0;
    std::size_t ind_total = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // category -> (meta, ind)
    for (const auto& record : labeled) {
        // bullet unit: every occurrence counts against the bullet total;
        // review unit: a category counts once per record, against the record total.
        std::vector<std::string> occurrences = record.categories;
        if (unit == FrequencyUnit::review) {
            std::set<std::string> unique(occurrences.begin(), occurrences.end());
            occurrences.assign(unique.begin(), unique.end());
        }
        const std::size_t weight =
            unit == FrequencyUnit::bullet ? record.categories.size() : 1;
        for (const auto& category : occurrences) {
            auto& slot = counts[category];
            if (record.segment == Segment::meta) {
                ++slot.first;
            } else {
                ++slot.second;
            }
        }
        if (record.segment == Segment::meta) {
            meta_total += weight;
        } else {
            ind_total += weight;
        }
    }
    if (meta_total == 0 || ind_total == 0) {
        throw Error(Errc::empty_corpus,
                    "impact fitting needs at least one meta and one individual bullet");
    }

    const double categories = static_cast<double>(counts.size());
    ImpactTable table;
    table.smoothing = smoothing;
    for (const auto& [category, count] : counts) {
        ImpactEntry entry;
        entry.f_meta = (static_cast<double>(count.first) + smoothing) /
                       (static_cast<double>(meta_total) + smoothing * categories);
        entry.f_ind = (static_cast<double>(count.second) + smoothing) /
                      (static_cast<double>(ind_total) + smoothing * categories);
        if (entry.f_ind <= 0.0) {
            throw Error(Errc::zero_denominator,
                        "category '" + category +
                            "' never appears in individual reviews; use smoothing > 0");
        }
        entry.imp = entry.f_meta / entry.f_ind;
        table.entries[category] = entry;
    }
    return table;
}

std::map<std::string, double> normalize_impact(const ImpactTable& table) {
    std::map<std::string, double> out;
    double max_imp = 0.0;
    for (const auto& [category, entry] : table.entries) max_imp = std::max(max_imp, entry.imp);
    if (max_imp <= 0.0) return out;
    for (const auto& [category, entry] : table.entries) out[category] = entry.imp / max_imp;
    return out;
}

double impact_for_category(const std::map<std::string, double>& normalized,
                           const std::string& category, const SeverityConfig& config) {
    auto it = normalized.find(category);
    return it != normalized.end() ? it->second : config.unknown_category_imp;
}

double severity(double imp_norm, double valid_score, double evid_score,
                const SeverityConfig& config) {
    config.validate();
    double alpha = config.alpha;
    double beta = config.beta;
    if (!config.impact_enabled) {
        // Drop the impact term and renormalize the remaining weights.
        double rest = beta + (1.0 - alpha - beta);
        alpha = 0.0;
        beta = rest > 0.0 ? config.beta / rest : 0.5;
    }
    return alpha * imp_norm + beta * valid_score + (1.0 - alpha - beta) * evid_score;
}

namespace {

std::vector<ScoredWeakness> score_and_sort(const std::vector<RetainedWeakness>& retained,
                                           const ImpactTable& table,
                                           const SeverityConfig& config, bool truncate) {
    config.validate();
    const auto normalized = normalize_impact(table);

    std::vector<ScoredWeakness> scored;
    scored.reserve(retained.size());
    for (const auto& item : retained) {
        ScoredWeakness sw;
        sw.weakness = item.weakness;
        sw.imp_norm = impact_for_category(normalized, item.weakness.category, config);
        sw.valid_score = item.valid_score;
        sw.evid_score = item.evid_score;
        if (config.prioritizer_enabled) {
            sw.severity = severity(sw.imp_norm, sw.valid_score, sw.evid_score, config);
        }
        scored.push_back(std::move(sw));
    }

    if (config.prioritizer_enabled) {
        std::sort(scored.begin(), scored.end(), [](const ScoredWeakness& a, const ScoredWeakness& b) {
            if (*a.severity != *b.severity) return *a.severity > *b.severity;
            if (a.valid_score != b.valid_score) return a.valid_score > b.valid_score;
            if (a.evid_score != b.evid_score) return a.evid_score > b.evid_score;
            return a.weakness.id < b.weakness.id;
        });
    }
    for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = static_cast<int>(i) + 1;

    if (truncate && config.prioritizer_enabled &&
        scored.size() > static_cast<std::size_t>(config.k)) {
        scored.resize(static_cast<std::size_t>(config.k));
    }
    return scored;
}

}  // namespace

std::vector<ScoredWeakness> rank_top_k(const std::vector<RetainedWeakness>& retained,
                                       const ImpactTable& table, const SeverityConfig& config) {
    return score_and_sort(retained, table, config, true);
}

std::vector<ScoredWeakness> rank_all(const std::vector<RetainedWeakness>& retained,
                                     const ImpactTable& table, const SeverityConfig& config) {
    return score_and_sort(retained, table, config, false);
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw Error(Errc::invalid_config, "series lengths differ");
    }
    const std::size_t n = xs.size();
    if (n < 2) throw Error(Errc::degenerate_series, "need at least two points");

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(Errc::degenerate_series, "zero variance in a series");
    }
    return sxy / std::sqrt(sxx * syy);
}

double rank_f1_correlation(const std::vector<ScoredWeakness>& ranked,
                           const std::vector<double>& f1_values) {
    if (ranked.size() != f1_values.size()) {
        throw Error(Errc::invalid_config, "one F1 value is needed per ranked weakness");
    }
    std::vector<double> severities;
    severities.reserve(ranked.size());
    for (const auto& sw : ranked) {
        if (!sw.severity) {
            throw Error(Errc::invalid_config, "ranked weaknesses carry no severity scores");
        }
        severities.push_back(*sw.severity);
    }
    return pearson_correlation(severities, f1_values);
}

}  // namespace critiq
