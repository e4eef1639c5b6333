#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "critiq/gateway.hpp"

namespace critiq {

enum class SimBackend { tfidf_cosine, embedding_service };
enum class MatchingStrategy { greedy_one_to_one };

std::string to_string(SimBackend v);
SimBackend sim_backend_from(std::string_view s);

struct MatchConfig {
    SimBackend sim_backend = SimBackend::tfidf_cosine;
    double theta = 0.5;  // minimum similarity for a match
    MatchingStrategy matching = MatchingStrategy::greedy_one_to_one;

    void validate() const;
};

struct PairMatch {
    int gen_index = 0;
    int gold_index = 0;
    double sim = 0.0;
};

struct MetricReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double specificity = 0.0;
    std::optional<double> f1_invalid;
    std::optional<double> f1_inv;
    std::optional<double> pearson_rank_f1;
    std::vector<PairMatch> pair_matches;
};

// TF-IDF vectors over lowercase alphanumeric tokens:
//   tf = raw count, idf = ln((1+N)/(1+df)) + 1, weight = tf * idf.
class TfidfVectorizer {
public:
    void fit(const std::vector<std::string>& documents);
    std::map<std::string, double> transform(const std::string& text) const;
    double cosine(const std::string& a, const std::string& b) const;
    std::size_t document_count() const { return document_count_; }

private:
    std::map<std::string, std::size_t> document_frequency_;
    std::size_t document_count_ = 0;
};

// Standalone similarity; the TF-IDF variant fits on exactly {a, b}.
double similarity(const std::string& a, const std::string& b,
                  SimBackend backend = SimBackend::tfidf_cosine,
                  const Gateway* gateway = nullptr);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Greedy one-to-one matching by descending similarity, then P/R/F1. The
// TF-IDF vocabulary is the union of gen and gold texts.
MetricReport match_and_score(const std::vector<std::string>& gen,
                             const std::vector<std::string>& gold, const MatchConfig& config,
                             const Gateway* gateway = nullptr);

// Per-paper mean over each weakness's mean token idf, where documents are
// the papers' concatenated weaknesses and idf(t) = ln(N/(1+df(t))) + 1.
std::map<std::string, double> specificity(
    const std::map<std::string, std::vector<std::string>>& weaknesses_by_paper);

// f1_invalid / (p_valid * r_valid) over fraction-valued inputs; report_scale
// multiplies by 10 for presentation.
double f1_inv(double f1_invalid, double p_valid, double r_valid, bool report_scale);

}  // namespace critiq
