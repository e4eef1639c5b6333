#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"

namespace critiq {

struct SeverityConfig {
    double alpha = 0.5;
    double beta = 0.3;
    int k = 10;
    double unknown_category_imp = 0.5;  // normalized impact for unseen categories
    bool prioritizer_enabled = true;    // ablation: ranking off, input order kept
    bool impact_enabled = true;         // ablation: impact term dropped from the score

    void validate() const;  // throws invalid_config
};

// How often a category "appears" in a segment: per bullet, or once per
// review record that mentions it.
enum class FrequencyUnit { bullet, review };

// Per-category frequency ratio between meta-reviews and individual reviews,
// with additive smoothing over the corpus category vocabulary. Bullets
// without labels are classified through the gateway when one is supplied.
ImpactTable fit_impact_table(const std::vector<ReviewCorpusRecord>& corpus, double smoothing,
                             const Gateway* classifier = nullptr,
                             FrequencyUnit unit = FrequencyUnit::bullet);

// Max-normalize raw ratios into [0,1]; ordering is preserved.
std::map<std::string, double> normalize_impact(const ImpactTable& table);

double impact_for_category(const std::map<std::string, double>& normalized,
                           const std::string& category, const SeverityConfig& config);

// alpha*imp + beta*valid + (1-alpha-beta)*evid, with the ablation variant
// renormalizing the weights over valid/evid when the impact term is off.
double severity(double imp_norm, double valid_score, double evid_score,
                const SeverityConfig& config);

// Score, sort (severity desc, valid desc, evid desc, id asc), rank 1..N,
// truncate to k. With the prioritizer disabled: input order, no severity,
// no truncation.
std::vector<ScoredWeakness> rank_top_k(const std::vector<RetainedWeakness>& retained,
                                       const ImpactTable& table, const SeverityConfig& config);

// Rank the full set (no truncation); rank_top_k is a prefix of this.
std::vector<ScoredWeakness> rank_all(const std::vector<RetainedWeakness>& retained,
                                     const ImpactTable& table, const SeverityConfig& config);

// Pearson correlation; throws degenerate_series on zero variance or n < 2.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// Correlation between severity scores and per-weakness match-F1 values.
double rank_f1_correlation(const std::vector<ScoredWeakness>& ranked,
                           const std::vector<double>& f1_values);

}  // namespace critiq
