#pragma once

#include <utility>
#include <vector>

#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"

namespace critiq {

struct DebateConfig {
    double epsilon = 0.4;       // retention threshold on the combined score
    int max_rounds = 3;
    bool author_enabled = true;  // ablation switch: false retains everything
    double valid_weight = 0.5;   // weight of valid_score in the combined score

    void validate() const;  // throws invalid_config
};

// One reviewer call for one dimension; weaknesses come back with
// deterministic ids, validated locations and state=proposed.
std::vector<Weakness> propose_weaknesses(const ReviewDimension& dim, const PaperDocument& paper,
                                         const Gateway& gateway);

// One author call; scores come from the backend when present, else from the
// canonical label mapping.
ValidityAssessment assess(const Weakness& weakness, const PaperDocument& paper,
                          const std::vector<DebateRound>& history, const Gateway& gateway);

// The bounded author/reviewer loop for a single weakness.
RebuttalTranscript run_debate(const Weakness& weakness, const PaperDocument& paper,
                              const DebateConfig& config, const Gateway& gateway);

struct FilterResult {
    std::vector<RetainedWeakness> retained;
    std::vector<Weakness> filtered;
};

// Partition debated weaknesses by transcript decision. Retained weaknesses
// carry the final assessment scores and any revised wording.
FilterResult filter_weaknesses(const std::vector<Weakness>& debated,
                               const std::vector<RebuttalTranscript>& transcripts);

// |retained| / |proposed|; throws undefined_rate when nothing was proposed.
double retention_rate(const ReviewRun& run);
double retention_rate(std::size_t proposed, std::size_t retained);

}  // namespace critiq
