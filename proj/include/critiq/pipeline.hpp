#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critiq/customizer.hpp"
#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"
#include "critiq/metrics.hpp"
#include "critiq/prioritizer.hpp"
#include "critiq/rebuttal.hpp"
#include "critiq/store.hpp"

namespace critiq {

struct RunConfig {
    DimensionMode mode = DimensionMode::generated;
    CustomizerConfig customizer;
    DebateConfig debate;
    SeverityConfig severity;
    MatchConfig match;

    // Ablation switches; each one touches exactly one stage.
    bool no_rebuttal = false;
    bool no_customizer = false;
    bool no_prioritizer = false;
    bool no_impact = false;

    int parallelism = 1;  // bound on in-flight gateway requests

    nlohmann::json snapshot() const;

    // Ablation flags folded into the stage configs.
    RunConfig effective() const;
};

// Customizer -> Rebuttal -> Prioritizer over one paper. Deterministic given
// (paper, backend script, config); timestamps live only in provenance.
ReviewRun run_review(const PaperDocument& paper, const Gateway& gateway,
                     const std::optional<ImpactTable>& impact_table, const RunConfig& config);

struct EvalOutcome {
    std::vector<PaperMetricReport> per_paper;
    MetricReport aggregate;  // unweighted means over papers
    std::vector<std::string> notes;
};

// Score every manifest entry: P/R/F1 against the valid gold set, Specificity
// across the population, F1_inv when an invalid gold set is present, and the
// severity/F1 correlation when the gen side is a ranked archive.
EvalOutcome evaluate_manifest(const std::vector<EvalManifestEntry>& entries,
                              const MatchConfig& config, const Gateway* gateway = nullptr);

struct ArchiveAnalysis {
    std::string path;
    std::size_t proposed = 0;
    std::size_t retained = 0;
    std::optional<double> retention;
    std::optional<double> pearson_rank_f1;
    std::vector<std::string> notes;
};

// Retention statistics per archive, plus the severity/F1 correlation when a
// manifest supplies gold sets for the archives' papers.
std::vector<ArchiveAnalysis> analyze_archives(const std::vector<std::filesystem::path>& archives,
                                              const std::optional<std::filesystem::path>& manifest,
                                              const MatchConfig& config);

// Run f(0..n-1) across at most `parallelism` worker threads; the first
// exception (by index) is rethrown after all workers finish.
void parallel_for_index(std::size_t n, int parallelism,
                        const std::function<void(std::size_t)>& f);

}  // namespace critiq
