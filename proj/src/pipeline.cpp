#include "critiq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <thread>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

using nlohmann::json;

void parallel_for_index(std::size_t n, int parallelism,
                        const std::function<void(std::size_t)>& f) {
    if (n == 0) return;
    const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::exception_ptr>> failures(n, {0, nullptr});
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                failures[i] = {i, std::current_exception()};
                failed.store(true);
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (failed.load()) {
        // Deterministic error surface: rethrow the lowest-index failure.
        for (const auto& [i, eptr] : failures) {
            if (eptr) std::rethrow_exception(eptr);
        }
    }
}

RunConfig RunConfig::effective() const {
    RunConfig out = *this;
    if (out.no_customizer) out.mode = DimensionMode::expert;
    if (out.no_rebuttal) out.debate.author_enabled = false;
    if (out.no_prioritizer) out.severity.prioritizer_enabled = false;
    if (out.no_impact) out.severity.impact_enabled = false;
    return out;
}

json RunConfig::snapshot() const {
    const RunConfig cfg = effective();
    return json{
        {"mode", to_string(cfg.mode)},
        {"customizer", json{{"max_generated", cfg.customizer.max_generated}}},
        {"debate", json{{"epsilon", cfg.debate.epsilon},
                        {"max_rounds", cfg.debate.max_rounds},
                        {"author_enabled", cfg.debate.author_enabled},
                        {"valid_weight", cfg.debate.valid_weight}}},
        {"severity", json{{"alpha", cfg.severity.alpha},
                          {"beta", cfg.severity.beta},
                          {"k", cfg.severity.k},
                          {"unknown_category_imp", cfg.severity.unknown_category_imp},
                          {"prioritizer_enabled", cfg.severity.prioritizer_enabled},
                          {"impact_enabled", cfg.severity.impact_enabled}}},
        {"match", json{{"sim_backend", to_string(cfg.match.sim_backend)},
                       {"theta", cfg.match.theta},
                       {"matching", "greedy_one_to_one"}}},
        {"ablations", json{{"no_rebuttal", no_rebuttal},
                           {"no_customizer", no_customizer},
                           {"no_prioritizer", no_prioritizer},
                           {"no_impact", no_impact}}},
        {"parallelism", parallelism},
    };
}

ReviewRun run_review(const PaperDocument& paper, const Gateway& gateway,
                     const std::optional<ImpactTable>& impact_table, const RunConfig& raw_config) {
    const RunConfig config = raw_config.effective();
    config.debate.validate();
    config.severity.validate();

    ReviewRun run;
    run.paper_id = paper.id;
    run.config_snapshot = raw_config.snapshot();
    run.provenance.backends = gateway.backend_ids();
    run.provenance.timestamps["started"] = iso8601_now();

    // Stage 1: dimensions.
    run.dimension_set = resolve_dimension_set(config.mode, paper, gateway, config.customizer);

    // Stage 2a: proposals, one reviewer call per dimension. Results land in
    // per-dimension slots, so completion order never affects output.
    const auto& dims = run.dimension_set.dimensions;
    std::vector<std::vector<Weakness>> proposals(dims.size());
    parallel_for_index(dims.size(), config.parallelism, [&](std::size_t i) {
        proposals[i] = propose_weaknesses(dims[i], paper, gateway);
    });
    for (const auto& batch : proposals) {
        for (const auto& w : batch) run.proposed.push_back(w);
    }
    // Canonical order everywhere downstream.
    std::sort(run.proposed.begin(), run.proposed.end(), [](const Weakness& a, const Weakness& b) {
        if (a.dimension_index != b.dimension_index) return a.dimension_index < b.dimension_index;
        return a.id < b.id;
    });

    // Stage 2b: debates.
    std::vector<RebuttalTranscript> transcripts(run.proposed.size());
    parallel_for_index(run.proposed.size(), config.parallelism, [&](std::size_t i) {
        transcripts[i] = run_debate(run.proposed[i], paper, config.debate, gateway);
    });
    run.transcripts = std::move(transcripts);

    // Stage 2c: filtering.
    FilterResult filtered = filter_weaknesses(run.proposed, run.transcripts);

    // Stage 3: ranking.
    ImpactTable table;  // empty table: every category falls back to the default
    if (impact_table) table = *impact_table;
    run.retained = rank_all(filtered.retained, table, config.severity);
    if (config.severity.prioritizer_enabled) {
        const std::size_t k = static_cast<std::size_t>(config.severity.k);
        run.top_k.assign(run.retained.begin(),
                         run.retained.begin() +
                             static_cast<std::ptrdiff_t>(std::min(k, run.retained.size())));
    } else {
        run.top_k = run.retained;  // ablation: no truncation
    }

    run.provenance.timestamps["finished"] = iso8601_now();
    return run;
}

// ---------------------------------------------------------------------------
// Evaluation driver

EvalOutcome evaluate_manifest(const std::vector<EvalManifestEntry>& entries,
                              const MatchConfig& config, const Gateway* gateway) {
    EvalOutcome outcome;

    // Specificity needs the whole population up front.
    std::map<std::string, WeaknessSet> gen_sets;
    std::map<std::string, std::vector<std::string>> population;
    for (const auto& entry : entries) {
        WeaknessSet set = load_weakness_texts(entry.gen);
        population[entry.paper_id] = set.texts;
        gen_sets[entry.paper_id] = std::move(set);
    }
    std::map<std::string, double> spec;
    if (population.size() >= 2) {
        spec = specificity(population);
    } else {
        outcome.notes.push_back("specificity skipped: population has fewer than two papers");
    }

    double sum_p = 0.0;
    double sum_r = 0.0;
    double sum_f1 = 0.0;
    double sum_spec = 0.0;
    double sum_f1_inv = 0.0;
    std::size_t n_f1_inv = 0;

    for (const auto& entry : entries) {
        const WeaknessSet& gen = gen_sets[entry.paper_id];
        WeaknessSet gold_valid = load_weakness_texts(entry.gold_valid);

        MetricReport report = match_and_score(gen.texts, gold_valid.texts, config, gateway);
        if (auto it = spec.find(entry.paper_id); it != spec.end()) report.specificity = it->second;

        if (entry.gold_invalid) {
            WeaknessSet gold_invalid = load_weakness_texts(*entry.gold_invalid);
            MetricReport invalid_report =
                match_and_score(gen.texts, gold_invalid.texts, config, gateway);
            report.f1_invalid = invalid_report.f1;
            if (report.precision > 0.0 && report.recall > 0.0) {
                report.f1_inv = f1_inv(invalid_report.f1, report.precision, report.recall, true);
                sum_f1_inv += *report.f1_inv;
                ++n_f1_inv;
            } else {
                outcome.notes.push_back(entry.paper_id +
                                        ": f1_inv skipped (zero valid precision or recall)");
            }
        }

        if (!gen.severities.empty() && gen.severities.size() == gen.texts.size()) {
            // Per-weakness match score: accepted-match similarity, 0 if unmatched.
            std::vector<double> f1_series(gen.texts.size(), 0.0);
            for (const auto& m : report.pair_matches) {
                f1_series[static_cast<std::size_t>(m.gen_index)] = m.sim;
            }
            try {
                report.pearson_rank_f1 = pearson_correlation(gen.severities, f1_series);
            } catch (const Error& e) {
                outcome.notes.push_back(entry.paper_id + ": rank-F1 correlation skipped (" +
                                        e.message() + ")");
            }
        }

        sum_p += report.precision;
        sum_r += report.recall;
        sum_f1 += report.f1;
        sum_spec += report.specificity;
        outcome.per_paper.push_back({entry.paper_id, std::move(report)});
    }

    const double n = static_cast<double>(entries.size());
    outcome.aggregate.precision = sum_p / n;
    outcome.aggregate.recall = sum_r / n;
    outcome.aggregate.f1 = sum_f1 / n;
    outcome.aggregate.specificity = sum_spec / n;
    if (n_f1_inv > 0) outcome.aggregate.f1_inv = sum_f1_inv / static_cast<double>(n_f1_inv);
    return outcome;
}

// ---------------------------------------------------------------------------
// Archive analysis

std::vector<ArchiveAnalysis> analyze_archives(const std::vector<std::filesystem::path>& archives,
                                              const std::optional<std::filesystem::path>& manifest,
                                              const MatchConfig& config) {
    std::map<std::string, EvalManifestEntry> gold_by_paper;
    if (manifest) {
        for (auto& entry : load_eval_manifest(*manifest)) {
            gold_by_paper[entry.paper_id] = entry;
        }
    }

    std::vector<ArchiveAnalysis> out;
    for (const auto& path : archives) {
        ArchiveAnalysis analysis;
        analysis.path = path.string();
        ReviewRun run = load_run(path);
        analysis.proposed = run.proposed.size();
        analysis.retained = run.retained.size();
        try {
            analysis.retention = retention_rate(run);
        } catch (const Error& e) {
            analysis.notes.push_back(e.what());
        }

        auto gold = gold_by_paper.find(run.paper_id);
        if (gold != gold_by_paper.end() && !run.retained.empty()) {
            std::vector<std::string> texts;
            std::vector<double> severities;
            bool scored = true;
            for (const auto& sw : run.retained) {
                texts.push_back(sw.weakness.text);
                if (sw.severity) {
                    severities.push_back(*sw.severity);
                } else {
                    scored = false;
                }
            }
            if (scored) {
                WeaknessSet gold_valid = load_weakness_texts(gold->second.gold_valid);
                MetricReport report = match_and_score(texts, gold_valid.texts, config);
                std::vector<double> f1_series(texts.size(), 0.0);
                for (const auto& m : report.pair_matches) {
                    f1_series[static_cast<std::size_t>(m.gen_index)] = m.sim;
                }
                try {
                    analysis.pearson_rank_f1 = pearson_correlation(severities, f1_series);
                } catch (const Error& e) {
                    analysis.notes.push_back(std::string("rank-F1 correlation skipped: ") +
                                             e.message());
                }
            } else {
                analysis.notes.push_back("archive carries unranked weaknesses; no correlation");
            }
        }
        out.push_back(std::move(analysis));
    }
    return out;
}

}  // namespace critiq
