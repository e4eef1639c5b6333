#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "critiq/customizer.hpp"
#include "critiq/error.hpp"
#include "critiq/pipeline.hpp"
#include "critiq/prioritizer.hpp"
#include "critiq/rebuttal.hpp"
#include "critiq/store.hpp"
#include "critiq/textutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace critiq;

namespace {

struct BackendOptions {
    std::string script_path;
    std::string base_url;
    std::string model;
    std::string api_key_env = "CRITIQ_API_KEY";
    bool lax_script = false;
};

void add_backend_options(CLI::App* cmd, BackendOptions& opts) {
    cmd->add_option("--script", opts.script_path,
                    "replay script file for the deterministic scripted backend");
    cmd->add_option("--base-url", opts.base_url,
                    "base URL of a chat-completion-style remote backend");
    cmd->add_option("--model", opts.model, "model name for the remote backend");
    cmd->add_option("--api-key-env", opts.api_key_env,
                    "environment variable holding the remote credential")
        ->capture_default_str();
    cmd->add_flag("--lax-script", opts.lax_script,
                  "allow role defaults when a scripted request has no matching entry");
}

std::shared_ptr<Backend> make_backend(const BackendOptions& opts) {
    if (!opts.script_path.empty()) {
        ReplayScript script = load_replay_script(opts.script_path);
        if (opts.lax_script) script.strict = false;
        return std::make_shared<ScriptedBackend>(std::move(script));
    }
    if (!opts.base_url.empty()) {
        HttpBackendConfig config;
        config.base_url = opts.base_url;
        config.model = opts.model;
        config.api_key_env = opts.api_key_env;
        return std::make_shared<HttpBackend>(config);
    }
    throw Error(Errc::usage, "select a backend: --script FILE or --base-url URL");
}

// Precedence: command-line flag > config file > built-in default.
class ConfigFile {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        json parsed = json::parse(read_text_file(path), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw Error(Errc::invalid_config, "config file is not a JSON object: " + path);
        }
        values_ = parsed;
    }

    template <typename T>
    void apply(const CLI::App* cmd, const std::string& flag, T& target) const {
        if (values_.is_null() || !values_.contains(flag)) return;
        const CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
        if (opt && opt->count() > 0) return;  // explicit flag wins
        try {
            target = values_.at(flag).get<T>();
        } catch (const std::exception&) {
            throw Error(Errc::invalid_config, "config key '" + flag + "' has the wrong type");
        }
    }

    const json& raw() const { return values_; }

private:
    json values_;
};

// Config-file-only: a "backends" object mapping role names to their own
// backend, e.g. {"author": {"script": "author.json"}} or
// {"reviewer": {"base_url": "...", "model": "..."}}.
void apply_role_backends(Gateway& gateway, const json& config) {
    if (config.is_null() || !config.contains("backends")) return;
    for (const auto& [role_name, spec] : config.at("backends").items()) {
        BackendOptions opts;
        opts.script_path = spec.value("script", "");
        opts.base_url = spec.value("base_url", "");
        opts.model = spec.value("model", "");
        opts.api_key_env = spec.value("api_key_env", opts.api_key_env);
        gateway.set_backend(role_kind_from(role_name), make_backend(opts));
    }
}

std::string format_score(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return std::string(buf);
}

void print_run_report(const ReviewRun& run) {
    std::cout << "paper: " << run.paper_id << "\n";
    std::cout << "dimensions: " << run.dimension_set.dimensions.size() << " ("
              << to_string(run.dimension_set.source_mode) << ")\n";
    std::size_t filtered = 0;
    for (const auto& t : run.transcripts) {
        if (t.decision == Decision::filtered) ++filtered;
    }
    std::cout << "proposed: " << run.proposed.size() << ", retained: " << run.retained.size()
              << ", filtered: " << filtered;
    if (!run.proposed.empty()) {
        std::cout << " (retention " << format_score(retention_rate(run)) << ")";
    }
    std::cout << "\n\ntop-" << run.top_k.size() << " weaknesses:\n";

    for (const auto& sw : run.top_k) {
        std::cout << "  " << sw.rank << ". ";
        if (sw.severity) {
            std::cout << "[" << format_score(*sw.severity) << "] ";
        }
        std::cout << "(" << sw.weakness.category << " @ " << sw.weakness.location << ") "
                  << sw.weakness.text << "\n";
        for (const auto& t : run.transcripts) {
            if (t.weakness_id != sw.weakness.id) continue;
            std::cout << "     debate: " << t.rounds.size() << " round(s), "
                      << to_string(t.termination) << ", combined "
                      << format_score(t.final_combined) << ", " << to_string(t.decision) << "\n";
        }
    }
}

int cmd_review(const std::string& paper_path, const BackendOptions& backend_opts,
               const std::string& out_path, const std::string& impact_path, RunConfig config,
               const json& config_json) {
    PaperDocument paper = load_paper(paper_path);
    Gateway gateway(make_backend(backend_opts));
    apply_role_backends(gateway, config_json);

    std::optional<ImpactTable> table;
    if (!impact_path.empty()) table = load_impact_table(impact_path);

    ReviewRun run = run_review(paper, gateway, table, config);
    persist_run(run, out_path);
    print_run_report(run);
    std::cout << "\narchive: " << out_path << "\n";
    return 0;
}

int cmd_dims(const std::string& paper_path, const BackendOptions& backend_opts,
             const std::string& mode) {
    PaperDocument paper = load_paper(paper_path);
    // expert mode needs no backend at all; an empty strict script makes any
    // accidental call fail loudly
    const bool backendless =
        backend_opts.script_path.empty() && backend_opts.base_url.empty();
    Gateway gateway(backendless ? std::make_shared<ScriptedBackend>(ReplayScript{})
                                : make_backend(backend_opts));
    DimensionSet set = resolve_dimension_set(dimension_mode_from(mode), paper, gateway);
    for (const auto& d : set.dimensions) {
        std::cout << d.index << ". [" << d.category << "] " << d.question << " ("
                  << to_string(d.source) << ")\n";
    }
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_impact(const std::string& corpus_path, double smoothing, const std::string& out_path,
               const std::string& freq_unit) {
    auto corpus = load_review_corpus(corpus_path);
    FrequencyUnit unit;
    if (freq_unit == "bullet") {
        unit = FrequencyUnit::bullet;
    } else if (freq_unit == "review") {
        unit = FrequencyUnit::review;
    } else {
        throw Error(Errc::usage, "--freq-unit must be 'bullet' or 'review'");
    }
    ImpactTable table = fit_impact_table(corpus, smoothing, nullptr, unit);
    for (const auto& [category, entry] : table.entries) {
        std::cout << category << ": f_meta=" << format_score(entry.f_meta)
                  << " f_ind=" << format_score(entry.f_ind) << " imp=" << format_score(entry.imp)
                  << "\n";
    }
    if (!out_path.empty()) {
        save_impact_table(table, out_path);
        std::cout << "table: " << out_path << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& manifest_path, MatchConfig match, const std::string& out_dir,
             const Gateway* gateway) {
    auto entries = load_eval_manifest(manifest_path);
    EvalOutcome outcome = evaluate_manifest(entries, match, gateway);

    for (const auto& p : outcome.per_paper) {
        std::cout << p.paper_id << ": P=" << format_score(p.report.precision)
                  << " R=" << format_score(p.report.recall) << " F1=" << format_score(p.report.f1)
                  << " Spec=" << format_score(p.report.specificity);
        if (p.report.f1_inv) std::cout << " F1_inv=" << format_score(*p.report.f1_inv);
        if (p.report.pearson_rank_f1) {
            std::cout << " rank-F1-r=" << format_score(*p.report.pearson_rank_f1);
        }
        std::cout << "\n";
        if (!out_dir.empty()) {
            save_metric_report(p.paper_id, p.report,
                               fs::path(out_dir) / (p.paper_id + ".report.json"));
        }
    }
    std::cout << "aggregate: P=" << format_score(outcome.aggregate.precision)
              << " R=" << format_score(outcome.aggregate.recall)
              << " F1=" << format_score(outcome.aggregate.f1)
              << " Spec=" << format_score(outcome.aggregate.specificity);
    if (outcome.aggregate.f1_inv) {
        std::cout << " F1_inv=" << format_score(*outcome.aggregate.f1_inv);
    }
    std::cout << "\n";
    if (!out_dir.empty()) {
        save_metric_report("aggregate", outcome.aggregate, fs::path(out_dir) / "aggregate.json");
    }
    for (const auto& note : outcome.notes) std::cerr << "note: " << note << "\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& archive_paths, const std::string& manifest_path,
                MatchConfig match) {
    std::vector<fs::path> archives(archive_paths.begin(), archive_paths.end());
    std::optional<fs::path> manifest;
    if (!manifest_path.empty()) manifest = manifest_path;

    auto analyses = analyze_archives(archives, manifest, match);
    double retention_sum = 0.0;
    std::size_t retention_n = 0;
    for (const auto& a : analyses) {
        std::cout << a.path << ": proposed=" << a.proposed << " retained=" << a.retained;
        if (a.retention) {
            std::cout << " retention=" << format_score(*a.retention);
            retention_sum += *a.retention;
            ++retention_n;
        }
        if (a.pearson_rank_f1) std::cout << " rank-F1-r=" << format_score(*a.pearson_rank_f1);
        std::cout << "\n";
        for (const auto& note : a.notes) std::cerr << "note: " << a.path << ": " << note << "\n";
    }
    if (retention_n > 0) {
        std::cout << "mean retention: " << format_score(retention_sum / retention_n) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-agent paper weakness review pipeline"};
    app.require_subcommand(1);

    // ---- review ----
    auto* review = app.add_subcommand("review", "run the full pipeline over one paper");
    std::string review_paper;
    std::string review_out = "run.json";
    std::string review_impact;
    std::string review_config;
    std::string review_mode = "generated";
    BackendOptions review_backend;
    RunConfig run_config;
    review->add_option("--paper", review_paper, "paper file (UTF-8 text/markdown)")->required();
    add_backend_options(review, review_backend);
    review->add_option("--mode", review_mode, "dimension mode: generated|expert|union")
        ->capture_default_str();
    review->add_option("--out", review_out, "run archive output path")->capture_default_str();
    review->add_option("--impact-table", review_impact, "fitted impact table file");
    review->add_option("--config", review_config, "JSON config file (flag > config > default)");
    review->add_option("--epsilon", run_config.debate.epsilon, "rebuttal retention threshold")
        ->capture_default_str();
    review->add_option("--max-rounds", run_config.debate.max_rounds, "debate round cap (1..3)")
        ->capture_default_str();
    review->add_option("--valid-weight", run_config.debate.valid_weight,
                       "weight of valid_score in the combined support")
        ->capture_default_str();
    review->add_option("--alpha", run_config.severity.alpha, "impact weight in the severity score")
        ->capture_default_str();
    review->add_option("--beta", run_config.severity.beta, "validity weight in the severity score")
        ->capture_default_str();
    review->add_option("--k", run_config.severity.k, "number of weaknesses to surface")
        ->capture_default_str();
    review->add_option("--unknown-imp", run_config.severity.unknown_category_imp,
                       "normalized impact for categories missing from the table")
        ->capture_default_str();
    review->add_option("--max-dims", run_config.customizer.max_generated,
                       "cap on generated dimensions")
        ->capture_default_str();
    review->add_option("--parallelism", run_config.parallelism,
                       "bound on in-flight gateway requests")
        ->capture_default_str();
    review->add_flag("--no-rebuttal", run_config.no_rebuttal, "ablation: drop the author agent");
    review->add_flag("--no-customizer", run_config.no_customizer,
                     "ablation: use the fixed expert dimensions");
    review->add_flag("--no-prioritizer", run_config.no_prioritizer, "ablation: skip ranking");
    review->add_flag("--no-impact", run_config.no_impact,
                     "ablation: drop the impact term from severity");

    // ---- dims ----
    auto* dims = app.add_subcommand("dims", "print the dimension set for a paper");
    std::string dims_paper;
    std::string dims_mode = "generated";
    BackendOptions dims_backend;
    dims->add_option("--paper", dims_paper, "paper file")->required();
    dims->add_option("--mode", dims_mode, "generated|expert|union")->capture_default_str();
    add_backend_options(dims, dims_backend);

    // ---- impact ----
    auto* impact = app.add_subcommand("impact", "fit a category impact table from a corpus");
    std::string impact_corpus;
    std::string impact_out;
    std::string impact_unit = "bullet";
    double impact_smoothing = 1.0;
    impact->add_option("--corpus", impact_corpus, "labeled review corpus (JSONL)")->required();
    impact->add_option("--smoothing", impact_smoothing, "additive smoothing")
        ->capture_default_str();
    impact->add_option("--freq-unit", impact_unit, "count categories per bullet or per review")
        ->capture_default_str();
    impact->add_option("--out", impact_out, "output table path");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "score generated weaknesses against gold sets");
    std::string eval_manifest;
    std::string eval_out;
    std::string eval_sim = "tfidf_cosine";
    MatchConfig eval_match;
    BackendOptions eval_backend;
    eval->add_option("--manifest", eval_manifest, "evaluation manifest (JSONL)")->required();
    eval->add_option("--theta", eval_match.theta, "similarity acceptance threshold")
        ->capture_default_str();
    eval->add_option("--sim", eval_sim, "tfidf_cosine|embedding_service")->capture_default_str();
    eval->add_option("--out", eval_out, "directory for per-paper report files");
    add_backend_options(eval, eval_backend);  // used by embedding_service only

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "retention and rank statistics over archives");
    std::vector<std::string> analyze_paths;
    std::string analyze_manifest;
    MatchConfig analyze_match;
    analyze->add_option("--archive", analyze_paths, "run archive(s)")->required();
    analyze->add_option("--manifest", analyze_manifest,
                        "manifest supplying gold sets for rank-F1 correlation");
    analyze->add_option("--theta", analyze_match.theta, "similarity acceptance threshold")
        ->capture_default_str();

    try {
        app.parse(argc, argv);

        if (review->parsed()) {
            ConfigFile config;
            config.load(review_config);
            config.apply(review, "mode", review_mode);
            config.apply(review, "out", review_out);
            config.apply(review, "impact-table", review_impact);
            config.apply(review, "script", review_backend.script_path);
            config.apply(review, "base-url", review_backend.base_url);
            config.apply(review, "model", review_backend.model);
            config.apply(review, "api-key-env", review_backend.api_key_env);
            config.apply(review, "epsilon", run_config.debate.epsilon);
            config.apply(review, "max-rounds", run_config.debate.max_rounds);
            config.apply(review, "valid-weight", run_config.debate.valid_weight);
            config.apply(review, "alpha", run_config.severity.alpha);
            config.apply(review, "beta", run_config.severity.beta);
            config.apply(review, "k", run_config.severity.k);
            config.apply(review, "unknown-imp", run_config.severity.unknown_category_imp);
            config.apply(review, "max-dims", run_config.customizer.max_generated);
            config.apply(review, "parallelism", run_config.parallelism);
            config.apply(review, "no-rebuttal", run_config.no_rebuttal);
            config.apply(review, "no-customizer", run_config.no_customizer);
            config.apply(review, "no-prioritizer", run_config.no_prioritizer);
            config.apply(review, "no-impact", run_config.no_impact);
            run_config.mode = dimension_mode_from(review_mode);
            return cmd_review(review_paper, review_backend, review_out, review_impact, run_config,
                              config.raw());
        }
        if (dims->parsed()) return cmd_dims(dims_paper, dims_backend, dims_mode);
        if (impact->parsed()) {
            return cmd_impact(impact_corpus, impact_smoothing, impact_out, impact_unit);
        }
        if (eval->parsed()) {
            eval_match.sim_backend = sim_backend_from(eval_sim);
            std::optional<Gateway> gateway;
            if (eval_match.sim_backend == SimBackend::embedding_service) {
                gateway.emplace(make_backend(eval_backend));
            }
            return cmd_eval(eval_manifest, eval_match, eval_out,
                            gateway ? &*gateway : nullptr);
        }
        if (analyze->parsed()) return cmd_analyze(analyze_paths, analyze_manifest, analyze_match);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return errc_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
