#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"
#include "critiq/metrics.hpp"

namespace critiq {

inline constexpr int kSchemaVersion = 1;

// UTF-8 text/markdown; '#' headings and numbered "1. Introduction" lines
// delimit sections, preamble becomes "frontmatter", a heading-free file is a
// single "body" section.
PaperDocument load_paper(const std::filesystem::path& path);
PaperDocument parse_paper(const std::string& text, const std::string& id);

// Newline-delimited records; the whole load fails on the first bad line.
std::vector<ReviewCorpusRecord> load_review_corpus(const std::filesystem::path& path);
std::string encode_review_corpus(const std::vector<ReviewCorpusRecord>& records);
void save_review_corpus(const std::vector<ReviewCorpusRecord>& records,
                        const std::filesystem::path& path);

void save_impact_table(const ImpactTable& table, const std::filesystem::path& path);
ImpactTable load_impact_table(const std::filesystem::path& path);

ReplayScript load_replay_script(const std::filesystem::path& path);
void save_replay_script(const ReplayScript& script, const std::filesystem::path& path);

struct PaperMetricReport {
    std::string paper_id;
    MetricReport report;
};

struct RunArchive {
    int schema_version = kSchemaVersion;
    ReviewRun run;
    std::vector<PaperMetricReport> metric_reports;
};

// Canonical serialization: sorted keys, 2-space indent, trailing newline.
// Re-encoding a loaded archive is byte-identical.
std::string encode_run(const RunArchive& archive);
void persist_run(const ReviewRun& run, const std::filesystem::path& path);
void persist_archive(const RunArchive& archive, const std::filesystem::path& path);
RunArchive load_archive(const std::filesystem::path& path);
ReviewRun load_run(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const PairMatch& v);
void from_json(const nlohmann::json& j, PairMatch& v);
void to_json(nlohmann::json& j, const MetricReport& v);
void from_json(const nlohmann::json& j, MetricReport& v);

void save_metric_report(const std::string& paper_id, const MetricReport& report,
                        const std::filesystem::path& path);

struct EvalManifestEntry {
    std::string paper_id;
    std::filesystem::path gen;
    std::filesystem::path gold_valid;
    std::optional<std::filesystem::path> gold_invalid;
};

// One JSON object per line: {"paper_id", "gen", "gold_valid", "gold_invalid"?}.
// Relative paths resolve against the manifest's directory.
std::vector<EvalManifestEntry> load_eval_manifest(const std::filesystem::path& path);

struct WeaknessSet {
    std::vector<std::string> texts;
    // Present when the source is a run archive with ranked severities.
    std::vector<double> severities;
};

// Either a JSONL of {"text": ...} lines or a run archive (its ranked
// retained list is used).
WeaknessSet load_weakness_texts(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace critiq
