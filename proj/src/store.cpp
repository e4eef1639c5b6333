#include "critiq/store.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw Error(Errc::io_error, "read failed for " + path.string());
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Papers

namespace {

// '#' markdown headings, or numbered headings like "2.1 Results" / "3. Setup"
// whose title starts with an uppercase letter.
std::optional<std::string> heading_label(const std::string& line) {
    std::string t = trim(line);
    if (t.empty()) return std::nullopt;
    if (t[0] == '#') {
        size_t i = 0;
        while (i < t.size() && t[i] == '#') ++i;
        if (i > 6 || i >= t.size() || t[i] != ' ') return std::nullopt;
        std::string label = trim(t.substr(i));
        if (label.empty()) return std::nullopt;
        return label;
    }
    if (std::isdigit(static_cast<unsigned char>(t[0]))) {
        size_t i = 0;
        while (i < t.size() &&
               (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.')) {
            ++i;
        }
        if (i == 0 || i >= t.size() || t[i] != ' ') return std::nullopt;
        std::string rest = trim(t.substr(i));
        if (rest.empty() || t.size() > 100) return std::nullopt;
        if (!std::isupper(static_cast<unsigned char>(rest[0]))) return std::nullopt;
        return t;  // keep the number as part of the label
    }
    return std::nullopt;
}

std::string unique_label(std::set<std::string>& used, std::string label) {
    if (used.insert(label).second) return label;
    for (int i = 2;; ++i) {
        std::string candidate = label + " (" + std::to_string(i) + ")";
        if (used.insert(candidate).second) return candidate;
    }
}

}  // namespace

PaperDocument parse_paper(const std::string& text, const std::string& id) {
    if (trim(text).empty()) throw Error(Errc::empty_document, "paper '" + id + "' is empty");
    if (!is_valid_utf8(text)) {
        throw Error(Errc::encoding_error, "paper '" + id + "' is not valid UTF-8");
    }

    PaperDocument doc;
    doc.id = id;

    std::set<std::string> used_labels;
    std::string current_label;
    std::string current_body;
    bool any_heading = false;

    auto flush = [&]() {
        // no preamble at all (file opens with a heading) -> no frontmatter;
        // a whitespace-only preamble still counts, so bodies stay exact
        if (current_label.empty() && current_body.empty()) return;
        std::string label = current_label.empty() ? std::string("frontmatter") : current_label;
        doc.sections.push_back({unique_label(used_labels, label), current_body});
        current_body.clear();
    };

    std::istringstream stream(text);
    std::string line;
    // getline drops the trailing '\n'; reattach it to keep bodies exact.
    while (std::getline(stream, line)) {
        const bool had_newline = !stream.eof();
        if (auto label = heading_label(line)) {
            flush();
            current_label = *label;
            if (!any_heading) doc.title = *label;  // first heading doubles as the title
            any_heading = true;
            continue;
        }
        current_body += line;
        if (had_newline) current_body += '\n';
    }
    flush();

    if (!any_heading) {
        // No delimiters at all: the whole file is one section.
        std::string body;
        for (const auto& s : doc.sections) body += s.body;
        doc.sections = {{"body", body}};
    }
    if (doc.title.empty()) doc.title = id;
    if (doc.sections.empty()) throw Error(Errc::empty_document, "paper '" + id + "' is empty");
    return doc;
}

PaperDocument load_paper(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(Errc::io_error, "no such file: " + path.string());
    }
    return parse_paper(read_text_file(path), path.stem().string());
}

// ---------------------------------------------------------------------------
// Review corpora

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw Error(Errc::malformed_record,
                    "line " + std::to_string(line_no) + ": not a JSON object");
    }
    return parsed;
}

}  // namespace

std::vector<ReviewCorpusRecord> load_review_corpus(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    std::vector<ReviewCorpusRecord> records;
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json parsed = parse_line(line, line_no);
        try {
            ReviewCorpusRecord record = parsed.get<ReviewCorpusRecord>();
            if (record.bullets.empty()) {
                throw Error(Errc::malformed_record,
                            "line " + std::to_string(line_no) + ": record has no bullets");
            }
            records.push_back(std::move(record));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(Errc::malformed_record,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::string encode_review_corpus(const std::vector<ReviewCorpusRecord>& records) {
    std::string out;
    for (const auto& record : records) {
        json j;
        to_json(j, record);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_review_corpus(const std::vector<ReviewCorpusRecord>& records,
                        const std::filesystem::path& path) {
    write_text_file(path, encode_review_corpus(records));
}

// ---------------------------------------------------------------------------
// Impact tables

void save_impact_table(const ImpactTable& table, const std::filesystem::path& path) {
    json j{{"schema_version", kSchemaVersion}, {"kind", "impact_table"}};
    j["table"] = table;
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

json load_versioned_object(const std::filesystem::path& path, const char* expected_kind) {
    json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::malformed_record, path.string() + ": not a JSON object");
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw Error(Errc::schema_mismatch, path.string() + ": missing schema_version");
    }
    const int version = j["schema_version"].get<int>();
    if (version != kSchemaVersion) {
        throw Error(Errc::schema_mismatch, path.string() + ": schema_version " +
                                               std::to_string(version) + ", expected " +
                                               std::to_string(kSchemaVersion));
    }
    if (j.value("kind", "") != expected_kind) {
        throw Error(Errc::schema_mismatch,
                    path.string() + ": expected kind '" + expected_kind + "'");
    }
    return j;
}

}  // namespace

ImpactTable load_impact_table(const std::filesystem::path& path) {
    json j = load_versioned_object(path, "impact_table");
    return j.at("table").get<ImpactTable>();
}

// ---------------------------------------------------------------------------
// Replay scripts

ReplayScript load_replay_script(const std::filesystem::path& path) {
    json j = load_versioned_object(path, "replay_script");
    ReplayScript script;
    script.strict = j.value("strict", true);
    if (j.contains("defaults")) {
        for (const auto& [role, response] : j["defaults"].items()) {
            script.defaults[role_kind_from(role)] = response.get<std::string>();
        }
    }
    if (j.contains("embeddings")) {
        for (const auto& [text, vec] : j["embeddings"].items()) {
            script.embeddings[text] = vec.get<std::vector<double>>();
        }
    }
    if (!j.contains("entries") || !j["entries"].is_array()) {
        throw Error(Errc::malformed_record, path.string() + ": missing entries array");
    }
    for (const auto& item : j["entries"]) {
        ScriptEntry entry;
        if (item.contains("role")) entry.role = role_kind_from(item["role"].get<std::string>());
        if (item.contains("dimension_index")) {
            entry.dimension_index = item["dimension_index"].get<int>();
        }
        if (item.contains("template")) entry.template_id = item["template"].get<std::string>();
        if (item.contains("fingerprint")) entry.fingerprint = item["fingerprint"].get<std::string>();
        if (item.contains("match")) {
            for (const auto& [name, value] : item["match"].items()) {
                entry.match_vars[name] =
                    value.is_string() ? value.get<std::string>() : value.dump();
            }
        }
        if (item.contains("error")) entry.error = item["error"].get<std::string>();
        entry.response = item.value("response", "");
        entry.times = item.value("times", -1);
        script.entries.push_back(std::move(entry));
    }
    return script;
}

void save_replay_script(const ReplayScript& script, const std::filesystem::path& path) {
    json entries = json::array();
    for (const auto& entry : script.entries) {
        json item;
        if (entry.role) item["role"] = to_string(*entry.role);
        if (entry.dimension_index) item["dimension_index"] = *entry.dimension_index;
        if (entry.template_id) item["template"] = *entry.template_id;
        if (entry.fingerprint) item["fingerprint"] = *entry.fingerprint;
        if (!entry.match_vars.empty()) item["match"] = entry.match_vars;
        if (entry.error) item["error"] = *entry.error;
        item["response"] = entry.response;
        if (entry.times >= 0) item["times"] = entry.times;
        entries.push_back(std::move(item));
    }
    json j{{"schema_version", kSchemaVersion}, {"kind", "replay_script"},
           {"strict", script.strict}, {"entries", std::move(entries)}};
    if (!script.defaults.empty()) {
        json defaults;
        for (const auto& [role, response] : script.defaults) defaults[to_string(role)] = response;
        j["defaults"] = std::move(defaults);
    }
    if (!script.embeddings.empty()) j["embeddings"] = script.embeddings;
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Run archives

void to_json(json& j, const PairMatch& v) {
    j = json{{"gen_index", v.gen_index}, {"gold_index", v.gold_index}, {"sim", v.sim}};
}
void from_json(const json& j, PairMatch& v) {
    j.at("gen_index").get_to(v.gen_index);
    j.at("gold_index").get_to(v.gold_index);
    j.at("sim").get_to(v.sim);
}

void to_json(json& j, const MetricReport& v) {
    j = json{{"precision", v.precision},
             {"recall", v.recall},
             {"f1", v.f1},
             {"specificity", v.specificity},
             {"f1_invalid", v.f1_invalid ? json(*v.f1_invalid) : json(nullptr)},
             {"f1_inv", v.f1_inv ? json(*v.f1_inv) : json(nullptr)},
             {"pearson_rank_f1", v.pearson_rank_f1 ? json(*v.pearson_rank_f1) : json(nullptr)},
             {"pair_matches", v.pair_matches}};
}
void from_json(const json& j, MetricReport& v) {
    j.at("precision").get_to(v.precision);
    j.at("recall").get_to(v.recall);
    j.at("f1").get_to(v.f1);
    j.at("specificity").get_to(v.specificity);
    auto opt = [&](const char* field) -> std::optional<double> {
        if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
        return j.at(field).get<double>();
    };
    v.f1_invalid = opt("f1_invalid");
    v.f1_inv = opt("f1_inv");
    v.pearson_rank_f1 = opt("pearson_rank_f1");
    j.at("pair_matches").get_to(v.pair_matches);
}

std::string encode_run(const RunArchive& archive) {
    json reports = json::array();
    for (const auto& r : archive.metric_reports) {
        json item{{"paper_id", r.paper_id}};
        item["report"] = r.report;
        reports.push_back(std::move(item));
    }
    json j{{"schema_version", archive.schema_version},
           {"kind", "run_archive"},
           {"run", archive.run},
           {"metric_reports", std::move(reports)}};
    return j.dump(2) + "\n";
}

void persist_archive(const RunArchive& archive, const std::filesystem::path& path) {
    write_text_file(path, encode_run(archive));
}

void persist_run(const ReviewRun& run, const std::filesystem::path& path) {
    RunArchive archive;
    archive.run = run;
    persist_archive(archive, path);
}

RunArchive load_archive(const std::filesystem::path& path) {
    json j = load_versioned_object(path, "run_archive");
    RunArchive archive;
    archive.schema_version = j["schema_version"].get<int>();
    archive.run = j.at("run").get<ReviewRun>();
    if (j.contains("metric_reports")) {
        for (const auto& item : j["metric_reports"]) {
            PaperMetricReport r;
            r.paper_id = item.value("paper_id", "");
            r.report = item.at("report").get<MetricReport>();
            archive.metric_reports.push_back(std::move(r));
        }
    }
    return archive;
}

ReviewRun load_run(const std::filesystem::path& path) {
    return load_archive(path).run;
}

void save_metric_report(const std::string& paper_id, const MetricReport& report,
                        const std::filesystem::path& path) {
    json j{{"schema_version", kSchemaVersion}, {"kind", "metric_report"}, {"paper_id", paper_id}};
    j["report"] = report;
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Evaluation manifests

std::vector<EvalManifestEntry> load_eval_manifest(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path candidate(p);
        return candidate.is_absolute() ? candidate : base / candidate;
    };

    std::vector<EvalManifestEntry> entries;
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json parsed = parse_line(line, line_no);
        try {
            EvalManifestEntry entry;
            entry.paper_id = parsed.at("paper_id").get<std::string>();
            entry.gen = resolve(parsed.at("gen").get<std::string>());
            entry.gold_valid = resolve(parsed.at("gold_valid").get<std::string>());
            if (parsed.contains("gold_invalid") && !parsed["gold_invalid"].is_null()) {
                entry.gold_invalid = resolve(parsed["gold_invalid"].get<std::string>());
            }
            entries.push_back(std::move(entry));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(Errc::malformed_record,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (entries.empty()) {
        throw Error(Errc::empty_corpus, path.string() + ": manifest lists no papers");
    }
    return entries;
}

WeaknessSet load_weakness_texts(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    WeaknessSet out;

    // A run archive is a single JSON object with our kind marker.
    json whole = json::parse(content, nullptr, false);
    if (!whole.is_discarded() && whole.is_object() && whole.value("kind", "") == "run_archive") {
        RunArchive archive = load_archive(path);
        bool all_scored = !archive.run.retained.empty();
        for (const auto& sw : archive.run.retained) {
            out.texts.push_back(sw.weakness.text);
            if (sw.severity) {
                out.severities.push_back(*sw.severity);
            } else {
                all_scored = false;
            }
        }
        if (!all_scored) out.severities.clear();
        return out;
    }

    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json parsed = parse_line(line, line_no);
        if (!parsed.contains("text") || !parsed["text"].is_string()) {
            throw Error(Errc::malformed_record,
                        "line " + std::to_string(line_no) + ": missing string 'text'");
        }
        out.texts.push_back(parsed["text"].get<std::string>());
    }
    return out;
}

}  // namespace critiq
