#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"

namespace critiq::testutil {

// Self-deleting temporary directory for store/CLI tests.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::string templ = (base / "critiq-test-XXXXXX").string();
        if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string fenced(const nlohmann::json& payload) {
    return "```json\n" + payload.dump(2) + "\n```";
}

inline std::string chatty(const nlohmann::json& payload) {
    return "Sure, here is my reply.\n" + fenced(payload) + "\nLet me know if anything is unclear.";
}

inline std::string dims_response(const std::vector<std::pair<std::string, std::string>>& dims) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [category, question] : dims) {
        arr.push_back({{"category", category}, {"question", question}});
    }
    return fenced(arr);
}

inline std::string propose_response(
    const std::vector<std::pair<std::string, std::string>>& text_and_location) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [text, location] : text_and_location) {
        arr.push_back({{"text", text}, {"location", location}});
    }
    return fenced(arr);
}

inline std::string assess_response(const std::string& valid, const std::string& evid,
                                   double valid_score = -1.0, double evid_score = -1.0,
                                   const std::string& justification = "scripted") {
    nlohmann::json obj{{"valid", valid}, {"evid", evid}, {"justification", justification}};
    if (valid_score >= 0.0) obj["valid_score"] = valid_score;
    if (evid_score >= 0.0) obj["evid_score"] = evid_score;
    return fenced(obj);
}

inline std::string react_response(const std::string& action,
                                  const std::string& argument = "scripted argument",
                                  const std::string& revised = "") {
    nlohmann::json obj{{"action", action}, {"argument", argument}};
    if (!revised.empty()) obj["revised_text"] = revised;
    return fenced(obj);
}

inline ScriptEntry author_entry(const std::string& weakness_id, const std::string& response) {
    ScriptEntry entry;
    entry.role = RoleKind::author;
    entry.template_id = "author_assess";
    entry.match_vars = {{"weakness_id", weakness_id}};
    entry.response = response;
    return entry;
}

inline ScriptEntry reviewer_entry(const std::string& weakness_id, const std::string& response) {
    ScriptEntry entry;
    entry.role = RoleKind::reviewer;
    entry.template_id = "reviewer_react";
    entry.match_vars = {{"weakness_id", weakness_id}};
    entry.response = response;
    return entry;
}

inline std::string case_study_paper_markdown() {
    return "# A Study of Sequence Encoders\n"
           "\n"
           "This submission evaluates pre-trained sequence encoders on transfer tasks.\n"
           "\n"
           "## Abstract\n"
           "We probe what sequence encoders learn and how training objectives shape "
           "downstream transfer.\n"
           "\n"
           "## Introduction\n"
           "Transfer learning from large pre-trained encoders is now standard practice, yet "
           "the choice of pre-training objective remains poorly understood.\n"
           "\n"
           "## Method\n"
           "We compare masked reconstruction against contrastive objectives under a shared "
           "encoder architecture and a fixed compute budget.\n"
           "\n"
           "## Experiments\n"
           "We evaluate on twelve transfer datasets and report mean accuracy over three "
           "seeds, with ablations over objective mixtures.\n"
           "\n"
           "## Limitations\n"
           "Our study covers a single architecture family and English-language corpora "
           "only.\n";
}

// Case-study replay: 12 generated dimensions, 3 weaknesses each, 14 of the 36
// surviving the debate. Weakness w00-01 is the 0.34/0.30 one that lands on a
// combined score of 0.32 and is filtered.
ReplayScript case_study_script();

// Tiny 3-dimension fixture for ablation/determinism tests: 5 proposed, 3
// retained (1.0, 0.5, 0.55), 2 filtered (0.32, 0.0).
ReplayScript small_pipeline_script();

PaperDocument case_study_paper();

}  // namespace critiq::testutil
