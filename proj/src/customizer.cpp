#include "critiq/customizer.hpp"

#include <set>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

namespace {

struct ExpertEntry {
    const char* category;
    const char* question;
};

const ExpertEntry kExpertDimensions[] = {
    {"Importance", "Is the problem studied in this work important?"},
    {"Importance", "Has the authors fully show the problem importance and is that convincing?"},
    {"Related Work", "Any missing related works that need to be cited and discussed?"},
    {"Related Work", "Has it indicated the novelties of this work compared to those prior works?"},
    {"Clarity",
     "Do those figures, tables, etc., well support the authors' claims and align with the textual "
     "description of the authors?"},
    {"Clarity", "Any conflicting descriptions in this paper?"},
    {"Method-Novelty",
     "If the author claimed the approach is a newly proposed one, is the proposed approach novel?"},
    {"Method-Clarity", "Any unclear or confusing part in the approach description?"},
    {"Method-Limitation",
     "If the author claimed the approach is a newly proposed one, any limitations exist in the "
     "proposed approach but the authors didn't discuss it?"},
    {"Method-Validity",
     "Any methodological flaws or inconsistencies in the proposed approach that could invalidate "
     "the results?"},
    {"Dataset-Necessity",
     "If the authors present a newly constructed dataset, does the new dataset have interesting "
     "and convincing necessities to be constructed for the target problem?"},
    {"Construction-Process",
     "If the authors present a newly constructed dataset, is the construction process clear and "
     "professional?"},
    {"Construction-Process",
     "If the authors present a newly constructed dataset, anything should be paid special "
     "attention in the construction process and have the authors deal with them well?"},
    {"Dataset-Representative",
     "Are those datasets representative enough for this target problem? If not, any prior "
     "datasets should be tested on?"},
    {"Exper-completeness",
     "To demonstrate the effectiveness of this new approach, consider what experiments are "
     "necessary and whether the authors have conducted all the required experiments thoroughly."},
    {"Baseline-representative",
     "Are those baselines representative enough for this target problem? If not, any missing "
     "baselines should be added, compared and discussed?"},
    {"In-depth analysis",
     "Have the experiment analyses provide enough insights or explanation or just some "
     "superficial phenomena description?"},
    {"State-of-the-art",
     "If the author claimed the approach is a newly proposed one, does the proposed approach show "
     "better performance than prior state-of-the-art?"},
    {"Eval-metrics",
     "Are those evaluation metrics for those evaluation tasks appropriate, or any cases cannot be "
     "well captured by the existing evaluation metrics?"},
    {"Writing",
     "What severe writing issues are making this paper difficult to understand, and what remedies "
     "would you suggest?"},
};

// Ensure a generated question reads as a question.
std::string to_question_form(std::string text) {
    text = trim(text);
    if (!text.empty() && text.back() != '?') text.push_back('?');
    return text;
}

}  // namespace

DimensionSet expert_dimensions() {
    DimensionSet set;
    set.source_mode = DimensionMode::expert;
    int index = 0;
    for (const auto& entry : kExpertDimensions) {
        set.dimensions.push_back(
            {index++, entry.category, entry.question, DimensionSource::expert});
    }
    return set;
}

DimensionSet generate_dimensions(const PaperDocument& paper, const Gateway& gateway,
                                 const CustomizerConfig& config) {
    if (paper.raw_text().empty()) {
        throw Error(Errc::empty_document, "cannot customize an empty paper");
    }

    AgentRequest req;
    req.role = AgentRole::customizer();
    req.template_id = "customizer_dims";
    req.variables = {{"paper_title", paper.title},
                     {"paper_text", paper.raw_text()},
                     {"paper_id", paper.id}};

    nlohmann::json payload;
    std::string backend_id;
    try {
        AgentResponse res = gateway.complete(req);
        payload = res.parsed;
    } catch (const Error& e) {
        // A reply with no parseable question block is an empty generation at
        // this boundary; other gateway errors propagate untouched.
        if (e.code() == Errc::parse_failure) {
            throw Error(Errc::empty_generation, "customizer returned no parseable dimensions");
        }
        throw;
    }

    DimensionSet set;
    set.source_mode = DimensionMode::generated;
    set.paper_id = paper.id;

    std::set<std::string> seen;
    for (const auto& item : payload) {
        std::string question = to_question_form(item.at("question").get<std::string>());
        std::string key = normalize_question(question);
        if (key.empty() || !seen.insert(key).second) continue;
        std::string category = item.value("category", "");
        if (trim(category).empty()) {
            category = "Uncategorized";
            set.warnings.push_back("generated dimension without category: \"" + question + "\"");
        }
        set.dimensions.push_back({static_cast<int>(set.dimensions.size()), trim(category),
                                  question, DimensionSource::generated});
        if (static_cast<int>(set.dimensions.size()) >= config.max_generated) break;
    }
    if (set.dimensions.empty()) {
        throw Error(Errc::empty_generation, "customizer returned no parseable dimensions");
    }
    return set;
}

DimensionSet resolve_dimension_set(DimensionMode mode, const PaperDocument& paper,
                                   const Gateway& gateway, const CustomizerConfig& config) {
    switch (mode) {
        case DimensionMode::expert: {
            DimensionSet set = expert_dimensions();
            set.paper_id = paper.id;
            return set;
        }
        case DimensionMode::generated: {
            return generate_dimensions(paper, gateway, config);
        }
        case DimensionMode::union_both: {
            DimensionSet merged = expert_dimensions();
            merged.source_mode = DimensionMode::union_both;
            merged.paper_id = paper.id;
            std::set<std::string> seen;
            for (const auto& d : merged.dimensions) seen.insert(normalize_question(d.question));
            DimensionSet generated = generate_dimensions(paper, gateway, config);
            for (const auto& d : generated.dimensions) {
                if (!seen.insert(normalize_question(d.question)).second) continue;
                merged.dimensions.push_back({static_cast<int>(merged.dimensions.size()),
                                             d.category, d.question, DimensionSource::generated});
            }
            for (const auto& w : generated.warnings) merged.warnings.push_back(w);
            return merged;
        }
    }
    throw Error(Errc::invalid_config, "unknown dimension mode");
}

}  // namespace critiq
