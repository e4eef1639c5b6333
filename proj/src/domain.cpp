#include "critiq/domain.hpp"

#include <algorithm>
#include <set>

#include "critiq/error.hpp"

namespace critiq {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::usage: return "usage";
        case Errc::io_error: return "io_error";
        case Errc::empty_document: return "empty_document";
        case Errc::encoding_error: return "encoding_error";
        case Errc::malformed_record: return "malformed_record";
        case Errc::unknown_segment: return "unknown_segment";
        case Errc::schema_mismatch: return "schema_mismatch";
        case Errc::empty_corpus: return "empty_corpus";
        case Errc::missing_labels: return "missing_labels";
        case Errc::undefined_rate: return "undefined_rate";
        case Errc::degenerate_series: return "degenerate_series";
        case Errc::insufficient_population: return "insufficient_population";
        case Errc::zero_denominator: return "zero_denominator";
        case Errc::invalid_config: return "invalid_config";
        case Errc::transport_failure: return "transport_failure";
        case Errc::parse_failure: return "parse_failure";
        case Errc::script_miss: return "script_miss";
        case Errc::missing_variable: return "missing_variable";
        case Errc::unknown_template: return "unknown_template";
        case Errc::empty_generation: return "empty_generation";
        case Errc::unsupported_operation: return "unsupported_operation";
    }
    return "unknown_error";
}

int errc_exit_code(Errc code) noexcept {
    switch (code) {
        case Errc::usage:
        case Errc::invalid_config:
            return 1;
        case Errc::transport_failure:
        case Errc::parse_failure:
        case Errc::script_miss:
        case Errc::missing_variable:
        case Errc::unknown_template:
        case Errc::empty_generation:
        case Errc::unsupported_operation:
            return 3;
        default:
            return 2;
    }
}

// ---------------------------------------------------------------------------

std::string PaperDocument::raw_text() const {
    std::string out;
    for (const auto& s : sections) out += s.body;
    return out;
}

bool PaperDocument::has_section(std::string_view label) const {
    return std::any_of(sections.begin(), sections.end(),
                       [&](const PaperSection& s) { return s.label == label; });
}

std::vector<std::string> DimensionSet::category_vocabulary() const {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const auto& d : dimensions) {
        if (seen.insert(d.category).second) out.push_back(d.category);
    }
    return out;
}

double label_to_score(ValidLabel label) {
    switch (label) {
        case ValidLabel::fully_valid: return 1.0;
        case ValidLabel::partially_valid: return 0.5;
        case ValidLabel::invalid: return 0.0;
    }
    return 0.0;
}

double label_to_score(EvidLabel label) {
    switch (label) {
        case EvidLabel::substantial: return 1.0;
        case EvidLabel::moderate: return 0.5;
        case EvidLabel::weak_absent: return 0.0;
    }
    return 0.0;
}

double combined_support(const ValidityAssessment& a) {
    return combined_support(a, 0.5);
}

double combined_support(const ValidityAssessment& a, double valid_weight) {
    return valid_weight * a.valid_score + (1.0 - valid_weight) * a.evid_score;
}

// ---------------------------------------------------------------------------
// Enum names

namespace {

[[noreturn]] void bad_enum(const char* what, std::string_view value) {
    throw Error(Errc::schema_mismatch,
                std::string("unknown ") + what + " value '" + std::string(value) + "'");
}

}  // namespace

std::string to_string(DimensionSource v) {
    return v == DimensionSource::generated ? "generated" : "expert";
}
DimensionSource dimension_source_from(std::string_view s) {
    if (s == "generated") return DimensionSource::generated;
    if (s == "expert") return DimensionSource::expert;
    bad_enum("dimension source", s);
}

std::string to_string(DimensionMode v) {
    switch (v) {
        case DimensionMode::generated: return "generated";
        case DimensionMode::expert: return "expert";
        case DimensionMode::union_both: return "union";
    }
    return "generated";
}
DimensionMode dimension_mode_from(std::string_view s) {
    if (s == "generated") return DimensionMode::generated;
    if (s == "expert") return DimensionMode::expert;
    if (s == "union") return DimensionMode::union_both;
    bad_enum("dimension mode", s);
}

std::string to_string(WeaknessState v) {
    switch (v) {
        case WeaknessState::proposed: return "proposed";
        case WeaknessState::debated: return "debated";
        case WeaknessState::retained: return "retained";
        case WeaknessState::filtered: return "filtered";
    }
    return "proposed";
}
WeaknessState weakness_state_from(std::string_view s) {
    if (s == "proposed") return WeaknessState::proposed;
    if (s == "debated") return WeaknessState::debated;
    if (s == "retained") return WeaknessState::retained;
    if (s == "filtered") return WeaknessState::filtered;
    bad_enum("weakness state", s);
}

std::string to_string(ValidLabel v) {
    switch (v) {
        case ValidLabel::fully_valid: return "fully_valid";
        case ValidLabel::partially_valid: return "partially_valid";
        case ValidLabel::invalid: return "invalid";
    }
    return "invalid";
}
ValidLabel valid_label_from(std::string_view s) {
    if (s == "fully_valid") return ValidLabel::fully_valid;
    if (s == "partially_valid") return ValidLabel::partially_valid;
    if (s == "invalid") return ValidLabel::invalid;
    bad_enum("validity label", s);
}

std::string to_string(EvidLabel v) {
    switch (v) {
        case EvidLabel::substantial: return "substantial";
        case EvidLabel::moderate: return "moderate";
        case EvidLabel::weak_absent: return "weak_absent";
    }
    return "weak_absent";
}
EvidLabel evid_label_from(std::string_view s) {
    if (s == "substantial") return EvidLabel::substantial;
    if (s == "moderate") return EvidLabel::moderate;
    if (s == "weak_absent") return EvidLabel::weak_absent;
    bad_enum("evidence label", s);
}

std::string to_string(ReviewerAction v) {
    switch (v) {
        case ReviewerAction::counter: return "counter";
        case ReviewerAction::agree: return "agree";
        case ReviewerAction::concede: return "concede";
    }
    return "counter";
}
ReviewerAction reviewer_action_from(std::string_view s) {
    if (s == "counter") return ReviewerAction::counter;
    if (s == "agree") return ReviewerAction::agree;
    if (s == "concede") return ReviewerAction::concede;
    bad_enum("reviewer action", s);
}

std::string to_string(Termination v) {
    switch (v) {
        case Termination::author_prevails: return "author_prevails";
        case Termination::agreed_partial: return "agreed_partial";
        case Termination::round_cap: return "round_cap";
    }
    return "round_cap";
}
Termination termination_from(std::string_view s) {
    if (s == "author_prevails") return Termination::author_prevails;
    if (s == "agreed_partial") return Termination::agreed_partial;
    if (s == "round_cap") return Termination::round_cap;
    bad_enum("termination", s);
}

std::string to_string(Decision v) {
    return v == Decision::retained ? "retained" : "filtered";
}
Decision decision_from(std::string_view s) {
    if (s == "retained") return Decision::retained;
    if (s == "filtered") return Decision::filtered;
    bad_enum("decision", s);
}

std::string to_string(Segment v) {
    return v == Segment::individual ? "individual" : "meta";
}
Segment segment_from(std::string_view s) {
    if (s == "individual") return Segment::individual;
    if (s == "meta") return Segment::meta;
    throw Error(Errc::unknown_segment, "unknown segment '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// JSON conversions

using nlohmann::json;

void to_json(json& j, const PaperSection& v) {
    j = json{{"label", v.label}, {"body", v.body}};
}
void from_json(const json& j, PaperSection& v) {
    j.at("label").get_to(v.label);
    j.at("body").get_to(v.body);
}

void to_json(json& j, const PaperDocument& v) {
    j = json{{"id", v.id}, {"title", v.title}, {"sections", v.sections}};
}
void from_json(const json& j, PaperDocument& v) {
    j.at("id").get_to(v.id);
    j.at("title").get_to(v.title);
    j.at("sections").get_to(v.sections);
}

void to_json(json& j, const ReviewDimension& v) {
    j = json{{"index", v.index},
             {"category", v.category},
             {"question", v.question},
             {"source", to_string(v.source)}};
}
void from_json(const json& j, ReviewDimension& v) {
    j.at("index").get_to(v.index);
    j.at("category").get_to(v.category);
    j.at("question").get_to(v.question);
    v.source = dimension_source_from(j.at("source").get<std::string>());
}

void to_json(json& j, const DimensionSet& v) {
    j = json{{"dimensions", v.dimensions},
             {"source_mode", to_string(v.source_mode)},
             {"paper_id", v.paper_id},
             {"warnings", v.warnings}};
}
void from_json(const json& j, DimensionSet& v) {
    j.at("dimensions").get_to(v.dimensions);
    v.source_mode = dimension_mode_from(j.at("source_mode").get<std::string>());
    j.at("paper_id").get_to(v.paper_id);
    if (j.contains("warnings")) j.at("warnings").get_to(v.warnings);
}

void to_json(json& j, const Weakness& v) {
    j = json{{"id", v.id},
             {"text", v.text},
             {"category", v.category},
             {"location", v.location},
             {"dimension_index", v.dimension_index},
             {"state", to_string(v.state)}};
}
void from_json(const json& j, Weakness& v) {
    j.at("id").get_to(v.id);
    j.at("text").get_to(v.text);
    j.at("category").get_to(v.category);
    j.at("location").get_to(v.location);
    j.at("dimension_index").get_to(v.dimension_index);
    v.state = weakness_state_from(j.at("state").get<std::string>());
}

void to_json(json& j, const ValidityAssessment& v) {
    j = json{{"valid_label", to_string(v.valid_label)},
             {"evid_label", to_string(v.evid_label)},
             {"valid_score", v.valid_score},
             {"evid_score", v.evid_score},
             {"justification", v.justification}};
}
void from_json(const json& j, ValidityAssessment& v) {
    v.valid_label = valid_label_from(j.at("valid_label").get<std::string>());
    v.evid_label = evid_label_from(j.at("evid_label").get<std::string>());
    j.at("valid_score").get_to(v.valid_score);
    j.at("evid_score").get_to(v.evid_score);
    j.at("justification").get_to(v.justification);
}

void to_json(json& j, const DebateRound& v) {
    j = json{{"reviewer_action", to_string(v.reviewer_action)},
             {"reviewer_turn", v.reviewer_turn},
             {"assessment", v.assessment}};
    if (v.revised_text) j["revised_text"] = *v.revised_text;
}
void from_json(const json& j, DebateRound& v) {
    v.reviewer_action = reviewer_action_from(j.at("reviewer_action").get<std::string>());
    j.at("reviewer_turn").get_to(v.reviewer_turn);
    j.at("assessment").get_to(v.assessment);
    if (j.contains("revised_text")) v.revised_text = j.at("revised_text").get<std::string>();
}

void to_json(json& j, const RebuttalTranscript& v) {
    j = json{{"weakness_id", v.weakness_id},
             {"rounds", v.rounds},
             {"termination", to_string(v.termination)},
             {"final_combined", v.final_combined},
             {"decision", to_string(v.decision)}};
    if (!v.error.empty()) j["error"] = v.error;
}
void from_json(const json& j, RebuttalTranscript& v) {
    j.at("weakness_id").get_to(v.weakness_id);
    j.at("rounds").get_to(v.rounds);
    v.termination = termination_from(j.at("termination").get<std::string>());
    j.at("final_combined").get_to(v.final_combined);
    v.decision = decision_from(j.at("decision").get<std::string>());
    if (j.contains("error")) j.at("error").get_to(v.error);
}

void to_json(json& j, const ImpactEntry& v) {
    j = json{{"f_meta", v.f_meta}, {"f_ind", v.f_ind}, {"imp", v.imp}};
}
void from_json(const json& j, ImpactEntry& v) {
    j.at("f_meta").get_to(v.f_meta);
    j.at("f_ind").get_to(v.f_ind);
    j.at("imp").get_to(v.imp);
}

void to_json(json& j, const ImpactTable& v) {
    j = json{{"entries", v.entries}, {"smoothing", v.smoothing}};
}
void from_json(const json& j, ImpactTable& v) {
    j.at("entries").get_to(v.entries);
    j.at("smoothing").get_to(v.smoothing);
}

void to_json(json& j, const RetainedWeakness& v) {
    j = json{{"weakness", v.weakness},
             {"valid_score", v.valid_score},
             {"evid_score", v.evid_score}};
}
void from_json(const json& j, RetainedWeakness& v) {
    j.at("weakness").get_to(v.weakness);
    j.at("valid_score").get_to(v.valid_score);
    j.at("evid_score").get_to(v.evid_score);
}

void to_json(json& j, const ScoredWeakness& v) {
    j = json{{"weakness", v.weakness},
             {"imp_norm", v.imp_norm},
             {"valid_score", v.valid_score},
             {"evid_score", v.evid_score},
             {"severity", v.severity ? json(*v.severity) : json(nullptr)},
             {"rank", v.rank}};
}
void from_json(const json& j, ScoredWeakness& v) {
    j.at("weakness").get_to(v.weakness);
    j.at("imp_norm").get_to(v.imp_norm);
    j.at("valid_score").get_to(v.valid_score);
    j.at("evid_score").get_to(v.evid_score);
    if (j.at("severity").is_null()) {
        v.severity.reset();
    } else {
        v.severity = j.at("severity").get<double>();
    }
    j.at("rank").get_to(v.rank);
}

void to_json(json& j, const CorpusBullet& v) {
    j = json{{"text", v.text}};
    if (v.category) j["category"] = *v.category;
}
void from_json(const json& j, CorpusBullet& v) {
    j.at("text").get_to(v.text);
    if (j.contains("category") && !j.at("category").is_null()) {
        v.category = j.at("category").get<std::string>();
    } else {
        v.category.reset();
    }
}

void to_json(json& j, const ReviewCorpusRecord& v) {
    j = json{{"paper_id", v.paper_id},
             {"segment", to_string(v.segment)},
             {"bullets", v.bullets}};
}
void from_json(const json& j, ReviewCorpusRecord& v) {
    j.at("paper_id").get_to(v.paper_id);
    v.segment = segment_from(j.at("segment").get<std::string>());
    j.at("bullets").get_to(v.bullets);
}

void to_json(json& j, const Provenance& v) {
    j = json{{"backends", v.backends}, {"timestamps", v.timestamps}};
}
void from_json(const json& j, Provenance& v) {
    j.at("backends").get_to(v.backends);
    j.at("timestamps").get_to(v.timestamps);
}

void to_json(json& j, const ReviewRun& v) {
    j = json{{"paper_id", v.paper_id},
             {"dimension_set", v.dimension_set},
             {"proposed", v.proposed},
             {"transcripts", v.transcripts},
             {"retained", v.retained},
             {"top_k", v.top_k},
             {"config_snapshot", v.config_snapshot},
             {"provenance", v.provenance}};
}
void from_json(const json& j, ReviewRun& v) {
    j.at("paper_id").get_to(v.paper_id);
    j.at("dimension_set").get_to(v.dimension_set);
    j.at("proposed").get_to(v.proposed);
    j.at("transcripts").get_to(v.transcripts);
    j.at("retained").get_to(v.retained);
    j.at("top_k").get_to(v.top_k);
    v.config_snapshot = j.at("config_snapshot");
    j.at("provenance").get_to(v.provenance);
}

}  // namespace critiq
