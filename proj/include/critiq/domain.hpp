#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace critiq {

// ---------------------------------------------------------------------------
// Papers

struct PaperSection {
    std::string label;
    std::string body;
};

struct PaperDocument {
    std::string id;
    std::string title;
    std::vector<PaperSection> sections;

    // Concatenation of section bodies in order; heading lines excluded.
    std::string raw_text() const;
    bool has_section(std::string_view label) const;
};

// ---------------------------------------------------------------------------
// Review dimensions

enum class DimensionSource { generated, expert };

struct ReviewDimension {
    int index = 0;
    std::string category;
    std::string question;
    DimensionSource source = DimensionSource::generated;
};

enum class DimensionMode { generated, expert, union_both };

struct DimensionSet {
    std::vector<ReviewDimension> dimensions;
    DimensionMode source_mode = DimensionMode::generated;
    std::string paper_id;
    // e.g. backend omitted a category and "Uncategorized" was assigned
    std::vector<std::string> warnings;

    std::vector<std::string> category_vocabulary() const;
};

// ---------------------------------------------------------------------------
// Weaknesses and assessments

inline constexpr const char* kUnlocated = "unlocated";

enum class WeaknessState { proposed, debated, retained, filtered };

struct Weakness {
    std::string id;
    std::string text;
    std::string category;
    std::string location = kUnlocated;  // section label or "unlocated"
    int dimension_index = 0;
    WeaknessState state = WeaknessState::proposed;
};

enum class ValidLabel { fully_valid, partially_valid, invalid };
enum class EvidLabel { substantial, moderate, weak_absent };

double label_to_score(ValidLabel label);
double label_to_score(EvidLabel label);

struct ValidityAssessment {
    ValidLabel valid_label = ValidLabel::invalid;
    EvidLabel evid_label = EvidLabel::weak_absent;
    double valid_score = 0.0;  // [0,1]
    double evid_score = 0.0;   // [0,1]
    std::string justification;
};

// Unweighted mean of the two scores.
double combined_support(const ValidityAssessment& a);
// Weighted variant used by the debate engine: w*valid + (1-w)*evid.
double combined_support(const ValidityAssessment& a, double valid_weight);

// ---------------------------------------------------------------------------
// Rebuttal transcripts

enum class ReviewerAction { counter, agree, concede };
enum class Termination { author_prevails, agreed_partial, round_cap };
enum class Decision { retained, filtered };

struct DebateRound {
    ReviewerAction reviewer_action = ReviewerAction::counter;
    std::string reviewer_turn;
    std::optional<std::string> revised_text;
    ValidityAssessment assessment;
};

struct RebuttalTranscript {
    std::string weakness_id;
    std::vector<DebateRound> rounds;
    Termination termination = Termination::round_cap;
    double final_combined = 0.0;
    Decision decision = Decision::filtered;
    std::string error;  // backend error that aborted the debate, if any
};

// ---------------------------------------------------------------------------
// Impact and severity

struct ImpactEntry {
    double f_meta = 0.0;
    double f_ind = 0.0;
    double imp = 0.0;  // f_meta / f_ind, smoothing already applied
};

struct ImpactTable {
    std::map<std::string, ImpactEntry> entries;
    double smoothing = 1.0;
};

// A weakness that survived filtering, with the final assessment scores.
struct RetainedWeakness {
    Weakness weakness;
    double valid_score = 0.0;
    double evid_score = 0.0;
};

struct ScoredWeakness {
    Weakness weakness;
    double imp_norm = 0.0;
    double valid_score = 0.0;
    double evid_score = 0.0;
    std::optional<double> severity;  // unset when the prioritizer is disabled
    int rank = 0;                    // 1-based
};

// ---------------------------------------------------------------------------
// Review corpus records (impact fitting, gold sets)

enum class Segment { individual, meta };

struct CorpusBullet {
    std::string text;
    std::optional<std::string> category;
};

struct ReviewCorpusRecord {
    std::string paper_id;
    Segment segment = Segment::individual;
    std::vector<CorpusBullet> bullets;
};

// ---------------------------------------------------------------------------
// Run archive payload

struct Provenance {
    std::map<std::string, std::string> backends;  // role -> backend id
    std::map<std::string, std::string> timestamps;
};

struct ReviewRun {
    std::string paper_id;
    DimensionSet dimension_set;
    std::vector<Weakness> proposed;
    std::vector<RebuttalTranscript> transcripts;
    std::vector<ScoredWeakness> retained;  // ranked, full set
    std::vector<ScoredWeakness> top_k;
    nlohmann::json config_snapshot;
    Provenance provenance;
};

// ---------------------------------------------------------------------------
// Enum <-> string names (used by serialization and the CLI)

std::string to_string(DimensionSource v);
std::string to_string(DimensionMode v);
std::string to_string(WeaknessState v);
std::string to_string(ValidLabel v);
std::string to_string(EvidLabel v);
std::string to_string(ReviewerAction v);
std::string to_string(Termination v);
std::string to_string(Decision v);
std::string to_string(Segment v);

DimensionSource dimension_source_from(std::string_view s);
DimensionMode dimension_mode_from(std::string_view s);
WeaknessState weakness_state_from(std::string_view s);
ValidLabel valid_label_from(std::string_view s);
EvidLabel evid_label_from(std::string_view s);
ReviewerAction reviewer_action_from(std::string_view s);
Termination termination_from(std::string_view s);
Decision decision_from(std::string_view s);
Segment segment_from(std::string_view s);

// JSON conversions (nlohmann ADL hooks)
void to_json(nlohmann::json& j, const PaperSection& v);
void from_json(const nlohmann::json& j, PaperSection& v);
void to_json(nlohmann::json& j, const PaperDocument& v);
void from_json(const nlohmann::json& j, PaperDocument& v);
void to_json(nlohmann::json& j, const ReviewDimension& v);
void from_json(const nlohmann::json& j, ReviewDimension& v);
void to_json(nlohmann::json& j, const DimensionSet& v);
void from_json(const nlohmann::json& j, DimensionSet& v);
void to_json(nlohmann::json& j, const Weakness& v);
void from_json(const nlohmann::json& j, Weakness& v);
void to_json(nlohmann::json& j, const ValidityAssessment& v);
void from_json(const nlohmann::json& j, ValidityAssessment& v);
void to_json(nlohmann::json& j, const DebateRound& v);
void from_json(const nlohmann::json& j, DebateRound& v);
void to_json(nlohmann::json& j, const RebuttalTranscript& v);
void from_json(const nlohmann::json& j, RebuttalTranscript& v);
void to_json(nlohmann::json& j, const ImpactEntry& v);
void from_json(const nlohmann::json& j, ImpactEntry& v);
void to_json(nlohmann::json& j, const ImpactTable& v);
void from_json(const nlohmann::json& j, ImpactTable& v);
void to_json(nlohmann::json& j, const RetainedWeakness& v);
void from_json(const nlohmann::json& j, RetainedWeakness& v);
void to_json(nlohmann::json& j, const ScoredWeakness& v);
void from_json(const nlohmann::json& j, ScoredWeakness& v);
void to_json(nlohmann::json& j, const CorpusBullet& v);
void from_json(const nlohmann::json& j, CorpusBullet& v);
void to_json(nlohmann::json& j, const ReviewCorpusRecord& v);
void from_json(const nlohmann::json& j, ReviewCorpusRecord& v);
void to_json(nlohmann::json& j, const Provenance& v);
void from_json(const nlohmann::json& j, Provenance& v);
void to_json(nlohmann::json& j, const ReviewRun& v);
void from_json(const nlohmann::json& j, ReviewRun& v);

}  // namespace critiq
