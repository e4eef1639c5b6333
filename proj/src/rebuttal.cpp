#include "critiq/rebuttal.hpp"

#include <cstdio>
#include <iostream>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

using nlohmann::json;

namespace {

std::string weakness_id_for(int dimension_index, int position) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%02d-%02d", dimension_index, position);
    return std::string(buf);
}

std::string section_labels(const PaperDocument& paper) {
    std::vector<std::string> labels;
    labels.reserve(paper.sections.size());
    for (const auto& s : paper.sections) labels.push_back(s.label);
    return join(labels, "; ");
}

// Compact, deterministic rendering of prior rounds for prompt context.
std::string render_history(const std::vector<DebateRound>& history) {
    if (history.empty()) return "(none)";
    json rows = json::array();
    for (const auto& round : history) {
        json row{{"author", json{{"valid", to_string(round.assessment.valid_label)},
                                 {"evid", to_string(round.assessment.evid_label)},
                                 {"justification", round.assessment.justification}}},
                 {"reviewer", json{{"action", to_string(round.reviewer_action)},
                                   {"argument", round.reviewer_turn}}}};
        rows.push_back(std::move(row));
    }
    return rows.dump();
}

ValidityAssessment assessment_from_payload(const json& payload) {
    ValidityAssessment a;
    a.valid_label = valid_label_from(payload.at("valid").get<std::string>());
    a.evid_label = evid_label_from(payload.at("evid").get<std::string>());
    a.valid_score = payload.contains("valid_score") ? payload.at("valid_score").get<double>()
                                                    : label_to_score(a.valid_label);
    a.evid_score = payload.contains("evid_score") ? payload.at("evid_score").get<double>()
                                                  : label_to_score(a.evid_label);
    a.justification = payload.value("justification", "");
    return a;
}

struct ReviewerReaction {
    ReviewerAction action = ReviewerAction::counter;
    std::string argument;
    std::optional<std::string> revised_text;
};

ReviewerReaction react(const Weakness& weakness, const ValidityAssessment& assessment,
                       const std::vector<DebateRound>& history, int round, int max_rounds,
                       const PaperDocument& paper, const Gateway& gateway) {
    AgentRequest req;
    req.role = AgentRole::reviewer(weakness.dimension_index);
    req.template_id = "reviewer_react";
    json assessment_json;
    to_json(assessment_json, assessment);
    req.variables = {{"weakness_id", weakness.id},
                     {"weakness_text", weakness.text},
                     {"assessment", assessment_json.dump()},
                     {"round", std::to_string(round)},
                     {"max_rounds", std::to_string(max_rounds)},
                     {"history", render_history(history)},
                     {"paper_title", paper.title},
                     {"paper_text", paper.raw_text()}};

    AgentResponse res = gateway.complete(req);
    ReviewerReaction reaction;
    reaction.action = reviewer_action_from(res.parsed.at("action").get<std::string>());
    reaction.argument = res.parsed.value("argument", "");
    // A counter with no argument is no counter at all.
    if (reaction.action == ReviewerAction::counter && trim(reaction.argument).empty()) {
        reaction.action = ReviewerAction::concede;
    }
    if (res.parsed.contains("revised_text")) {
        reaction.revised_text = res.parsed.at("revised_text").get<std::string>();
    }
    return reaction;
}

}  // namespace

void DebateConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw Error(Errc::invalid_config, "epsilon must lie in [0,1]");
    }
    if (max_rounds < 1 || max_rounds > 3) {
        throw Error(Errc::invalid_config, "max_rounds must lie in [1,3]");
    }
    if (!(valid_weight >= 0.0 && valid_weight <= 1.0)) {
        throw Error(Errc::invalid_config, "valid_weight must lie in [0,1]");
    }
}

std::vector<Weakness> propose_weaknesses(const ReviewDimension& dim, const PaperDocument& paper,
                                         const Gateway& gateway) {
    AgentRequest req;
    req.role = AgentRole::reviewer(dim.index);
    req.template_id = "reviewer_propose";
    req.variables = {{"dimension_index", std::to_string(dim.index)},
                     {"dimension_category", dim.category},
                     {"dimension_question", dim.question},
                     {"paper_title", paper.title},
                     {"paper_text", paper.raw_text()},
                     {"section_labels", section_labels(paper)}};

    AgentResponse res = gateway.complete(req);

    std::vector<Weakness> out;
    for (const auto& item : res.parsed) {
        Weakness w;
        w.id = weakness_id_for(dim.index, static_cast<int>(out.size()) + 1);
        w.text = item.at("text").get<std::string>();
        w.category = item.value("category", "");
        if (trim(w.category).empty()) w.category = dim.category;
        w.location = item.value("location", std::string(kUnlocated));
        if (w.location != kUnlocated && !paper.has_section(w.location)) {
            // Mis-attributed section labels are softened, not rejected.
            std::cerr << "warning: " << w.id << " cites unknown section '" << w.location
                      << "', using " << kUnlocated << "\n";
            w.location = kUnlocated;
        }
        w.dimension_index = dim.index;
        w.state = WeaknessState::proposed;
        out.push_back(std::move(w));
    }
    return out;  // zero weaknesses is a valid outcome
}

ValidityAssessment assess(const Weakness& weakness, const PaperDocument& paper,
                          const std::vector<DebateRound>& history, const Gateway& gateway) {
    AgentRequest req;
    req.role = AgentRole::author();
    req.template_id = "author_assess";
    req.variables = {{"weakness_id", weakness.id},
                     {"weakness_text", weakness.text},
                     {"weakness_category", weakness.category},
                     {"weakness_location", weakness.location},
                     {"round", std::to_string(history.size() + 1)},
                     {"paper_title", paper.title},
                     {"paper_text", paper.raw_text()},
                     {"history", render_history(history)}};

    AgentResponse res = gateway.complete(req);
    return assessment_from_payload(res.parsed);
}

RebuttalTranscript run_debate(const Weakness& weakness, const PaperDocument& paper,
                              const DebateConfig& config, const Gateway& gateway) {
    config.validate();

    RebuttalTranscript transcript;
    transcript.weakness_id = weakness.id;

    if (!config.author_enabled) {
        // Ablation semantics: everything passes, untouched.
        DebateRound round;
        round.reviewer_action = ReviewerAction::concede;
        round.reviewer_turn = "(author rebuttal disabled)";
        round.assessment = {ValidLabel::fully_valid, EvidLabel::substantial, 1.0, 1.0,
                            "author rebuttal disabled"};
        transcript.rounds.push_back(std::move(round));
        transcript.termination = Termination::author_prevails;
        transcript.final_combined = 1.0;
        transcript.decision = Decision::retained;
        return transcript;
    }

    Weakness current = weakness;
    current.state = WeaknessState::debated;

    try {
        for (int round_no = 1; round_no <= config.max_rounds; ++round_no) {
            ValidityAssessment assessment = assess(current, paper, transcript.rounds, gateway);
            ReviewerReaction reaction = react(current, assessment, transcript.rounds, round_no,
                                              config.max_rounds, paper, gateway);

            DebateRound round;
            round.reviewer_action = reaction.action;
            round.reviewer_turn = reaction.argument;
            round.revised_text = reaction.revised_text;
            round.assessment = assessment;
            transcript.rounds.push_back(std::move(round));

            if (reaction.revised_text) current.text = *reaction.revised_text;

            const bool fully_backed = assessment.valid_label == ValidLabel::fully_valid &&
                                      assessment.evid_label == EvidLabel::substantial;
            const bool partial = assessment.valid_label == ValidLabel::partially_valid &&
                                 assessment.evid_label == EvidLabel::moderate;
            if (fully_backed && reaction.action != ReviewerAction::counter) {
                transcript.termination = Termination::author_prevails;
                break;
            }
            if (partial && reaction.action == ReviewerAction::agree) {
                transcript.termination = Termination::agreed_partial;
                break;
            }
            transcript.termination = Termination::round_cap;
        }
    } catch (const Error& e) {
        // Fail closed: a backend failure mid-debate filters the weakness.
        transcript.error = e.what();
        transcript.termination = Termination::round_cap;
        transcript.final_combined = 0.0;
        transcript.decision = Decision::filtered;
        return transcript;
    }

    const ValidityAssessment& last = transcript.rounds.back().assessment;
    transcript.final_combined = combined_support(last, config.valid_weight);
    transcript.decision = transcript.final_combined >= config.epsilon ? Decision::retained
                                                                      : Decision::filtered;
    return transcript;
}

FilterResult filter_weaknesses(const std::vector<Weakness>& debated,
                               const std::vector<RebuttalTranscript>& transcripts) {
    FilterResult result;
    for (const auto& transcript : transcripts) {
        const Weakness* source = nullptr;
        for (const auto& w : debated) {
            if (w.id == transcript.weakness_id) {
                source = &w;
                break;
            }
        }
        if (!source) {
            throw Error(Errc::invalid_config,
                        "transcript for unknown weakness '" + transcript.weakness_id + "'");
        }
        if (transcript.decision == Decision::retained) {
            RetainedWeakness kept;
            kept.weakness = *source;
            kept.weakness.state = WeaknessState::retained;
            // Apply the reviewer's final rewording, if any.
            for (const auto& round : transcript.rounds) {
                if (round.revised_text) kept.weakness.text = *round.revised_text;
            }
            const ValidityAssessment& last = transcript.rounds.back().assessment;
            kept.valid_score = last.valid_score;
            kept.evid_score = last.evid_score;
            result.retained.push_back(std::move(kept));
        } else {
            Weakness dropped = *source;
            dropped.state = WeaknessState::filtered;
            result.filtered.push_back(std::move(dropped));
        }
    }
    return result;
}

double retention_rate(std::size_t proposed, std::size_t retained) {
    if (proposed == 0) {
        throw Error(Errc::undefined_rate, "retention rate needs at least one proposed weakness");
    }
    return static_cast<double>(retained) / static_cast<double>(proposed);
}

double retention_rate(const ReviewRun& run) {
    return retention_rate(run.proposed.size(), run.retained.size());
}

}  // namespace critiq
