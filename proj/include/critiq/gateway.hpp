#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "critiq/domain.hpp"

namespace critiq {

enum class RoleKind { customizer, reviewer, author, category_classifier };

std::string to_string(RoleKind v);
RoleKind role_kind_from(std::string_view s);

struct AgentRole {
    RoleKind kind = RoleKind::reviewer;
    std::optional<int> dimension_index;  // reviewer only

    static AgentRole customizer() { return {RoleKind::customizer, std::nullopt}; }
    static AgentRole reviewer(int dimension_index) { return {RoleKind::reviewer, dimension_index}; }
    static AgentRole author() { return {RoleKind::author, std::nullopt}; }
    static AgentRole classifier() { return {RoleKind::category_classifier, std::nullopt}; }
};

struct DecodeParams {
    int max_length = 4096;
    double temperature = 0.0;  // pipeline-critical calls stay at 0
};

struct AgentRequest {
    AgentRole role;
    std::string template_id;
    // Full request context; a superset of the template's placeholders.
    std::map<std::string, std::string> variables;
    DecodeParams decode;
};

struct AgentResponse {
    std::string raw;
    nlohmann::json parsed;
    std::string backend_id;
};

// What the parser must find in a reply for a given template.
enum class ResponseSchema {
    dimension_list,     // [{category?, question}]
    weakness_list,      // [{text, category?, location?}]
    assessment,         // {valid, evid, valid_score?, evid_score?, justification?}
    reviewer_reaction,  // {action, argument?, revised_text?}
    category_label,     // {category}
    free_text,
};

struct PromptTemplate {
    std::string id;
    std::string text;  // {name} placeholders, {{ }} escapes literal braces
    ResponseSchema schema = ResponseSchema::free_text;
};

class TemplateRegistry {
public:
    static TemplateRegistry builtin();

    void add(PromptTemplate tmpl);
    bool contains(const std::string& id) const;
    const PromptTemplate& get(const std::string& id) const;  // throws unknown_template

private:
    std::map<std::string, PromptTemplate> templates_;
};

// Deterministic substitution; throws missing_variable if a placeholder has
// no binding. Unused bindings are fine.
std::string render_template_text(std::string_view text,
                                 const std::map<std::string, std::string>& variables);

// (role kind, dimension index, template id, ordered variable hash); variable
// values are whitespace-normalized before hashing.
std::string request_fingerprint(const AgentRequest& req);

// Extract the machine-readable payload from a model reply: the last fenced
// block wins; a reply that is bare JSON is accepted as-is.
std::optional<nlohmann::json> extract_structured_payload(const std::string& raw);

// Validate a payload against a template's schema. Returns the normalized
// payload (canonical label spellings); never adds fields absent from raw.
nlohmann::json validate_payload(const nlohmann::json& payload, ResponseSchema schema);

// ---------------------------------------------------------------------------
// Backends

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    // Raw reply text for a rendered prompt; throws transport_failure.
    virtual std::string generate(const std::string& prompt, const AgentRequest& req) = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);
};

struct ScriptEntry {
    std::optional<RoleKind> role;
    std::optional<int> dimension_index;
    std::optional<std::string> template_id;
    // Subset of request variables to match, whitespace-insensitive.
    std::map<std::string, std::string> match_vars;
    std::optional<std::string> fingerprint;  // exact alternative to the above
    std::string response;
    std::optional<std::string> error;  // "transport" simulates a transient failure
    int times = -1;                    // consumable count; -1 = unlimited
};

struct ReplayScript {
    bool strict = true;
    std::vector<ScriptEntry> entries;
    std::map<RoleKind, std::string> defaults;            // non-strict fallback per role
    std::map<std::string, std::vector<double>> embeddings;  // exact text -> vector
};

// Deterministic stand-in for a remote model; entries are consumed in file
// order, first match wins.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(ReplayScript script);

    std::string id() const override { return "scripted"; }
    std::string generate(const std::string& prompt, const AgentRequest& req) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

    bool strict() const { return script_.strict; }

private:
    ReplayScript script_;
    std::vector<int> remaining_;
    std::mutex mutex_;

    bool matches(const ScriptEntry& entry, const AgentRequest& req,
                 const std::string& fingerprint) const;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. https://api.example.com
    std::string model;
    std::string chat_path = "/v1/chat/completions";
    std::string embeddings_path = "/v1/embeddings";
    std::string api_key_env = "CRITIQ_API_KEY";  // credential via environment only
    int timeout_seconds = 120;
};

// Chat-completion-style remote service; request/response bodies are the
// service's native format, adapted here only.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string id() const override;
    std::string generate(const std::string& prompt, const AgentRequest& req) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

// ---------------------------------------------------------------------------
// Gateway

struct GatewayConfig {
    int max_transport_retries = 3;
    int initial_backoff_ms = 200;
    int backoff_cap_ms = 5000;
    bool reprompt_on_parse_failure = true;  // exactly one repair attempt
};

class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend, GatewayConfig config = {},
                     TemplateRegistry templates = TemplateRegistry::builtin());

    // Per-role backend override; unset roles use the default backend.
    void set_backend(RoleKind role, std::shared_ptr<Backend> backend);
    Backend& backend_for(RoleKind role) const;

    AgentResponse complete(const AgentRequest& req) const;
    std::string render(const std::string& template_id,
                       const std::map<std::string, std::string>& variables) const;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const;

    const TemplateRegistry& templates() const { return templates_; }
    const GatewayConfig& config() const { return config_; }
    std::map<std::string, std::string> backend_ids() const;

private:
    std::shared_ptr<Backend> default_backend_;
    std::map<RoleKind, std::shared_ptr<Backend>> overrides_;
    GatewayConfig config_;
    TemplateRegistry templates_;

    std::string generate_with_retries(Backend& backend, const std::string& prompt,
                                      const AgentRequest& req) const;
};

}  // namespace critiq
