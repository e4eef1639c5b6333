#include "critiq/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "critiq/error.hpp"
#include "critiq/textutil.hpp"

namespace critiq {

using nlohmann::json;

std::string to_string(RoleKind v) {
    switch (v) {
        case RoleKind::customizer: return "customizer";
        case RoleKind::reviewer: return "reviewer";
        case RoleKind::author: return "author";
        case RoleKind::category_classifier: return "category_classifier";
    }
    return "reviewer";
}

RoleKind role_kind_from(std::string_view s) {
    if (s == "customizer") return RoleKind::customizer;
    if (s == "reviewer") return RoleKind::reviewer;
    if (s == "author") return RoleKind::author;
    if (s == "category_classifier") return RoleKind::category_classifier;
    throw Error(Errc::schema_mismatch, "unknown role kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Templates

namespace {

constexpr const char* kCustomizerTemplate =
    R"(You are planning the peer review of a paper submission. Read the paper and
propose the review dimensions that deserve the closest scrutiny for this
particular submission, based on its concrete content and claimed
contributions. Each dimension is a question-style criterion with a short
category label (for example "Method-Validity").

Title: {paper_title}

Paper:
{paper_text}

Reply with a fenced json block: an array of objects, each
{{"category": "...", "question": "..."}}.)";

constexpr const char* kReviewerProposeTemplate =
    R"(You are a reviewer in charge of a single evaluation dimension.

Dimension [{dimension_category}]: {dimension_question}

Title: {paper_title}

Paper:
{paper_text}

Known section labels: {section_labels}

Identify the weaknesses of this paper that fall under your dimension. Ground
every point in the paper itself and name the section it concerns.
Reply with a fenced json block: an array of objects, each
{{"text": "...", "category": "...", "location": "<section label>"}}; use
"unlocated" when no single section applies. Reply with [] if you find
nothing.)";

constexpr const char* kAuthorAssessTemplate =
    R"(You are the author of this paper responding to a reviewer critique. Judge
whether the critique is well grounded in the paper content itself and how
strongly the paper's text supports it. You are not judging the scientific
truth of the paper's claims.

Critique [{weakness_category}] (location: {weakness_location}):
{weakness_text}

Title: {paper_title}

Paper:
{paper_text}

Debate so far:
{history}

Reply with a fenced json block:
{{"valid": "fully_valid|partially_valid|invalid",
  "evid": "substantial|moderate|weak_absent",
  "valid_score": <number in [0,1], optional>,
  "evid_score": <number in [0,1], optional>,
  "justification": "..."}})";

constexpr const char* kReviewerReactTemplate =
    R"(You are the reviewer who raised this critique; the author has just replied.
Decide whether to keep pressing.

Critique: {weakness_text}

Author assessment: {assessment}

Round {round} of {max_rounds}. Debate so far:
{history}

Counter only with paper-grounded arguments. If the author's reading of the
paper settles the point, concede; if you accept a partial-validity reading,
agree. You may tighten the critique wording via "revised_text".
Reply with a fenced json block:
{{"action": "counter|agree|concede", "argument": "...", "revised_text": "..."}})";

constexpr const char* kCategoryClassifyTemplate =
    R"(Assign the single best-fitting category to this review bullet.

Bullet: {bullet_text}

Categories: {categories}

Reply with a fenced json block: {{"category": "..."}})";

const char* format_reminder(ResponseSchema schema) {
    switch (schema) {
        case ResponseSchema::dimension_list:
            return "Format reminder: reply with ONLY a fenced json block containing an array "
                   "of objects, each {\"category\": \"...\", \"question\": \"...\"}.";
        case ResponseSchema::weakness_list:
            return "Format reminder: reply with ONLY a fenced json block containing an array "
                   "of objects, each {\"text\": \"...\", \"category\": \"...\", \"location\": \"...\"}.";
        case ResponseSchema::assessment:
            return "Format reminder: reply with ONLY a fenced json block containing an object "
                   "with string fields \"valid\" and \"evid\" and optional numeric "
                   "\"valid_score\"/\"evid_score\" in [0,1].";
        case ResponseSchema::reviewer_reaction:
            return "Format reminder: reply with ONLY a fenced json block containing an object "
                   "with field \"action\" set to counter, agree or concede.";
        case ResponseSchema::category_label:
            return "Format reminder: reply with ONLY a fenced json block containing "
                   "{\"category\": \"...\"}.";
        case ResponseSchema::free_text:
            return "";
    }
    return "";
}

}  // namespace

TemplateRegistry TemplateRegistry::builtin() {
    TemplateRegistry reg;
    reg.add({"customizer_dims", kCustomizerTemplate, ResponseSchema::dimension_list});
    reg.add({"reviewer_propose", kReviewerProposeTemplate, ResponseSchema::weakness_list});
    reg.add({"author_assess", kAuthorAssessTemplate, ResponseSchema::assessment});
    reg.add({"reviewer_react", kReviewerReactTemplate, ResponseSchema::reviewer_reaction});
    reg.add({"category_classify", kCategoryClassifyTemplate, ResponseSchema::category_label});
    return reg;
}

void TemplateRegistry::add(PromptTemplate tmpl) {
    templates_[tmpl.id] = std::move(tmpl);
}

bool TemplateRegistry::contains(const std::string& id) const {
    return templates_.count(id) > 0;
}

const PromptTemplate& TemplateRegistry::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw Error(Errc::unknown_template, "no template registered under '" + id + "'");
    }
    return it->second;
}

std::string render_template_text(std::string_view text,
                                 const std::map<std::string, std::string>& variables) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '{') {
            if (i + 1 < n && text[i + 1] == '{') {
                out.push_back('{');
                i += 2;
                continue;
            }
            size_t close = text.find('}', i);
            if (close == std::string_view::npos) {
                throw Error(Errc::invalid_config, "unbalanced '{' in template");
            }
            std::string name(text.substr(i + 1, close - i - 1));
            auto it = variables.find(name);
            if (it == variables.end()) {
                throw Error(Errc::missing_variable, "no binding for template variable '" + name + "'");
            }
            out += it->second;
            i = close + 1;
        } else if (c == '}') {
            if (i + 1 < n && text[i + 1] == '}') {
                out.push_back('}');
                i += 2;
                continue;
            }
            throw Error(Errc::invalid_config, "unbalanced '}' in template");
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

std::string request_fingerprint(const AgentRequest& req) {
    std::string material;
    for (const auto& [name, value] : req.variables) {
        material += name;
        material += '\x1f';
        material += collapse_whitespace(value);
        material += '\x1e';
    }
    std::string dim = req.role.dimension_index ? std::to_string(*req.role.dimension_index) : "-";
    return to_string(req.role.kind) + ":" + dim + ":" + req.template_id + ":" +
           to_hex(fnv1a64(material));
}

std::optional<json> extract_structured_payload(const std::string& raw) {
    // Collect complete fenced blocks; the last one wins.
    std::vector<std::pair<size_t, size_t>> blocks;  // [content_begin, content_end)
    size_t pos = 0;
    size_t open_at = 0;
    bool in_block = false;
    while ((pos = raw.find("```", pos)) != std::string::npos) {
        if (!in_block) {
            // skip an optional language tag up to end of line
            size_t content = raw.find('\n', pos + 3);
            if (content == std::string::npos) break;
            open_at = content + 1;
            in_block = true;
            pos += 3;
        } else {
            blocks.emplace_back(open_at, pos);
            in_block = false;
            pos += 3;
        }
    }
    std::string candidate;
    if (!blocks.empty()) {
        auto [b, e] = blocks.back();
        candidate = raw.substr(b, e - b);
    } else {
        candidate = raw;  // a bare JSON reply is accepted as-is
    }
    json parsed = json::parse(candidate, nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

// ---------------------------------------------------------------------------
// Payload validation

namespace {

std::string normalize_label(std::string_view s) {
    std::string out;
    for (char c : to_lower(trim(s))) {
        if (c == ' ' || c == '-' || c == '/') {
            if (!out.empty() && out.back() != '_') out.push_back('_');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string canonical_valid_label(const json& v) {
    if (!v.is_string()) throw Error(Errc::parse_failure, "'valid' must be a string label");
    std::string s = normalize_label(v.get<std::string>());
    if (s == "fully_valid" || s == "partially_valid" || s == "invalid") return s;
    throw Error(Errc::parse_failure, "unrecognized validity label '" + s + "'");
}

std::string canonical_evid_label(const json& v) {
    if (!v.is_string()) throw Error(Errc::parse_failure, "'evid' must be a string label");
    std::string s = normalize_label(v.get<std::string>());
    if (s == "weak" || s == "absent") s = "weak_absent";
    if (s == "substantial" || s == "moderate" || s == "weak_absent") return s;
    throw Error(Errc::parse_failure, "unrecognized evidence label '" + s + "'");
}

double unit_interval_number(const json& v, const char* field) {
    if (!v.is_number()) {
        throw Error(Errc::parse_failure, std::string("'") + field + "' must be a number");
    }
    double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) {
        throw Error(Errc::parse_failure,
                    std::string("'") + field + "' out of range [0,1]: " + std::to_string(d));
    }
    return d;
}

std::optional<std::string> optional_string(const json& obj, const char* field) {
    if (!obj.contains(field) || obj.at(field).is_null()) return std::nullopt;
    const json& v = obj.at(field);
    if (!v.is_string()) {
        throw Error(Errc::parse_failure, std::string("'") + field + "' must be a string");
    }
    std::string s = v.get<std::string>();
    if (trim(s).empty()) return std::nullopt;
    return s;
}

json validate_dimension_list(const json& payload) {
    if (!payload.is_array()) throw Error(Errc::parse_failure, "expected an array of dimensions");
    json out = json::array();
    for (const auto& item : payload) {
        if (!item.is_object() || !item.contains("question") || !item.at("question").is_string()) {
            throw Error(Errc::parse_failure, "dimension entry missing string 'question'");
        }
        std::string question = trim(item.at("question").get<std::string>());
        if (question.empty()) throw Error(Errc::parse_failure, "dimension entry has empty question");
        json clean{{"question", question}};
        if (auto cat = optional_string(item, "category")) clean["category"] = *cat;
        out.push_back(std::move(clean));
    }
    return out;
}

json validate_weakness_list(const json& payload) {
    if (!payload.is_array()) throw Error(Errc::parse_failure, "expected an array of weaknesses");
    json out = json::array();
    for (const auto& item : payload) {
        if (!item.is_object() || !item.contains("text") || !item.at("text").is_string()) {
            throw Error(Errc::parse_failure, "weakness entry missing string 'text'");
        }
        std::string text = trim(item.at("text").get<std::string>());
        if (text.empty()) throw Error(Errc::parse_failure, "weakness entry has empty text");
        json clean{{"text", text}};
        if (auto cat = optional_string(item, "category")) clean["category"] = *cat;
        if (auto loc = optional_string(item, "location")) clean["location"] = *loc;
        out.push_back(std::move(clean));
    }
    return out;
}

json validate_assessment(const json& payload) {
    if (!payload.is_object()) throw Error(Errc::parse_failure, "expected an assessment object");
    if (!payload.contains("valid") || !payload.contains("evid")) {
        throw Error(Errc::parse_failure, "assessment needs 'valid' and 'evid' labels");
    }
    json clean{{"valid", canonical_valid_label(payload.at("valid"))},
               {"evid", canonical_evid_label(payload.at("evid"))}};
    // Scores are optional; out-of-range values are a contract violation, not
    // something to clamp.
    if (payload.contains("valid_score") && !payload.at("valid_score").is_null()) {
        clean["valid_score"] = unit_interval_number(payload.at("valid_score"), "valid_score");
    }
    if (payload.contains("evid_score") && !payload.at("evid_score").is_null()) {
        clean["evid_score"] = unit_interval_number(payload.at("evid_score"), "evid_score");
    }
    if (auto just = optional_string(payload, "justification")) clean["justification"] = *just;
    return clean;
}

json validate_reaction(const json& payload) {
    if (!payload.is_object()) throw Error(Errc::parse_failure, "expected a reaction object");
    if (!payload.contains("action") || !payload.at("action").is_string()) {
        throw Error(Errc::parse_failure, "reaction needs a string 'action'");
    }
    std::string action = normalize_label(payload.at("action").get<std::string>());
    if (action != "counter" && action != "agree" && action != "concede") {
        throw Error(Errc::parse_failure, "unrecognized reviewer action '" + action + "'");
    }
    json clean{{"action", action}};
    if (auto arg = optional_string(payload, "argument")) clean["argument"] = *arg;
    if (auto revised = optional_string(payload, "revised_text")) clean["revised_text"] = *revised;
    return clean;
}

json validate_category_label(const json& payload) {
    if (!payload.is_object() || !payload.contains("category") ||
        !payload.at("category").is_string()) {
        throw Error(Errc::parse_failure, "expected {\"category\": \"...\"}");
    }
    std::string cat = trim(payload.at("category").get<std::string>());
    if (cat.empty()) throw Error(Errc::parse_failure, "empty category label");
    return json{{"category", cat}};
}

}  // namespace

json validate_payload(const json& payload, ResponseSchema schema) {
    switch (schema) {
        case ResponseSchema::dimension_list: return validate_dimension_list(payload);
        case ResponseSchema::weakness_list: return validate_weakness_list(payload);
        case ResponseSchema::assessment: return validate_assessment(payload);
        case ResponseSchema::reviewer_reaction: return validate_reaction(payload);
        case ResponseSchema::category_label: return validate_category_label(payload);
        case ResponseSchema::free_text: return payload;
    }
    return payload;
}

// ---------------------------------------------------------------------------
// Backends

std::vector<std::vector<double>> Backend::embed(const std::vector<std::string>&) {
    throw Error(Errc::unsupported_operation, "backend '" + id() + "' does not provide embeddings");
}

ScriptedBackend::ScriptedBackend(ReplayScript script) : script_(std::move(script)) {
    remaining_.reserve(script_.entries.size());
    for (const auto& entry : script_.entries) remaining_.push_back(entry.times);
}

bool ScriptedBackend::matches(const ScriptEntry& entry, const AgentRequest& req,
                              const std::string& fingerprint) const {
    if (entry.fingerprint) return *entry.fingerprint == fingerprint;
    if (entry.role && *entry.role != req.role.kind) return false;
    if (entry.dimension_index) {
        if (!req.role.dimension_index || *req.role.dimension_index != *entry.dimension_index) {
            return false;
        }
    }
    if (entry.template_id && *entry.template_id != req.template_id) return false;
    for (const auto& [name, value] : entry.match_vars) {
        auto it = req.variables.find(name);
        if (it == req.variables.end()) return false;
        if (collapse_whitespace(it->second) != collapse_whitespace(value)) return false;
    }
    return true;
}

std::string ScriptedBackend::generate(const std::string&, const AgentRequest& req) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string fingerprint = request_fingerprint(req);
    for (size_t i = 0; i < script_.entries.size(); ++i) {
        if (remaining_[i] == 0) continue;
        const ScriptEntry& entry = script_.entries[i];
        if (!matches(entry, req, fingerprint)) continue;
        if (remaining_[i] > 0) --remaining_[i];
        if (entry.error) {
            if (*entry.error == "transport") {
                throw Error(Errc::transport_failure, "scripted transient transport failure", true);
            }
            throw Error(Errc::transport_failure, "scripted failure: " + *entry.error, false);
        }
        return entry.response;
    }
    if (!script_.strict) {
        auto it = script_.defaults.find(req.role.kind);
        if (it != script_.defaults.end()) return it->second;
    }
    throw Error(Errc::script_miss, "no scripted response for " + fingerprint + " (template '" +
                                       req.template_id + "')");
}

std::vector<std::vector<double>> ScriptedBackend::embed(const std::vector<std::string>& texts) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        auto it = script_.embeddings.find(text);
        if (it != script_.embeddings.end()) {
            out.push_back(it->second);
            continue;
        }
        if (script_.strict) {
            throw Error(Errc::script_miss, "no scripted embedding for text: " + text);
        }
        // hashed bag-of-tokens; deterministic and roughly similarity-preserving
        std::vector<double> vec(16, 0.0);
        for (const auto& token : tokenize(text)) {
            vec[fnv1a64(token) % vec.size()] += 1.0;
        }
        double norm = 0.0;
        for (double v : vec) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0) {
            for (double& v : vec) v /= norm;
        }
        out.push_back(std::move(vec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw Error(Errc::invalid_config, "remote backend requires a base URL");
    }
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string HttpBackend::id() const {
    return "http:" + config_.base_url + "#" + config_.model;
}

std::string HttpBackend::generate(const std::string& prompt, const AgentRequest& req) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);

    json body{{"model", config_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", req.decode.temperature},
              {"max_tokens", req.decode.max_length}};

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(config_.chat_path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(Errc::transport_failure, "connection to " + config_.base_url + " failed", true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(Errc::transport_failure,
                    "status " + std::to_string(res->status) + " from " + config_.chat_path,
                    retryable_status(res->status));
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
        throw Error(Errc::transport_failure, "malformed completion body from service", false);
    }
    const json& message = parsed["choices"][0];
    if (message.contains("message") && message["message"].contains("content") &&
        message["message"]["content"].is_string()) {
        return message["message"]["content"].get<std::string>();
    }
    if (message.contains("text") && message["text"].is_string()) {
        return message["text"].get<std::string>();
    }
    throw Error(Errc::transport_failure, "completion body carries no message content", false);
}

std::vector<std::vector<double>> HttpBackend::embed(const std::vector<std::string>& texts) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);

    json body{{"model", config_.model}, {"input", texts}};
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(config_.embeddings_path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(Errc::transport_failure, "connection to " + config_.base_url + " failed", true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(Errc::transport_failure,
                    "status " + std::to_string(res->status) + " from " + config_.embeddings_path,
                    retryable_status(res->status));
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != texts.size()) {
        throw Error(Errc::transport_failure, "malformed embeddings body from service", false);
    }
    std::vector<std::vector<double>> out(texts.size());
    for (const auto& item : parsed["data"]) {
        size_t index = item.value("index", out.size());
        if (index >= out.size() || !item.contains("embedding")) {
            throw Error(Errc::transport_failure, "malformed embeddings body from service", false);
        }
        out[index] = item["embedding"].get<std::vector<double>>();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayConfig config, TemplateRegistry templates)
    : default_backend_(std::move(backend)),
      config_(config),
      templates_(std::move(templates)) {
    if (!default_backend_) throw Error(Errc::invalid_config, "gateway needs a default backend");
}

void Gateway::set_backend(RoleKind role, std::shared_ptr<Backend> backend) {
    overrides_[role] = std::move(backend);
}

Backend& Gateway::backend_for(RoleKind role) const {
    auto it = overrides_.find(role);
    if (it != overrides_.end() && it->second) return *it->second;
    return *default_backend_;
}

std::map<std::string, std::string> Gateway::backend_ids() const {
    std::map<std::string, std::string> out;
    for (RoleKind role : {RoleKind::customizer, RoleKind::reviewer, RoleKind::author,
                          RoleKind::category_classifier}) {
        out[to_string(role)] = backend_for(role).id();
    }
    return out;
}

std::string Gateway::render(const std::string& template_id,
                            const std::map<std::string, std::string>& variables) const {
    return render_template_text(templates_.get(template_id).text, variables);
}

std::string Gateway::generate_with_retries(Backend& backend, const std::string& prompt,
                                           const AgentRequest& req) const {
    int attempt = 0;
    for (;;) {
        try {
            return backend.generate(prompt, req);
        } catch (const Error& e) {
            if (e.code() != Errc::transport_failure || !e.retryable() ||
                attempt >= config_.max_transport_retries) {
                throw;
            }
            long long delay = static_cast<long long>(config_.initial_backoff_ms) << attempt;
            delay = std::min<long long>(delay, config_.backoff_cap_ms);
            if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            ++attempt;
        }
    }
}

AgentResponse Gateway::complete(const AgentRequest& req) const {
    const PromptTemplate& tmpl = templates_.get(req.template_id);
    // Render first: an unbound variable must fail before any transport.
    const std::string prompt = render_template_text(tmpl.text, req.variables);
    Backend& backend = backend_for(req.role.kind);

    std::string raw = generate_with_retries(backend, prompt, req);
    if (tmpl.schema == ResponseSchema::free_text) {
        return {raw, json{{"text", raw}}, backend.id()};
    }

    auto try_parse = [&](const std::string& text) -> std::pair<bool, json> {
        auto payload = extract_structured_payload(text);
        if (!payload) return {false, json()};
        try {
            return {true, validate_payload(*payload, tmpl.schema)};
        } catch (const Error&) {
            return {false, json()};
        }
    };

    auto [ok, parsed] = try_parse(raw);
    if (!ok && config_.reprompt_on_parse_failure) {
        // One repair attempt with a format reminder, then a hard error.
        const std::string reprompt = prompt + "\n\n" + format_reminder(tmpl.schema);
        raw = generate_with_retries(backend, reprompt, req);
        std::tie(ok, parsed) = try_parse(raw);
    }
    if (!ok) {
        throw Error(Errc::parse_failure, "template '" + req.template_id +
                                             "': reply does not satisfy the response schema");
    }
    return {raw, parsed, backend.id()};
}

std::vector<std::vector<double>> Gateway::embed(const std::vector<std::string>& texts) const {
    return default_backend_->embed(texts);
}

}  // namespace critiq
