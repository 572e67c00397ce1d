#include "edgeplan/advisor.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "edgeplan/registry.hpp"

namespace edgeplan {

using nlohmann::json;

AdvisorReply AdvisorReply::make_plan(TaskPlan p) {
    AdvisorReply r;
    r.kind = ReplyKind::Plan;
    r.plan = std::move(p);
    r.raw_text = serialize_reply(r);
    return r;
}

AdvisorReply AdvisorReply::make_patch(json patch) {
    AdvisorReply r;
    r.kind = ReplyKind::FLProposal;
    r.patch = std::move(patch);
    r.raw_text = serialize_reply(r);
    return r;
}

AdvisorReply AdvisorReply::no_change() {
    AdvisorReply r;
    r.kind = ReplyKind::NoChange;
    r.raw_text = "NO_CHANGE";
    return r;
}

std::string serialize_reply(const AdvisorReply& reply) {
    switch (reply.kind) {
        case ReplyKind::Plan: return plan_to_json(reply.plan).dump();
        case ReplyKind::FLProposal: return json{{"patch", reply.patch}}.dump();
        case ReplyKind::NoChange: return "NO_CHANGE";
    }
    return "NO_CHANGE";
}

// Locates the first balanced {...} block starting at or after `from`,
// honoring string literals and escapes. Returns npos if none.
static std::size_t find_block(const std::string& text, std::size_t from, std::size_t& end_out) {
    std::size_t start = text.find('{', from);
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    end_out = i + 1;
                    return start;
                }
            }
        }
        start = text.find('{', start + 1);
    }
    return std::string::npos;
}

AdvisorReply parse_reply(const std::string& raw_text, ExpectedReply expect) {
    const char* required = expect == ExpectedReply::Plan ? "tasks" : "patch";
    const std::size_t nc_pos = raw_text.find("NO_CHANGE");

    std::size_t from = 0;
    while (from < raw_text.size()) {
        std::size_t end = 0;
        std::size_t start = find_block(raw_text, from, end);
        if (start == std::string::npos || (nc_pos != std::string::npos && nc_pos < start)) break;
        json j = json::parse(raw_text.substr(start, end - start), nullptr, false);
        if (j.is_object() && j.contains(required)) {
            try {
                if (expect == ExpectedReply::Plan) {
                    AdvisorReply r;
                    r.kind = ReplyKind::Plan;
                    r.plan = plan_from_json(j);
                    r.raw_text = raw_text;
                    return r;
                }
                if (!j["patch"].is_object()) throw MalformedReply(raw_text);
                AdvisorReply r;
                r.kind = ReplyKind::FLProposal;
                r.patch = j["patch"];
                r.raw_text = raw_text;
                return r;
            } catch (const ValidationError&) {
                throw MalformedReply(raw_text);
            }
        }
        from = (end > start) ? end : start + 1;
    }

    if (nc_pos != std::string::npos) {
        AdvisorReply r = AdvisorReply::no_change();
        r.raw_text = raw_text;
        return r;
    }
    throw MalformedReply(raw_text);
}

// ---------------------------------------------------------------------------
// Deterministic backends

// The planner terminates every context with a "REQUEST: <text>" line.
static std::string extract_request(const std::string& context) {
    const std::string marker = "REQUEST: ";
    std::size_t pos = context.rfind("\nREQUEST: ");
    if (pos != std::string::npos) pos += 1;
    else if (context.rfind(marker, 0) == 0) pos = 0;
    else return context;
    std::size_t start = pos + marker.size();
    std::size_t end = context.find('\n', start);
    return context.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

static std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

KeywordMockAdvisor::KeywordMockAdvisor(std::vector<KeywordRule> rules) : rules_(std::move(rules)) {
    if (rules_.empty()) throw ValidationError("keyword_mock_advisor", "rules must be non-empty");
}

AdvisorReply KeywordMockAdvisor::ask(const std::string& context) {
    const std::string request = lowercase(extract_request(context));
    for (const auto& rule : rules_) {
        bool all = true;
        for (const auto& kw : rule.keywords) {
            if (request.find(lowercase(kw)) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return AdvisorReply::make_plan(rule.plan);
    }
    throw InvalidPlan("no keyword rule matched request: " + request);
}

ScriptedAdvisor::ScriptedAdvisor(std::vector<AdvisorReply> replies) : replies_(std::move(replies)) {}

AdvisorReply ScriptedAdvisor::ask(const std::string&) {
    if (cursor_ < replies_.size()) return replies_[cursor_++];
    return AdvisorReply::no_change();
}

// ---------------------------------------------------------------------------
// Remote backend

RemoteAdvisor::RemoteAdvisor(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.timeout_s <= 0.0) throw ValidationError("advisor.timeout", "must be > 0");
    if (cfg_.max_retries < 0) throw ValidationError("advisor.max_retries", "must be >= 0");
}

AdvisorReply RemoteAdvisor::ask(const std::string& context) {
    json body{
        {"model", cfg_.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", context}}})},
        {"temperature", cfg_.temperature},
    };

    httplib::Client client(cfg_.endpoint);
    client.set_connection_timeout(std::chrono::milliseconds(static_cast<int>(cfg_.timeout_s * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(cfg_.timeout_s * 1000)));
    httplib::Headers headers;
    if (const char* key = std::getenv("EDGEPLAN_API_KEY"))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    std::string error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::seconds(1));
        auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout || res.error() == httplib::Error::Read)
                error = "timeout";
            else
                error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            error = "HTTP " + std::to_string(res->status);
            continue;
        }
        json reply = json::parse(res->body, nullptr, false);
        if (!reply.is_object() || !reply.contains("choices") || reply["choices"].empty())
            throw MalformedReply(res->body);
        const json& msg = reply["choices"][0];
        if (!msg.contains("message") || !msg["message"].contains("content"))
            throw MalformedReply(res->body);
        return parse_reply(msg["message"]["content"].get<std::string>(), cfg_.expect);
    }
    if (error == "timeout") throw TimeoutError("advisor call timed out: " + cfg_.endpoint);
    throw TransportError("advisor unreachable (" + error + "): " + cfg_.endpoint);
}

} // namespace edgeplan
