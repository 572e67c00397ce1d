#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/types.hpp"

namespace edgeplan {

enum class ReplyKind { Plan, FLProposal, NoChange };

struct AdvisorReply {
    ReplyKind kind = ReplyKind::NoChange;
    TaskPlan plan;         // ReplyKind::Plan
    nlohmann::json patch;  // ReplyKind::FLProposal: {field -> value}
    std::string raw_text;

    static AdvisorReply make_plan(TaskPlan p);
    static AdvisorReply make_patch(nlohmann::json patch);
    static AdvisorReply no_change();
};

enum class ExpectedReply { Plan, FLProposal };

// Extracts the first well-formed JSON object from raw_text (replies may be
// wrapped in prose) or the NO_CHANGE sentinel, whichever appears first.
// Unknown fields are ignored. Throws MalformedReply otherwise; never aborts.
AdvisorReply parse_reply(const std::string& raw_text, ExpectedReply expect);

std::string serialize_reply(const AdvisorReply& reply);

class Advisor {
public:
    virtual ~Advisor() = default;
    virtual AdvisorReply ask(const std::string& context) = 0;
};

// ---------------------------------------------------------------------------
// Deterministic backends

struct KeywordRule {
    std::vector<std::string> keywords; // all must appear, case-insensitively, in the request
    TaskPlan plan;
};

// First rule whose every keyword appears in the request fires; rules are
// tried in list order. No match throws InvalidPlan.
class KeywordMockAdvisor : public Advisor {
public:
    explicit KeywordMockAdvisor(std::vector<KeywordRule> rules);
    AdvisorReply ask(const std::string& context) override;

private:
    std::vector<KeywordRule> rules_;
};

// Plays back a fixed reply sequence, then NoChange forever. The cursor is the
// one mutable piece; concurrent callers must serialize access externally.
class ScriptedAdvisor : public Advisor {
public:
    explicit ScriptedAdvisor(std::vector<AdvisorReply> replies);
    AdvisorReply ask(const std::string& context) override;

private:
    std::vector<AdvisorReply> replies_;
    std::size_t cursor_ = 0;
};

class FunctionAdvisor : public Advisor {
public:
    explicit FunctionAdvisor(std::function<AdvisorReply(const std::string&)> fn) : fn_(std::move(fn)) {}
    AdvisorReply ask(const std::string& context) override { return fn_(context); }

private:
    std::function<AdvisorReply(const std::string&)> fn_;
};

// ---------------------------------------------------------------------------
// Remote chat-completion backend

struct RemoteConfig {
    std::string endpoint;   // e.g. http://localhost:8080
    std::string model_name; // forwarded verbatim
    double timeout_s = 30.0;
    int max_retries = 2;
    double temperature = 0.0;
    ExpectedReply expect = ExpectedReply::Plan;
};

// POSTs {model, messages, temperature} to <endpoint>/chat/completions and
// parses the first choice's message content. Bearer token, when needed, is
// read from EDGEPLAN_API_KEY. Transport failures retry with 1 s backoff.
class RemoteAdvisor : public Advisor {
public:
    explicit RemoteAdvisor(RemoteConfig cfg);
    AdvisorReply ask(const std::string& context) override;

private:
    RemoteConfig cfg_;
};

} // namespace edgeplan
