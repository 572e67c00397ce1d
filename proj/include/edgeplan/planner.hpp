#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "edgeplan/advisor.hpp"
#include "edgeplan/types.hpp"

namespace edgeplan {

struct PlannerMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double mean_latency = 0.0; // seconds per plan() call, wall time
};

// Deterministic advisor context: serialized prefix, demonstrations verbatim
// and in order, history oldest-first, then the request. Byte-stable.
std::string build_context(const PrefixSpec& prefix, const std::string& request,
                          const std::vector<std::string>& history);

// Resolved, validated plan for a natural-language request.
TaskPlan plan(const std::string& request, const Scenario& scenario, Advisor& advisor);

void validate_plan(const TaskPlan& p, const Scenario& scenario);

struct LabeledRequest {
    std::string request;
    TaskKind gold;
};

// One JSON record per line: {"request": "...", "label": "image_captioning"}.
std::vector<LabeledRequest> load_request_dataset(const std::string& path);

// Accuracy scores the first step's task_kind against gold; macro-F1 averages
// per-class F1 over the gold classes; a failed plan() counts as an error
// class and is wrong for every metric.
PlannerMetrics evaluate_planner(const std::vector<LabeledRequest>& dataset, const Scenario& scenario,
                                Advisor& advisor);

// The keyword rule set shipped with the default scenario.
std::unique_ptr<KeywordMockAdvisor> make_bundled_keyword_advisor(const Scenario& scenario);

} // namespace edgeplan
