#pragma once

#include <string>
#include <vector>

#include "edgeplan/offload.hpp"
#include "edgeplan/types.hpp"

namespace edgeplan {

struct RunReport {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::string command;
    std::vector<std::string> rows; // primary CSV output, header first
    int exit_code = 0;
};

// Exit codes: 0 success, 2 usage, 3 scenario validation, 4 advisor failure,
// 5 internal invariant breach.
RunReport run(const std::vector<std::string>& argv);

struct StepLatency {
    PlanStep step;
    Scheme scheme; // best of co-inference / client-only / edge-only
    LatencyBreakdown latency; // planning excluded; charged once at plan level
};

struct EndToEndReport {
    std::vector<StepLatency> steps;
    double planning_s = 0.0;
    double fusion_s = 0.0; // only for FuseOutputs plans
    double total_s = 0.0;
};

// Sequential steps sum; FuseOutputs steps run in parallel and pay a fixed
// fusion overhead on top of the slowest branch.
EndToEndReport emit_end_to_end(const TaskPlan& plan, const Scenario& scenario);

} // namespace edgeplan
