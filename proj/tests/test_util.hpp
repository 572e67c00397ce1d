#pragma once

#include <string>

#include "edgeplan/registry.hpp"
#include "edgeplan/rng.hpp"
#include "edgeplan/types.hpp"

namespace edgeplan::testutil {

inline std::string data_path(const std::string& name) {
    return std::string(EDGEPLAN_DATA_DIR) + "/" + name;
}

inline Scenario default_scenario() { return load_scenario(data_path("default_scenario.json")); }

// Minimal valid scenario; callers tweak fields as needed.
inline Scenario tiny_scenario() {
    Scenario s;
    s.id = "tiny";
    s.planning_latency_s = 0.0;
    ModelManifest m;
    m.id = "m0";
    m.task_kind = TaskKind::classification();
    m.input_bytes = 1000;
    m.layers = {{1000000, 100}};
    m.param_count = 10;
    s.models.push_back(m);
    s.devices = {
        {"c0", 1e9, DeviceTier::Client},
        {"e0", 1e10, DeviceTier::Edge},
        {"cl0", 1e11, DeviceTier::Cloud},
    };
    s.links["client_edge_up"] = {250000, 0.0};
    s.links["client_edge_down"] = {500000, 0.0};
    s.links["edge_cloud_up"] = {125000, 0.1};
    s.links["edge_cloud_down"] = {125000, 0.1};
    s.planner_prefix.solvable_tasks = {TaskKind::classification()};
    return s;
}

// Random manifest with L <= max_layers; feature sizes arbitrary positive.
inline ModelManifest random_manifest(Rng& rng, int max_layers = 12) {
    ModelManifest m;
    m.id = "rand";
    m.task_kind = TaskKind::classification();
    m.input_bytes = 1000 + static_cast<std::int64_t>(rng.next_below(500000));
    int n_layers = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_layers)));
    for (int i = 0; i < n_layers; ++i) {
        LayerProfile l;
        l.flops = 1 + static_cast<std::int64_t>(rng.next_below(2000000000ULL));
        l.out_feature_bytes = static_cast<std::int64_t>(rng.next_below(400000));
        m.layers.push_back(l);
    }
    if (m.layers.back().out_feature_bytes == 0) m.layers.back().out_feature_bytes = 1;
    return m;
}

inline Scenario random_scenario(Rng& rng) {
    Scenario s = tiny_scenario();
    s.devices[0].throughput = 1e8 + rng.next_double() * 1e10;
    s.devices[1].throughput = 1e9 + rng.next_double() * 1e11;
    s.devices[2].throughput = 1e10 + rng.next_double() * 1e12;
    for (auto& [name, link] : s.links) {
        link.rate = 1e4 + rng.next_double() * 1e7;
        link.propagation_delay = rng.next_double() * 0.2;
    }
    s.planning_latency_s = rng.next_double();
    return s;
}

} // namespace edgeplan::testutil
