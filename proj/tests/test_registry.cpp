#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "edgeplan/registry.hpp"
#include "edgeplan/rng.hpp"
#include "test_util.hpp"

using namespace edgeplan;
namespace tu = edgeplan::testutil;

static const char* kMinimalScenario = R"({
  "id": "minimal",
  "models": [
    {"id": "m", "task_kind": "image_classification", "input_bytes": 100,
     "layers": [{"flops": 10, "out_feature_bytes": 5}]}
  ],
  "devices": [
    {"id": "c", "tier": "client", "throughput": 1e9},
    {"id": "e", "tier": "edge", "throughput": 1e10}
  ],
  "links": {
    "client_edge_up": {"rate": 1000, "propagation_delay": 0},
    "client_edge_down": {"rate": 1000, "propagation_delay": 0},
    "edge_cloud_up": {"rate": 1000, "propagation_delay": 0},
    "edge_cloud_down": {"rate": 1000, "propagation_delay": 0}
  }
})";

TEST_CASE("minimal scenario parses") {
    Scenario s = parse_scenario(kMinimalScenario);
    CHECK(s.models.size() == 1);
    CHECK(s.devices.size() == 2);
    CHECK(s.id == "minimal");
}

TEST_CASE("missing link is a validation error") {
    std::string text = kMinimalScenario;
    auto pos = text.find("\"client_edge_up\"");
    text.replace(pos, 16, "\"client_edge_upX\"");
    try {
        parse_scenario(text);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "links.client_edge_up");
        CHECK(e.reason == "missing");
    }
}

TEST_CASE("malformed json reports a parse error") {
    CHECK_THROWS_AS(parse_scenario("{ not json"), ParseError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), FileNotFound);
}

TEST_CASE("bundled default scenario carries the documented FL settings") {
    Scenario s = tu::default_scenario();
    CHECK(s.link("client_edge_up").rate == 250000.0);
    CHECK(s.link("client_edge_down").rate == 500000.0);
    REQUIRE(s.fl.has_value());
    CHECK(s.fl->n_clients == 10);
    CHECK(s.fl->local_epochs == 10);
    CHECK(s.fl->global_rounds == 30);
    CHECK(s.fl->batch_size == 100);
}

TEST_CASE("invariant violations are rejected") {
    std::string no_layers = kMinimalScenario;
    auto pos = no_layers.find("[{\"flops\": 10, \"out_feature_bytes\": 5}]");
    no_layers.replace(pos, 39, "[]");
    CHECK_THROWS_AS(parse_scenario(no_layers), ValidationError);

    std::string zero_flops = kMinimalScenario;
    pos = zero_flops.find("\"flops\": 10");
    zero_flops.replace(pos, 11, "\"flops\": 0");
    CHECK_THROWS_AS(parse_scenario(zero_flops), ValidationError);

    std::string dup_ids = kMinimalScenario;
    pos = dup_ids.find("\"id\": \"e\"");
    dup_ids.replace(pos, 9, "\"id\": \"c\"");
    CHECK_THROWS_AS(parse_scenario(dup_ids), ValidationError);
}

TEST_CASE("candidates_for: single registered classifier") {
    Scenario s = tu::tiny_scenario();
    auto cands = candidates_for(TaskKind::classification(), s);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].id == "m0");
}

TEST_CASE("candidates_for: absent kind gives empty list") {
    Scenario s = tu::tiny_scenario();
    CHECK(candidates_for(TaskKind::pose_detection(), s).empty());
}

TEST_CASE("candidates_for: sorted by id") {
    Scenario s = tu::tiny_scenario();
    ModelManifest b = s.models[0];
    b.id = "b";
    b.task_kind = TaskKind::captioning();
    ModelManifest a = b;
    a.id = "a";
    s.models.push_back(b);
    s.models.push_back(a);
    auto cands = candidates_for(TaskKind::captioning(), s);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].id == "a");
    CHECK(cands[1].id == "b");
}

TEST_CASE("candidates_for matches brute-force filter on random scenarios") {
    Rng rng(42);
    std::vector<TaskKind> kinds{TaskKind::classification(), TaskKind::captioning(), TaskKind::vqa(),
                                TaskKind::make_custom("x")};
    for (int iter = 0; iter < 100; ++iter) {
        Scenario s = tu::tiny_scenario();
        s.models.clear();
        int n = 1 + static_cast<int>(rng.next_below(8));
        for (int i = 0; i < n; ++i) {
            ModelManifest m = tu::random_manifest(rng, 3);
            m.id = "m" + std::to_string(i);
            m.task_kind = kinds[rng.next_below(kinds.size())];
            s.models.push_back(m);
        }
        for (const auto& k : kinds) {
            auto got = candidates_for(k, s);
            std::vector<ModelManifest> expect;
            for (const auto& m : s.models)
                if (m.task_kind == k) expect.push_back(m);
            std::sort(expect.begin(), expect.end(),
                      [](const auto& a, const auto& b) { return a.id < b.id; });
            CHECK(got == expect);
        }
    }
}

TEST_CASE("load is pure and round-trips through serialization") {
    Scenario s1 = tu::default_scenario();
    Scenario s2 = tu::default_scenario();
    CHECK(s1 == s2);

    std::string text = serialize_scenario(s1);
    Scenario s3 = parse_scenario(text);
    CHECK(s1 == s3);
    CHECK(serialize_scenario(s3) == text);
}

TEST_CASE("task kind and config strings round-trip") {
    for (const char* name : {"image_classification", "image_captioning", "vqa", "pose_detection",
                             "pose_to_image", "mood_from_traffic", "mood_from_physio", "custom:mood"}) {
        CHECK(to_string(task_kind_from_string(name)) == name);
    }
    for (const char* opt : {"sgd", "momentum:0.9", "adam:0.9:0.999:1e-08"}) {
        CHECK(to_string(optimizer_from_string(opt)) == opt);
    }
    CHECK(to_string(schedule_from_string("step:0.1:10")) == "step:0.1:10");
    CHECK(to_string(augmentation_from_string("jitter:0.05")) == "jitter:0.05");
}
