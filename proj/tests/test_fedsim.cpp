#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edgeplan/fedsim.hpp"
#include "edgeplan/rng.hpp"
#include "test_util.hpp"

using namespace edgeplan;
namespace tu = edgeplan::testutil;
using doctest::Approx;
using nlohmann::json;

TEST_CASE("gaussian mixture: deterministic, shaped, labeled") {
    Dataset d1 = make_gaussian_mixture(300, 8, 3, 2.0, 42);
    Dataset d2 = make_gaussian_mixture(300, 8, 3, 2.0, 42);
    CHECK(d1.x == d2.x);
    CHECK(d1.y == d2.y);
    CHECK(d1.size() == 300);
    CHECK(d1.dim == 8);
    for (int y : d1.y) {
        CHECK(y >= 0);
        CHECK(y < 3);
    }
    // Round-robin class assignment before the shuffle: exactly 100 per class.
    for (int cls = 0; cls < 3; ++cls)
        CHECK(std::count(d1.y.begin(), d1.y.end(), cls) == 100);
}

TEST_CASE("partition_iid: balanced shards that exactly cover the data") {
    Dataset d = make_gaussian_mixture(103, 4, 2, 1.0, 7);
    auto shards = partition_iid(d, 10, 99);
    REQUIRE(shards.size() == 10);
    std::size_t total = 0;
    std::vector<std::vector<double>> all_x;
    for (const auto& s : shards) {
        CHECK(s.size() >= 10);
        CHECK(s.size() <= 11);
        total += s.size();
        for (const auto& x : s.x) all_x.push_back(x);
    }
    CHECK(total == 103);
    std::vector<std::vector<double>> orig = d.x;
    std::sort(all_x.begin(), all_x.end());
    std::sort(orig.begin(), orig.end());
    CHECK(all_x == orig);
}

TEST_CASE("init_model: parameter counts per architecture") {
    CHECK(init_model("linear", 16, 3, 1).param_count() == 3 * 16 + 3);
    CHECK(init_model("logistic", 16, 2, 1).param_count() == 17);
    // mlp-16 on d=8, c=3: 16*8 + 16 + 3*16 + 3 = 195
    CHECK(init_model("mlp-16", 8, 3, 1).param_count() == 195);
    CHECK(init_model("mlp-16", 8, 3, 1).bytes() == 4 * 195);
    CHECK_THROWS_AS(init_model("resnet", 8, 3, 1), UnknownArch);
    CHECK_THROWS_AS(init_model("logistic", 8, 3, 1), UnknownArch);
    CHECK(init_model("linear", 16, 3, 5).weights == init_model("linear", 16, 3, 5).weights);
}

TEST_CASE("one full-batch SGD epoch matches the hand-derived gradient step") {
    // Logistic, d=1, points (x=1, y=1) and (x=-1, y=0), zero init, lr=0.1.
    ModelParams m;
    m.arch = "logistic";
    m.input_dim = 1;
    m.n_classes = 2;
    m.weights = {0.0, 0.0};

    Dataset shard;
    shard.dim = 1;
    shard.n_classes = 2;
    shard.x = {{1.0}, {-1.0}};
    shard.y = {1, 0};

    FLConfig cfg;
    cfg.local_epochs = 1;
    cfg.batch_size = 2;
    cfg.lr = 0.1;
    ModelParams out = local_train(m, shard, cfg, 3);
    // grad_w = mean of (s - y) x = ((0.5-1)*1 + (0.5-0)*(-1))/2 = -0.5; grad_b = 0.
    CHECK(out.weights[0] == Approx(0.05).epsilon(1e-12));
    CHECK(out.weights[1] == Approx(0.0));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(17);
    Dataset d = make_gaussian_mixture(12, 5, 3, 1.5, 3);
    std::vector<const std::vector<double>*> xs;
    for (const auto& x : d.x) xs.push_back(&x);

    for (const char* arch : {"linear", "mlp-6", "logistic"}) {
        std::size_t n_classes = std::string(arch) == "logistic" ? 2 : 3;
        std::vector<int> ys = d.y;
        if (n_classes == 2)
            for (int& y : ys) y = y % 2;
        ModelParams m = init_model(arch, d.dim, n_classes, 21);
        std::vector<double> grad;
        loss_and_grad(m, xs, ys, grad);

        const double eps = 1e-6;
        int checked = 0;
        while (checked < 100) {
            std::size_t i = rng.next_below(m.weights.size());
            ModelParams mp = m, mm = m;
            mp.weights[i] += eps;
            mm.weights[i] -= eps;
            std::vector<double> scratch;
            double fd = (loss_and_grad(mp, xs, ys, scratch) - loss_and_grad(mm, xs, ys, scratch)) / (2 * eps);
            double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
            CHECK(std::abs(fd - grad[i]) / denom <= 1e-4);
            ++checked;
        }
    }
}

TEST_CASE("fedavg_aggregate: documented example and weighting") {
    ModelParams a;
    a.arch = "linear";
    a.input_dim = 1;
    a.n_classes = 1;
    a.weights = {1.0, 3.0};
    ModelParams b = a;
    b.weights = {5.0, 7.0};

    SUBCASE("equal weights average") {
        ModelParams avg = fedavg_aggregate({a, b}, {1.0, 1.0});
        CHECK(avg.weights == std::vector<double>{3.0, 5.0});
    }
    SUBCASE("weights are normalized, not assumed normalized") {
        ModelParams avg = fedavg_aggregate({a, b}, {30.0, 10.0});
        CHECK(avg.weights[0] == Approx(2.0));
        CHECK(avg.weights[1] == Approx(4.0));
    }
    SUBCASE("architecture mismatch throws") {
        ModelParams c = b;
        c.input_dim = 2;
        c.weights = {1, 2};
        CHECK_THROWS_AS(fedavg_aggregate({a, c}, {1.0, 1.0}), ArchMismatch);
        CHECK_THROWS_AS(fedavg_aggregate({}, {}), ValidationError);
    }
}

TEST_CASE("round_wallclock: documented 544 s upload term") {
    Scenario s = tu::tiny_scenario(); // up 250000/0, down 500000/0
    FLConfig cfg;
    cfg.n_clients = 10;
    std::int64_t model_bytes = 4 * 3400000; // 13.6 MB
    double wc = round_wallclock(model_bytes, cfg, s, {2.0, 5.0, 3.0});
    double broadcast = 13.6e6 / 500000.0;  // 27.2
    double upload = 10.0 * 13.6e6 / 250000.0; // 544
    CHECK(upload == Approx(544.0));
    CHECK(wc == Approx(broadcast + 5.0 + upload));
    CHECK(round_wallclock(model_bytes, cfg, s, {}) == Approx(broadcast + upload));
}

TEST_CASE("LrSchedule: step decay drops every N rounds") {
    LrSchedule step = schedule_from_string("step:0.1:10");
    CHECK(step.at(0.5, 1) == Approx(0.5));
    CHECK(step.at(0.5, 10) == Approx(0.5));
    CHECK(step.at(0.5, 11) == Approx(0.05));
    CHECK(step.at(0.5, 21) == Approx(0.005));
    LrSchedule constant;
    CHECK(constant.at(0.5, 99) == 0.5);
}

TEST_CASE("single-client federated run equals the centralized run bit-for-bit") {
    Dataset train = make_gaussian_mixture(200, 6, 3, 1.5, 5);
    Dataset test = make_gaussian_mixture(80, 6, 3, 1.5, 6);
    Scenario s = tu::tiny_scenario();
    FLConfig cfg;
    cfg.n_clients = 1;
    cfg.batch_size = 32;
    cfg.local_epochs = 2;
    cfg.global_rounds = 5;
    cfg.lr = 0.05;
    const std::uint64_t seed = 77;

    auto curve = run_fl(cfg, train, test, s, seed);

    // Centralized twin: the same shard (the whole set, in dealt order), the
    // same derived seeds, no aggregation effect.
    Dataset shard = partition_iid(train, 1, seed)[0];
    ModelParams global = init_model(cfg.model_arch, train.dim, train.n_classes, derive_seed(seed, "init"));
    REQUIRE(curve.size() == 5);
    for (int round = 1; round <= cfg.global_rounds; ++round) {
        FLConfig rc = cfg;
        rc.lr = cfg.lr_schedule.at(cfg.lr, round);
        global = local_train(global, shard, rc, derive_seed(seed, "local", static_cast<std::uint64_t>(round), 0));
        CHECK(curve[static_cast<std::size_t>(round - 1)].accuracy == evaluate_accuracy(global, test));
    }
}

TEST_CASE("one-local-step equal-shard FedAvg equals a pooled gradient step") {
    Dataset train = make_gaussian_mixture(200, 6, 3, 1.5, 9);
    Dataset test = make_gaussian_mixture(50, 6, 3, 1.5, 10);
    Scenario s = tu::tiny_scenario();
    FLConfig cfg;
    cfg.n_clients = 10; // 200 / 10 = 20 per shard, exactly equal
    cfg.batch_size = 20; // full shard batch
    cfg.local_epochs = 1;
    cfg.global_rounds = 1;
    cfg.lr = 0.1;
    const std::uint64_t seed = 13;

    auto curve = run_fl(cfg, train, test, s, seed);

    ModelParams init = init_model(cfg.model_arch, train.dim, train.n_classes, derive_seed(seed, "init"));
    std::vector<const std::vector<double>*> xs;
    for (const auto& x : train.x) xs.push_back(&x);
    std::vector<double> grad;
    loss_and_grad(init, xs, train.y, grad);
    ModelParams pooled = init;
    for (std::size_t i = 0; i < pooled.weights.size(); ++i) pooled.weights[i] -= cfg.lr * grad[i];

    // Rebuild the aggregated round-1 model and compare parameter-wise.
    std::vector<Dataset> shards = partition_iid(train, cfg.n_clients, seed);
    std::vector<ModelParams> locals;
    std::vector<double> ws;
    for (std::size_t i = 0; i < shards.size(); ++i) {
        locals.push_back(local_train(init, shards[i], cfg, derive_seed(seed, "local", 1, i)));
        ws.push_back(static_cast<double>(shards[i].size()));
    }
    ModelParams fed = fedavg_aggregate(locals, ws);
    for (std::size_t i = 0; i < fed.weights.size(); ++i) {
        double denom = std::max(std::abs(pooled.weights[i]), 1e-9);
        CHECK(std::abs(fed.weights[i] - pooled.weights[i]) / denom <= 1e-6);
    }
    CHECK(curve[0].accuracy == evaluate_accuracy(fed, test));
}

TEST_CASE("run_fl with the scenario's default configuration reaches 0.85 accuracy") {
    Scenario s = tu::default_scenario();
    REQUIRE(s.fl.has_value());
    Dataset train = make_bundled_fl_train(0);
    Dataset test = make_bundled_fl_test(0);
    auto curve = run_fl(*s.fl, train, test, s, derive_seed(0, "fl-run"));
    REQUIRE(curve.size() == 30);
    CHECK(curve.back().accuracy >= 0.85);
    // Wall-clock is cumulative and strictly increasing.
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].wallclock_s > curve[i - 1].wallclock_s);
}

TEST_CASE("apply_patch: only the advertised fields are patchable") {
    FLConfig base = bundled_trial_template();
    json patch{{"optimizer", "adam"}, {"lr", 0.01}, {"lr_schedule", "step:0.5:5"},
               {"augmentation", "jitter:0.1"}, {"model_arch", "mlp-8"},
               {"n_clients", 99}, {"global_rounds", 1}, {"nonsense", true}};
    FLConfig out = apply_patch(base, patch);
    CHECK(out.optimizer.kind == OptimizerKind::Adam);
    CHECK(out.lr == Approx(0.01));
    CHECK(out.lr_schedule.kind == ScheduleKind::StepDecay);
    CHECK(out.augmentation.kind == AugmentationKind::GaussianJitter);
    CHECK(out.model_arch == "mlp-8");
    CHECK(out.n_clients == base.n_clients);
    CHECK(out.global_rounds == base.global_rounds);
}

TEST_CASE("trial_loop termination rules") {
    Dataset train = make_gaussian_mixture(100, 4, 2, 2.0, 1);
    Dataset test = make_gaussian_mixture(40, 4, 2, 2.0, 2);
    Scenario s = tu::tiny_scenario();
    FLConfig tmpl;
    tmpl.n_clients = 2;
    tmpl.batch_size = 50;
    tmpl.local_epochs = 1;
    tmpl.global_rounds = 2;
    tmpl.lr = 0.05;

    SUBCASE("immediate NoChange keeps only the template trial") {
        ScriptedAdvisor advisor({});
        auto records = trial_loop(advisor, tmpl, train, test, s, 5, 2.0, 4);
        REQUIRE(records.size() == 1);
        CHECK(records[0].trial_index == 1);
        CHECK(records[0].config == tmpl);
        CHECK(records[0].advisor_raw.empty());
    }
    SUBCASE("max_trials caps the loop") {
        ScriptedAdvisor advisor({AdvisorReply::make_patch(json{{"lr", 0.01}}),
                                 AdvisorReply::make_patch(json{{"lr", 0.02}}),
                                 AdvisorReply::make_patch(json{{"lr", 0.03}})});
        auto records = trial_loop(advisor, tmpl, train, test, s, 2, 2.0, 4);
        REQUIRE(records.size() == 2);
        CHECK(records[1].config.lr == Approx(0.01));
    }
    SUBCASE("three patches then NoChange give four trials") {
        auto advisor = make_bundled_fl_advisor();
        auto records = trial_loop(*advisor, tmpl, train, test, s, 10, 2.0, 4);
        REQUIRE(records.size() == 4);
        // Patches are bundled cumulatively and always apply to the template.
        CHECK(records[1].config.optimizer.kind == OptimizerKind::Adam);
        CHECK(records[1].config.lr_schedule.kind == ScheduleKind::Constant);
        CHECK(records[2].config.optimizer.kind == OptimizerKind::Adam);
        CHECK(records[2].config.lr_schedule.kind == ScheduleKind::StepDecay);
        CHECK(records[3].config.augmentation.kind == AugmentationKind::GaussianJitter);
        for (std::size_t i = 0; i < records.size(); ++i)
            CHECK(records[i].trial_index == static_cast<int>(i) + 1);
    }
    SUBCASE("reaching the accuracy target stops the loop") {
        auto advisor = make_bundled_fl_advisor();
        auto records = trial_loop(*advisor, tmpl, train, test, s, 10, 0.0, 4);
        CHECK(records.size() == 1); // trial 1 already meets target 0.0
    }
    SUBCASE("a malformed reply returns the partial records") {
        FunctionAdvisor broken([](const std::string&) -> AdvisorReply {
            throw MalformedReply("static over the wire");
        });
        auto records = trial_loop(broken, tmpl, train, test, s, 5, 2.0, 4);
        CHECK(records.size() == 1);
    }
}

TEST_CASE("trial_loop feeds prior curves back to the advisor") {
    Dataset train = make_gaussian_mixture(100, 4, 2, 2.0, 1);
    Dataset test = make_gaussian_mixture(40, 4, 2, 2.0, 2);
    Scenario s = tu::tiny_scenario();
    FLConfig tmpl;
    tmpl.n_clients = 2;
    tmpl.batch_size = 50;
    tmpl.local_epochs = 1;
    tmpl.global_rounds = 2;
    tmpl.lr = 0.05;

    std::vector<std::string> contexts;
    FunctionAdvisor recorder([&](const std::string& ctx) -> AdvisorReply {
        contexts.push_back(ctx);
        if (contexts.size() == 1) return AdvisorReply::make_patch(json{{"lr", 0.01}});
        return AdvisorReply::no_change();
    });
    auto records = trial_loop(recorder, tmpl, train, test, s, 5, 2.0, 4);
    REQUIRE(records.size() == 2);
    REQUIRE(contexts.size() == 2);
    CHECK(contexts[0].find("PURPOSE:") != std::string::npos);
    CHECK(contexts[0].find("PATCHABLE: model_arch, lr, optimizer, lr_schedule, augmentation") != std::string::npos);
    CHECK(contexts[0].find("DATASET: n_samples=100, dim=4, classes=2") != std::string::npos);
    CHECK(contexts[0].find("TRIAL 1 CONFIG:") != std::string::npos);
    CHECK(contexts[0].find("TRIAL 1 ACCURACY CURVE:") != std::string::npos);
    CHECK(contexts[0].find("TRIAL 2") == std::string::npos);
    CHECK(contexts[1].find("TRIAL 2 CONFIG:") != std::string::npos);
}

TEST_CASE("bundled trial loop improves on the template by at least 0.02") {
    Scenario s = tu::default_scenario();
    Dataset train = make_bundled_fl_train(0);
    Dataset test = make_bundled_fl_test(0);
    auto advisor = make_bundled_fl_advisor();
    auto records = trial_loop(*advisor, bundled_trial_template(), train, test, s, 5, 0.99,
                              derive_seed(0, "fl-auto"));
    REQUIRE(records.size() >= 3);
    double base = records[0].accuracy_curve.back().accuracy;
    double best = base;
    for (const auto& r : records) best = std::max(best, r.accuracy_curve.back().accuracy);
    CHECK(best - base >= 0.02);
}
