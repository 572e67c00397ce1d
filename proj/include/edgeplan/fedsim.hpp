#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "edgeplan/advisor.hpp"
#include "edgeplan/types.hpp"

namespace edgeplan {

struct Dataset {
    std::size_t dim = 0;
    std::size_t n_classes = 0;
    std::vector<std::vector<double>> x;
    std::vector<int> y;

    std::size_t size() const { return x.size(); }
};

Dataset make_gaussian_mixture(std::size_t n, std::size_t dim, std::size_t n_classes, double separation,
                              std::uint64_t seed);

// IID shards via a seeded shuffle and round-robin deal.
std::vector<Dataset> partition_iid(const Dataset& data, int n_clients, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Toy differentiable models

struct ModelParams {
    std::string arch; // "linear", "logistic", "mlp-<H>"
    std::size_t input_dim = 0;
    std::size_t n_classes = 0;
    std::size_t hidden = 0; // mlp only
    std::vector<double> weights;

    std::int64_t param_count() const { return static_cast<std::int64_t>(weights.size()); }
    std::int64_t bytes() const { return 4 * param_count(); }

    bool same_arch(const ModelParams& o) const {
        return arch == o.arch && input_dim == o.input_dim && n_classes == o.n_classes && hidden == o.hidden;
    }
};

ModelParams init_model(const std::string& arch, std::size_t input_dim, std::size_t n_classes,
                       std::uint64_t seed);

// Mean cross-entropy over the given examples; writes the gradient (same
// layout as weights) into grad.
double loss_and_grad(const ModelParams& model, const std::vector<const std::vector<double>*>& xs,
                     const std::vector<int>& ys, std::vector<double>& grad);

double evaluate_accuracy(const ModelParams& model, const Dataset& test);

ModelParams local_train(const ModelParams& model, const Dataset& shard, const FLConfig& cfg,
                        std::uint64_t seed);

ModelParams fedavg_aggregate(const std::vector<ModelParams>& models, const std::vector<double>& weights);

// Deterministic wall-clock accounting for one round: one broadcast over the
// downlink, parallel local training, then sequential uploads over the shared
// uplink.
double round_wallclock(std::int64_t model_bytes, const FLConfig& cfg, const Scenario& scenario,
                       const std::vector<double>& client_compute_s);

struct RoundPoint {
    int round = 0;
    double accuracy = 0.0;
    double wallclock_s = 0.0; // cumulative
};

std::vector<RoundPoint> run_fl(const FLConfig& cfg, const Dataset& train, const Dataset& test,
                               const Scenario& scenario, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Advisor-driven trial loop

struct TrialRecord {
    int trial_index = 0;
    FLConfig config;
    std::vector<RoundPoint> accuracy_curve;
    std::string advisor_raw;
};

// Patchable fields: model_arch, lr, optimizer, lr_schedule, augmentation.
// Unknown fields are ignored.
FLConfig apply_patch(const FLConfig& base, const nlohmann::json& patch);

// Trial 1 runs the template; from trial 2 on the advisor sees the purpose,
// the patchable fields, the dataset description, and every prior accuracy
// curve, and proposes a patch applied to the template. The loop stops on
// NoChange, on reaching target_acc, or at max_trials. A malformed reply
// aborts and returns the records so far.
std::vector<TrialRecord> trial_loop(Advisor& advisor, const FLConfig& tmpl, const Dataset& train,
                                    const Dataset& test, const Scenario& scenario, int max_trials,
                                    double target_acc, std::uint64_t seed);

// Bundled fixtures re-enacting the optimizer-then-schedule refinement story.
std::unique_ptr<ScriptedAdvisor> make_bundled_fl_advisor();
Dataset make_bundled_fl_train(std::uint64_t seed);
Dataset make_bundled_fl_test(std::uint64_t seed);
FLConfig bundled_trial_template();

} // namespace edgeplan
