#include "edgeplan/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "edgeplan/offload.hpp"
#include "edgeplan/rng.hpp"

namespace edgeplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Data

Dataset make_gaussian_mixture(std::size_t n, std::size_t dim, std::size_t n_classes, double separation,
                              std::uint64_t seed) {
    Rng rng(derive_seed(seed, "gaussian-mixture"));
    std::vector<std::vector<double>> means(n_classes, std::vector<double>(dim));
    for (auto& m : means) {
        double norm = 0.0;
        for (double& v : m) {
            v = rng.next_normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : m) v = v / norm * separation;
    }

    Dataset d;
    d.dim = dim;
    d.n_classes = n_classes;
    d.x.reserve(n);
    d.y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int cls = static_cast<int>(i % n_classes);
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = means[static_cast<std::size_t>(cls)][j] + rng.next_normal();
        d.x.push_back(std::move(x));
        d.y.push_back(cls);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Dataset shuffled;
    shuffled.dim = dim;
    shuffled.n_classes = n_classes;
    for (std::size_t i : order) {
        shuffled.x.push_back(d.x[i]);
        shuffled.y.push_back(d.y[i]);
    }
    return shuffled;
}

std::vector<Dataset> partition_iid(const Dataset& data, int n_clients, std::uint64_t seed) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "partition"));
    rng.shuffle(order);
    std::vector<Dataset> shards(static_cast<std::size_t>(n_clients));
    for (auto& s : shards) {
        s.dim = data.dim;
        s.n_classes = data.n_classes;
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        Dataset& s = shards[i % static_cast<std::size_t>(n_clients)];
        s.x.push_back(data.x[order[i]]);
        s.y.push_back(data.y[order[i]]);
    }
    return shards;
}

// ---------------------------------------------------------------------------
// Models

static void parse_arch(const std::string& arch, std::size_t& hidden) {
    hidden = 0;
    if (arch == "linear" || arch == "logistic") return;
    if (arch.rfind("mlp-", 0) == 0) {
        int h = std::stoi(arch.substr(4));
        if (h >= 1) {
            hidden = static_cast<std::size_t>(h);
            return;
        }
    }
    throw UnknownArch(arch);
}

ModelParams init_model(const std::string& arch, std::size_t input_dim, std::size_t n_classes,
                       std::uint64_t seed) {
    ModelParams m;
    m.arch = arch;
    m.input_dim = input_dim;
    m.n_classes = n_classes;
    parse_arch(arch, m.hidden);
    if (arch == "logistic" && n_classes != 2) throw UnknownArch("logistic requires exactly 2 classes");

    std::size_t n_params;
    if (arch == "logistic")
        n_params = input_dim + 1;
    else if (m.hidden == 0)
        n_params = n_classes * input_dim + n_classes;
    else
        n_params = m.hidden * input_dim + m.hidden + n_classes * m.hidden + n_classes;

    Rng rng(derive_seed(seed, "init-model"));
    m.weights.resize(n_params);
    for (double& w : m.weights) w = rng.next_normal() * 0.1;
    return m;
}

static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double loss_and_grad(const ModelParams& model, const std::vector<const std::vector<double>*>& xs,
                     const std::vector<int>& ys, std::vector<double>& grad) {
    const std::size_t d = model.input_dim;
    const std::size_t c = model.n_classes;
    const std::size_t n = xs.size();
    grad.assign(model.weights.size(), 0.0);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (model.arch == "logistic") {
        const double* w = model.weights.data();
        const double b = model.weights[d];
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = *xs[i];
            double z = b;
            for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
            double s = sigmoid(z);
            double y = ys[i] == 1 ? 1.0 : 0.0;
            loss += -(y * std::log(std::max(s, 1e-12)) + (1.0 - y) * std::log(std::max(1.0 - s, 1e-12)));
            double dz = (s - y) * inv_n;
            for (std::size_t j = 0; j < d; ++j) grad[j] += dz * x[j];
            grad[d] += dz;
        }
        return loss * inv_n;
    }

    if (model.hidden == 0) {
        // softmax linear: W (c x d), b (c)
        const double* W = model.weights.data();
        const double* b = W + c * d;
        std::vector<double> z(c);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = *xs[i];
            double zmax = -1e300;
            for (std::size_t k = 0; k < c; ++k) {
                double v = b[k];
                for (std::size_t j = 0; j < d; ++j) v += W[k * d + j] * x[j];
                z[k] = v;
                zmax = std::max(zmax, v);
            }
            double denom = 0.0;
            for (std::size_t k = 0; k < c; ++k) denom += std::exp(z[k] - zmax);
            const std::size_t y = static_cast<std::size_t>(ys[i]);
            loss += -(z[y] - zmax - std::log(denom));
            for (std::size_t k = 0; k < c; ++k) {
                double p = std::exp(z[k] - zmax) / denom;
                double dz = (p - (k == y ? 1.0 : 0.0)) * inv_n;
                for (std::size_t j = 0; j < d; ++j) grad[k * d + j] += dz * x[j];
                grad[c * d + k] += dz;
            }
        }
        return loss * inv_n;
    }

    // mlp: W1 (h x d), b1 (h), tanh, W2 (c x h), b2 (c)
    const std::size_t h = model.hidden;
    const double* W1 = model.weights.data();
    const double* b1 = W1 + h * d;
    const double* W2 = b1 + h;
    const double* b2 = W2 + c * h;
    double* gW1 = grad.data();
    double* gb1 = gW1 + h * d;
    double* gW2 = gb1 + h;
    double* gb2 = gW2 + c * h;
    std::vector<double> a(h), z(c), dz(c), da(h);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = *xs[i];
        for (std::size_t k = 0; k < h; ++k) {
            double v = b1[k];
            for (std::size_t j = 0; j < d; ++j) v += W1[k * d + j] * x[j];
            a[k] = std::tanh(v);
        }
        double zmax = -1e300;
        for (std::size_t k = 0; k < c; ++k) {
            double v = b2[k];
            for (std::size_t j = 0; j < h; ++j) v += W2[k * h + j] * a[j];
            z[k] = v;
            zmax = std::max(zmax, v);
        }
        double denom = 0.0;
        for (std::size_t k = 0; k < c; ++k) denom += std::exp(z[k] - zmax);
        const std::size_t y = static_cast<std::size_t>(ys[i]);
        loss += -(z[y] - zmax - std::log(denom));
        for (std::size_t k = 0; k < c; ++k)
            dz[k] = (std::exp(z[k] - zmax) / denom - (k == y ? 1.0 : 0.0)) * inv_n;
        std::fill(da.begin(), da.end(), 0.0);
        for (std::size_t k = 0; k < c; ++k) {
            for (std::size_t j = 0; j < h; ++j) {
                gW2[k * h + j] += dz[k] * a[j];
                da[j] += dz[k] * W2[k * h + j];
            }
            gb2[k] += dz[k];
        }
        for (std::size_t k = 0; k < h; ++k) {
            double dv = da[k] * (1.0 - a[k] * a[k]);
            for (std::size_t j = 0; j < d; ++j) gW1[k * d + j] += dv * x[j];
            gb1[k] += dv;
        }
    }
    return loss * inv_n;
}

static int predict_class(const ModelParams& model, const std::vector<double>& x) {
    const std::size_t d = model.input_dim;
    const std::size_t c = model.n_classes;
    if (model.arch == "logistic") {
        double z = model.weights[d];
        for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * x[j];
        return z > 0.0 ? 1 : 0;
    }
    std::vector<double> input;
    const double* W;
    const double* b;
    std::size_t in_dim;
    std::vector<double> a;
    if (model.hidden == 0) {
        W = model.weights.data();
        b = W + c * d;
        in_dim = d;
    } else {
        const std::size_t h = model.hidden;
        const double* W1 = model.weights.data();
        const double* b1 = W1 + h * d;
        a.resize(h);
        for (std::size_t k = 0; k < h; ++k) {
            double v = b1[k];
            for (std::size_t j = 0; j < d; ++j) v += W1[k * d + j] * x[j];
            a[k] = std::tanh(v);
        }
        W = b1 + h;
        b = W + c * h;
        in_dim = h;
    }
    const std::vector<double>& inp = model.hidden == 0 ? x : a;
    int best = 0;
    double best_v = -1e300;
    for (std::size_t k = 0; k < c; ++k) {
        double v = b[k];
        for (std::size_t j = 0; j < in_dim; ++j) v += W[k * in_dim + j] * inp[j];
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double evaluate_accuracy(const ModelParams& model, const Dataset& test) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (predict_class(model, test.x[i]) == test.y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// Local training

namespace {

struct OptimizerState {
    std::vector<double> velocity; // momentum
    std::vector<double> m, v;     // adam
    std::int64_t t = 0;
};

void apply_step(ModelParams& model, const std::vector<double>& grad, const OptimizerSpec& opt, double lr,
                OptimizerState& state) {
    const std::size_t n = model.weights.size();
    switch (opt.kind) {
        case OptimizerKind::SGD:
            for (std::size_t i = 0; i < n; ++i) model.weights[i] -= lr * grad[i];
            break;
        case OptimizerKind::SGDMomentum:
            if (state.velocity.empty()) state.velocity.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                state.velocity[i] = opt.momentum * state.velocity[i] + grad[i];
                model.weights[i] -= lr * state.velocity[i];
            }
            break;
        case OptimizerKind::Adam: {
            if (state.m.empty()) {
                state.m.assign(n, 0.0);
                state.v.assign(n, 0.0);
            }
            ++state.t;
            const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.t));
            const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.t));
            for (std::size_t i = 0; i < n; ++i) {
                state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grad[i];
                state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
                double mhat = state.m[i] / bc1;
                double vhat = state.v[i] / bc2;
                model.weights[i] -= lr * mhat / (std::sqrt(vhat) + opt.epsilon);
            }
            break;
        }
    }
}

} // namespace

ModelParams local_train(const ModelParams& model, const Dataset& shard, const FLConfig& cfg,
                        std::uint64_t seed) {
    ModelParams out = model;
    if (cfg.lr == 0.0) return out; // zero-step fixed point, optimizer state untouched
    Rng rng(derive_seed(seed, "local-train"));
    OptimizerState state;
    std::vector<double> grad;
    std::vector<std::size_t> order(shard.size());

    // Jittered copies live here so the batch can be assembled from pointers.
    std::vector<std::vector<double>> jittered;

    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t off = 0; off < order.size(); off += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), off + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const std::vector<double>*> xs;
            std::vector<int> ys;
            xs.reserve(end - off);
            ys.reserve(end - off);
            jittered.clear();
            if (cfg.augmentation.kind == AugmentationKind::GaussianJitter) jittered.reserve(end - off);
            for (std::size_t i = off; i < end; ++i) {
                const std::size_t idx = order[i];
                if (cfg.augmentation.kind == AugmentationKind::GaussianJitter) {
                    std::vector<double> x = shard.x[idx];
                    for (double& v : x) v += rng.next_normal() * cfg.augmentation.sigma;
                    jittered.push_back(std::move(x));
                    xs.push_back(&jittered.back());
                } else {
                    xs.push_back(&shard.x[idx]);
                }
                ys.push_back(shard.y[idx]);
            }
            loss_and_grad(out, xs, ys, grad);
            apply_step(out, grad, cfg.optimizer, cfg.lr, state);
        }
    }
    return out;
}

ModelParams fedavg_aggregate(const std::vector<ModelParams>& models, const std::vector<double>& weights) {
    if (models.empty()) throw ValidationError("fedavg", "no models");
    for (const auto& m : models)
        if (!m.same_arch(models.front())) throw ArchMismatch();
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw ValidationError("fedavg", "weights must sum to > 0");

    ModelParams out = models.front();
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double w = weights[i] / total;
        for (std::size_t j = 0; j < out.weights.size(); ++j) out.weights[j] += w * models[i].weights[j];
    }
    return out;
}

double round_wallclock(std::int64_t model_bytes, const FLConfig& cfg, const Scenario& scenario,
                       const std::vector<double>& client_compute_s) {
    const double bytes = static_cast<double>(model_bytes);
    double broadcast = transfer_time(bytes, scenario.link("client_edge_down"));
    double compute = client_compute_s.empty()
                         ? 0.0
                         : *std::max_element(client_compute_s.begin(), client_compute_s.end());
    double upload = static_cast<double>(cfg.n_clients) * transfer_time(bytes, scenario.link("client_edge_up"));
    return broadcast + compute + upload;
}

std::vector<RoundPoint> run_fl(const FLConfig& cfg, const Dataset& train, const Dataset& test,
                               const Scenario& scenario, std::uint64_t seed) {
    std::vector<Dataset> shards = partition_iid(train, cfg.n_clients, seed);
    ModelParams global = init_model(cfg.model_arch, train.dim, train.n_classes, derive_seed(seed, "init"));

    const DeviceProfile& client = scenario.device_for(DeviceTier::Client);
    // Per-sample training cost approximated as 6 FLOPs per parameter
    // (forward 2, backward 4).
    const double flops_per_sample = 6.0 * static_cast<double>(global.param_count());

    std::vector<RoundPoint> curve;
    curve.reserve(static_cast<std::size_t>(cfg.global_rounds));
    double wallclock = 0.0;
    for (int round = 1; round <= cfg.global_rounds; ++round) {
        FLConfig round_cfg = cfg;
        round_cfg.lr = cfg.lr_schedule.at(cfg.lr, round);

        std::vector<ModelParams> locals;
        std::vector<double> agg_weights;
        std::vector<double> compute_s;
        locals.reserve(shards.size());
        for (std::size_t i = 0; i < shards.size(); ++i) {
            locals.push_back(local_train(global, shards[i], round_cfg,
                                         derive_seed(seed, "local", static_cast<std::uint64_t>(round), i)));
            agg_weights.push_back(static_cast<double>(shards[i].size()));
            compute_s.push_back(compute_time(flops_per_sample * static_cast<double>(shards[i].size()) *
                                                 static_cast<double>(cfg.local_epochs),
                                             client));
        }
        global = fedavg_aggregate(locals, agg_weights);
        wallclock += round_wallclock(global.bytes(), cfg, scenario, compute_s);
        curve.push_back({round, evaluate_accuracy(global, test), wallclock});
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Trial loop

FLConfig apply_patch(const FLConfig& base, const json& patch) {
    FLConfig cfg = base;
    for (const auto& [key, value] : patch.items()) {
        if (key == "model_arch" && value.is_string())
            cfg.model_arch = value.get<std::string>();
        else if (key == "lr" && value.is_number())
            cfg.lr = value.get<double>();
        else if (key == "optimizer" && value.is_string())
            cfg.optimizer = optimizer_from_string(value.get<std::string>());
        else if (key == "lr_schedule" && value.is_string())
            cfg.lr_schedule = schedule_from_string(value.get<std::string>());
        else if (key == "augmentation" && value.is_string())
            cfg.augmentation = augmentation_from_string(value.get<std::string>());
        // other fields are not patchable; ignore them
    }
    return cfg;
}

static std::string config_summary(const FLConfig& cfg) {
    std::ostringstream os;
    os << "arch=" << cfg.model_arch << " lr=" << cfg.lr << " optimizer=" << to_string(cfg.optimizer)
       << " lr_schedule=" << to_string(cfg.lr_schedule) << " augmentation=" << to_string(cfg.augmentation);
    return os.str();
}

std::vector<TrialRecord> trial_loop(Advisor& advisor, const FLConfig& tmpl, const Dataset& train,
                                    const Dataset& test, const Scenario& scenario, int max_trials,
                                    double target_acc, std::uint64_t seed) {
    std::ostringstream base_ctx;
    base_ctx << "PURPOSE: design a federated training configuration that maximizes test accuracy\n"
             << "PATCHABLE: model_arch, lr, optimizer, lr_schedule, augmentation\n"
             << "DATASET: n_samples=" << train.size() << ", dim=" << train.dim
             << ", classes=" << train.n_classes << "\n";

    std::vector<TrialRecord> records;
    auto run_trial = [&](const FLConfig& cfg, const std::string& raw) {
        TrialRecord rec;
        rec.trial_index = static_cast<int>(records.size()) + 1;
        rec.config = cfg;
        rec.accuracy_curve = run_fl(cfg, train, test, scenario, seed);
        rec.advisor_raw = raw;
        records.push_back(std::move(rec));
    };

    run_trial(tmpl, "");
    while (static_cast<int>(records.size()) < max_trials) {
        if (records.back().accuracy_curve.back().accuracy >= target_acc) break;
        std::ostringstream ctx;
        ctx << base_ctx.str();
        for (const auto& rec : records) {
            ctx << "TRIAL " << rec.trial_index << " CONFIG: " << config_summary(rec.config) << "\n";
            ctx << "TRIAL " << rec.trial_index << " ACCURACY CURVE:";
            for (const auto& pt : rec.accuracy_curve) ctx << " " << pt.round << ":" << pt.accuracy;
            ctx << "\n";
        }
        AdvisorReply reply;
        try {
            reply = advisor.ask(ctx.str());
        } catch (const MalformedReply&) {
            return records; // partial results
        }
        if (reply.kind == ReplyKind::NoChange) break;
        if (reply.kind != ReplyKind::FLProposal) return records;
        run_trial(apply_patch(tmpl, reply.patch), reply.raw_text);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Bundled fixtures

std::unique_ptr<ScriptedAdvisor> make_bundled_fl_advisor() {
    std::vector<AdvisorReply> replies{
        AdvisorReply::make_patch(json{{"optimizer", "adam"}}),
        AdvisorReply::make_patch(json{{"optimizer", "adam"}, {"lr_schedule", "step:0.1:10"}}),
        AdvisorReply::make_patch(
            json{{"optimizer", "adam"}, {"lr_schedule", "step:0.1:10"}, {"augmentation", "jitter:0.02"}}),
    };
    return std::make_unique<ScriptedAdvisor>(std::move(replies));
}

// Train and test must come from the same mixture, so one pool is generated
// and split.
static Dataset bundled_pool(std::uint64_t seed) {
    return make_gaussian_mixture(2600, 16, 3, 2.2, derive_seed(seed, "fl-data"));
}

static Dataset slice(const Dataset& d, std::size_t begin, std::size_t end) {
    Dataset out;
    out.dim = d.dim;
    out.n_classes = d.n_classes;
    out.x.assign(d.x.begin() + static_cast<std::ptrdiff_t>(begin), d.x.begin() + static_cast<std::ptrdiff_t>(end));
    out.y.assign(d.y.begin() + static_cast<std::ptrdiff_t>(begin), d.y.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

Dataset make_bundled_fl_train(std::uint64_t seed) { return slice(bundled_pool(seed), 0, 2000); }

Dataset make_bundled_fl_test(std::uint64_t seed) { return slice(bundled_pool(seed), 2000, 2600); }

FLConfig bundled_trial_template() {
    FLConfig cfg;
    cfg.n_clients = 10;
    cfg.batch_size = 100;
    cfg.local_epochs = 2;
    cfg.global_rounds = 30;
    cfg.lr = 0.002;
    cfg.optimizer.kind = OptimizerKind::SGD;
    cfg.model_arch = "linear";
    return cfg;
}

} // namespace edgeplan
