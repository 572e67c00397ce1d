#include "edgeplan/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace edgeplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// enum <-> string

std::string to_string(const TaskKind& k) {
    switch (k.tag) {
        case TaskTag::ImageClassification: return "image_classification";
        case TaskTag::ImageCaptioning: return "image_captioning";
        case TaskTag::VQA: return "vqa";
        case TaskTag::PoseDetection: return "pose_detection";
        case TaskTag::PoseToImage: return "pose_to_image";
        case TaskTag::MoodFromTraffic: return "mood_from_traffic";
        case TaskTag::MoodFromPhysio: return "mood_from_physio";
        case TaskTag::Custom: return "custom:" + k.custom;
    }
    return "custom:";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "image_classification") return TaskKind::classification();
    if (s == "image_captioning") return TaskKind::captioning();
    if (s == "vqa") return TaskKind::vqa();
    if (s == "pose_detection") return TaskKind::pose_detection();
    if (s == "pose_to_image") return TaskKind::pose_to_image();
    if (s == "mood_from_traffic") return TaskKind::mood_from_traffic();
    if (s == "mood_from_physio") return TaskKind::mood_from_physio();
    if (s.rfind("custom:", 0) == 0) return TaskKind::make_custom(s.substr(7));
    throw ValidationError("task_kind", "unknown task kind " + s);
}

DataKind task_input_kind(const TaskKind& k) {
    switch (k.tag) {
        case TaskTag::ImageClassification:
        case TaskTag::ImageCaptioning:
        case TaskTag::VQA:
        case TaskTag::PoseDetection: return DataKind::Image;
        case TaskTag::PoseToImage: return DataKind::Pose;
        case TaskTag::MoodFromTraffic:
        case TaskTag::MoodFromPhysio: return DataKind::Signal;
        case TaskTag::Custom: return DataKind::Any;
    }
    return DataKind::Any;
}

DataKind task_output_kind(const TaskKind& k) {
    switch (k.tag) {
        case TaskTag::ImageClassification: return DataKind::Label;
        case TaskTag::ImageCaptioning:
        case TaskTag::VQA: return DataKind::Text;
        case TaskTag::PoseDetection: return DataKind::Pose;
        case TaskTag::PoseToImage: return DataKind::Image;
        case TaskTag::MoodFromTraffic:
        case TaskTag::MoodFromPhysio: return DataKind::Label;
        case TaskTag::Custom: return DataKind::Any;
    }
    return DataKind::Any;
}

std::string to_string(DeviceTier t) {
    switch (t) {
        case DeviceTier::Client: return "client";
        case DeviceTier::Edge: return "edge";
        case DeviceTier::Cloud: return "cloud";
    }
    return "client";
}

DeviceTier tier_from_string(const std::string& s) {
    if (s == "client") return DeviceTier::Client;
    if (s == "edge") return DeviceTier::Edge;
    if (s == "cloud") return DeviceTier::Cloud;
    throw ValidationError("tier", "unknown tier " + s);
}

std::string to_string(CombineMode m) {
    switch (m) {
        case CombineMode::Single: return "single";
        case CombineMode::Sequence: return "sequence";
        case CombineMode::FuseOutputs: return "fuse";
    }
    return "single";
}

static CombineMode combine_from_string(const std::string& s) {
    if (s == "single") return CombineMode::Single;
    if (s == "sequence") return CombineMode::Sequence;
    if (s == "fuse") return CombineMode::FuseOutputs;
    throw ValidationError("combine", "unknown combine mode " + s);
}

std::string input_source_to_string(const InputSource& s) {
    switch (s.tag) {
        case InputSourceTag::UserData: return "user_data";
        case InputSourceTag::PreviousStep: return "previous";
        case InputSourceTag::Sensor: return "sensor:" + s.sensor;
    }
    return "user_data";
}

InputSource input_source_from_string(const std::string& s) {
    if (s == "user_data") return InputSource::user_data();
    if (s == "previous") return InputSource::previous();
    if (s.rfind("sensor:", 0) == 0) return InputSource::from_sensor(s.substr(7));
    throw ValidationError("input", "unknown input source " + s);
}

std::string to_string(const OptimizerSpec& o) {
    std::ostringstream os;
    switch (o.kind) {
        case OptimizerKind::SGD: os << "sgd"; break;
        case OptimizerKind::SGDMomentum: os << "momentum:" << o.momentum; break;
        case OptimizerKind::Adam: os << "adam:" << o.beta1 << ":" << o.beta2 << ":" << o.epsilon; break;
    }
    return os.str();
}

OptimizerSpec optimizer_from_string(const std::string& s) {
    OptimizerSpec o;
    if (s == "sgd") { o.kind = OptimizerKind::SGD; return o; }
    if (s == "adam") { o.kind = OptimizerKind::Adam; return o; }
    if (s.rfind("momentum", 0) == 0) {
        o.kind = OptimizerKind::SGDMomentum;
        if (s.size() > 9) o.momentum = std::stod(s.substr(9));
        return o;
    }
    if (s.rfind("adam:", 0) == 0) {
        o.kind = OptimizerKind::Adam;
        std::istringstream is(s.substr(5));
        char sep;
        is >> o.beta1 >> sep >> o.beta2 >> sep >> o.epsilon;
        return o;
    }
    throw ValidationError("optimizer", "unknown optimizer " + s);
}

double LrSchedule::at(double base_lr, int round) const {
    if (kind == ScheduleKind::Constant) return base_lr;
    int drops = (round - 1) / every_rounds;
    double lr = base_lr;
    for (int i = 0; i < drops; ++i) lr *= factor;
    return lr;
}

std::string to_string(const LrSchedule& s) {
    if (s.kind == ScheduleKind::Constant) return "constant";
    std::ostringstream os;
    os << "step:" << s.factor << ":" << s.every_rounds;
    return os.str();
}

LrSchedule schedule_from_string(const std::string& s) {
    LrSchedule sch;
    if (s == "constant") return sch;
    if (s.rfind("step:", 0) == 0) {
        sch.kind = ScheduleKind::StepDecay;
        std::istringstream is(s.substr(5));
        char sep;
        is >> sch.factor >> sep >> sch.every_rounds;
        if (sch.factor <= 0.0 || sch.factor > 1.0)
            throw ValidationError("lr_schedule", "step factor must be in (0, 1]");
        if (sch.every_rounds < 1) throw ValidationError("lr_schedule", "step interval must be >= 1");
        return sch;
    }
    throw ValidationError("lr_schedule", "unknown schedule " + s);
}

std::string to_string(const Augmentation& a) {
    if (a.kind == AugmentationKind::None) return "none";
    std::ostringstream os;
    os << "jitter:" << a.sigma;
    return os.str();
}

Augmentation augmentation_from_string(const std::string& s) {
    Augmentation a;
    if (s == "none") return a;
    if (s.rfind("jitter:", 0) == 0) {
        a.kind = AugmentationKind::GaussianJitter;
        a.sigma = std::stod(s.substr(7));
        return a;
    }
    throw ValidationError("augmentation", "unknown augmentation " + s);
}

// ---------------------------------------------------------------------------
// Plan JSON

json plan_to_json(const TaskPlan& plan) {
    json steps = json::array();
    for (const auto& s : plan.steps) {
        json step;
        step["task"] = to_string(s.task_kind);
        if (!s.model_id.empty()) step["model"] = s.model_id;
        step["input"] = input_source_to_string(s.input_source);
        steps.push_back(step);
    }
    return json{{"tasks", steps}, {"combine", to_string(plan.combine)}};
}

TaskPlan plan_from_json(const json& j) {
    if (!j.is_object() || !j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty())
        throw ValidationError("plan", "missing non-empty tasks list");
    TaskPlan plan;
    bool first = true;
    for (const auto& step_j : j["tasks"]) {
        if (!step_j.is_object() || !step_j.contains("task") || !step_j["task"].is_string())
            throw ValidationError("plan.tasks", "each step needs a task string");
        PlanStep step;
        step.task_kind = task_kind_from_string(step_j["task"].get<std::string>());
        if (step_j.contains("model") && step_j["model"].is_string())
            step.model_id = step_j["model"].get<std::string>();
        if (step_j.contains("input") && step_j["input"].is_string())
            step.input_source = input_source_from_string(step_j["input"].get<std::string>());
        else
            step.input_source = first ? InputSource::user_data() : InputSource::previous();
        plan.steps.push_back(step);
        first = false;
    }
    if (j.contains("combine") && j["combine"].is_string())
        plan.combine = combine_from_string(j["combine"].get<std::string>());
    else
        plan.combine = plan.steps.size() == 1 ? CombineMode::Single : CombineMode::Sequence;
    return plan;
}

json fl_config_to_json(const FLConfig& cfg) {
    return json{
        {"n_clients", cfg.n_clients},
        {"batch_size", cfg.batch_size},
        {"local_epochs", cfg.local_epochs},
        {"global_rounds", cfg.global_rounds},
        {"lr", cfg.lr},
        {"optimizer", to_string(cfg.optimizer)},
        {"lr_schedule", to_string(cfg.lr_schedule)},
        {"augmentation", to_string(cfg.augmentation)},
        {"model_arch", cfg.model_arch},
    };
}

FLConfig fl_config_from_json(const json& j) {
    FLConfig cfg;
    if (j.contains("n_clients")) cfg.n_clients = j["n_clients"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("local_epochs")) cfg.local_epochs = j["local_epochs"].get<int>();
    if (j.contains("global_rounds")) cfg.global_rounds = j["global_rounds"].get<int>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("optimizer")) cfg.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
    if (j.contains("lr_schedule")) cfg.lr_schedule = schedule_from_string(j["lr_schedule"].get<std::string>());
    if (j.contains("augmentation")) cfg.augmentation = augmentation_from_string(j["augmentation"].get<std::string>());
    if (j.contains("model_arch")) cfg.model_arch = j["model_arch"].get<std::string>();
    if (cfg.n_clients < 1) throw ValidationError("fl.n_clients", "must be >= 1");
    if (cfg.batch_size < 1) throw ValidationError("fl.batch_size", "must be >= 1");
    if (cfg.lr <= 0.0) throw ValidationError("fl.lr", "must be > 0");
    return cfg;
}

// ---------------------------------------------------------------------------
// Scenario loading

static const char* kLinkNames[] = {"client_edge_up", "client_edge_down", "edge_cloud_up", "edge_cloud_down"};

void validate_scenario(const Scenario& s) {
    std::vector<std::string> ids;
    for (const auto& m : s.models) ids.push_back(m.id);
    for (const auto& d : s.devices) ids.push_back(d.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw ValidationError("ids", "duplicate model/device id");

    for (const auto& m : s.models) {
        const std::string where = "models." + m.id;
        if (m.layers.empty()) throw ValidationError(where + ".layers", "must be non-empty");
        for (const auto& l : m.layers) {
            if (l.flops <= 0) throw ValidationError(where + ".layers.flops", "must be > 0");
            if (l.out_feature_bytes < 0) throw ValidationError(where + ".layers.out_feature_bytes", "must be >= 0");
        }
        if (m.input_bytes <= 0) throw ValidationError(where + ".input_bytes", "must be > 0");
        if (m.param_count < 0) throw ValidationError(where + ".param_count", "must be >= 0");
        if (m.layers.back().out_feature_bytes <= 0)
            throw ValidationError(where + ".layers", "last layer's out_feature_bytes (the result size) must be > 0");
    }
    for (const auto& d : s.devices) {
        if (d.throughput <= 0.0) throw ValidationError("devices." + d.id + ".throughput", "must be > 0");
    }
    for (const char* name : kLinkNames) {
        auto it = s.links.find(name);
        if (it == s.links.end()) throw ValidationError(std::string("links.") + name, "missing");
        if (it->second.rate <= 0.0) throw ValidationError(std::string("links.") + name + ".rate", "must be > 0");
        if (it->second.propagation_delay < 0.0)
            throw ValidationError(std::string("links.") + name + ".propagation_delay", "must be >= 0");
    }
    if (s.planning_latency_s < 0.0) throw ValidationError("planning_latency_s", "must be >= 0");
    if (s.fusion_latency_s < 0.0) throw ValidationError("fusion_latency_s", "must be >= 0");

    // Demonstration plans may only reference solvable tasks.
    for (const auto& [req, plan] : s.planner_prefix.demonstrations) {
        if (plan.steps.empty())
            throw ValidationError("planner_prefix.demonstrations", "demonstration plan has no steps");
        for (const auto& step : plan.steps) {
            if (!s.planner_prefix.solvable(step.task_kind))
                throw ValidationError("planner_prefix.demonstrations",
                                      "plan for \"" + req + "\" references unsolvable task " +
                                          to_string(step.task_kind));
        }
    }
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }

    Scenario s;
    try {
        if (j.contains("id")) s.id = j["id"].get<std::string>();
        if (j.contains("planning_latency_s")) s.planning_latency_s = j["planning_latency_s"].get<double>();
        if (j.contains("fusion_latency_s")) s.fusion_latency_s = j["fusion_latency_s"].get<double>();

        for (const auto& mj : j.value("models", json::array())) {
            ModelManifest m;
            m.id = mj.at("id").get<std::string>();
            m.task_kind = task_kind_from_string(mj.at("task_kind").get<std::string>());
            m.param_count = mj.value("param_count", std::int64_t{0});
            m.input_bytes = mj.at("input_bytes").get<std::int64_t>();
            for (const auto& lj : mj.at("layers")) {
                LayerProfile l;
                l.flops = lj.at("flops").get<std::int64_t>();
                l.out_feature_bytes = lj.at("out_feature_bytes").get<std::int64_t>();
                m.layers.push_back(l);
            }
            s.models.push_back(std::move(m));
        }
        for (const auto& dj : j.value("devices", json::array())) {
            DeviceProfile d;
            d.id = dj.at("id").get<std::string>();
            d.throughput = dj.at("throughput").get<double>();
            d.tier = tier_from_string(dj.at("tier").get<std::string>());
            s.devices.push_back(std::move(d));
        }
        const json links_j = j.value("links", json::object());
        for (const auto& [name, lj] : links_j.items()) {
            LinkProfile l;
            l.rate = lj.at("rate").get<double>();
            l.propagation_delay = lj.value("propagation_delay", 0.0);
            s.links[name] = l;
        }
        if (j.contains("planner_prefix")) {
            const auto& pj = j["planner_prefix"];
            for (const auto& sv : pj.value("sensors", json::array()))
                s.planner_prefix.sensors.push_back(sv.get<std::string>());
            for (const auto& tv : pj.value("solvable_tasks", json::array()))
                s.planner_prefix.solvable_tasks.push_back(task_kind_from_string(tv.get<std::string>()));
            for (const auto& dv : pj.value("demonstrations", json::array())) {
                s.planner_prefix.demonstrations.emplace_back(dv.at("request").get<std::string>(),
                                                             plan_from_json(dv.at("plan")));
            }
        }
        if (j.contains("fl") && !j["fl"].is_null()) s.fl = fl_config_from_json(j["fl"]);
    } catch (const json::exception& e) {
        throw ValidationError("scenario", e.what());
    }

    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["planning_latency_s"] = s.planning_latency_s;
    j["fusion_latency_s"] = s.fusion_latency_s;
    j["models"] = json::array();
    for (const auto& m : s.models) {
        json mj;
        mj["id"] = m.id;
        mj["task_kind"] = to_string(m.task_kind);
        mj["param_count"] = m.param_count;
        mj["input_bytes"] = m.input_bytes;
        mj["layers"] = json::array();
        for (const auto& l : m.layers)
            mj["layers"].push_back(json{{"flops", l.flops}, {"out_feature_bytes", l.out_feature_bytes}});
        j["models"].push_back(mj);
    }
    j["devices"] = json::array();
    for (const auto& d : s.devices)
        j["devices"].push_back(json{{"id", d.id}, {"throughput", d.throughput}, {"tier", to_string(d.tier)}});
    j["links"] = json::object();
    for (const auto& [name, l] : s.links)
        j["links"][name] = json{{"rate", l.rate}, {"propagation_delay", l.propagation_delay}};
    json pj;
    pj["sensors"] = s.planner_prefix.sensors;
    pj["solvable_tasks"] = json::array();
    for (const auto& t : s.planner_prefix.solvable_tasks) pj["solvable_tasks"].push_back(to_string(t));
    pj["demonstrations"] = json::array();
    for (const auto& [req, plan] : s.planner_prefix.demonstrations)
        pj["demonstrations"].push_back(json{{"request", req}, {"plan", plan_to_json(plan)}});
    j["planner_prefix"] = pj;
    if (s.fl) j["fl"] = fl_config_to_json(*s.fl);
    return j.dump(2) + "\n";
}

std::vector<ModelManifest> candidates_for(const TaskKind& kind, const Scenario& scenario) {
    std::vector<ModelManifest> out;
    for (const auto& m : scenario.models)
        if (m.task_kind == kind) out.push_back(m);
    std::sort(out.begin(), out.end(), [](const ModelManifest& a, const ModelManifest& b) { return a.id < b.id; });
    return out;
}

} // namespace edgeplan
