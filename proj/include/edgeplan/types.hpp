#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgeplan/errors.hpp"

namespace edgeplan {

// ---------------------------------------------------------------------------
// Task kinds

enum class TaskTag {
    ImageClassification,
    ImageCaptioning,
    VQA,
    PoseDetection,
    PoseToImage,
    MoodFromTraffic,
    MoodFromPhysio,
    Custom,
};

struct TaskKind {
    TaskTag tag = TaskTag::Custom;
    std::string custom; // only meaningful when tag == Custom

    bool operator==(const TaskKind&) const = default;
    bool operator<(const TaskKind& o) const {
        if (tag != o.tag) return tag < o.tag;
        return custom < o.custom;
    }

    static TaskKind classification() { return {TaskTag::ImageClassification, {}}; }
    static TaskKind captioning() { return {TaskTag::ImageCaptioning, {}}; }
    static TaskKind vqa() { return {TaskTag::VQA, {}}; }
    static TaskKind pose_detection() { return {TaskTag::PoseDetection, {}}; }
    static TaskKind pose_to_image() { return {TaskTag::PoseToImage, {}}; }
    static TaskKind mood_from_traffic() { return {TaskTag::MoodFromTraffic, {}}; }
    static TaskKind mood_from_physio() { return {TaskTag::MoodFromPhysio, {}}; }
    static TaskKind make_custom(std::string name) { return {TaskTag::Custom, std::move(name)}; }
};

std::string to_string(const TaskKind& k);
TaskKind task_kind_from_string(const std::string& s);

// Data kinds flowing between plan steps; used to check that Sequence plans chain.
enum class DataKind { Image, Text, Pose, Label, Signal, Any };

DataKind task_input_kind(const TaskKind& k);
DataKind task_output_kind(const TaskKind& k);

// ---------------------------------------------------------------------------
// Model and hardware profiles

struct LayerProfile {
    std::int64_t flops = 0;
    std::int64_t out_feature_bytes = 0;

    bool operator==(const LayerProfile&) const = default;
};

struct ModelManifest {
    std::string id;
    TaskKind task_kind;
    std::vector<LayerProfile> layers;
    std::int64_t param_count = 0;
    std::int64_t input_bytes = 0;

    bool operator==(const ModelManifest&) const = default;

    std::int64_t total_flops() const {
        std::int64_t f = 0;
        for (const auto& l : layers) f += l.flops;
        return f;
    }
    // Split s = run layers 1..s on the client; split 0 transmits the raw input.
    std::int64_t feature_bytes_at_split(int split) const {
        if (split == 0) return input_bytes;
        return layers.at(static_cast<std::size_t>(split) - 1).out_feature_bytes;
    }
    std::int64_t result_bytes() const { return layers.back().out_feature_bytes; }
};

enum class DeviceTier { Client, Edge, Cloud };

std::string to_string(DeviceTier t);
DeviceTier tier_from_string(const std::string& s);

struct DeviceProfile {
    std::string id;
    double throughput = 0.0; // FLOP/s
    DeviceTier tier = DeviceTier::Client;

    bool operator==(const DeviceProfile&) const = default;
};

struct LinkProfile {
    double rate = 0.0;              // bytes/s
    double propagation_delay = 0.0; // s

    bool operator==(const LinkProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Plans

enum class InputSourceTag { UserData, PreviousStep, Sensor };

struct InputSource {
    InputSourceTag tag = InputSourceTag::UserData;
    std::string sensor; // only for tag == Sensor

    bool operator==(const InputSource&) const = default;

    static InputSource user_data() { return {InputSourceTag::UserData, {}}; }
    static InputSource previous() { return {InputSourceTag::PreviousStep, {}}; }
    static InputSource from_sensor(std::string name) { return {InputSourceTag::Sensor, std::move(name)}; }
};

struct PlanStep {
    TaskKind task_kind;
    std::string model_id;
    InputSource input_source;

    bool operator==(const PlanStep&) const = default;
};

enum class CombineMode { Single, Sequence, FuseOutputs };

std::string to_string(CombineMode m);

struct TaskPlan {
    std::vector<PlanStep> steps;
    CombineMode combine = CombineMode::Single;

    bool operator==(const TaskPlan&) const = default;
};

struct PrefixSpec {
    std::vector<std::string> sensors;
    std::vector<TaskKind> solvable_tasks;
    std::vector<std::pair<std::string, TaskPlan>> demonstrations;

    bool operator==(const PrefixSpec&) const = default;

    bool solvable(const TaskKind& k) const {
        for (const auto& t : solvable_tasks)
            if (t == k) return true;
        return false;
    }
};

// ---------------------------------------------------------------------------
// Federated learning configuration

enum class OptimizerKind { SGD, SGDMomentum, Adam };

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::SGD;
    double momentum = 0.9;    // SGDMomentum
    double beta1 = 0.9;       // Adam
    double beta2 = 0.999;
    double epsilon = 1e-8;

    bool operator==(const OptimizerSpec&) const = default;
};

std::string to_string(const OptimizerSpec& o);
OptimizerSpec optimizer_from_string(const std::string& s);

enum class ScheduleKind { Constant, StepDecay };

struct LrSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double factor = 1.0;
    int every_rounds = 1;

    bool operator==(const LrSchedule&) const = default;

    // Effective learning rate at 1-based global round r.
    double at(double base_lr, int round) const;
};

std::string to_string(const LrSchedule& s);
LrSchedule schedule_from_string(const std::string& s);

enum class AugmentationKind { None, GaussianJitter };

struct Augmentation {
    AugmentationKind kind = AugmentationKind::None;
    double sigma = 0.0;

    bool operator==(const Augmentation&) const = default;
};

std::string to_string(const Augmentation& a);
Augmentation augmentation_from_string(const std::string& s);

struct FLConfig {
    int n_clients = 10;
    int batch_size = 100;
    int local_epochs = 10;
    int global_rounds = 30;
    double lr = 0.1;
    OptimizerSpec optimizer;
    LrSchedule lr_schedule;
    Augmentation augmentation;
    std::string model_arch = "linear";

    bool operator==(const FLConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario

struct Scenario {
    std::string id;
    double planning_latency_s = 0.5;
    double fusion_latency_s = 0.1;
    std::vector<ModelManifest> models;
    std::vector<DeviceProfile> devices;
    std::map<std::string, LinkProfile> links; // the four named links
    PrefixSpec planner_prefix;
    std::optional<FLConfig> fl;

    bool operator==(const Scenario&) const = default;

    const LinkProfile& link(const std::string& name) const {
        auto it = links.find(name);
        if (it == links.end()) throw ValidationError("links." + name, "missing");
        return it->second;
    }

    const DeviceProfile& device_for(DeviceTier tier) const {
        for (const auto& d : devices)
            if (d.tier == tier) return d;
        throw ValidationError("devices", "no device with tier " + to_string(tier));
    }

    const ModelManifest& model(const std::string& id_) const {
        for (const auto& m : models)
            if (m.id == id_) return m;
        throw ValidationError("models", "unknown model id " + id_);
    }
};

} // namespace edgeplan
