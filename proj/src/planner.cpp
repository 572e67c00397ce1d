#include "edgeplan/planner.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "edgeplan/registry.hpp"

namespace edgeplan {

using nlohmann::json;

std::string build_context(const PrefixSpec& prefix, const std::string& request,
                          const std::vector<std::string>& history) {
    std::ostringstream os;
    os << "SENSORS:";
    for (std::size_t i = 0; i < prefix.sensors.size(); ++i) os << (i == 0 ? " " : ", ") << prefix.sensors[i];
    os << "\nTASKS:";
    for (std::size_t i = 0; i < prefix.solvable_tasks.size(); ++i)
        os << (i == 0 ? " " : ", ") << to_string(prefix.solvable_tasks[i]);
    os << "\n";
    for (const auto& [req, demo_plan] : prefix.demonstrations) {
        os << "DEMONSTRATION REQUEST: " << req << "\n";
        os << "DEMONSTRATION PLAN: " << plan_to_json(demo_plan).dump() << "\n";
    }
    for (const auto& h : history) os << "HISTORY: " << h << "\n";
    os << "REQUEST: " << request;
    return os.str();
}

void validate_plan(const TaskPlan& p, const Scenario& scenario) {
    if (p.steps.empty()) throw InvalidPlan("plan has no steps");
    for (const auto& step : p.steps) {
        if (!scenario.planner_prefix.solvable(step.task_kind))
            throw InvalidPlan("task " + to_string(step.task_kind) + " is not solvable here");
        bool found = false;
        for (const auto& m : scenario.models)
            if (m.id == step.model_id && m.task_kind == step.task_kind) found = true;
        if (!found)
            throw InvalidPlan("model " + step.model_id + " cannot solve " + to_string(step.task_kind));
    }
    if (p.combine == CombineMode::Sequence) {
        for (std::size_t i = 1; i < p.steps.size(); ++i) {
            if (p.steps[i].input_source.tag != InputSourceTag::PreviousStep)
                throw InvalidPlan("sequence step " + std::to_string(i) + " does not consume the previous step");
            DataKind produced = task_output_kind(p.steps[i - 1].task_kind);
            DataKind consumed = task_input_kind(p.steps[i].task_kind);
            if (produced != DataKind::Any && consumed != DataKind::Any && produced != consumed)
                throw InvalidPlan("sequence step " + std::to_string(i) + " cannot consume the previous output");
        }
    }
}

TaskPlan plan(const std::string& request, const Scenario& scenario, Advisor& advisor) {
    const std::string context = build_context(scenario.planner_prefix, request, {});
    AdvisorReply reply = advisor.ask(context);
    if (reply.kind != ReplyKind::Plan) throw InvalidPlan("advisor did not return a plan");

    TaskPlan resolved = reply.plan;
    for (auto& step : resolved.steps) {
        if (step.model_id.empty()) {
            auto cands = candidates_for(step.task_kind, scenario);
            if (cands.empty())
                throw InvalidPlan("no model registered for " + to_string(step.task_kind));
            step.model_id = cands.front().id;
        }
    }
    validate_plan(resolved, scenario);
    return resolved;
}

std::vector<LabeledRequest> load_request_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path);
    std::vector<LabeledRequest> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (!j.is_object() || !j.contains("request") || !j.contains("label"))
            throw ParseError("dataset line " + std::to_string(lineno) + " needs request and label fields");
        out.push_back({j["request"].get<std::string>(), task_kind_from_string(j["label"].get<std::string>())});
    }
    return out;
}

PlannerMetrics evaluate_planner(const std::vector<LabeledRequest>& dataset, const Scenario& scenario,
                                Advisor& advisor) {
    if (dataset.empty()) throw EmptyDataset();

    // Failed plans are bucketed under a prediction class that no gold label
    // uses, so they count as wrong everywhere.
    const TaskKind error_class = TaskKind::make_custom("__plan_error__");

    std::vector<TaskKind> predictions;
    predictions.reserve(dataset.size());
    double total_latency = 0.0;
    for (const auto& item : dataset) {
        auto t0 = std::chrono::steady_clock::now();
        TaskKind predicted = error_class;
        try {
            TaskPlan p = plan(item.request, scenario, advisor);
            predicted = p.steps.front().task_kind;
        } catch (const Error&) {
        }
        auto t1 = std::chrono::steady_clock::now();
        total_latency += std::chrono::duration<double>(t1 - t0).count();
        predictions.push_back(predicted);
    }

    std::size_t correct = 0;
    std::map<TaskKind, std::size_t> tp, fp, fn;
    std::map<TaskKind, bool> gold_classes;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        gold_classes[dataset[i].gold] = true;
        if (predictions[i] == dataset[i].gold) {
            ++correct;
            ++tp[dataset[i].gold];
        } else {
            ++fn[dataset[i].gold];
            ++fp[predictions[i]];
        }
    }

    double f1_sum = 0.0;
    for (const auto& [cls, present] : gold_classes) {
        (void)present;
        double tpc = static_cast<double>(tp[cls]);
        double denom = 2.0 * tpc + static_cast<double>(fp[cls]) + static_cast<double>(fn[cls]);
        f1_sum += denom > 0.0 ? 2.0 * tpc / denom : 0.0;
    }

    PlannerMetrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    m.macro_f1 = f1_sum / static_cast<double>(gold_classes.size());
    m.mean_latency = total_latency / static_cast<double>(dataset.size());
    return m;
}

std::unique_ptr<KeywordMockAdvisor> make_bundled_keyword_advisor(const Scenario& scenario) {
    auto first_model = [&](const TaskKind& k) -> std::string {
        auto cands = candidates_for(k, scenario);
        return cands.empty() ? std::string{} : cands.front().id;
    };
    auto single = [&](const TaskKind& k) {
        TaskPlan p;
        p.steps.push_back({k, first_model(k), InputSource::user_data()});
        p.combine = CombineMode::Single;
        return p;
    };

    const TaskPlan cls = single(TaskKind::classification());
    const TaskPlan cap = single(TaskKind::captioning());
    const TaskPlan vqa = single(TaskKind::vqa());

    // Specific rules first: generic question words are only VQA when nothing
    // classification- or caption-shaped matched earlier.
    std::vector<KeywordRule> rules{
        {{"caption"}, cap},
        {{"describe"}, cap},
        {{"one-line summary"}, cap},
        {{"alt text"}, cap},
        {{"title for"}, cap},
        {{"classify"}, cls},
        {{"identify"}, cls},
        {{"categorize"}, cls},
        {{"recognize"}, cls},
        {{"what kind"}, cls},
        {{"what type"}, cls},
        {{"what breed"}, cls},
        {{"what species"}, cls},
        {{"which category"}, cls},
        {{"label this"}, cls},
        {{"name of this"}, cls},
        {{"what is this"}, cls},
        {{"how many"}, vqa},
        {{"what"}, vqa},
        {{"where"}, vqa},
        {{"who"}, vqa},
        {{"is there"}, vqa},
        {{"are there"}, vqa},
        {{"does the"}, vqa},
        {{"is the"}, vqa},
        {{"why"}, vqa},
        {{"which"}, vqa},
        {{"?"}, vqa},
        {{"tell me about"}, cap},
        {{"summarize"}, cap},
    };
    return std::make_unique<KeywordMockAdvisor>(std::move(rules));
}

} // namespace edgeplan
