#include "edgeplan/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgeplan/advisor.hpp"
#include "edgeplan/codec.hpp"
#include "edgeplan/fedsim.hpp"
#include "edgeplan/planner.hpp"
#include "edgeplan/registry.hpp"
#include "edgeplan/rng.hpp"

namespace edgeplan {

using nlohmann::json;
namespace fs = std::filesystem;

static constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// End-to-end latency composition

EndToEndReport emit_end_to_end(const TaskPlan& plan, const Scenario& scenario) {
    // Step latencies are computed with the planning term zeroed; planning is
    // charged once for the whole plan.
    Scenario no_planning = scenario;
    no_planning.planning_latency_s = 0.0;

    EndToEndReport report;
    report.planning_s = scenario.planning_latency_s;
    for (const auto& step : plan.steps) {
        const ModelManifest* manifest = nullptr;
        for (const auto& m : scenario.models)
            if (m.id == step.model_id) manifest = &m;
        if (!manifest) throw UnresolvableStep("no manifest for model " + step.model_id);

        StepLatency best;
        best.step = step;
        best.scheme = Scheme::client_only();
        best.latency = scheme_latency(*manifest, best.scheme, no_planning);
        for (const Scheme& cand : {Scheme::edge_lossless(),
                                   Scheme::co_inference(best_partition(*manifest, no_planning).split)}) {
            LatencyBreakdown lb = scheme_latency(*manifest, cand, no_planning);
            if (lb.total < best.latency.total) {
                best.scheme = cand;
                best.latency = lb;
            }
        }
        report.steps.push_back(best);
    }

    double combined = 0.0;
    if (plan.combine == CombineMode::FuseOutputs) {
        for (const auto& s : report.steps) combined = std::max(combined, s.latency.total);
        report.fusion_s = scenario.fusion_latency_s;
        combined += report.fusion_s;
    } else {
        for (const auto& s : report.steps) combined += s.latency.total;
    }
    report.total_s = report.planning_s + combined;
    return report;
}

// ---------------------------------------------------------------------------
// Helpers

static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

static std::vector<double> parse_rates(const std::string& spec) {
    auto parse_one = [](std::string tok) {
        double mult = 1.0;
        if (!tok.empty() && (tok.back() == 'k' || tok.back() == 'K')) {
            mult = 1000.0;
            tok.pop_back();
        } else if (!tok.empty() && (tok.back() == 'm' || tok.back() == 'M')) {
            mult = 1e6;
            tok.pop_back();
        }
        return std::stod(tok) * mult;
    };
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::istringstream is(spec);
        std::string a, b, c;
        std::getline(is, a, ':');
        std::getline(is, b, ':');
        std::getline(is, c, ':');
        double start = parse_one(a), stop = parse_one(b), step = c.empty() ? 50000.0 : parse_one(c);
        if (step <= 0.0 || stop < start) throw UsageError("bad rate range " + spec);
        for (double r = start; r <= stop + 1e-9; r += step) out.push_back(r);
    } else {
        std::istringstream is(spec);
        std::string tok;
        while (std::getline(is, tok, ',')) out.push_back(parse_one(tok));
    }
    if (out.empty()) throw UsageError("no rates in " + spec);
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) throw UsageError("rates must be ascending");
    return out;
}

static std::vector<double> parse_doubles(const std::string& spec) {
    std::vector<double> out;
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

static void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

static void write_rows(const fs::path& path, const std::vector<std::string>& rows) {
    std::ostringstream os;
    for (const auto& r : rows) os << r << "\n";
    write_file(path, os.str());
}

static void write_manifest(const fs::path& out_dir, const std::string& command, std::uint64_t seed,
                           const std::string& scenario_text) {
    json m{
        {"command", command},
        {"seed", seed},
        {"scenario_hash", fnv1a(scenario_text)},
        {"version", kVersion},
    };
    write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

static std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------

RunReport run(const std::vector<std::string>& argv) {
    RunReport report;

    CLI::App app{"edgeplan: cloud-edge-client orchestration simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::string advisor_kind = "mock";
    std::string endpoint;
    std::string model_name = "gpt";

    auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
        if (needs_scenario) cmd->add_option("--scenario", scenario_path, "scenario file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "master seed");
    };
    auto add_advisor = [&](CLI::App* cmd) {
        cmd->add_option("--advisor", advisor_kind, "mock|scripted|remote");
        cmd->add_option("--endpoint", endpoint, "remote advisor endpoint");
        cmd->add_option("--model-name", model_name, "remote model name");
    };

    std::string request;
    CLI::App* cmd_plan = app.add_subcommand("plan", "plan a natural-language request");
    add_common(cmd_plan);
    add_advisor(cmd_plan);
    cmd_plan->add_option("--request", request, "user request")->required();

    std::string dataset_path;
    CLI::App* cmd_eval = app.add_subcommand("eval-planner", "score a planner on a labeled dataset");
    add_common(cmd_eval);
    add_advisor(cmd_eval);
    cmd_eval->add_option("--dataset", dataset_path, "labeled request dataset (jsonl)")->required();

    std::string model_id;
    std::string schemes_spec = "client_only,edge_lossless,edge_lossy,co_inference,cloud_only";
    std::string rates_spec = "100k:500k:50k";
    CLI::App* cmd_latency = app.add_subcommand("infer-latency", "latency sweep over communication rates");
    add_common(cmd_latency);
    cmd_latency->add_option("--model", model_id, "model id")->required();
    cmd_latency->add_option("--schemes", schemes_spec, "comma-separated scheme list");
    cmd_latency->add_option("--rates", rates_spec, "start:stop:step (k/m suffixes) or comma list");

    std::string betas_spec = "0,0.0001,0.0002,0.0005,0.001,0.002,0.005,0.01,0.02,0.05,0.1,0.2,0.5,1,2,5,10,20,50,100";
    std::string grid_spec = "kept=8,16,32,64;bins=2,4,8,16";
    CLI::App* cmd_codec = app.add_subcommand("codec-sweep", "rate/loss tradeoff sweep");
    add_common(cmd_codec);
    cmd_codec->add_option("--betas", betas_spec, "ascending beta list");
    cmd_codec->add_option("--grid-spec", grid_spec, "kept=..;bins=..");

    std::string overrides_json = "{}";
    CLI::App* cmd_flrun = app.add_subcommand("fl-run", "one federated training run");
    add_common(cmd_flrun);
    cmd_flrun->add_option("--config-overrides", overrides_json, "JSON object merged over the scenario FL config");

    int max_trials = 5;
    double target_acc = 0.99;
    CLI::App* cmd_flauto = app.add_subcommand("fl-auto", "advisor-driven trial loop");
    add_common(cmd_flauto);
    add_advisor(cmd_flauto);
    cmd_flauto->add_option("--max-trials", max_trials, "trial budget");
    cmd_flauto->add_option("--target-acc", target_acc, "stop once final accuracy reaches this");

    CLI::App* cmd_demo = app.add_subcommand("demo", "plan -> partition -> latency pipeline");
    add_common(cmd_demo);
    add_advisor(cmd_demo);
    cmd_demo->add_option("--request", request, "user request");

    std::vector<std::string> args(argv.begin(), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << "\n" << e.what() << "\n";
        report.exit_code = 2;
        return report;
    }

    report.seed = seed;
    report.command = app.get_subcommands().front()->get_name();

    std::string scenario_text;
    Scenario scenario;
    try {
        scenario_text = read_file(scenario_path);
        scenario = parse_scenario(scenario_text);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 3;
        return report;
    }
    report.scenario_id = scenario.id;

    auto make_advisor = [&]() -> std::unique_ptr<Advisor> {
        if (advisor_kind == "mock") return make_bundled_keyword_advisor(scenario);
        if (advisor_kind == "scripted") return make_bundled_fl_advisor();
        if (advisor_kind == "remote") {
            RemoteConfig cfg;
            cfg.endpoint = endpoint;
            cfg.model_name = model_name;
            cfg.expect = report.command == "fl-auto" ? ExpectedReply::FLProposal : ExpectedReply::Plan;
            return std::make_unique<RemoteAdvisor>(cfg);
        }
        throw UsageError("unknown advisor kind " + advisor_kind);
    };

    try {
        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (report.command == "plan") {
            auto advisor = make_advisor();
            TaskPlan p = plan(request, scenario, *advisor);
            write_file(out / "plan.json", plan_to_json(p).dump(2) + "\n");
            report.rows.push_back(plan_to_json(p).dump());
        } else if (report.command == "eval-planner") {
            auto advisor = make_advisor();
            auto dataset = load_request_dataset(dataset_path);
            PlannerMetrics m = evaluate_planner(dataset, scenario, *advisor);
            report.rows.push_back("accuracy,macro_f1");
            report.rows.push_back(fmt(m.accuracy) + "," + fmt(m.macro_f1));
            write_rows(out / "metrics.csv", report.rows);
            // Wall time is run-dependent; it stays out of the artifact files.
            std::cerr << "mean_latency_s=" << fmt(m.mean_latency) << "\n";
        } else if (report.command == "infer-latency") {
            const ModelManifest& manifest = scenario.model(model_id);
            std::vector<Scheme> schemes;
            std::istringstream is(schemes_spec);
            std::string tok;
            while (std::getline(is, tok, ',')) schemes.push_back(scheme_from_name(tok));
            std::vector<double> rates = parse_rates(rates_spec);
            auto rows = latency_sweep(manifest, scenario, schemes, rates);
            report.rows.push_back("rate_bps,scheme,planning_s,upload_s,client_s,edge_s,cloud_s,download_s,total_s");
            for (const auto& r : rows) {
                const auto& b = r.latency;
                report.rows.push_back(fmt(r.rate) + "," + scheme_name(r.scheme) + "," + fmt(b.planning) + "," +
                                      fmt(b.upload) + "," + fmt(b.client_compute) + "," + fmt(b.edge_compute) +
                                      "," + fmt(b.cloud_compute) + "," + fmt(b.download) + "," + fmt(b.total));
            }
            write_rows(out / "latency.csv", report.rows);
        } else if (report.command == "codec-sweep") {
            std::vector<double> betas = parse_doubles(betas_spec);
            std::vector<int> kept, bins;
            {
                std::istringstream is(grid_spec);
                std::string part;
                while (std::getline(is, part, ';')) {
                    auto eq = part.find('=');
                    if (eq == std::string::npos) throw UsageError("bad grid spec " + grid_spec);
                    std::string key = part.substr(0, eq);
                    for (double v : parse_doubles(part.substr(eq + 1)))
                        (key == "kept" ? kept : bins).push_back(static_cast<int>(v));
                }
            }
            if (kept.empty() || bins.empty()) throw UsageError("grid spec needs kept= and bins=");
            SyntheticTask task = make_synthetic_task(derive_seed(seed, "codec-task"));
            std::vector<CodecConfig> grid;
            for (int k : kept)
                for (int b : bins) grid.push_back(CodecConfig{k, b, -2.0, 2.0});
            auto points = tradeoff_sweep(task, betas, grid);
            report.rows.push_back("beta,kept_dims,n_bins,rate_bits,task_loss");
            for (const auto& p : points)
                report.rows.push_back(fmt(p.beta) + "," + std::to_string(p.config.kept_dims) + "," +
                                      std::to_string(p.config.n_bins) + "," + fmt(p.rate_bits) + "," +
                                      fmt(p.task_loss));
            write_rows(out / "tradeoff.csv", report.rows);
        } else if (report.command == "fl-run") {
            FLConfig cfg = scenario.fl.value_or(FLConfig{});
            json merged = fl_config_to_json(cfg);
            json overrides = json::parse(overrides_json);
            merged.update(overrides);
            cfg = fl_config_from_json(merged);
            Dataset train = make_bundled_fl_train(seed);
            Dataset test = make_bundled_fl_test(seed);
            auto curve = run_fl(cfg, train, test, scenario, derive_seed(seed, "fl-run"));
            report.rows.push_back("round,accuracy,wallclock_s");
            for (const auto& pt : curve)
                report.rows.push_back(std::to_string(pt.round) + "," + fmt(pt.accuracy) + "," + fmt(pt.wallclock_s));
            write_rows(out / "fl_curve.csv", report.rows);
        } else if (report.command == "fl-auto") {
            std::unique_ptr<Advisor> advisor;
            if (advisor_kind == "remote") {
                advisor = make_advisor();
            } else {
                advisor = make_bundled_fl_advisor();
            }
            Dataset train = make_bundled_fl_train(seed);
            Dataset test = make_bundled_fl_test(seed);
            FLConfig tmpl = bundled_trial_template();
            auto records = trial_loop(*advisor, tmpl, train, test, scenario, max_trials, target_acc,
                                      derive_seed(seed, "fl-auto"));
            report.rows.push_back("trial,final_accuracy,arch,optimizer,lr,lr_schedule,augmentation");
            for (const auto& rec : records) {
                std::vector<std::string> rows{"round,accuracy,wallclock_s"};
                for (const auto& pt : rec.accuracy_curve)
                    rows.push_back(std::to_string(pt.round) + "," + fmt(pt.accuracy) + "," + fmt(pt.wallclock_s));
                write_rows(out / ("trial_" + std::to_string(rec.trial_index) + ".csv"), rows);
                report.rows.push_back(std::to_string(rec.trial_index) + "," +
                                      fmt(rec.accuracy_curve.back().accuracy) + "," + rec.config.model_arch +
                                      "," + to_string(rec.config.optimizer) + "," + fmt(rec.config.lr) + "," +
                                      to_string(rec.config.lr_schedule) + "," +
                                      to_string(rec.config.augmentation));
            }
            write_rows(out / "trials_summary.csv", report.rows);
        } else if (report.command == "demo") {
            auto advisor = make_advisor();
            if (request.empty()) request = "caption this photo";
            TaskPlan p = plan(request, scenario, *advisor);
            EndToEndReport e2e = emit_end_to_end(p, scenario);
            std::ostringstream os;
            os << "request: " << request << "\n";
            os << "plan: " << plan_to_json(p).dump() << "\n";
            for (const auto& s : e2e.steps) {
                os << "step " << to_string(s.step.task_kind) << " model=" << s.step.model_id
                   << " scheme=" << scheme_name(s.scheme);
                if (s.scheme.variant == SchemeVariant::CoInference) os << " split=" << s.scheme.split;
                const auto& b = s.latency;
                os << " upload_s=" << fmt(b.upload) << " client_s=" << fmt(b.client_compute)
                   << " edge_s=" << fmt(b.edge_compute) << " download_s=" << fmt(b.download)
                   << " total_s=" << fmt(b.total) << "\n";
            }
            os << "planning_s: " << fmt(e2e.planning_s) << "\n";
            if (p.combine == CombineMode::FuseOutputs) os << "fusion_s: " << fmt(e2e.fusion_s) << "\n";
            os << "end_to_end_total_s: " << fmt(e2e.total_s) << "\n";
            write_file(out / "demo.txt", os.str());
            std::istringstream lines(os.str());
            std::string line;
            while (std::getline(lines, line)) report.rows.push_back(line);
        }

        write_manifest(out, report.command, seed, scenario_text);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 2;
    } catch (const TransportError& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 4;
    } catch (const TimeoutError& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 4;
    } catch (const MalformedReply& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 4;
    } catch (const InvalidPlan& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 4;
    } catch (const AdvisorUnreachable& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 4;
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 3;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 5;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        report.exit_code = 5;
    }
    return report;
}

} // namespace edgeplan
