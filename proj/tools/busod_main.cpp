#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "busod/errors.hpp"
#include "busod/io.hpp"
#include "busod/pipeline.hpp"
#include "busod/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using namespace busod;

struct Options {
    std::string config;
    std::string out = "out";
    std::string policy;  // empty = from config
    std::string repair;  // empty = from config
    std::string pred;
    std::string truth;
    std::uint64_t seed = 0;  // 0 = from scenario file
};

void apply_overrides(pipe::PipelineConfig& cfg, const Options& opt) {
    // Re-parse through a scratch JSON config so the string -> enum mapping
    // stays in one place (load_config).
    if (!opt.policy.empty()) {
        if (opt.policy == "baseline")
            cfg.policy = count::CountPolicy::Baseline;
        else if (opt.policy == "door_state")
            cfg.policy = count::CountPolicy::DoorState;
        else if (opt.policy == "hybrid")
            cfg.policy = count::CountPolicy::Hybrid;
        else if (opt.policy == "queue_aware")
            cfg.policy = count::CountPolicy::QueueAware;
        else
            throw ConfigError("unknown counting policy: " + opt.policy);
        cfg.counting.policy = cfg.policy;
    }
    if (!opt.repair.empty()) {
        if (opt.repair == "none")
            cfg.tracker.repair_policy = track::RepairPolicy::None;
        else if (opt.repair == "ema")
            cfg.tracker.repair_policy = track::RepairPolicy::Ema;
        else if (opt.repair == "door")
            cfg.tracker.repair_policy = track::RepairPolicy::DoorAware;
        else if (opt.repair == "door_traj")
            cfg.tracker.repair_policy = track::RepairPolicy::DoorAwareTrajectory;
        else
            throw ConfigError("unknown repair policy: " + opt.repair);
    }
}

void do_simulate(const Options& opt) {
    sim::ScenarioConfig sc = sim::scenario_from_json(io::read_file(opt.config));
    if (opt.seed != 0) sc.seed = opt.seed;
    sim::generate(sc, opt.out);
    std::printf("simulated scenario (seed %llu) into %s\n",
                static_cast<unsigned long long>(sc.seed), opt.out.c_str());
}

void do_run(const Options& opt) {
    pipe::PipelineConfig cfg = pipe::load_config(opt.config);
    apply_overrides(cfg, opt);
    pipe::run_pipeline(cfg, opt.out);
    std::printf("pipeline artifacts written to %s\n", opt.out.c_str());
}

void do_eval(const Options& opt) {
    pipe::run_eval(opt.pred, opt.truth);
    std::printf("eval_report.json written to %s\n", opt.pred.c_str());
}

void do_all(const Options& opt) {
    Options sim_opt = opt;
    sim_opt.out = (fs::path(opt.out) / "data").string();
    do_simulate(sim_opt);

    Options run_opt = opt;
    run_opt.config = (fs::path(sim_opt.out) / "pipeline_config.json").string();
    run_opt.out = (fs::path(opt.out) / "run").string();
    do_run(run_opt);

    Options eval_opt = opt;
    eval_opt.pred = run_opt.out;
    eval_opt.truth = (fs::path(sim_opt.out) / "truth.json").string();
    do_eval(eval_opt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-camera bus passenger OD reconstruction"};
    app.require_subcommand(1);
    Options opt;

    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scenario");
    sim_cmd->add_option("--config", opt.config, "Scenario JSON")->required();
    sim_cmd->add_option("--seed", opt.seed, "Override the scenario seed");
    sim_cmd->add_option("--out", opt.out, "Output directory");

    auto* run_cmd = app.add_subcommand("run", "Run the OD pipeline");
    run_cmd->add_option("--config", opt.config, "Pipeline JSON config")->required();
    run_cmd->add_option("--policy", opt.policy,
                        "baseline|door_state|hybrid|queue_aware");
    run_cmd->add_option("--repair", opt.repair, "none|ema|door|door_traj");
    run_cmd->add_option("--out", opt.out, "Output directory");

    auto* eval_cmd = app.add_subcommand("eval", "Score a run against truth");
    eval_cmd->add_option("--pred", opt.pred, "Pipeline output directory")->required();
    eval_cmd->add_option("--truth", opt.truth, "truth.json path")->required();

    auto* all_cmd = app.add_subcommand("all", "simulate, run, then eval");
    all_cmd->add_option("--config", opt.config, "Scenario JSON")->required();
    all_cmd->add_option("--seed", opt.seed, "Override the scenario seed");
    all_cmd->add_option("--policy", opt.policy,
                        "baseline|door_state|hybrid|queue_aware");
    all_cmd->add_option("--repair", opt.repair, "none|ema|door|door_traj");
    all_cmd->add_option("--out", opt.out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) do_simulate(opt);
        if (run_cmd->parsed()) do_run(opt);
        if (eval_cmd->parsed()) do_eval(opt);
        if (all_cmd->parsed()) do_all(opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InputSchemaError& e) {
        std::fprintf(stderr, "input schema error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
