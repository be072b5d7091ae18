// Command-line front end for the signal-timing experiment harness.
//
//   dprl train    train one (env, agent, seed) cell and checkpoint it
//   dprl eval     evaluate a saved checkpoint on fresh episodes
//   dprl compare  run the full env x agent x seed grid and emit the tables
//   dprl demo     train both agents on one environment and show the contrast
//
// Every subcommand accepts --config (flat `key = value` file); explicit flags
// override config values.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dprl/experiment.hpp"

namespace fs = std::filesystem;
using namespace dprl;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    int episodes = 0;
    double lambda = 0.0;
    double gamma = 0.0;
    int rollouts = 0;
    CLI::Option* config_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* episodes_opt = nullptr;
    CLI::Option* lambda_opt = nullptr;
    CLI::Option* gamma_opt = nullptr;
    CLI::Option* rollouts_opt = nullptr;
};

void attach_common(CLI::App* cmd, CommonFlags& f) {
    f.config_opt = cmd->add_option("--config", f.config,
                                   "flat key = value config file, applied "
                                   "before other flags");
    f.out_opt = cmd->add_option("--out", f.out, "output directory");
    f.episodes_opt =
        cmd->add_option("--episodes", f.episodes, "training episodes per cell");
    f.lambda_opt = cmd->add_option("--lambda", f.lambda,
                                   "auxiliary loss weight (0 = plain REINFORCE)");
    f.gamma_opt = cmd->add_option("--gamma", f.gamma, "return discount");
    f.rollouts_opt =
        cmd->add_option("--rollouts", f.rollouts, "evaluation rollouts per cell");
}

ExperimentConfig resolve(const CommonFlags& f) {
    ExperimentConfig cfg;
    if (f.config_opt->count()) cfg = load_config(f.config);
    if (f.out_opt->count()) cfg.out_dir = f.out;
    if (f.episodes_opt->count()) cfg.train.episodes = f.episodes;
    if (f.lambda_opt->count()) cfg.train.lambda = f.lambda;
    if (f.gamma_opt->count()) cfg.train.gamma = f.gamma;
    if (f.rollouts_opt->count()) cfg.n_rollouts = f.rollouts;
    return cfg;
}

void print_metrics(const char* label, const MetricSummary& m) {
    std::printf(
        "%-10s jerk=%-9.4f oscillations=%-7.2f timing_variance=%-9.3f "
        "committed=%d/%d%s\n",
        label, m.mean_jerk, m.mean_oscillations, m.timing_variance,
        m.n_committed, m.n_rollouts, m.non_committal ? "  [non-committal]" : "");
}

int cmd_train(const CommonFlags& common, const std::string& env_s,
              const std::string& agent_s, std::uint64_t seed) {
    ExperimentConfig cfg = resolve(common);
    const EnvKind env = parse_env_kind(env_s);
    const AgentKind agent = parse_agent_kind(agent_s);
    cfg.envs = {env};
    cfg.agents = {agent};
    cfg.seeds = {seed};
    cfg.validate();

    fs::create_directories(cfg.out_dir);
    TrainResult tr;
    std::vector<RolloutTrace> traces;
    const CellResult cell = run_cell(cfg, env, agent, seed, &tr, &traces);

    const std::string stem = cell_stem(env, agent, seed);
    const std::string curve_path = cfg.out_dir + "/curve_" + stem + ".csv";
    const std::string ckpt_path = cfg.out_dir + "/checkpoint_" + stem + ".json";
    write_curve_csv(curve_path, tr.curve);
    save_checkpoint(tr.params, ckpt_path);

    std::printf("trained %s/%s seed %llu for %d episodes\n", env_name(env),
                agent_name(agent), static_cast<unsigned long long>(seed),
                cfg.train.episodes);
    print_metrics(agent_name(agent), cell.metrics);
    std::printf("wrote %s\nwrote %s\n", curve_path.c_str(), ckpt_path.c_str());
    return 0;
}

int cmd_eval(const CommonFlags& common, const std::string& ckpt_path,
             const std::string& env_s, const std::string& agent_s,
             std::uint64_t seed) {
    ExperimentConfig cfg = resolve(common);
    const EnvKind env = parse_env_kind(env_s);
    cfg.validate();

    const PolicyParams P = load_checkpoint(ckpt_path);
    Rng erng = eval_rng(seed, env);
    const std::vector<RolloutTrace> traces =
        collect_rollouts(P, env, cfg.env, cfg.n_rollouts, erng);
    const MetricSummary m = aggregate(traces, cfg.decision_threshold);

    std::printf("evaluated %s on %s, seed %llu, %d rollouts\n",
                ckpt_path.c_str(), env_name(env),
                static_cast<unsigned long long>(seed), cfg.n_rollouts);
    print_metrics(agent_s.c_str(), m);

    if (common.out_opt->count()) {
        fs::create_directories(cfg.out_dir);
        Json j;
        j["env"] = env_name(env);
        j["agent"] = agent_s;
        j["seed"] = seed;
        j["threshold"] = cfg.decision_threshold;
        j["n_committed"] = m.n_committed;
        j["mean_curve"] = m.mean_curve;
        j["std_curve"] = m.std_curve;
        Json jtr = Json::array();
        for (const auto& t : traces) jtr.push_back(t.p);
        j["traces"] = jtr;
        const std::string path = cfg.out_dir + "/eval_" + env_name(env) + "_" +
                                 agent_s + "_" + std::to_string(seed) + ".json";
        write_text_file(path, j.dump(2) + "\n");
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

int cmd_compare(const CommonFlags& common, const std::vector<std::string>& envs,
                const std::vector<std::string>& agents,
                const std::vector<std::uint64_t>& seeds) {
    ExperimentConfig cfg = resolve(common);
    if (!envs.empty()) {
        cfg.envs.clear();
        for (const auto& e : envs) cfg.envs.push_back(parse_env_kind(e));
    }
    if (!agents.empty()) {
        cfg.agents.clear();
        for (const auto& a : agents) cfg.agents.push_back(parse_agent_kind(a));
    }
    if (!seeds.empty()) cfg.seeds = seeds;

    const ExperimentReport report = run_experiment(cfg);

    int failed_cells = 0;
    for (const auto& c : report.cells) failed_cells += c.failed ? 1 : 0;
    std::printf("ran %zu cells (%d diverged) into %s\n", report.cells.size(),
                failed_cells, cfg.out_dir.c_str());

    const auto show = [](const char* name, const CheckResult& c) {
        if (!c.applicable) {
            std::printf("  %-7s check: skipped (needs both agents)\n", name);
            return;
        }
        std::printf("  %-7s check: %s (%d/%d seeds, need %d)\n", name,
                    c.pass ? "pass" : "FAIL", c.votes, c.n_seeds, c.required);
    };
    show("drift", report.drift_check);
    show("hover", report.hover_check);
    show("window", report.window_check);
    std::printf("table: %s/table.csv\nsummary: %s/summary.json\n",
                cfg.out_dir.c_str(), cfg.out_dir.c_str());
    return 0;
}

int cmd_demo(const CommonFlags& common, const std::string& env_s,
             std::uint64_t seed) {
    ExperimentConfig cfg = resolve(common);
    const EnvKind env = parse_env_kind(env_s);
    cfg.envs = {env};
    cfg.validate();

    std::printf("training both agents on %s, seed %llu, %d episodes each...\n",
                env_name(env), static_cast<unsigned long long>(seed),
                cfg.train.episodes);

    TrainResult tr_plain, tr_dp;
    const CellResult plain =
        run_cell(cfg, env, AgentKind::Reinforce, seed, &tr_plain);
    const CellResult dp = run_cell(cfg, env, AgentKind::DpRl, seed, &tr_dp);
    print_metrics("reinforce", plain.metrics);
    print_metrics("dprl", dp.metrics);

    // One frozen evaluation episode, with the filter target and both policies'
    // probability traces on it, for plotting the timing contrast.
    Rng erng = eval_rng(seed, env);
    const EpisodeSignal sig = generate_signal(env, cfg.env, erng);
    Json j = episode_to_json(sig, seed);
    j["esd"] = esd_trajectory(sig.s, cfg.esd);
    Json p_plain = Json::array(), p_dp = Json::array();
    for (double s : sig.s) {
        p_plain.push_back(forward(tr_plain.params, s).p);
        p_dp.push_back(forward(tr_dp.params, s).p);
    }
    j["reinforce_p"] = p_plain;
    j["dprl_p"] = p_dp;

    fs::create_directories(cfg.out_dir);
    const std::string path =
        cfg.out_dir + "/demo_" + env_name(env) + "_" + std::to_string(seed) + ".json";
    write_text_file(path, j.dump(2) + "\n");
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signal-timing RL harness: plain REINFORCE vs a "
                 "filter-regularized agent"};
    app.require_subcommand(1);

    CLI::App* t = app.add_subcommand("train", "train one (env, agent, seed) cell");
    CommonFlags tf;
    std::string t_env = "drift", t_agent = "dprl";
    std::uint64_t t_seed = 0;
    attach_common(t, tf);
    t->add_option("--env", t_env, "drift|hover|window")->capture_default_str();
    t->add_option("--agent", t_agent, "reinforce|dprl")->capture_default_str();
    t->add_option("--seed", t_seed, "training seed")->capture_default_str();

    CLI::App* e = app.add_subcommand("eval", "evaluate a saved checkpoint");
    CommonFlags ef;
    std::string e_ckpt, e_env = "drift", e_agent = "dprl";
    std::uint64_t e_seed = 0;
    attach_common(e, ef);
    e->add_option("--checkpoint", e_ckpt, "checkpoint JSON to load")
        ->required()
        ->check(CLI::ExistingFile);
    e->add_option("--env", e_env, "drift|hover|window")->capture_default_str();
    e->add_option("--agent", e_agent, "label for the report")->capture_default_str();
    e->add_option("--seed", e_seed, "evaluation seed")->capture_default_str();

    CLI::App* c = app.add_subcommand("compare",
                                     "run the full grid and write the tables");
    CommonFlags cf;
    std::vector<std::string> c_envs, c_agents;
    std::vector<std::uint64_t> c_seeds;
    attach_common(c, cf);
    c->add_option("--envs", c_envs, "subset of drift,hover,window")
        ->delimiter(',');
    c->add_option("--agents", c_agents, "subset of reinforce,dprl")
        ->delimiter(',');
    c->add_option("--seeds", c_seeds, "seed list, e.g. 0,1,2,3,4")
        ->delimiter(',');

    CLI::App* d = app.add_subcommand("demo",
                                     "train both agents on one environment "
                                     "and export a contrast episode");
    CommonFlags df;
    std::string d_env = "drift";
    std::uint64_t d_seed = 0;
    attach_common(d, df);
    d->add_option("--env", d_env, "drift|hover|window")->capture_default_str();
    d->add_option("--seed", d_seed, "shared seed for both agents")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_train(tf, t_env, t_agent, t_seed);
        if (e->parsed()) return cmd_eval(ef, e_ckpt, e_env, e_agent, e_seed);
        if (c->parsed()) return cmd_compare(cf, c_envs, c_agents, c_seeds);
        if (d->parsed()) return cmd_demo(df, d_env, d_seed);
    } catch (const TrainingDiverged& ex) {
        std::fprintf(stderr, "error: training diverged: %s\n", ex.what());
        return 3;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 1;
}
