#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/esd.hpp"
#include "dprl/metrics.hpp"
#include "dprl/serialize.hpp"
#include "dprl/signal_env.hpp"
#include "dprl/trainer.hpp"

namespace dprl {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::vector<EnvKind> envs = {EnvKind::Drift, EnvKind::Hover, EnvKind::Window};
    std::vector<AgentKind> agents = {AgentKind::Reinforce, AgentKind::DpRl};
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    EnvConfig env;
    TrainConfig train;
    EsdParams esd;
    int n_rollouts = 40;
    double decision_threshold = 0.6;
    std::string out_dir = "out";

    void validate() const {
        if (envs.empty()) throw ConfigError("experiment.envs must not be empty");
        if (agents.empty()) throw ConfigError("experiment.agents must not be empty");
        if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
        if (n_rollouts < 1) throw ConfigError("experiment.rollouts must be >= 1");
        if (!(decision_threshold > 0.0 && decision_threshold < 1.0))
            throw ConfigError("experiment.threshold must be in (0,1)");
        env.validate();
        train.validate();
        esd.validate();
    }
};

inline EnvKind parse_env_kind(const std::string& s) {
    if (s == "drift") return EnvKind::Drift;
    if (s == "hover") return EnvKind::Hover;
    if (s == "window") return EnvKind::Window;
    throw ConfigError("unknown environment '" + s + "' (drift|hover|window)");
}

inline AgentKind parse_agent_kind(const std::string& s) {
    if (s == "reinforce") return AgentKind::Reinforce;
    if (s == "dprl") return AgentKind::DpRl;
    throw ConfigError("unknown agent '" + s + "' (reinforce|dprl)");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad seed value for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace detail

// Apply one flat dotted-key assignment. Shared by the config-file loader and
// the CLI flag overrides, so both enforce the same key set.
inline void apply_config_key(ExperimentConfig& c, const std::string& key,
                             const std::string& value) {
    using namespace detail;
    auto& e = c.env;
    auto& t = c.train;
    if (key == "env.horizon") e.horizon = parse_int(key, value);
    else if (key == "env.drift_onset_lo") e.drift_onset_lo = parse_int(key, value);
    else if (key == "env.drift_onset_hi") e.drift_onset_hi = parse_int(key, value);
    else if (key == "env.drift_base") e.drift_base = parse_double(key, value);
    else if (key == "env.drift_noise_sd") e.drift_noise_sd = parse_double(key, value);
    else if (key == "env.drift_ramp_noise_sd") e.drift_ramp_noise_sd = parse_double(key, value);
    else if (key == "env.hover_threshold") e.hover_threshold = parse_double(key, value);
    else if (key == "env.hover_jitter") e.hover_jitter = parse_double(key, value);
    else if (key == "env.hover_cross_lo") e.hover_cross_lo = parse_int(key, value);
    else if (key == "env.hover_cross_hi") e.hover_cross_hi = parse_int(key, value);
    else if (key == "env.hover_ramp_len") e.hover_ramp_len = parse_int(key, value);
    else if (key == "env.hover_plateau_noise_sd") e.hover_plateau_noise_sd = parse_double(key, value);
    else if (key == "env.window_lo") e.window_lo = parse_int(key, value);
    else if (key == "env.window_hi") e.window_hi = parse_int(key, value);
    else if (key == "env.window_noise_sd") e.window_noise_sd = parse_double(key, value);
    else if (key == "env.sustain_lag") e.sustain_lag = parse_int(key, value);
    else if (key == "env.reward_hit") e.reward_hit = parse_double(key, value);
    else if (key == "env.reward_miss") e.reward_miss = parse_double(key, value);
    else if (key == "env.reward_transient") e.reward_transient = parse_double(key, value);
    else if (key == "esd.alpha_up") c.esd.alpha_up = parse_double(key, value);
    else if (key == "esd.alpha_down") c.esd.alpha_down = parse_double(key, value);
    else if (key == "esd.beta") c.esd.beta = parse_double(key, value);
    else if (key == "esd.clamp_output") c.esd.clamp_output = parse_bool(key, value);
    else if (key == "train.episodes") t.episodes = parse_int(key, value);
    else if (key == "train.gamma") t.gamma = parse_double(key, value);
    else if (key == "train.lambda") t.lambda = parse_double(key, value);
    else if (key == "train.learn_rate") t.learn_rate = parse_double(key, value);
    else if (key == "train.adam_beta1") t.adam_beta1 = parse_double(key, value);
    else if (key == "train.adam_beta2") t.adam_beta2 = parse_double(key, value);
    else if (key == "train.adam_eps") t.adam_eps = parse_double(key, value);
    else if (key == "train.normalize_returns") t.normalize_returns = parse_bool(key, value);
    else if (key == "train.hidden") t.hidden = parse_int(key, value);
    else if (key == "train.activation") t.activation = parse_activation(value);
    else if (key == "experiment.envs") {
        c.envs.clear();
        if (value == "all") {
            c.envs = {EnvKind::Drift, EnvKind::Hover, EnvKind::Window};
        } else {
            for (const auto& item : split_list(value))
                c.envs.push_back(parse_env_kind(item));
        }
    } else if (key == "experiment.agents") {
        c.agents.clear();
        if (value == "both") {
            c.agents = {AgentKind::Reinforce, AgentKind::DpRl};
        } else {
            for (const auto& item : split_list(value))
                c.agents.push_back(parse_agent_kind(item));
        }
    } else if (key == "experiment.seeds") {
        c.seeds.clear();
        for (const auto& item : split_list(value))
            c.seeds.push_back(parse_u64(key, item));
    } else if (key == "experiment.rollouts") {
        c.n_rollouts = parse_int(key, value);
    } else if (key == "experiment.threshold") {
        c.decision_threshold = parse_double(key, value);
    } else if (key == "experiment.out_dir") {
        c.out_dir = value;
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

// Flat `key = value` lines, '#' comments, blank lines ignored. An empty file
// resolves to all defaults.
inline ExperimentConfig load_config(const std::string& path) {
    ExperimentConfig cfg;
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        apply_config_key(cfg, detail::trim(line.substr(0, eq)),
                         detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

struct CellResult {
    EnvKind env = EnvKind::Drift;
    AgentKind agent = AgentKind::Reinforce;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    MetricSummary metrics;
};

struct CheckResult {
    bool applicable = false;
    int votes = 0;
    int n_seeds = 0;
    int required = 0;
    bool pass = false;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    CheckResult drift_check, hover_check, window_check;
};

namespace detail {

inline int env_index(EnvKind k) {
    switch (k) {
        case EnvKind::Drift: return 0;
        case EnvKind::Hover: return 1;
        case EnvKind::Window: return 2;
    }
    return 0;
}

inline const CellResult* find_cell(const std::vector<CellResult>& cells,
                                   EnvKind env, AgentKind agent,
                                   std::uint64_t seed) {
    for (const auto& c : cells)
        if (c.env == env && c.agent == agent && c.seed == seed) return &c;
    return nullptr;
}

}  // namespace detail

// Stream layout: per environment, stream 2i feeds training and 2i+1 feeds
// evaluation. Agent kind is deliberately absent so both agents train on the
// same episode sequence under a shared seed.
inline Rng train_rng(std::uint64_t seed, EnvKind env) {
    return make_rng(seed, 2 * detail::env_index(env));
}
inline Rng eval_rng(std::uint64_t seed, EnvKind env) {
    return make_rng(seed, 2 * detail::env_index(env) + 1);
}

// File-name stem shared by every per-cell artifact.
inline std::string cell_stem(EnvKind env, AgentKind agent, std::uint64_t seed) {
    return std::string(env_name(env)) + "_" + agent_name(agent) + "_" +
           std::to_string(seed);
}

// Train + evaluate one experiment cell. Throws TrainingDiverged on a
// non-finite loss; other config errors propagate.
inline CellResult run_cell(const ExperimentConfig& cfg, EnvKind env,
                           AgentKind agent, std::uint64_t seed,
                           TrainResult* train_out = nullptr,
                           std::vector<RolloutTrace>* traces_out = nullptr) {
    CellResult cell;
    cell.env = env;
    cell.agent = agent;
    cell.seed = seed;
    Rng trng = train_rng(seed, env);
    TrainResult tr = train(env, agent, cfg.env, cfg.train, cfg.esd, trng);
    Rng erng = eval_rng(seed, env);
    std::vector<RolloutTrace> traces =
        collect_rollouts(tr.params, env, cfg.env, cfg.n_rollouts, erng);
    cell.metrics = aggregate(traces, cfg.decision_threshold);
    if (train_out) *train_out = std::move(tr);
    if (traces_out) *traces_out = std::move(traces);
    return cell;
}

inline void write_curve_csv(const std::string& path,
                            const std::vector<CurvePoint>& curve) {
    std::string out = "episode,total_reward,rl_loss,esd_loss\n";
    for (const auto& c : curve) {
        out += std::to_string(c.episode);
        out += ',';
        out += num_str(c.total_reward);
        out += ',';
        out += num_str(c.rl_loss);
        out += ',';
        out += num_str(c.esd_loss);
        out += '\n';
    }
    write_text_file(path, out);
}

// Run the full (env x agent x seed) grid, writing, per cell, a learning-curve
// CSV and a checkpoint; per (env, agent), a trace bundle JSON; and overall, a
// metrics.csv, a side-by-side table.csv, and a summary.json carrying the
// directional comparisons. Cells that diverge are recorded and skipped.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir + "/";

    ExperimentReport report;
    // env -> agent -> pooled traces across seeds (for the bundle curves)
    for (EnvKind env : cfg.envs) {
        for (AgentKind agent : cfg.agents) {
            Json bundle;
            bundle["env"] = env_name(env);
            bundle["agent"] = agent_name(agent);
            bundle["threshold"] = cfg.decision_threshold;
            Json per_seed = Json::array();
            std::vector<RolloutTrace> pooled;
            for (std::uint64_t seed : cfg.seeds) {
                CellResult cell;
                TrainResult tr;
                std::vector<RolloutTrace> traces;
                try {
                    cell = run_cell(cfg, env, agent, seed, &tr, &traces);
                } catch (const TrainingDiverged& e) {
                    cell.env = env;
                    cell.agent = agent;
                    cell.seed = seed;
                    cell.failed = true;
                    cell.error = e.what();
                    report.cells.push_back(cell);
                    Json jf;
                    jf["seed"] = seed;
                    jf["failed"] = true;
                    jf["error"] = cell.error;
                    per_seed.push_back(jf);
                    continue;
                }
                const std::string stem = cell_stem(env, agent, seed);
                write_curve_csv(dir + "curve_" + stem + ".csv", tr.curve);
                save_checkpoint(tr.params, dir + "checkpoint_" + stem + ".json");

                Json js;
                js["seed"] = seed;
                js["failed"] = false;
                js["n_committed"] = cell.metrics.n_committed;
                js["mean_curve"] = cell.metrics.mean_curve;
                js["std_curve"] = cell.metrics.std_curve;
                Json jtr = Json::array();
                for (const auto& t : traces) jtr.push_back(t.p);
                js["traces"] = jtr;
                per_seed.push_back(js);

                pooled.insert(pooled.end(), traces.begin(), traces.end());
                report.cells.push_back(cell);
            }
            if (!pooled.empty()) {
                const MetricSummary pooled_m =
                    aggregate(pooled, cfg.decision_threshold);
                bundle["n_rollouts"] = pooled_m.n_rollouts;
                bundle["mean_curve"] = pooled_m.mean_curve;
                bundle["std_curve"] = pooled_m.std_curve;
            } else {
                bundle["n_rollouts"] = 0;
            }
            bundle["per_seed"] = per_seed;
            write_text_file(
                dir + "traces_" + env_name(env) + "_" + agent_name(agent) + ".json",
                bundle.dump(2) + "\n");
        }
    }

    // metrics.csv: one row per cell, failures flagged rather than dropped.
    {
        std::string out =
            "env,agent,seed,status,mean_jerk,mean_oscillations,timing_variance,"
            "timing_std,n_committed,n_rollouts,non_committal\n";
        for (const auto& c : report.cells) {
            out += std::string(env_name(c.env)) + "," + agent_name(c.agent) + "," +
                   std::to_string(c.seed) + ",";
            if (c.failed) {
                out += "failed,,,,,,,\n";
                continue;
            }
            const auto& m = c.metrics;
            out += "ok," + num_str(m.mean_jerk) + "," +
                   num_str(m.mean_oscillations) + "," + num_str(m.timing_variance) +
                   "," + num_str(m.timing_std) + "," +
                   std::to_string(m.n_committed) + "," +
                   std::to_string(m.n_rollouts) + "," +
                   (m.non_committal ? "1" : "0") + "\n";
        }
        write_text_file(dir + "metrics.csv", out);
    }

    // Seed-averaged comparison table, columns paired REINFORCE / DP-RL per
    // metric, one row per environment.
    auto seed_avg = [&](EnvKind env, AgentKind agent,
                        auto field) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (std::uint64_t seed : cfg.seeds) {
            const CellResult* c = detail::find_cell(report.cells, env, agent, seed);
            if (c && !c->failed) {
                sum += field(c->metrics);
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    const auto has_agent = [&](AgentKind a) {
        return std::find(cfg.agents.begin(), cfg.agents.end(), a) !=
               cfg.agents.end();
    };
    const auto jerk_f = [](const MetricSummary& m) { return m.mean_jerk; };
    const auto osc_f = [](const MetricSummary& m) { return m.mean_oscillations; };
    const auto tvar_f = [](const MetricSummary& m) { return m.timing_variance; };
    {
        std::string out =
            "env,jerk_reinforce,jerk_dprl,oscillations_reinforce,"
            "oscillations_dprl,timing_variance_reinforce,timing_variance_dprl\n";
        for (EnvKind env : cfg.envs) {
            out += env_name(env);
            for (auto field : {+jerk_f, +osc_f, +tvar_f}) {
                for (AgentKind agent : {AgentKind::Reinforce, AgentKind::DpRl}) {
                    out += ',';
                    if (!has_agent(agent)) continue;
                    if (auto v = seed_avg(env, agent, field)) out += num_str(*v);
                }
            }
            out += '\n';
        }
        write_text_file(dir + "table.csv", out);
    }

    // Directional checks, one per environment, matching the qualitative
    // orderings reported for each task. A seed votes only if both agents
    // finished; the check passes on ceil(4/5) of the seeds.
    const bool both = has_agent(AgentKind::Reinforce) && has_agent(AgentKind::DpRl);
    const int required =
        (static_cast<int>(cfg.seeds.size()) * 4 + 4) / 5;  // ceil(0.8 n)
    Json checks;
    auto run_check = [&](EnvKind env, const char* criterion,
                         auto vote_fn) -> CheckResult {
        CheckResult res;
        if (!both ||
            std::find(cfg.envs.begin(), cfg.envs.end(), env) == cfg.envs.end())
            return res;
        res.applicable = true;
        res.n_seeds = static_cast<int>(cfg.seeds.size());
        res.required = required;
        Json per_seed = Json::array();
        for (std::uint64_t seed : cfg.seeds) {
            const CellResult* re =
                detail::find_cell(report.cells, env, AgentKind::Reinforce, seed);
            const CellResult* dp =
                detail::find_cell(report.cells, env, AgentKind::DpRl, seed);
            Json jv;
            jv["seed"] = seed;
            bool vote = false;
            if (re && dp && !re->failed && !dp->failed) {
                vote = vote_fn(re->metrics, dp->metrics, jv);
            } else {
                jv["failed"] = true;
            }
            jv["vote"] = vote;
            if (vote) ++res.votes;
            per_seed.push_back(jv);
        }
        res.pass = res.votes >= res.required;
        Json jc;
        jc["criterion"] = criterion;
        jc["votes"] = res.votes;
        jc["n_seeds"] = res.n_seeds;
        jc["required"] = res.required;
        jc["pass"] = res.pass;
        jc["per_seed"] = per_seed;
        checks[env_name(env)] = jc;
        return res;
    };

    report.drift_check = run_check(
        EnvKind::Drift,
        "dprl oscillations < reinforce oscillations and dprl timing variance "
        "< reinforce timing variance",
        [](const MetricSummary& re, const MetricSummary& dp, Json& jv) {
            jv["reinforce_oscillations"] = re.mean_oscillations;
            jv["dprl_oscillations"] = dp.mean_oscillations;
            jv["reinforce_timing_variance"] = re.timing_variance;
            jv["dprl_timing_variance"] = dp.timing_variance;
            return dp.mean_oscillations < re.mean_oscillations &&
                   dp.timing_variance < re.timing_variance;
        });
    report.hover_check = run_check(
        EnvKind::Hover,
        "reinforce degenerate-flat (n_committed = 0 or jerk < 0.02), dprl jerk "
        "> reinforce jerk, dprl oscillations > 0",
        [](const MetricSummary& re, const MetricSummary& dp, Json& jv) {
            jv["reinforce_jerk"] = re.mean_jerk;
            jv["dprl_jerk"] = dp.mean_jerk;
            jv["reinforce_n_committed"] = re.n_committed;
            jv["dprl_oscillations"] = dp.mean_oscillations;
            const bool degenerate = re.n_committed == 0 || re.mean_jerk < 0.02;
            return degenerate && dp.mean_jerk > re.mean_jerk &&
                   dp.mean_oscillations > 0.0;
        });
    report.window_check = run_check(
        EnvKind::Window,
        "dprl jerk > reinforce jerk, dprl n_committed > reinforce n_committed, "
        "dprl mean curve has positive slope",
        [](const MetricSummary& re, const MetricSummary& dp, Json& jv) {
            const double slope = ls_slope(dp.mean_curve);
            jv["reinforce_jerk"] = re.mean_jerk;
            jv["dprl_jerk"] = dp.mean_jerk;
            jv["reinforce_n_committed"] = re.n_committed;
            jv["dprl_n_committed"] = dp.n_committed;
            jv["dprl_curve_slope"] = slope;
            return dp.mean_jerk > re.mean_jerk &&
                   dp.n_committed > re.n_committed && slope > 0.0;
        });

    // summary.json: per-cell metrics, the seed-averaged table, and the checks.
    {
        Json j;
        Json jcfg;
        jcfg["episodes"] = cfg.train.episodes;
        jcfg["gamma"] = cfg.train.gamma;
        jcfg["lambda"] = cfg.train.lambda;
        jcfg["learn_rate"] = cfg.train.learn_rate;
        jcfg["horizon"] = cfg.env.horizon;
        jcfg["rollouts"] = cfg.n_rollouts;
        jcfg["threshold"] = cfg.decision_threshold;
        jcfg["esd_alpha_up"] = cfg.esd.alpha_up;
        jcfg["esd_alpha_down"] = cfg.esd.alpha_down;
        jcfg["esd_beta"] = cfg.esd.beta;
        jcfg["seeds"] = cfg.seeds;
        j["config"] = jcfg;

        Json jcells = Json::array();
        for (const auto& c : report.cells) {
            Json jc;
            jc["env"] = env_name(c.env);
            jc["agent"] = agent_name(c.agent);
            jc["seed"] = c.seed;
            jc["failed"] = c.failed;
            if (c.failed) {
                jc["error"] = c.error;
            } else {
                jc["mean_jerk"] = c.metrics.mean_jerk;
                jc["mean_oscillations"] = c.metrics.mean_oscillations;
                jc["timing_variance"] = c.metrics.timing_variance;
                jc["timing_std"] = c.metrics.timing_std;
                jc["n_committed"] = c.metrics.n_committed;
                jc["n_rollouts"] = c.metrics.n_rollouts;
                jc["non_committal"] = c.metrics.non_committal;
            }
            jcells.push_back(jc);
        }
        j["cells"] = jcells;

        Json jtable = Json::array();
        for (EnvKind env : cfg.envs) {
            Json row;
            row["env"] = env_name(env);
            auto put = [&](const char* name, auto field) {
                Json pair;
                for (AgentKind agent : {AgentKind::Reinforce, AgentKind::DpRl}) {
                    if (!has_agent(agent)) continue;
                    if (auto v = seed_avg(env, agent, field))
                        pair[agent_name(agent)] = *v;
                    else
                        pair[agent_name(agent)] = nullptr;
                }
                row[name] = pair;
            };
            put("jerk", jerk_f);
            put("oscillations", osc_f);
            put("timing_variance", tvar_f);
            jtable.push_back(row);
        }
        j["table"] = jtable;
        j["checks"] = checks;
        write_text_file(dir + "summary.json", j.dump(2) + "\n");
    }

    return report;
}

}  // namespace dprl
