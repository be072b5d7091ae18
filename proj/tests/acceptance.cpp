// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1-3 are directional comparisons over the default
// five-seed experiment; 4-9 are exact or tolerance-pinned oracle checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dprl/experiment.hpp"
#include "oracles.hpp"

using namespace dprl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int n, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", n, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

std::string vote_detail(const CheckResult& c) {
    if (!c.applicable) return "not applicable (needs both agents)";
    return std::to_string(c.votes) + "/" + std::to_string(c.n_seeds) +
           " seeds (need " + std::to_string(c.required) + ")";
}

fs::path fresh_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

bool params_equal(const PolicyParams& a, const PolicyParams& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
}

// --- criterion 4: filter unit suite ---------------------------------------

bool esd_suite(std::string& detail) {
    // Fixed point: with v = 0 and s = z, one step must return (z, 0) exactly.
    Rng rng = make_rng(1001);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> ua(0.01, 1.0);
    std::uniform_real_distribution<double> ub(0.0, 1.0);
    double worst_fp = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        EsdParams p;
        p.alpha_up = ua(rng);
        p.alpha_down = ua(rng);
        p.beta = ub(rng);
        const double s = u01(rng);
        const EsdState next = esd_step({s, 0.0}, s, p);
        worst_fp = std::max({worst_fp, std::abs(next.z - s), std::abs(next.v)});
    }
    if (worst_fp > 1e-15) {
        detail = "fixed-point drift " + std::to_string(worst_fp);
        return false;
    }

    // Hand-computed constant-input steps from (0, 0) with s = 1.
    const EsdParams dflt;
    const EsdState s1 = esd_step(esd_init(0.0), 1.0, dflt);
    const EsdState s2 = esd_step(s1, 1.0, dflt);
    if (std::abs(s1.z - 0.15) > 1e-12 || std::abs(s2.z - 0.3675) > 1e-12) {
        detail = "hand values z1=" + std::to_string(s1.z) +
                 " z2=" + std::to_string(s2.z);
        return false;
    }

    // Asymmetry: from rest, a downward step moves alpha_down/alpha_up times
    // as far as an upward step of the same size.
    const double d = 0.3;
    const double rise = esd_step({0.5, 0.0}, 0.5 + d, dflt).z - 0.5;
    const double fall = 0.5 - esd_step({0.5, 0.0}, 0.5 - d, dflt).z;
    if (std::abs(fall / rise - dflt.alpha_down / dflt.alpha_up) > 1e-12) {
        detail = "asymmetry ratio " + std::to_string(fall / rise);
        return false;
    }

    // Clamped trajectories stay inside [0,1] on arbitrary in-range signals.
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> sig(100);
        for (auto& x : sig) x = u01(rng);
        for (double z : esd_trajectory(sig, dflt))
            if (!(z >= 0.0 && z <= 1.0)) {
                detail = "trajectory escaped [0,1]";
                return false;
            }
    }
    detail = "fixed point, hand values, asymmetry, 1000 bounded trajectories";
    return true;
}

// --- criterion 5: gradient oracle ------------------------------------------

bool kink_adjacent(const PolicyParams& P, double s) {
    if (P.activation != Activation::Relu) return false;
    for (const double u : forward(P, s).pre)
        if (std::abs(u) < 1e-3) return true;
    return false;
}

bool gradient_oracle(std::string& detail) {
    Rng rng = make_rng(1002);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    std::uniform_real_distribution<double> ub(-0.5, 0.5);
    double worst = 0.0;
    int n_logprob = 0, n_mse = 0;
    for (Activation act : {Activation::Tanh, Activation::Relu}) {
        for (int rep = 0; rep < 60; ++rep) {
            PolicyParams P;
            double s;
            do {
                P = policy_init(6, rng, act);
                for (auto& b : P.b1) b = ub(rng);
                P.b2 = ub(rng);
                s = us(rng);
            } while (kink_adjacent(P, s));
            const ForwardCache c = forward(P, s);

            const int a = rep % 2;
            const auto glp = oracles::grad_flat(grad_logprob(P, s, a, c));
            const auto fd_lp = oracles::fd_gradient(P, [&](const PolicyParams& Q) {
                const double p = forward(Q, s).p;
                return a == 1 ? std::log(p) : std::log(1.0 - p);
            });
            worst = std::max(worst, oracles::max_rel_err(glp, fd_lp));
            ++n_logprob;

            const double target = us(rng);
            const auto gm = oracles::grad_flat(grad_mse(P, s, target, c));
            const auto fd_m = oracles::fd_gradient(P, [&](const PolicyParams& Q) {
                const double diff = forward(Q, s).p - target;
                return diff * diff;
            });
            worst = std::max(worst, oracles::max_rel_err(gm, fd_m));
            ++n_mse;
        }
    }
    detail = std::to_string(n_logprob) + " logprob + " + std::to_string(n_mse) +
             " mse instances, worst rel err " + std::to_string(worst);
    return n_logprob >= 100 && n_mse >= 100 && worst < 1e-4;
}

// --- criterion 6: return oracle ---------------------------------------------

bool return_oracle(std::string& detail) {
    Rng rng = make_rng(1003);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    double worst = 0.0;
    int n = 0;
    for (double gamma : {0.5, 0.99, 1.0}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> r(100);
            for (auto& x : r) x = ur(rng);
            const auto fast = compute_returns(r, gamma);
            const auto slow = oracles::returns_double_sum(r, gamma);
            for (std::size_t t = 0; t < r.size(); ++t)
                worst = std::max(worst, std::abs(fast[t] - slow[t]));
            ++n;
        }
    }
    detail = std::to_string(n) + " length-100 vectors, worst abs err " +
             std::to_string(worst);
    return worst <= 1e-12;
}

// --- criterion 7: lambda-zero degeneracy ------------------------------------

bool lambda_zero_lockstep(std::string& detail) {
    const EnvConfig ecfg;
    const EsdParams esd;
    TrainConfig plain_cfg;
    TrainConfig zero_cfg;
    zero_cfg.lambda = 0.0;

    for (EnvKind env : {EnvKind::Drift, EnvKind::Hover, EnvKind::Window}) {
        for (std::uint64_t seed : {0ull, 1ull}) {
            Rng r1 = dprl::train_rng(seed, env);
            Rng r2 = dprl::train_rng(seed, env);
            PolicyParams P1 = policy_init(plain_cfg.hidden, r1);
            PolicyParams P2 = policy_init(zero_cfg.hidden, r2);
            AdamState o1 = make_adam_state(P1);
            AdamState o2 = make_adam_state(P2);
            for (int ep = 0; ep < plain_cfg.episodes; ++ep) {
                const EpisodeSignal sig1 = generate_signal(env, ecfg, r1);
                const EpisodeSignal sig2 = generate_signal(env, ecfg, r2);
                const EpisodeRecord rec1 =
                    run_episode(P1, sig1, ecfg, AgentKind::Reinforce, esd, r1);
                const EpisodeRecord rec2 =
                    run_episode(P2, sig2, ecfg, AgentKind::DpRl, esd, r2);
                episode_update(P1, rec1, AgentKind::Reinforce, plain_cfg, o1);
                episode_update(P2, rec2, AgentKind::DpRl, zero_cfg, o2);
                if (!params_equal(P1, P2)) {
                    detail = std::string(env_name(env)) + " seed " +
                             std::to_string(seed) + " diverged at episode " +
                             std::to_string(ep);
                    return false;
                }
            }
        }
    }
    detail = "3 envs x 2 seeds, parameters bitwise equal after each of 800 updates";
    return true;
}

// --- criterion 9: metric oracles ---------------------------------------------

bool metric_oracles(std::string& detail) {
    Rng rng = make_rng(1004);
    std::uniform_real_distribution<double> up(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> p(40);
        for (auto& x : p) x = up(rng);
        if (jerk(p) != oracles::jerk_scan(p) ||
            oscillation_count(p) != oracles::oscillation_scan(p) ||
            decision_time(p, 0.6) != oracles::decision_scan(p, 0.6)) {
            detail = "mismatch on trace " + std::to_string(rep);
            return false;
        }
    }
    detail = "1000 random traces, exact agreement on all three metrics";
    return true;
}

}  // namespace

int main() {
    std::printf("running full default experiment (first pass)...\n");
    ExperimentConfig cfg_a;
    cfg_a.out_dir = fresh_dir("dprl_acceptance_a").string();
    const ExperimentReport report = run_experiment(cfg_a);

    criterion(1,
              "drift: regularized agent oscillates less and times more "
              "consistently",
              report.drift_check.pass, vote_detail(report.drift_check));
    criterion(2,
              "hover: plain agent degenerates flat; regularized agent stays "
              "responsive",
              report.hover_check.pass, vote_detail(report.hover_check));
    criterion(3,
              "window: regularized agent commits more and builds confidence "
              "gradually",
              report.window_check.pass, vote_detail(report.window_check));

    std::string detail;
    bool ok;

    ok = esd_suite(detail);
    criterion(4, "filter unit suite", ok, detail);

    ok = gradient_oracle(detail);
    criterion(5, "analytic gradients vs central finite differences", ok, detail);

    ok = return_oracle(detail);
    criterion(6, "return recursion vs direct double sum", ok, detail);

    ok = lambda_zero_lockstep(detail);
    criterion(7, "lambda = 0 training is bitwise REINFORCE", ok, detail);

    std::printf("running full default experiment (second pass)...\n");
    ExperimentConfig cfg_b;
    cfg_b.out_dir = fresh_dir("dprl_acceptance_b").string();
    run_experiment(cfg_b);
    const std::string table_a = read_text_file(cfg_a.out_dir + "/table.csv");
    const std::string table_b = read_text_file(cfg_b.out_dir + "/table.csv");
    const std::string summ_a = read_text_file(cfg_a.out_dir + "/summary.json");
    const std::string summ_b = read_text_file(cfg_b.out_dir + "/summary.json");
    criterion(8, "rerun produces byte-identical table.csv and summary.json",
              table_a == table_b && summ_a == summ_b,
              table_a == table_b ? (summ_a == summ_b ? "both byte-identical"
                                                     : "summary.json differs")
                                 : "table.csv differs");

    ok = metric_oracles(detail);
    criterion(9, "metric functions vs exhaustive scans", ok, detail);

    if (g_failures == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
