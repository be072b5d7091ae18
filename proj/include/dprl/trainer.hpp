#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/esd.hpp"
#include "dprl/policy.hpp"
#include "dprl/signal_env.hpp"

namespace dprl {

enum class AgentKind { Reinforce, DpRl };

inline const char* agent_name(AgentKind k) {
    return k == AgentKind::Reinforce ? "reinforce" : "dprl";
}

struct TrainConfig {
    int episodes = 800;
    double gamma = 0.99;
    double lambda = 2.0;  // auxiliary loss weight; 0 degenerates to REINFORCE
    double learn_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool normalize_returns = false;
    int hidden = 32;
    Activation activation = Activation::Tanh;

    void validate() const {
        if (episodes < 0) throw std::invalid_argument("train.episodes must be >= 0");
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("train.gamma must be in (0,1]");
        if (lambda < 0.0) throw std::invalid_argument("train.lambda must be >= 0");
        if (!(learn_rate > 0.0))
            throw std::invalid_argument("train.learn_rate must be > 0");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
            throw std::invalid_argument("train.adam_beta1 must be in [0,1)");
        if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
            throw std::invalid_argument("train.adam_beta2 must be in [0,1)");
        if (!(adam_eps > 0.0))
            throw std::invalid_argument("train.adam_eps must be > 0");
        if (hidden < 1) throw std::invalid_argument("train.hidden must be >= 1");
    }
};

struct EpisodeRecord {
    std::vector<double> s, r, p;
    std::vector<int> a;
    std::vector<double> z;  // ESD targets; empty for plain REINFORCE
};

struct LossReport {
    double rl_loss = 0.0;
    double esd_loss = 0.0;
    double total_reward = 0.0;
};

struct AdamState {
    PolicyGrads m, v;
    long step = 0;
};

inline AdamState make_adam_state(const PolicyParams& P) {
    return {make_zero_grads(P), make_zero_grads(P), 0};
}

struct TrainingDiverged : std::runtime_error {
    int episode;
    explicit TrainingDiverged(int ep)
        : std::runtime_error("non-finite loss at episode " + std::to_string(ep)),
          episode(ep) {}
};

// G_t = r_t + gamma * G_{t+1}, G after the horizon is zero.
inline std::vector<double> compute_returns(std::span<const double> rewards,
                                           double gamma) {
    if (rewards.empty())
        throw std::invalid_argument("compute_returns: empty rewards");
    std::vector<double> G(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc = rewards[i] + gamma * acc;
        G[i] = acc;
    }
    return G;
}

inline EpisodeRecord run_episode(const PolicyParams& P, const EpisodeSignal& sig,
                                 const EnvConfig& ecfg, AgentKind kind,
                                 const EsdParams& esd, Rng& rng) {
    const int T = static_cast<int>(sig.s.size());
    EpisodeRecord rec;
    rec.s = sig.s;
    rec.a.resize(T);
    rec.r.resize(T);
    rec.p.resize(T);
    for (int t = 1; t <= T; ++t) {
        const ForwardCache c = forward(P, sig.s[t - 1]);
        rec.p[t - 1] = c.p;
        const bool act = std::bernoulli_distribution(c.p)(rng);
        rec.a[t - 1] = act ? 1 : 0;
        rec.r[t - 1] = reward(sig, t, act, ecfg);
    }
    if (kind == AgentKind::DpRl) rec.z = esd_trajectory(sig.s, esd);
    return rec;
}

namespace detail {

inline void adam_block(std::span<double> p, std::span<const double> g,
                       std::span<double> m, std::span<double> v,
                       const TrainConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg.learn_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

inline void adam_step(PolicyParams& P, const PolicyGrads& g, AdamState& st,
                      const TrainConfig& cfg) {
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, double(st.step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, double(st.step));
    adam_block(P.w1, g.w1, st.m.w1, st.v.w1, cfg, bc1, bc2);
    adam_block(P.b1, g.b1, st.m.b1, st.v.b1, cfg, bc1, bc2);
    adam_block(P.w2, g.w2, st.m.w2, st.v.w2, cfg, bc1, bc2);
    adam_block({&P.b2, 1}, {&g.b2, 1}, {&st.m.b2, 1}, {&st.v.b2, 1}, cfg, bc1, bc2);
}

}  // namespace detail

// Gradient of the per-episode loss
//   (1/T) sum_t [ -G_t log p(a_t|s_t) ]  +  lambda (1/T) sum_t (p_t - z_t)^2
// at the current parameters, with returns and ESD targets treated as
// constants. The auxiliary term is accumulated only for DP-RL with
// lambda != 0, so a lambda = 0 DP-RL gradient is arithmetically identical to
// a REINFORCE gradient.
inline PolicyGrads episode_gradient(const PolicyParams& P,
                                    const EpisodeRecord& rec, AgentKind kind,
                                    const TrainConfig& cfg, LossReport* report) {
    const int T = static_cast<int>(rec.s.size());
    if (T == 0) throw std::invalid_argument("episode_gradient: empty record");
    const bool aux = kind == AgentKind::DpRl && cfg.lambda != 0.0;
    if (kind == AgentKind::DpRl && rec.z.size() != rec.s.size())
        throw std::invalid_argument("episode_gradient: missing ESD targets");

    std::vector<double> G = compute_returns(rec.r, cfg.gamma);
    if (cfg.normalize_returns) {
        double mean = 0.0;
        for (double g : G) mean += g;
        mean /= T;
        double var = 0.0;
        for (double g : G) var += (g - mean) * (g - mean);
        const double sd = std::sqrt(var / T);
        for (double& g : G) g = (g - mean) / (sd + 1e-8);
    }

    PolicyGrads acc = make_zero_grads(P);
    LossReport rep;
    const double inv_T = 1.0 / T;
    for (int t = 0; t < T; ++t) {
        const ForwardCache c = forward(P, rec.s[t]);
        const PolicyGrads glp = grad_logprob(P, rec.s[t], rec.a[t], c);
        grads_axpy(-G[t] * inv_T, glp, acc);
        rep.rl_loss += -G[t] * std::log(rec.a[t] ? c.p : 1.0 - c.p) * inv_T;
        if (aux) {
            const PolicyGrads gm = grad_mse(P, rec.s[t], rec.z[t], c);
            grads_axpy(cfg.lambda * inv_T, gm, acc);
        }
        if (kind == AgentKind::DpRl) {
            const double d = c.p - rec.z[t];
            rep.esd_loss += d * d * inv_T;
        }
        rep.total_reward += rec.r[t];
    }
    if (report) *report = rep;
    return acc;
}

// One Adam step on the per-episode loss gradient.
inline LossReport episode_update(PolicyParams& P, const EpisodeRecord& rec,
                                 AgentKind kind, const TrainConfig& cfg,
                                 AdamState& opt) {
    LossReport rep;
    const PolicyGrads acc = episode_gradient(P, rec, kind, cfg, &rep);
    detail::adam_step(P, acc, opt, cfg);
    return rep;
}

struct CurvePoint {
    int episode = 0;
    double total_reward = 0.0;
    double rl_loss = 0.0;
    double esd_loss = 0.0;
};

struct TrainResult {
    PolicyParams params;
    std::vector<CurvePoint> curve;
};

// Full training loop: fresh init, then episodes of generate / rollout / update.
// Both agent kinds consume the random stream identically, so runs sharing a
// seed see the same episode signals and (while parameters agree) actions.
inline TrainResult train(EnvKind env, AgentKind agent, const EnvConfig& ecfg,
                         const TrainConfig& tcfg, const EsdParams& esd,
                         Rng& rng) {
    ecfg.validate();
    tcfg.validate();
    esd.validate();
    TrainResult out;
    out.params = policy_init(tcfg.hidden, rng, tcfg.activation);
    AdamState opt = make_adam_state(out.params);
    out.curve.reserve(tcfg.episodes);
    for (int ep = 0; ep < tcfg.episodes; ++ep) {
        const EpisodeSignal sig = generate_signal(env, ecfg, rng);
        const EpisodeRecord rec = run_episode(out.params, sig, ecfg, agent, esd, rng);
        const LossReport rep = episode_update(out.params, rec, agent, tcfg, opt);
        if (!std::isfinite(rep.rl_loss) || !std::isfinite(rep.esd_loss))
            throw TrainingDiverged(ep);
        out.curve.push_back({ep, rep.total_reward, rep.rl_loss, rep.esd_loss});
    }
    return out;
}

}  // namespace dprl
