#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dprl/policy.hpp"
#include "dprl/signal_env.hpp"

namespace dprl {

// Frozen-policy probability trace along one evaluation episode. No actions
// are sampled or executed; the signal evolves on its own.
struct RolloutTrace {
    std::vector<double> p;
    EnvKind env = EnvKind::Drift;
    int event_time = 0;
    int window_lo = 0;
    int window_hi = 0;
};

// Maximum absolute one-step change in the probability trace.
inline double jerk(std::span<const double> p) {
    if (p.size() < 2) throw std::invalid_argument("jerk: need length >= 2");
    double m = 0.0;
    for (std::size_t t = 1; t < p.size(); ++t)
        m = std::max(m, std::abs(p[t] - p[t - 1]));
    return m;
}

// Count of flips across the 0.5 decision boundary. Values equal to 0.5 sit on
// the lower side, so the crossing predicate is simply (p > 0.5).
inline int oscillation_count(std::span<const double> p) {
    if (p.size() < 2)
        throw std::invalid_argument("oscillation_count: need length >= 2");
    int n = 0;
    bool side = p[0] > 0.5;
    for (std::size_t t = 1; t < p.size(); ++t) {
        const bool s = p[t] > 0.5;
        if (s != side) ++n;
        side = s;
    }
    return n;
}

// First 1-indexed timestep with p strictly above the threshold, if any.
inline std::optional<int> decision_time(std::span<const double> p,
                                        double threshold = 0.6) {
    for (std::size_t t = 0; t < p.size(); ++t)
        if (p[t] > threshold) return static_cast<int>(t) + 1;
    return std::nullopt;
}

struct MetricSummary {
    double mean_jerk = 0.0;
    double mean_oscillations = 0.0;
    double timing_variance = 0.0;  // population variance of decision times
    double timing_std = 0.0;
    int n_rollouts = 0;
    int n_committed = 0;  // rollouts with a defined decision time
    // Fewer than two committed rollouts: the zero timing variance then means
    // "never decides", not "decides consistently".
    bool non_committal = false;
    std::vector<double> mean_curve;
    std::vector<double> std_curve;  // population std across rollouts
};

inline MetricSummary aggregate(const std::vector<RolloutTrace>& traces,
                               double threshold = 0.6) {
    if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
    MetricSummary out;
    out.n_rollouts = static_cast<int>(traces.size());
    const std::size_t T = traces.front().p.size();

    std::vector<double> tstars;
    for (const auto& tr : traces) {
        if (tr.p.size() != T)
            throw std::invalid_argument("aggregate: ragged trace lengths");
        out.mean_jerk += jerk(tr.p);
        out.mean_oscillations += oscillation_count(tr.p);
        if (auto ts = decision_time(tr.p, threshold)) tstars.push_back(*ts);
    }
    out.mean_jerk /= out.n_rollouts;
    out.mean_oscillations /= out.n_rollouts;
    out.n_committed = static_cast<int>(tstars.size());
    out.non_committal = out.n_committed < 2;
    if (out.n_committed >= 2) {
        double mean = 0.0;
        for (double t : tstars) mean += t;
        mean /= tstars.size();
        double var = 0.0;
        for (double t : tstars) var += (t - mean) * (t - mean);
        out.timing_variance = var / tstars.size();
        out.timing_std = std::sqrt(out.timing_variance);
    }

    out.mean_curve.assign(T, 0.0);
    out.std_curve.assign(T, 0.0);
    for (const auto& tr : traces)
        for (std::size_t t = 0; t < T; ++t) out.mean_curve[t] += tr.p[t];
    for (double& m : out.mean_curve) m /= out.n_rollouts;
    for (const auto& tr : traces)
        for (std::size_t t = 0; t < T; ++t) {
            const double d = tr.p[t] - out.mean_curve[t];
            out.std_curve[t] += d * d;
        }
    for (double& s : out.std_curve) s = std::sqrt(s / out.n_rollouts);
    return out;
}

// Generate n fresh evaluation episodes and record the frozen policy's
// probability trace on each.
inline std::vector<RolloutTrace> collect_rollouts(const PolicyParams& P,
                                                  EnvKind env,
                                                  const EnvConfig& cfg, int n,
                                                  Rng& rng) {
    if (n < 1) throw std::invalid_argument("collect_rollouts: n must be >= 1");
    std::vector<RolloutTrace> traces;
    traces.reserve(n);
    for (int i = 0; i < n; ++i) {
        const EpisodeSignal sig = generate_signal(env, cfg, rng);
        RolloutTrace tr;
        tr.env = sig.env;
        tr.event_time = sig.event_time;
        tr.window_lo = sig.window_lo;
        tr.window_hi = sig.window_hi;
        tr.p.reserve(sig.s.size());
        for (double s : sig.s) tr.p.push_back(forward(P, s).p);
        traces.push_back(std::move(tr));
    }
    return traces;
}

// Least-squares slope of a curve against its (0-based) index; used for the
// "gradual confidence buildup" trend check.
inline double ls_slope(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) throw std::invalid_argument("ls_slope: need length >= 2");
    double mx = (n - 1) / 2.0, my = 0.0;
    for (double v : y) my += v;
    my /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (i - mx) * (y[i] - my);
        den += (i - mx) * (i - mx);
    }
    return num / den;
}

}  // namespace dprl
