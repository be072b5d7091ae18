#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/rng.hpp"

namespace dprl {

enum class EnvKind { Drift, Hover, Window };

inline const char* env_name(EnvKind k) {
    switch (k) {
        case EnvKind::Drift: return "drift";
        case EnvKind::Hover: return "hover";
        case EnvKind::Window: return "window";
    }
    return "?";
}

// One scalar-signal environment family. Timesteps are 1-indexed: s[i] is the
// observation at t = i + 1, for t = 1..horizon.
struct EnvConfig {
    int horizon = 100;

    // Drift: noisy plateau at drift_base, then a linear ramp starting at a
    // random onset, sloped to reach 0.9 at t = horizon.
    int drift_onset_lo = 20;
    int drift_onset_hi = 60;
    double drift_base = 0.3;
    double drift_noise_sd = 0.05;       // pre-onset
    double drift_ramp_noise_sd = 0.03;  // on the ramp

    // Hover: jitter around a threshold, then a linear ramp to 0.9 over
    // hover_ramp_len steps, then a noisy plateau at 0.9.
    double hover_threshold = 0.5;
    double hover_jitter = 0.08;
    int hover_cross_lo = 50;
    int hover_cross_hi = 70;
    int hover_ramp_len = 15;
    double hover_plateau_noise_sd = 0.02;

    // Window: steady rise 0.1 -> 0.9; acting pays off only inside
    // [window_lo, window_hi].
    int window_lo = 60;
    int window_hi = 80;
    double window_noise_sd = 0.02;

    // Rewards for acting (a = 1); inaction always earns 0.
    int sustain_lag = 10;
    double reward_hit = 1.0;
    double reward_miss = -1.0;
    double reward_transient = -0.2;

    void validate() const {
        if (horizon < 2)
            throw std::invalid_argument("env.horizon must be >= 2");
        if (!(0 <= drift_onset_lo && drift_onset_lo < drift_onset_hi &&
              drift_onset_hi < horizon))
            throw std::invalid_argument(
                "env.drift_onset range must satisfy 0 <= lo < hi < horizon");
        if (!(drift_base >= 0.0 && drift_base <= 1.0))
            throw std::invalid_argument("env.drift_base must be in [0,1]");
        if (!(hover_threshold >= 0.0 && hover_threshold <= 1.0))
            throw std::invalid_argument("env.hover_threshold must be in [0,1]");
        if (hover_jitter < 0.0)
            throw std::invalid_argument("env.hover_jitter must be >= 0");
        if (!(0 < hover_cross_lo && hover_cross_lo <= hover_cross_hi &&
              hover_cross_hi < horizon))
            throw std::invalid_argument(
                "env.hover_cross range must satisfy 0 < lo <= hi < horizon");
        if (hover_ramp_len < 1)
            throw std::invalid_argument("env.hover_ramp_len must be >= 1");
        if (!(0 < window_lo && window_lo < window_hi && window_hi <= horizon))
            throw std::invalid_argument(
                "env.window must satisfy 0 < lo < hi <= horizon");
        if (sustain_lag < 0)
            throw std::invalid_argument("env.sustain_lag must be >= 0");
        if (drift_noise_sd < 0.0 || drift_ramp_noise_sd < 0.0 ||
            hover_plateau_noise_sd < 0.0 || window_noise_sd < 0.0)
            throw std::invalid_argument("env noise sds must be >= 0");
    }
};

struct EpisodeSignal {
    EnvKind env = EnvKind::Drift;
    std::vector<double> s;
    // Landmarks: Drift records the onset, Hover the crossing time, Window the
    // reward window bounds. All in 1-indexed timestep units.
    int event_time = 0;
    int window_lo = 0;
    int window_hi = 0;
};

namespace detail {

inline double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// normal_distribution requires sd > 0; a zero sd means "no noise".
inline double gauss(Rng& rng, double sd) {
    if (sd <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sd)(rng);
}

}  // namespace detail

// Deterministic-landmark builders; the generate_* wrappers draw the landmark.

inline EpisodeSignal make_drift(const EnvConfig& cfg, int t_onset, Rng& rng) {
    if (t_onset < 1 || t_onset >= cfg.horizon)
        throw std::invalid_argument("make_drift: onset outside [1, horizon)");
    EpisodeSignal out;
    out.env = EnvKind::Drift;
    out.event_time = t_onset;
    out.s.resize(cfg.horizon);
    // Noiseless ramp hits 0.9 exactly at t = horizon.
    const double slope = (0.9 - cfg.drift_base) / (cfg.horizon - t_onset);
    for (int t = 1; t <= cfg.horizon; ++t) {
        double v;
        if (t < t_onset)
            v = cfg.drift_base + detail::gauss(rng, cfg.drift_noise_sd);
        else
            v = cfg.drift_base + slope * (t - t_onset) +
                detail::gauss(rng, cfg.drift_ramp_noise_sd);
        out.s[t - 1] = detail::clip01(v);
    }
    return out;
}

inline EpisodeSignal make_hover(const EnvConfig& cfg, int t_cross, Rng& rng) {
    if (t_cross < 1 || t_cross > cfg.horizon)
        throw std::invalid_argument("make_hover: crossing outside [1, horizon]");
    EpisodeSignal out;
    out.env = EnvKind::Hover;
    out.event_time = t_cross;
    out.s.resize(cfg.horizon);
    for (int t = 1; t <= cfg.horizon; ++t) {
        double v;
        if (t < t_cross) {
            const double u = cfg.hover_jitter <= 0.0
                                 ? 0.0
                                 : std::uniform_real_distribution<double>(
                                       -cfg.hover_jitter, cfg.hover_jitter)(rng);
            v = cfg.hover_threshold + u;
        } else if (t < t_cross + cfg.hover_ramp_len) {
            v = cfg.hover_threshold + (0.9 - cfg.hover_threshold) *
                                          double(t - t_cross) / cfg.hover_ramp_len;
        } else {
            v = 0.9 + detail::gauss(rng, cfg.hover_plateau_noise_sd);
        }
        out.s[t - 1] = detail::clip01(v);
    }
    return out;
}

inline EpisodeSignal make_window(const EnvConfig& cfg, Rng& rng) {
    EpisodeSignal out;
    out.env = EnvKind::Window;
    out.window_lo = cfg.window_lo;
    out.window_hi = cfg.window_hi;
    out.s.resize(cfg.horizon);
    for (int t = 1; t <= cfg.horizon; ++t) {
        const double v = 0.1 + 0.8 * double(t) / cfg.horizon +
                         detail::gauss(rng, cfg.window_noise_sd);
        out.s[t - 1] = detail::clip01(v);
    }
    return out;
}

inline EpisodeSignal generate_drift(const EnvConfig& cfg, Rng& rng) {
    const int onset = std::uniform_int_distribution<int>(cfg.drift_onset_lo,
                                                         cfg.drift_onset_hi)(rng);
    return make_drift(cfg, onset, rng);
}

inline EpisodeSignal generate_hover(const EnvConfig& cfg, Rng& rng) {
    const int cross = std::uniform_int_distribution<int>(cfg.hover_cross_lo,
                                                         cfg.hover_cross_hi)(rng);
    return make_hover(cfg, cross, rng);
}

inline EpisodeSignal generate_window(const EnvConfig& cfg, Rng& rng) {
    return make_window(cfg, rng);
}

inline EpisodeSignal generate_signal(EnvKind kind, const EnvConfig& cfg, Rng& rng) {
    switch (kind) {
        case EnvKind::Drift: return generate_drift(cfg, rng);
        case EnvKind::Hover: return generate_hover(cfg, rng);
        case EnvKind::Window: return generate_window(cfg, rng);
    }
    throw std::logic_error("generate_signal: bad EnvKind");
}

// Per-step reward for acting at (1-indexed) timestep t. The signal never
// depends on actions, and episodes always run to the full horizon; acting is
// repeatable, not absorbing.
inline double reward(const EpisodeSignal& sig, int t, bool act,
                     const EnvConfig& cfg) {
    if (t < 1 || t > static_cast<int>(sig.s.size()))
        throw std::out_of_range("reward: t outside [1, horizon]");
    if (!act) return 0.0;
    switch (sig.env) {
        case EnvKind::Drift:
        case EnvKind::Hover: {
            const int event = sig.event_time;
            if (t >= event + cfg.sustain_lag) return cfg.reward_hit;
            if (t >= event) return cfg.reward_transient;
            return cfg.reward_miss;
        }
        case EnvKind::Window:
            if (t >= sig.window_lo && t <= sig.window_hi) return cfg.reward_hit;
            return cfg.reward_miss;
    }
    throw std::logic_error("reward: bad EnvKind");
}

}  // namespace dprl
