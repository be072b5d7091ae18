#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace dprl {

// Second-order hysteretic filter over a scalar signal in [0,1].
//
//   z_t = alpha * s_t + (1 - alpha) * z_{t-1} + v_{t-1}
//   v_t = beta * (z_t - z_{t-1}) + (1 - beta) * v_{t-1}
//
// with alpha = alpha_down when s_t < z_{t-1}, alpha_up otherwise. The level
// update deliberately uses the previous velocity: updating z from v_t while
// v_t is defined from z_t would be circular, so the recurrence is resolved
// semi-implicitly (level first, then velocity from the new level).
struct EsdParams {
    double alpha_up = 0.15;
    double alpha_down = 0.4;
    double beta = 0.6;
    bool clamp_output = true;

    void validate() const {
        if (!(alpha_up > 0.0 && alpha_up <= 1.0))
            throw std::invalid_argument("esd.alpha_up must be in (0,1]");
        if (!(alpha_down > 0.0 && alpha_down <= 1.0))
            throw std::invalid_argument("esd.alpha_down must be in (0,1]");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("esd.beta must be in [0,1]");
    }
};

struct EsdState {
    double z = 0.0;  // filtered level
    double v = 0.0;  // level velocity per timestep
};

inline EsdState esd_init(double s0) {
    if (!(s0 >= 0.0 && s0 <= 1.0))
        throw std::invalid_argument("esd_init: s0 outside [0,1]");
    return {s0, 0.0};
}

inline EsdState esd_step(EsdState state, double s, const EsdParams& params) {
    if (!(s >= 0.0 && s <= 1.0))
        throw std::invalid_argument("esd_step: s outside [0,1]");
    const double alpha = (s < state.z) ? params.alpha_down : params.alpha_up;
    double z = alpha * s + (1.0 - alpha) * state.z + state.v;
    if (params.clamp_output) z = std::clamp(z, 0.0, 1.0);
    const double v = params.beta * (z - state.z) + (1.0 - params.beta) * state.v;
    return {z, v};
}

// Left fold of esd_step over the signal, seeded at the first observation so
// there is no startup transient. Output has the same length as the input.
inline std::vector<double> esd_trajectory(std::span<const double> signal,
                                          const EsdParams& params) {
    if (signal.empty())
        throw std::invalid_argument("esd_trajectory: empty signal");
    std::vector<double> z;
    z.reserve(signal.size());
    EsdState state = esd_init(signal[0]);
    z.push_back(state.z);
    for (std::size_t t = 1; t < signal.size(); ++t) {
        state = esd_step(state, signal[t], params);
        z.push_back(state.z);
    }
    return z;
}

}  // namespace dprl
