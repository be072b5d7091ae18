#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/rng.hpp"

namespace dprl {

enum class Activation { Tanh, Relu };

inline const char* activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

inline Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw std::invalid_argument("policy.activation must be tanh or relu");
}

// Two-layer MLP over a scalar observation:
//   h = act(w1 * s + b1),  logit = w2 . h + b2,  p = sigmoid(logit).
// Gradients for both loss heads are closed-form; no autodiff.
struct PolicyParams {
    int hidden = 32;
    Activation activation = Activation::Tanh;
    std::vector<double> w1;  // [hidden], input dim is 1
    std::vector<double> b1;  // [hidden]
    std::vector<double> w2;  // [hidden]
    double b2 = 0.0;
};

struct PolicyGrads {
    std::vector<double> w1, b1, w2;
    double b2 = 0.0;
};

struct ForwardCache {
    std::vector<double> pre;  // w1*s + b1
    std::vector<double> h;    // act(pre)
    double logit = 0.0;
    double p = 0.5;
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Weights uniform in +/- 1/sqrt(fan_in), biases zero. Draw order: w1 then w2.
inline PolicyParams policy_init(int hidden, Rng& rng,
                                Activation act = Activation::Tanh) {
    if (hidden < 1) throw std::invalid_argument("policy.hidden must be >= 1");
    PolicyParams P;
    P.hidden = hidden;
    P.activation = act;
    P.w1.resize(hidden);
    P.b1.assign(hidden, 0.0);
    P.w2.resize(hidden);
    std::uniform_real_distribution<double> u1(-1.0, 1.0);  // fan_in = 1
    for (auto& w : P.w1) w = u1(rng);
    const double bound2 = 1.0 / std::sqrt(double(hidden));
    std::uniform_real_distribution<double> u2(-bound2, bound2);
    for (auto& w : P.w2) w = u2(rng);
    P.b2 = 0.0;
    return P;
}

inline PolicyGrads make_zero_grads(const PolicyParams& P) {
    PolicyGrads g;
    g.w1.assign(P.hidden, 0.0);
    g.b1.assign(P.hidden, 0.0);
    g.w2.assign(P.hidden, 0.0);
    g.b2 = 0.0;
    return g;
}

// y += a * x
inline void grads_axpy(double a, const PolicyGrads& x, PolicyGrads& y) {
    for (std::size_t i = 0; i < y.w1.size(); ++i) {
        y.w1[i] += a * x.w1[i];
        y.b1[i] += a * x.b1[i];
        y.w2[i] += a * x.w2[i];
    }
    y.b2 += a * x.b2;
}

inline ForwardCache forward(const PolicyParams& P, double s) {
    ForwardCache c;
    c.pre.resize(P.hidden);
    c.h.resize(P.hidden);
    double logit = P.b2;
    for (int i = 0; i < P.hidden; ++i) {
        const double u = P.w1[i] * s + P.b1[i];
        c.pre[i] = u;
        c.h[i] = P.activation == Activation::Tanh ? std::tanh(u)
                                                  : (u > 0.0 ? u : 0.0);
        logit += P.w2[i] * c.h[i];
    }
    c.logit = logit;
    c.p = sigmoid(logit);
    return c;
}

namespace detail {

// Backpropagate a logit-level gradient through the hidden layer.
inline PolicyGrads backprop_from_logit(const PolicyParams& P, double s,
                                       double g_logit, const ForwardCache& c) {
    PolicyGrads g = make_zero_grads(P);
    g.b2 = g_logit;
    for (int i = 0; i < P.hidden; ++i) {
        g.w2[i] = g_logit * c.h[i];
        const double dact = P.activation == Activation::Tanh
                                ? 1.0 - c.h[i] * c.h[i]
                                : (c.pre[i] > 0.0 ? 1.0 : 0.0);
        const double gu = g_logit * P.w2[i] * dact;
        g.w1[i] = gu * s;
        g.b1[i] = gu;
    }
    return g;
}

}  // namespace detail

// d log p(a|s) / d theta.  d log p / d logit = a - p for a Bernoulli head.
inline PolicyGrads grad_logprob(const PolicyParams& P, double s, int a,
                                const ForwardCache& c) {
    if (a != 0 && a != 1)
        throw std::invalid_argument("grad_logprob: action must be 0 or 1");
    return detail::backprop_from_logit(P, s, double(a) - c.p, c);
}

// d (p - target)^2 / d theta.  d/d logit = 2 (p - target) p (1 - p).
inline PolicyGrads grad_mse(const PolicyParams& P, double s, double target,
                            const ForwardCache& c) {
    if (!(target >= 0.0 && target <= 1.0))
        throw std::invalid_argument("grad_mse: target outside [0,1]");
    const double g_logit = 2.0 * (c.p - target) * c.p * (1.0 - c.p);
    return detail::backprop_from_logit(P, s, g_logit, c);
}

}  // namespace dprl
