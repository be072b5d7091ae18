#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "dprl/metrics.hpp"
#include "dprl/rng.hpp"
#include "dprl/signal_env.hpp"

using namespace dprl;

namespace {

EnvConfig noiseless() {
    EnvConfig cfg;
    cfg.drift_noise_sd = 0.0;
    cfg.drift_ramp_noise_sd = 0.0;
    cfg.hover_jitter = 0.0;
    cfg.hover_plateau_noise_sd = 0.0;
    cfg.window_noise_sd = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("noiseless drift ramp hits its endpoints exactly") {
    EnvConfig cfg = noiseless();
    Rng rng = make_rng(0);
    const EpisodeSignal sig = make_drift(cfg, 50, rng);
    REQUIRE(sig.s.size() == 100);
    CHECK(sig.event_time == 50);
    CHECK(sig.s[49] == 0.3);         // t = 50, ramp start at drift_base
    CHECK(sig.s[99] == Catch::Approx(0.9).margin(1e-12));  // t = 100
    // Linear in between: slope (0.9 - 0.3) / 50.
    CHECK(sig.s[74] == Catch::Approx(0.3 + 0.012 * 25).margin(1e-12));
    for (int i = 0; i < 49; ++i) CHECK(sig.s[i] == 0.3);
}

TEST_CASE("drift signals stay in [0,1] at full length for any seed") {
    EnvConfig cfg;
    for (std::uint64_t seed : {0ull, 1ull, 17ull, 12345ull}) {
        Rng rng = make_rng(seed);
        const EpisodeSignal sig = generate_drift(cfg, rng);
        REQUIRE(sig.s.size() == 100);
        CHECK(sig.event_time >= cfg.drift_onset_lo);
        CHECK(sig.event_time <= cfg.drift_onset_hi);
        for (double s : sig.s) {
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
        }
    }
}

TEST_CASE("same (env, config, seed) regenerates the drift signal bit-exactly") {
    EnvConfig cfg;
    Rng a = make_rng(42);
    Rng b = make_rng(42);
    const EpisodeSignal first = generate_drift(cfg, a);
    const EpisodeSignal second = generate_drift(cfg, b);
    CHECK(first.event_time == second.event_time);
    REQUIRE(first.s == second.s);
}

TEST_CASE("noiseless hover holds the threshold then ramps to the plateau") {
    EnvConfig cfg = noiseless();
    cfg.hover_ramp_len = 10;
    Rng rng = make_rng(0);
    const EpisodeSignal sig = make_hover(cfg, 60, rng);
    for (int i = 0; i < 59; ++i) CHECK(sig.s[i] == 0.5);  // t < 60
    CHECK(sig.s[69] == Catch::Approx(0.9).margin(1e-12)); // t = 70
    // Midpoint of the ramp.
    CHECK(sig.s[64] == Catch::Approx(0.5 + 0.4 * 5.0 / 10.0).margin(1e-12));
}

TEST_CASE("hover reaches the plateau and stays in bounds") {
    EnvConfig cfg;
    for (std::uint64_t seed : {0ull, 3ull, 99ull}) {
        Rng rng = make_rng(seed);
        const EpisodeSignal sig = generate_hover(cfg, rng);
        const double peak = *std::max_element(sig.s.begin(), sig.s.end());
        CHECK(peak >= 0.9 - 3 * 0.02);
        for (double s : sig.s) {
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
        }
    }
}

TEST_CASE("hover pre-crossing segment never leaves the jitter band") {
    EnvConfig cfg;
    Rng rng = make_rng(4711);
    for (int episode = 0; episode < 1000; ++episode) {
        const EpisodeSignal sig = generate_hover(cfg, rng);
        for (int t = 1; t < sig.event_time; ++t) {
            REQUIRE(sig.s[t - 1] >= cfg.hover_threshold - cfg.hover_jitter);
            REQUIRE(sig.s[t - 1] <= cfg.hover_threshold + cfg.hover_jitter);
        }
    }
}

TEST_CASE("noiseless window signal is the exact linear form") {
    EnvConfig cfg = noiseless();
    Rng rng = make_rng(0);
    const EpisodeSignal sig = make_window(cfg, rng);
    REQUIRE(sig.s.size() == 100);
    CHECK(sig.window_lo == 60);
    CHECK(sig.window_hi == 80);
    for (int t = 1; t <= 100; ++t)
        REQUIRE(sig.s[t - 1] ==
                Catch::Approx(0.1 + 0.8 * t / 100.0).margin(1e-12));
    CHECK(sig.s[99] == Catch::Approx(0.9).margin(1e-12));
    for (std::size_t i = 1; i < sig.s.size(); ++i)
        REQUIRE(sig.s[i] > sig.s[i - 1]);
}

TEST_CASE("window trend is positive for every seed") {
    EnvConfig cfg;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng = make_rng(seed);
        const EpisodeSignal sig = generate_window(cfg, rng);
        CHECK(ls_slope(sig.s) > 0.0);
        for (double s : sig.s) {
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
        }
    }
}

TEST_CASE("inaction is always free") {
    EnvConfig cfg;
    Rng rng = make_rng(5);
    for (EnvKind kind : {EnvKind::Drift, EnvKind::Hover, EnvKind::Window}) {
        const EpisodeSignal sig = generate_signal(kind, cfg, rng);
        for (int t = 1; t <= cfg.horizon; ++t)
            REQUIRE(reward(sig, t, false, cfg) == 0.0);
    }
}

TEST_CASE("window rewards split on the window bounds") {
    EnvConfig cfg;
    Rng rng = make_rng(6);
    const EpisodeSignal sig = make_window(cfg, rng);
    CHECK(reward(sig, 70, true, cfg) == cfg.reward_hit);
    CHECK(reward(sig, 60, true, cfg) == cfg.reward_hit);   // inclusive bounds
    CHECK(reward(sig, 80, true, cfg) == cfg.reward_hit);
    CHECK(reward(sig, 59, true, cfg) == cfg.reward_miss);
    CHECK(reward(sig, 81, true, cfg) == cfg.reward_miss);
}

TEST_CASE("drift and hover rewards split on event + sustain_lag") {
    EnvConfig cfg;
    Rng rng = make_rng(7);
    const EpisodeSignal drift = make_drift(cfg, 50, rng);
    CHECK(reward(drift, 55, true, cfg) == cfg.reward_transient);
    CHECK(reward(drift, 49, true, cfg) == cfg.reward_miss);
    CHECK(reward(drift, 50, true, cfg) == cfg.reward_transient);
    CHECK(reward(drift, 60, true, cfg) == cfg.reward_hit);
    CHECK(reward(drift, 100, true, cfg) == cfg.reward_hit);

    const EpisodeSignal hover = make_hover(cfg, 60, rng);
    CHECK(reward(hover, 59, true, cfg) == cfg.reward_miss);
    CHECK(reward(hover, 65, true, cfg) == cfg.reward_transient);
    CHECK(reward(hover, 70, true, cfg) == cfg.reward_hit);
}

TEST_CASE("reward is total over actions and in-range timesteps only") {
    EnvConfig cfg;
    Rng rng = make_rng(8);
    const EpisodeSignal sig = make_window(cfg, rng);
    CHECK_THROWS_AS(reward(sig, 0, true, cfg), std::out_of_range);
    CHECK_THROWS_AS(reward(sig, 101, false, cfg), std::out_of_range);
}

TEST_CASE("config invariants are enforced") {
    EnvConfig cfg;
    cfg.horizon = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = EnvConfig{};
    cfg.drift_onset_lo = 60;
    cfg.drift_onset_hi = 20;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = EnvConfig{};
    cfg.drift_onset_hi = 100;  // must stay below the horizon
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = EnvConfig{};
    cfg.window_lo = 80;
    cfg.window_hi = 60;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = EnvConfig{};
    cfg.drift_base = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    CHECK_NOTHROW(EnvConfig{}.validate());
}
