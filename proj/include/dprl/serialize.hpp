#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dprl/metrics.hpp"
#include "dprl/policy.hpp"
#include "dprl/signal_env.hpp"

namespace dprl {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form, locale-independent. Shared by every CSV
// writer so reruns are byte-identical.
inline std::string num_str(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline Json episode_to_json(const EpisodeSignal& sig, std::uint64_t seed) {
    Json j;
    j["env"] = env_name(sig.env);
    j["seed"] = seed;
    Json landmarks;
    switch (sig.env) {
        case EnvKind::Drift: landmarks["onset"] = sig.event_time; break;
        case EnvKind::Hover: landmarks["cross"] = sig.event_time; break;
        case EnvKind::Window:
            landmarks["window_lo"] = sig.window_lo;
            landmarks["window_hi"] = sig.window_hi;
            break;
    }
    j["landmarks"] = landmarks;
    j["s"] = sig.s;
    return j;
}

// Flat checkpoint for freeze-then-evaluate workflows.
inline Json checkpoint_to_json(const PolicyParams& P) {
    Json j;
    j["hidden"] = P.hidden;
    j["activation"] = activation_name(P.activation);
    j["w1"] = P.w1;
    j["b1"] = P.b1;
    j["w2"] = P.w2;
    j["b2"] = P.b2;
    return j;
}

inline PolicyParams checkpoint_from_json(const Json& j) {
    PolicyParams P;
    P.hidden = j.at("hidden").get<int>();
    P.activation = parse_activation(j.at("activation").get<std::string>());
    P.w1 = j.at("w1").get<std::vector<double>>();
    P.b1 = j.at("b1").get<std::vector<double>>();
    P.w2 = j.at("w2").get<std::vector<double>>();
    P.b2 = j.at("b2").get<double>();
    const auto h = static_cast<std::size_t>(P.hidden);
    if (P.hidden < 1 || P.w1.size() != h || P.b1.size() != h || P.w2.size() != h)
        throw std::invalid_argument("checkpoint: shape mismatch");
    return P;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return std::string(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
}

inline void save_checkpoint(const PolicyParams& P, const std::string& path) {
    write_text_file(path, checkpoint_to_json(P).dump(2) + "\n");
}

inline PolicyParams load_checkpoint(const std::string& path) {
    return checkpoint_from_json(Json::parse(read_text_file(path)));
}

}  // namespace dprl
