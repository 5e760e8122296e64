// synth.hpp — synthetic low-cost-sensor scenarios with known ground truth.
//
// The reference series is a diurnal sinusoid plus AR(1) weather; the sensor
// responds linearly to it, is amplified at high humidity through a
// hygroscopic growth curve, drifts with temperature, and carries Gaussian
// noise whose spread grows with humidity. Optional blocks add one-step
// sensor inertia and a mobile deployment (speed trace with stop-and-go runs
// and restart spikes). Every sample's true noise spread is returned
// alongside the records so error-estimation quality can be checked against
// ground truth.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/record.hpp"
#include "eeatc/rng.hpp"

namespace eeatc {

enum class MotionFields { none, speed, gps, both };

struct SynthConfig {
    std::size_t n = 2000;
    double step_seconds = 60.0;
    double start_time = 1609459200.0;  // 2021-01-01T00:00:00Z
    std::uint64_t seed = 0;

    // reference concentration: diurnal cycle + AR(1) persistence
    double y_base = 25.0;
    double y_amp = 10.0;
    double y_peak_hour = 8.0;
    double y_ar = 0.97;
    double y_innovation = 1.2;

    // meteorology
    double t_base = 30.0;
    double t_amp = 3.0;
    double t_peak_hour = 14.0;
    double t_noise = 0.3;
    double rh_base = 70.0;
    double rh_amp = 12.0;
    double rh_peak_hour = 2.0;
    double rh_noise = 2.5;
    double rh_min = 35.0;
    double rh_max = 97.0;

    // sensor response
    double gain = 0.55;
    double humidity_gain = 0.0;    // weight of the hygroscopic amplification
    double humidity_offset = 0.0;  // additive baseline drift per % rh above 50
    double temp_coeff = 0.0;       // drift per degree away from temp_ref
    double temp_ref = 30.0;
    double offset = 2.0;
    double inertia = 1.0;          // weight of the current sample; 1 = no memory

    // heteroscedastic noise:
    // sigma = noise_base + noise_rh * max(0, rh - noise_rh_ref) + noise_y * y
    double noise_base = 0.5;
    double noise_rh = 0.0;
    double noise_rh_ref = 50.0;
    double noise_y = 0.0;

    // mobile deployment
    MotionFields motion = MotionFields::none;
    double speed_mean_kmh = 15.0;
    double speed_noise_kmh = 3.0;
    double stop_prob = 0.01;       // per-sample chance of starting a stop
    std::size_t stop_len_min = 3;  // stop run length, uniform in [min, max]
    std::size_t stop_len_max = 10;
    double restart_spike = 0.0;    // added to s on the record after a stop
};

struct SynthData {
    Records records;
    std::vector<double> noise_std;  // true sigma of each record's sensor noise
};

// Hygroscopic amplification, unity at 50 % relative humidity and growing
// sharply as saturation approaches.
inline double growth_factor(double rh) {
    constexpr double kSat = 103.0;
    const double capped = std::min(rh, kSat - 1.0);
    return (1.0 - 50.0 / kSat) / (1.0 - capped / kSat);
}

inline SynthData synth_generate(const SynthConfig& cfg) {
    if (cfg.n == 0)
        throw BadConfig("synth: n must be positive");
    if (!(cfg.step_seconds > 0.0))
        throw BadConfig("synth: step must be positive");
    if (cfg.stop_len_min == 0 || cfg.stop_len_max < cfg.stop_len_min)
        throw BadConfig("synth: bad stop run bounds");
    if (!(cfg.inertia > 0.0 && cfg.inertia <= 1.0))
        throw BadConfig("synth: inertia must lie in (0, 1]");

    SplitMix64 rng(cfg.seed);
    SynthData out;
    out.records.reserve(cfg.n);
    out.noise_std.reserve(cfg.n);

    constexpr double kTwoPi = 6.283185307179586476925286766559;
    auto diurnal = [&](double hour, double peak) {
        return std::cos(kTwoPi * (hour - peak) / 24.0);
    };

    double ar = 0.0;
    double clean_prev = 0.0;
    std::size_t stop_left = 0;
    bool just_restarted = false;
    double lat = 45.0, lon = 7.0;

    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double time = cfg.start_time + static_cast<double>(i) * cfg.step_seconds;
        const double hour = std::fmod(time / 3600.0, 24.0);

        const double temp =
            cfg.t_base + cfg.t_amp * diurnal(hour, cfg.t_peak_hour) +
            cfg.t_noise * rng.normal();
        const double rh = std::clamp(
            cfg.rh_base + cfg.rh_amp * diurnal(hour, cfg.rh_peak_hour) +
                cfg.rh_noise * rng.normal(),
            cfg.rh_min, cfg.rh_max);

        ar = cfg.y_ar * ar + cfg.y_innovation * rng.normal();
        const double y = std::max(
            cfg.y_base + cfg.y_amp * diurnal(hour, cfg.y_peak_hour) + ar, 0.2);

        double clean = cfg.gain * y +
                       cfg.humidity_gain * y * growth_factor(rh) +
                       cfg.humidity_offset * (rh - 50.0) +
                       cfg.temp_coeff * (temp - cfg.temp_ref) + cfg.offset;
        if (i > 0)
            clean = cfg.inertia * clean + (1.0 - cfg.inertia) * clean_prev;
        clean_prev = clean;

        const double sigma = cfg.noise_base +
                             cfg.noise_rh * std::max(0.0, rh - cfg.noise_rh_ref) +
                             cfg.noise_y * y;
        double s = clean + sigma * rng.normal();

        SampleRecord r;
        r.timestamp = time;
        r.t = temp;
        r.rh = rh;
        r.y = y;

        if (cfg.motion != MotionFields::none) {
            double speed;
            if (stop_left > 0) {
                --stop_left;
                speed = rng.uniform(0.0, 0.5);
                just_restarted = stop_left == 0;
            } else {
                if (just_restarted) {
                    s += cfg.restart_spike;
                    just_restarted = false;
                }
                speed = std::max(0.0, cfg.speed_mean_kmh +
                                          cfg.speed_noise_kmh * rng.normal());
                if (rng.uniform() < cfg.stop_prob)
                    stop_left = cfg.stop_len_min +
                                rng.uniform_index(cfg.stop_len_max - cfg.stop_len_min + 1);
            }
            if (cfg.motion == MotionFields::speed || cfg.motion == MotionFields::both)
                r.speed = speed;
            if (cfg.motion == MotionFields::gps || cfg.motion == MotionFields::both) {
                // advance due north so fix spacing encodes the speed
                constexpr double kMetersPerDegLat = 111194.926644559;
                lat += speed / 3.6 * cfg.step_seconds / kMetersPerDegLat;
                r.lat = lat;
                r.lon = lon;
            }
        }

        r.s = s;
        out.records.push_back(r);
        out.noise_std.push_back(sigma);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Named scenarios.

// Exact linear sensor, zero noise: the first phase fits it perfectly and the
// error-estimation stage has nothing to learn.
inline SynthConfig synth_noiseless_linear(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.gain = 0.55;
    cfg.offset = 2.0;
    cfg.humidity_gain = 0.0;
    cfg.temp_coeff = 0.0;
    cfg.noise_base = 0.0;
    cfg.noise_rh = 0.0;
    return cfg;
}

// Humidity-amplified response with humidity-driven noise: nonlinear enough
// that a forest beats the linear fit, heteroscedastic enough that knowing
// the expected error helps the second phase.
inline SynthConfig synth_heteroscedastic(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.y_amp = 6.0;
    cfg.y_ar = 0.6;
    cfg.y_innovation = 3.0;
    cfg.t_noise = 1.0;
    cfg.rh_base = 74.0;
    cfg.rh_amp = 16.0;
    cfg.rh_max = 96.0;
    cfg.gain = 0.45;
    cfg.humidity_gain = 1.5;
    cfg.temp_coeff = 0.25;
    cfg.offset = 2.0;
    cfg.noise_base = 0.2;
    cfg.noise_rh = 0.02;
    return cfg;
}

// Noise-dominated sensor: the response itself is linear, so the error
// magnitude is set entirely by the humidity-driven noise ramp and the
// expected error is a smooth increasing function of rh.
inline SynthConfig synth_rh_noise(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.rh_base = 74.0;
    cfg.rh_amp = 16.0;
    cfg.rh_max = 96.0;
    cfg.gain = 0.45;
    cfg.temp_coeff = 0.25;
    cfg.offset = 2.0;
    cfg.noise_base = 0.1;
    cfg.noise_rh = 0.02;
    return cfg;
}

// Heteroscedastic scenario on a moving platform, with envelopes matching a
// bicycle-mounted field campaign: slow urban speeds, humid conditions, and
// restart spikes after stops.
inline SynthConfig synth_mobile(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg = synth_heteroscedastic(n, seed);
    cfg.y_base = 35.0;
    cfg.y_amp = 12.0;
    cfg.rh_base = 71.0;
    cfg.rh_amp = 9.0;
    cfg.rh_min = 51.0;
    cfg.rh_max = 91.0;
    cfg.t_base = 30.5;
    cfg.t_amp = 2.5;
    cfg.motion = MotionFields::both;
    cfg.speed_mean_kmh = 5.0;
    cfg.speed_noise_kmh = 4.0;
    cfg.stop_prob = 0.02;
    cfg.restart_spike = 12.0;
    return cfg;
}

// Sensor with one-step memory: the lagged sensor column carries real
// information about the current reference value.
inline SynthConfig synth_lagged(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg = synth_heteroscedastic(n, seed);
    cfg.inertia = 0.55;
    return cfg;
}

inline std::optional<SynthConfig> synth_preset(std::string_view name, std::size_t n,
                                               std::uint64_t seed) {
    if (name == "noiseless_linear")
        return synth_noiseless_linear(n, seed);
    if (name == "heteroscedastic")
        return synth_heteroscedastic(n, seed);
    if (name == "rh_noise")
        return synth_rh_noise(n, seed);
    if (name == "mobile")
        return synth_mobile(n, seed);
    if (name == "lagged")
        return synth_lagged(n, seed);
    return std::nullopt;
}

} // namespace eeatc
