// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cir_processing.hpp"
#include "error.hpp"
#include "units.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>

namespace tunnelrange {

/// The eight propagation parameters of one detected PDP. Delays in seconds,
/// powers in dBm.
struct ChannelFeatures {
    double toa_s = 0.0;
    double rss_dbm = 0.0;
    double max_power_dbm = 0.0;
    double mean_excess_delay_s = 0.0;
    double max_excess_delay_s = 0.0;
    double rms_delay_spread_s = 0.0;
    double rise_time_s = 0.0;
    double kurtosis = 0.0;

    double toa_ns() const { return toa_s / kSecondsPerNs; }
    double max_excess_delay_ns() const { return max_excess_delay_s / kSecondsPerNs; }
    double rise_time_ns() const { return rise_time_s / kSecondsPerNs; }

    bool operator==(const ChannelFeatures&) const = default;
};

/// Feature order used by tables and diagnostics.
enum class Feature : std::size_t { Toa, Rss, MaxPower, MeanExcessDelay, MaxExcessDelay, RmsDelaySpread, RiseTime, Kurtosis };

inline constexpr std::size_t kNumFeatures = 8;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "toa", "rss", "pmax", "mean_excess", "max_excess", "rms", "rise", "kurtosis"};

/// Feature value in the units of the exported table (ns for delays, dBm for powers).
inline double feature_value(const ChannelFeatures& f, Feature which)
{
    switch (which) {
    case Feature::Toa: return f.toa_s / kSecondsPerNs;
    case Feature::Rss: return f.rss_dbm;
    case Feature::MaxPower: return f.max_power_dbm;
    case Feature::MeanExcessDelay: return f.mean_excess_delay_s / kSecondsPerNs;
    case Feature::MaxExcessDelay: return f.max_excess_delay_s / kSecondsPerNs;
    case Feature::RmsDelaySpread: return f.rms_delay_spread_s / kSecondsPerNs;
    case Feature::RiseTime: return f.rise_time_s / kSecondsPerNs;
    case Feature::Kurtosis: return f.kurtosis;
    }
    return 0.0;
}

struct FeatureOptions {
    // Observation interval T for the RSS normalization; <= 0 means (N - 1) * delay_step.
    double observation_interval_s = 0.0;
    // Compute kurtosis on sqrt(p_h) instead of the unthresholded |h|.
    bool kurtosis_on_thresholded = false;
};

/// Fourth standardized moment of a magnitude sequence, averaged over the grid.
template <typename Magnitude>
double kurtosis_of(std::size_t n, Magnitude&& magnitude)
{
    if (n == 0)
        throw Error(ErrorCode::DegenerateSignal, "kurtosis of an empty sequence");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += magnitude(i);
    mean /= static_cast<double>(n);

    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = magnitude(i) - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (!(m2 > 0.0))
        throw Error(ErrorCode::DegenerateSignal, "zero variance of |h(t)|");
    return m4 / (m2 * m2);
}

/// Extract the eight channel parameters. Integrals become sums over the
/// uniform delay grid; argmax ties resolve to the earliest delay.
inline ChannelFeatures extract_features(const PowerDelayProfile& pdp, const ImpulseResponse& cir,
                                        const FeatureOptions& options = {})
{
    const std::size_t n = pdp.size();
    if (n == 0 || pdp.mask.size() != n)
        throw Error(ErrorCode::InvalidInput, "malformed power-delay profile");
    if (cir.size() != n)
        throw Error(ErrorCode::InvalidInput, "impulse response and PDP lengths differ");

    std::size_t first = n;
    std::size_t last = 0;
    std::size_t peak = 0;
    double peak_power = -1.0;
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!pdp.mask[i])
            continue;
        const double p = pdp.power[i];
        if (first == n)
            first = i;
        last = i;
        if (p > peak_power) {
            peak_power = p;
            peak = i;
        }
        s0 += p;
        s1 += pdp.delay_at(i) * p;
    }
    if (first == n)
        throw Error(ErrorCode::NoSignalDetected, "no PDP sample exceeds the threshold");

    const double mean_delay = s1 / s0;
    double s2 = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        if (!pdp.mask[i])
            continue;
        const double dt = pdp.delay_at(i) - mean_delay;
        s2 += dt * dt * pdp.power[i];
    }

    const double interval = options.observation_interval_s > 0.0
                                ? options.observation_interval_s
                                : static_cast<double>(n - 1) * pdp.delay_step_s;

    ChannelFeatures f;
    f.toa_s = pdp.delay_at(first);
    f.rss_dbm = 10.0 * std::log10(s0 * pdp.delay_step_s / (interval * pdp.reference_power_mw));
    f.max_power_dbm = to_dbm(peak_power, pdp.reference_power_mw);
    f.mean_excess_delay_s = mean_delay;
    f.max_excess_delay_s = pdp.delay_at(last) - f.toa_s;
    f.rms_delay_spread_s = std::sqrt(s2 / s0);
    f.rise_time_s = pdp.delay_at(peak) - f.toa_s;
    if (options.kurtosis_on_thresholded)
        f.kurtosis = kurtosis_of(n, [&](std::size_t i) { return std::sqrt(pdp.thresholded(i)); });
    else
        f.kurtosis = kurtosis_of(n, [&](std::size_t i) { return std::abs(cir.taps[i]); });
    return f;
}

} // namespace tunnelrange
