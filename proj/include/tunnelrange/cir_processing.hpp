// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "error.hpp"
#include "units.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace tunnelrange {

using Complex = std::complex<double>;

enum class WindowKind { Hann, None };

/// Sweep geometry of one sounding. Defaults are the tunnel campaign setup:
/// 3001 points over 2.5 to 4.5 GHz, 0.5 ns delay grid, 1.5 us observation.
struct SweepConfig {
    double center_frequency_hz = 3.5e9;
    double bandwidth_hz = 2.0e9;
    std::size_t num_points = 3001;
    double time_resolution_s = 0.5e-9;
    double observation_interval_s = 1.5e-6;
    double reference_power_mw = 1.0;
    WindowKind window = WindowKind::Hann;

    void validate() const
    {
        if (num_points < 2)
            throw Error(ErrorCode::InvalidInput, "num_points must be >= 2");
        if (!(time_resolution_s > 0.0) || !std::isfinite(time_resolution_s))
            throw Error(ErrorCode::InvalidInput, "time_resolution must be > 0");
        if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
            throw Error(ErrorCode::InvalidInput, "bandwidth must be > 0");
        if (!(center_frequency_hz - bandwidth_hz / 2.0 > 0.0))
            throw Error(ErrorCode::InvalidInput, "sweep must start above 0 Hz");
        if (!(reference_power_mw > 0.0))
            throw Error(ErrorCode::InvalidInput, "reference power must be > 0");
        const double derived = static_cast<double>(num_points - 1) * time_resolution_s;
        if (std::abs(derived - observation_interval_s) > 1e-6 * derived)
            throw Error(ErrorCode::InvalidInput,
                        "observation interval must equal (num_points - 1) * time_resolution");
    }

    double frequency_at(std::size_t k) const
    {
        return center_frequency_hz - bandwidth_hz / 2.0 +
               bandwidth_hz * static_cast<double>(k) / static_cast<double>(num_points - 1);
    }

    double delay_step_s() const { return observation_interval_s / static_cast<double>(num_points - 1); }
};

struct FrequencyResponse {
    std::vector<Complex> samples;
    SweepConfig config;
};

struct ImpulseResponse {
    std::vector<Complex> taps;
    double delay_step_s = 0.5e-9;
    double origin_delay_s = 0.0;

    double delay_at(std::size_t i) const { return origin_delay_s + static_cast<double>(i) * delay_step_s; }
    std::size_t size() const { return taps.size(); }

    void validate() const
    {
        if (taps.empty())
            throw Error(ErrorCode::InvalidInput, "impulse response has no taps");
        if (!(delay_step_s > 0.0) || !std::isfinite(delay_step_s))
            throw Error(ErrorCode::InvalidInput, "delay_step must be > 0");
        if (!std::isfinite(origin_delay_s))
            throw Error(ErrorCode::InvalidInput, "origin_delay must be finite");
        for (const auto& t : taps)
            if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
                throw Error(ErrorCode::InvalidInput, "impulse response contains non-finite taps");
    }
};

/// |h|^2 on the delay grid plus the detection mask. Powers are in mW so that
/// a unit tap is 0 dBm against the default 1 mW reference.
struct PowerDelayProfile {
    std::vector<double> power;
    std::vector<std::uint8_t> mask;
    double delay_step_s = 0.5e-9;
    double origin_delay_s = 0.0;
    double threshold_dbm = 0.0;
    double reference_power_mw = 1.0;

    std::size_t size() const { return power.size(); }
    double delay_at(std::size_t i) const { return origin_delay_s + static_cast<double>(i) * delay_step_s; }

    // p_h(t): the power where detected, zero elsewhere.
    double thresholded(std::size_t i) const { return mask[i] ? power[i] : 0.0; }

    bool any_detected() const
    {
        for (auto m : mask)
            if (m)
                return true;
        return false;
    }
};

/// Symmetric Hann window with zero endpoints, w[n] = 0.5 (1 - cos(2 pi n / (N - 1))).
inline std::vector<double> hann_window(std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (n < 2)
        return w;
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
    return w;
}

namespace detail {

// FFTW planning is not re-entrant; execution is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// Unitary DFT of arbitrary length. sign = FFTW_FORWARD (e^{-j}) or FFTW_BACKWARD (e^{+j}).
inline std::vector<Complex> unitary_dft(std::span<const Complex> in, int sign)
{
    const auto n = in.size();
    std::vector<Complex> src(in.begin(), in.end());
    std::vector<Complex> dst(n);
    if (n == 0)
        return dst;

    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(src.data()),
                                reinterpret_cast<fftw_complex*>(dst.data()), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : dst)
        v *= scale;
    return dst;
}

} // namespace detail

inline std::vector<Complex> inverse_transform(std::span<const Complex> spectrum)
{
    return detail::unitary_dft(spectrum, FFTW_BACKWARD);
}

inline std::vector<Complex> forward_transform(std::span<const Complex> taps)
{
    return detail::unitary_dft(taps, FFTW_FORWARD);
}

inline std::vector<Complex> apply_window(std::span<const Complex> samples, WindowKind window)
{
    std::vector<Complex> out(samples.begin(), samples.end());
    if (window == WindowKind::Hann) {
        const auto w = hann_window(out.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] *= w[i];
    }
    return out;
}

/// Windowed, unitary inverse DFT of a calibrated sweep. Taps are ordered by
/// non-negative delay on the grid T / (N - 1).
inline ImpulseResponse ingest_frequency_response(const FrequencyResponse& raw)
{
    raw.config.validate();
    if (raw.samples.size() != raw.config.num_points)
        throw Error(ErrorCode::InvalidInput, "frequency response length " + std::to_string(raw.samples.size()) +
                                                 " does not match num_points " +
                                                 std::to_string(raw.config.num_points));
    for (const auto& s : raw.samples)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw Error(ErrorCode::InvalidInput, "frequency response contains non-finite samples");

    const auto windowed = apply_window(raw.samples, raw.config.window);
    ImpulseResponse cir;
    cir.taps = inverse_transform(windowed);
    cir.delay_step_s = raw.config.delay_step_s();
    cir.origin_delay_s = 0.0;
    return cir;
}

/// Power-delay profile with the strict detection rule 10 log10(p / P0) > P_TH.
inline PowerDelayProfile compute_pdp(const ImpulseResponse& cir, double threshold_dbm,
                                     double reference_power_mw = 1.0)
{
    cir.validate();
    if (!std::isfinite(threshold_dbm))
        throw Error(ErrorCode::InvalidInput, "threshold must be finite");
    if (!(reference_power_mw > 0.0))
        throw Error(ErrorCode::InvalidInput, "reference power must be > 0");

    PowerDelayProfile pdp;
    pdp.delay_step_s = cir.delay_step_s;
    pdp.origin_delay_s = cir.origin_delay_s;
    pdp.threshold_dbm = threshold_dbm;
    pdp.reference_power_mw = reference_power_mw;
    pdp.power.resize(cir.size());
    pdp.mask.resize(cir.size());
    for (std::size_t i = 0; i < cir.size(); ++i) {
        const double p = std::norm(cir.taps[i]);
        pdp.power[i] = p;
        // log10(0) = -inf never exceeds a finite threshold.
        pdp.mask[i] = (p > 0.0 && to_dbm(p, reference_power_mw) > threshold_dbm) ? 1 : 0;
    }
    return pdp;
}

} // namespace tunnelrange
