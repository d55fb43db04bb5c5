// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "error.hpp"
#include "records.hpp"
#include "units.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace tunnelrange {

struct NoiseStats {
    double mean_dbm = 0.0;
    double std_db = 0.0;
    std::size_t sample_count = 0;
    std::size_t records_used = 0;

    /// Express a threshold as mean + k * std.
    double sigma_multiple(double threshold_dbm) const { return (threshold_dbm - mean_dbm) / std_db; }
};

struct ThresholdCurve {
    std::vector<double> thresholds;
    std::vector<double> fa_rate;
    std::vector<double> md_rate;
    double selected = 0.0;
    std::size_t selected_index = 0;
};

inline constexpr std::size_t kMinPreArrivalSamples = 50;

/// Grid min, min + step, ... <= max. Values are rounded to 1e-9 dB so they
/// print as the decimal the user asked for.
inline std::vector<double> make_threshold_grid(double min_dbm, double max_dbm, double step_db)
{
    if (!(step_db > 0.0) || !std::isfinite(min_dbm) || !std::isfinite(max_dbm) || max_dbm < min_dbm)
        throw Error(ErrorCode::InvalidInput, "threshold grid needs min <= max and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((max_dbm - min_dbm) / step_db + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = std::round((min_dbm + static_cast<double>(i) * step_db) * 1e9) / 1e9;
    return grid;
}

/// Mean and standard deviation (dB domain) of every sample that precedes the
/// true arrival by more than the guard. Records with fewer than 50 such
/// samples are skipped.
inline NoiseStats estimate_noise_stats(std::span<const SweepRecord> records, double guard_s,
                                       double reference_power_mw = 1.0)
{
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<double> values;
    NoiseStats stats;
    for (const auto& rec : records) {
        const auto toa = rec.true_toa_s();
        if (!toa)
            continue;
        const double cutoff = *toa - guard_s;
        std::size_t count = 0;
        while (count < rec.cir.size() && rec.cir.delay_at(count) < cutoff)
            ++count;
        if (count < kMinPreArrivalSamples)
            continue;
        ++stats.records_used;
        for (std::size_t i = 0; i < count; ++i) {
            const double p = std::norm(rec.cir.taps[i]);
            if (p > 0.0)
                values.push_back(to_dbm(p, reference_power_mw));
        }
    }
    if (values.size() < 2)
        throw Error(ErrorCode::InsufficientData, "not enough pre-arrival noise samples");

    for (double v : values)
        sum += v;
    const double mean = sum / static_cast<double>(values.size());
    for (double v : values)
        sum_sq += (v - mean) * (v - mean);
    stats.mean_dbm = mean;
    stats.std_db = std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
    stats.sample_count = values.size();
    if (!(stats.std_db > 0.0))
        throw Error(ErrorCode::DegenerateSignal, "noise floor has zero variance");
    return stats;
}

namespace detail {

// Per-record detection summary reused across all candidate thresholds.
struct DetectionTrace {
    std::vector<double> prefix_max_db; // running max of the dB profile
    double true_toa_s = 0.0;
    double delay_step_s = 0.0;
    double origin_delay_s = 0.0;
};

inline DetectionTrace make_trace(const SweepRecord& rec, double reference_power_mw)
{
    DetectionTrace trace;
    trace.true_toa_s = *rec.true_toa_s();
    trace.delay_step_s = rec.cir.delay_step_s;
    trace.origin_delay_s = rec.cir.origin_delay_s;
    trace.prefix_max_db.resize(rec.cir.size());
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.cir.size(); ++i) {
        const double p = std::norm(rec.cir.taps[i]);
        if (p > 0.0)
            running = std::max(running, to_dbm(p, reference_power_mw));
        trace.prefix_max_db[i] = running;
    }
    return trace;
}

} // namespace detail

/// False-alarm and missed-detection rates per candidate threshold. A record
/// is a missed detection when no sample exceeds the threshold and a false
/// alarm when its first detection precedes the true arrival by more than
/// fa_guard. The selected threshold minimizes max(FA, MD), ties to the lower.
inline ThresholdCurve sweep_thresholds(std::span<const SweepRecord> records, std::span<const double> candidates,
                                       double fa_guard_s, double reference_power_mw = 1.0)
{
    if (candidates.empty())
        throw Error(ErrorCode::InvalidInput, "empty threshold candidate set");
    if (!std::is_sorted(candidates.begin(), candidates.end()))
        throw Error(ErrorCode::InvalidInput, "threshold candidates must be sorted ascending");
    if (records.empty())
        throw Error(ErrorCode::InsufficientData, "no records to tune against");

    std::vector<detail::DetectionTrace> traces;
    traces.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.true_distance_m)
            throw Error(ErrorCode::InvalidInput, "record " + rec.record_id + " has no true distance");
        if (rec.cir.size() == 0)
            throw Error(ErrorCode::InvalidInput, "record " + rec.record_id + " has no taps");
        traces.push_back(detail::make_trace(rec, reference_power_mw));
    }

    ThresholdCurve curve;
    curve.thresholds.assign(candidates.begin(), candidates.end());
    curve.fa_rate.resize(candidates.size());
    curve.md_rate.resize(candidates.size());
    const double total = static_cast<double>(traces.size());

    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double t = candidates[c];
        std::size_t missed = 0;
        std::size_t false_alarms = 0;
        for (const auto& tr : traces) {
            const auto& pm = tr.prefix_max_db;
            if (!(pm.back() > t)) {
                ++missed;
                continue;
            }
            const auto it = std::upper_bound(pm.begin(), pm.end(), t);
            const auto first = static_cast<std::size_t>(it - pm.begin());
            const double toa = tr.origin_delay_s + static_cast<double>(first) * tr.delay_step_s;
            if (toa < tr.true_toa_s - fa_guard_s)
                ++false_alarms;
        }
        curve.fa_rate[c] = static_cast<double>(false_alarms) / total;
        curve.md_rate[c] = static_cast<double>(missed) / total;
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double worst = std::max(curve.fa_rate[c], curve.md_rate[c]);
        if (worst < best) {
            best = worst;
            curve.selected_index = c;
        }
    }
    curve.selected = curve.thresholds[curve.selected_index];
    return curve;
}

} // namespace tunnelrange
