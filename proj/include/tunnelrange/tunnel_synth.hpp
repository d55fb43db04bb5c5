// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "cir_processing.hpp"
#include "error.hpp"
#include "feature_selection.hpp"
#include "ranging_model.hpp"
#include "records.hpp"
#include "units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tunnelrange {

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;
};

/// Distribution of the maximum excess delay for one class: tau_MAX is drawn as
/// lo + (hi - lo) * U^skew, with lo raised to sit above the drawn rise time.
struct ExcessDelayModel {
    double min_ns = 15.0;
    double max_ns = 170.0;
    double skew = 1.0;
};

/// Parametric tunnel channel. Every knob that shapes the extracted statistics
/// lives here; (profile, seed) fully determines the generated campaign.
struct SynthProfile {
    std::string name = "liu";
    SweepConfig sweep{};

    std::vector<Position> tx_positions;
    std::vector<Position> rx_positions;
    // Repetitions per (tx, rx) pair for LOS, NLOS-M, NLOS-P, NLOS-W.
    std::array<std::size_t, 4> repetitions{10, 10, 10, 10};

    // Strongest-path power law and per-scenario obstacle losses.
    double ref_power_dbm_at_1m = 0.0;
    double path_loss_exponent = 1.5;
    double shadowing_db = 1.5;
    std::array<double, 4> obstacle_loss_db{0.0, 3.0, 2.0, 6.0};
    double min_peak_dbm = -25.0;

    // Multipath layout inside the detected support.
    double tap_floor_dbm = -36.0;  // weakest intended-detectable tap
    double peak_margin_db = 3.0;   // every other tap sits at least this far below the peak
    double mean_tap_spacing_ns = 3.0;
    double decay_ns = 25.0;
    double tap_jitter_db = 2.0;

    // Ranging error targets.
    double los_bias_m = -0.27;
    double los_sigma_m = 0.16;
    std::array<double, 3> nlos_poly{0.00087, -0.2, 11.72};
    double nlos_sigma_m = 1.61;
    // Replace the Gaussian NLOS residual with two clusters centered at these
    // absolute errors. Off by default.
    bool nlos_two_cluster = false;
    std::array<double, 2> nlos_cluster_centers_m{4.0, 10.0};

    ExcessDelayModel los_excess{15.0, 170.0, 1.0};
    ExcessDelayModel nlos_excess{13.0, 120.0, 1.3};

    double lambda_L_per_ns = 0.333;
    double lambda_N_per_ns = 0.075;

    // dB-domain Gaussian noise, truncated at mean + cap * std.
    double noise_mean_dbm = -64.0;
    double noise_std_db = 6.0;
    double noise_tail_cap_sigma = 3.3;

    bool noise_only = false;
    // Off: a single path at the first arrival, no rising edge or tail.
    bool multipath = true;
    bool add_noise = true;
    std::uint64_t seed = 20140826;

    std::size_t record_count() const
    {
        std::size_t reps = 0;
        for (auto r : repetitions)
            reps += r;
        return reps * tx_positions.size() * rx_positions.size();
    }

    inline void validate() const;
};

/// Campaign shaped after the LiU basement tunnel: 3 transmitters, 30 receivers,
/// 10 repetitions for each of the four scenarios (3600 records).
inline SynthProfile liu_profile()
{
    SynthProfile p;
    p.name = "liu";
    p.tx_positions = {{0.0, 0.5}, {-4.0, 1.0}, {-8.0, 2.4}};
    for (int j = 0; j < 30; ++j)
        p.rx_positions.push_back({3.0 + 1.25 * j, 1.45 + 0.9 * std::sin(0.7 * j)});
    return p;
}

/// Wider, rougher mine-tunnel variant with heavier rise-time overlap. Used for
/// robustness runs only.
inline SynthProfile kiruna_profile()
{
    SynthProfile p;
    p.name = "kiruna";
    p.sweep.center_frequency_hz = 2.45e9;
    p.sweep.bandwidth_hz = 0.5e9;
    p.sweep.num_points = 751;
    p.sweep.time_resolution_s = 2.0e-9;
    p.sweep.observation_interval_s = 1.5e-6;
    p.tx_positions = {{0.0, 3.5}};
    for (int j = 0; j < 8; ++j)
        p.rx_positions.push_back({5.0 + 6.0 * j, 2.0 + 0.4 * j});
    p.repetitions = {7, 0, 0, 3};
    p.los_excess = {10.0, 58.0, 1.0};
    p.nlos_excess = {2.0, 46.0, 1.0};
    p.nlos_poly = {0.004, -0.5, 16.0};
    p.nlos_sigma_m = 2.0;
    p.los_sigma_m = 0.3;
    p.lambda_L_per_ns = 0.25;
    p.lambda_N_per_ns = 0.12;
    p.seed = 1045;
    return p;
}

void SynthProfile::validate() const
{
    const auto bad = [](const std::string& what) { return Error(ErrorCode::InvalidProfile, what); };
    try {
        sweep.validate();
    } catch (const Error& e) {
        throw bad(e.what());
    }
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(los_sigma_m) || !positive(nlos_sigma_m) || !positive(noise_std_db) || !positive(decay_ns) ||
        !positive(mean_tap_spacing_ns) || !positive(lambda_L_per_ns) || !positive(lambda_N_per_ns) ||
        !positive(noise_tail_cap_sigma) || !positive(los_excess.skew) || !positive(nlos_excess.skew))
        throw bad("rates, sigmas and spacings must be > 0");
    if (shadowing_db < 0.0 || tap_jitter_db < 0.0 || peak_margin_db < 0.0)
        throw bad("shadowing, jitter and margin must be >= 0");
    if (tx_positions.empty() || rx_positions.empty())
        throw bad("profile needs at least one transmitter and one receiver");
    for (const auto* m : {&los_excess, &nlos_excess})
        if (!(m->min_ns >= 0.0) || !(m->max_ns >= m->min_ns))
            throw bad("excess-delay range must satisfy 0 <= min <= max");
    if (tap_floor_dbm >= min_peak_dbm - peak_margin_db)
        throw bad("tap floor must sit below the weakest peak minus the margin");

    // A negative deterministic NLOS error would put the first detected path
    // ahead of the direct path.
    for (int k = 0; k <= 200; ++k) {
        const double t = nlos_excess.min_ns + (nlos_excess.max_ns - nlos_excess.min_ns) * k / 200.0;
        if (nlos_error(nlos_poly, t) < 0.0)
            throw bad("NLOS error polynomial is negative at tau_MAX = " + std::to_string(t) +
                      " ns; bias would precede the direct path");
    }

    double d_max = 0.0;
    for (const auto& tx : tx_positions)
        for (const auto& rx : rx_positions)
            d_max = std::max(d_max, std::hypot(tx.x_m - rx.x_m, tx.y_m - rx.y_m));
    double g_max = 0.0;
    for (int k = 0; k <= 200; ++k)
        g_max = std::max(g_max, nlos_error(nlos_poly, nlos_excess.min_ns +
                                                          (nlos_excess.max_ns - nlos_excess.min_ns) * k / 200.0));
    const double latest_ns = (d_max + g_max + 8.0 * nlos_sigma_m) / kMetersPerNs +
                             std::max(los_excess.max_ns, nlos_excess.max_ns) + 10.0 / lambda_N_per_ns;
    if (latest_ns >= sweep.observation_interval_s / kSecondsPerNs)
        throw bad("latest path would fall outside the observation interval");
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline Complex phasor(double power_mw, double phase)
{
    return std::polar(std::sqrt(power_mw), phase);
}

} // namespace detail

/// Generator-side truth for one record, kept for verification.
struct SynthTruth {
    double rise_time_ns = 0.0;
    double max_excess_ns = 0.0;
    double ranging_error_m = 0.0;
    double peak_dbm = 0.0;
};

struct SynthRecord {
    SweepRecord record;
    SynthTruth truth;
};

namespace detail {

inline SynthRecord generate_record(const SynthProfile& p, Scenario scenario, std::size_t tx, std::size_t rx,
                                   std::size_t rep, std::uint64_t sub_seed)
{
    std::mt19937_64 rng(sub_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto& txp = p.tx_positions[tx];
    const auto& rxp = p.rx_positions[rx];
    const double distance = std::hypot(txp.x_m - rxp.x_m, txp.y_m - rxp.y_m);
    const std::size_t n = p.sweep.num_points;
    const double step_ns = p.sweep.delay_step_s() / kSecondsPerNs;
    const double step_m = step_ns * kMetersPerNs;

    SynthRecord out;
    auto& rec = out.record;
    char id[64];
    std::snprintf(id, sizeof id, "%s-tx%zu-rx%02zu-%02zu", std::string(to_string(scenario)).c_str(), tx + 1, rx + 1,
                  rep);
    rec.record_id = id;
    rec.tx_id = "tx" + std::to_string(tx + 1);
    rec.rx_id = "rx" + std::to_string(rx + 1);
    rec.true_distance_m = distance;
    rec.scenario = scenario;
    rec.cir.delay_step_s = p.sweep.delay_step_s();
    rec.cir.origin_delay_s = 0.0;
    rec.cir.taps.assign(n, Complex{});

    if (!p.noise_only) {
        const bool nlos = pooled_class(scenario) == LinkClass::Nlos;
        const double rate = nlos ? p.lambda_N_per_ns : p.lambda_L_per_ns;
        const auto& excess = nlos ? p.nlos_excess : p.los_excess;

        std::size_t rise_bins = 0;
        std::size_t max_bins = 0;
        if (p.multipath) {
            const double rise_ns = -std::log1p(-unit(rng)) / rate;
            rise_bins = static_cast<std::size_t>(std::llround(rise_ns / step_ns));
            const double lo = std::max(excess.min_ns, static_cast<double>(rise_bins) * step_ns + 1.0);
            const double hi = std::max(excess.max_ns, lo + 5.0);
            const double tau_max_ns = lo + (hi - lo) * std::pow(unit(rng), excess.skew);
            max_bins = std::max(rise_bins, static_cast<std::size_t>(std::llround(tau_max_ns / step_ns)));
        }
        const double realized_tau_max = static_cast<double>(max_bins) * step_ns;

        // Grid rounding adds step^2 / 12 of variance to the ranging error.
        const double quant_var = step_m * step_m / 12.0;
        const double target_sigma = nlos ? p.nlos_sigma_m : p.los_sigma_m;
        const double sigma = std::sqrt(std::max(target_sigma * target_sigma - quant_var, 0.0));

        std::size_t first = 0;
        double error = 0.0;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 100)
                throw Error(ErrorCode::InvalidProfile, "could not place first path after the origin for " +
                                                           rec.record_id);
            if (!nlos)
                error = p.los_bias_m + sigma * gauss(rng);
            else if (p.nlos_two_cluster)
                error = p.nlos_cluster_centers_m[unit(rng) < 0.5 ? 0 : 1] + sigma * gauss(rng);
            else
                error = nlos_error(p.nlos_poly, realized_tau_max) + sigma * gauss(rng);
            const double bins = (distance + error) / step_m;
            if (bins >= 1.0) {
                first = static_cast<std::size_t>(std::llround(bins));
                break;
            }
        }
        const std::size_t peak = first + rise_bins;
        const std::size_t last = first + max_bins;
        if (last >= n)
            throw Error(ErrorCode::InvalidProfile, "record " + rec.record_id + " exceeds the observation window");

        double peak_dbm = p.ref_power_dbm_at_1m - 10.0 * p.path_loss_exponent * std::log10(std::max(distance, 1.0)) -
                          p.obstacle_loss_db[static_cast<std::size_t>(scenario)] + p.shadowing_db * gauss(rng);
        peak_dbm = std::max(peak_dbm, p.min_peak_dbm);
        const double ceiling = peak_dbm - p.peak_margin_db;

        auto place = [&](std::size_t idx, double dbm) {
            rec.cir.taps[idx] += detail::phasor(from_dbm(std::clamp(dbm, p.tap_floor_dbm, ceiling)), phase(rng));
        };

        rec.cir.taps[peak] = detail::phasor(from_dbm(peak_dbm), phase(rng));
        if (first != peak) {
            place(first, ceiling - 6.0 * unit(rng));
            // Rising edge: sparse taps between the first path and the peak.
            std::exponential_distribution<double> gap(1.0 / p.mean_tap_spacing_ns);
            for (double t = gap(rng); first + static_cast<std::size_t>(t / step_ns) < peak; t += gap(rng)) {
                const auto idx = first + static_cast<std::size_t>(t / step_ns);
                if (idx != first && rec.cir.taps[idx] == Complex{})
                    place(idx, ceiling - 10.0 * unit(rng));
            }
        }
        if (last != peak) {
            std::exponential_distribution<double> gap(1.0 / p.mean_tap_spacing_ns);
            for (double t = gap(rng); peak + static_cast<std::size_t>(t / step_ns) < last; t += gap(rng)) {
                const auto idx = peak + static_cast<std::size_t>(t / step_ns);
                if (rec.cir.taps[idx] != Complex{})
                    continue;
                place(idx, ceiling - 10.0 / std::numbers::ln10 * t / p.decay_ns + p.tap_jitter_db * gauss(rng));
            }
            const double tail_t = static_cast<double>(last - peak) * step_ns;
            place(last, ceiling - 10.0 / std::numbers::ln10 * tail_t / p.decay_ns + p.tap_jitter_db * gauss(rng));
        }

        out.truth.rise_time_ns = static_cast<double>(rise_bins) * step_ns;
        out.truth.max_excess_ns = realized_tau_max;
        out.truth.ranging_error_m = static_cast<double>(first) * step_m - distance;
        out.truth.peak_dbm = peak_dbm;
    }

    const double cap = p.noise_mean_dbm + p.noise_tail_cap_sigma * p.noise_std_db;
    for (std::size_t i = 0; i < n && p.add_noise; ++i) {
        double level;
        do {
            level = p.noise_mean_dbm + p.noise_std_db * gauss(rng);
        } while (level > cap);
        rec.cir.taps[i] += detail::phasor(from_dbm(level), phase(rng));
    }
    return out;
}

} // namespace detail

/// Generate every record of the campaign with its generator-side truth.
/// Order is scenario, transmitter, receiver, repetition; each record draws
/// from its own sub-seed so records are independent of generation order.
inline std::vector<SynthRecord> generate_campaign_with_truth(const SynthProfile& profile)
{
    profile.validate();
    std::vector<SynthRecord> out;
    out.reserve(profile.record_count());
    std::uint64_t index = 0;
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t tx = 0; tx < profile.tx_positions.size(); ++tx)
            for (std::size_t rx = 0; rx < profile.rx_positions.size(); ++rx)
                for (std::size_t rep = 0; rep < profile.repetitions[s]; ++rep) {
                    const auto sub_seed = detail::splitmix64(profile.seed ^ detail::splitmix64(index++));
                    out.push_back(detail::generate_record(profile, static_cast<Scenario>(s), tx, rx, rep, sub_seed));
                }
    return out;
}

inline std::vector<SweepRecord> generate_campaign(const SynthProfile& profile)
{
    auto with_truth = generate_campaign_with_truth(profile);
    std::vector<SweepRecord> out;
    out.reserve(with_truth.size());
    for (auto& r : with_truth)
        out.push_back(std::move(r.record));
    return out;
}

struct TargetCheck {
    std::string name;
    double target = 0.0;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double tolerance = 0.0; // relative when relative == true
    bool relative = true;
    bool pass = false;
};

struct SynthReport {
    std::vector<TargetCheck> checks;
    std::size_t total_records = 0;
    std::size_t missed_detections = 0;
    std::optional<double> rise_time_overlap;

    double md_rate() const
    {
        return total_records == 0 ? 0.0 : static_cast<double>(missed_detections) / static_cast<double>(total_records);
    }
    bool all_pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
};

/// Run PDP extraction on generated records and compare the feature
/// statistics with what the profile asked for.
inline SynthReport verify_profile(std::span<const SweepRecord> records, const SynthProfile& profile,
                                  double threshold_dbm = -43.8)
{
    SynthReport report;
    report.total_records = records.size();
    std::vector<double> rise_l, rise_n, err_l, resid_n;
    for (const auto& rec : records) {
        const auto pdp = compute_pdp(rec.cir, threshold_dbm, profile.sweep.reference_power_mw);
        if (!pdp.any_detected()) {
            ++report.missed_detections;
            continue;
        }
        if (!rec.scenario || !rec.true_distance_m)
            continue;
        const auto f = extract_features(pdp, rec.cir);
        const double err = kSpeedOfLightMps * f.toa_s - *rec.true_distance_m;
        if (pooled_class(*rec.scenario) == LinkClass::Los) {
            rise_l.push_back(f.rise_time_ns());
            err_l.push_back(err);
        } else {
            rise_n.push_back(f.rise_time_ns());
            resid_n.push_back(err - nlos_error(profile.nlos_poly, f.max_excess_delay_ns()));
        }
    }

    auto add = [&](std::string name, double target, std::span<const double> xs, auto statistic, double tol,
                   bool relative) {
        TargetCheck c{std::move(name), target, std::numeric_limits<double>::quiet_NaN(), tol, relative, false};
        if (xs.size() >= 2) {
            c.measured = statistic(xs);
            const double dev = std::abs(c.measured - target);
            c.pass = relative ? dev <= tol * std::abs(target) : dev <= tol;
        }
        report.checks.push_back(std::move(c));
    };
    const auto mean = [](std::span<const double> x) { return stats::mean(x); };
    const auto sd = [](std::span<const double> x) { return stats::stddev(x); };

    add("mean_rise_time_los_ns", 1.0 / profile.lambda_L_per_ns, rise_l, mean, 0.15, true);
    add("mean_rise_time_nlos_ns", 1.0 / profile.lambda_N_per_ns, rise_n, mean, 0.15, true);
    add("los_error_mean_m", profile.los_bias_m, err_l, mean, 0.1, false);
    add("los_error_std_m", profile.los_sigma_m, err_l, sd, 0.1, true);
    if (!profile.nlos_two_cluster)
        add("nlos_residual_std_m", profile.nlos_sigma_m, resid_n, sd, 0.15, true);

    try {
        report.rise_time_overlap = overlap_metric(rise_l, rise_n);
    } catch (const Error&) {
        report.rise_time_overlap.reset();
    }
    return report;
}

} // namespace tunnelrange
