// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "error.hpp"
#include "feature_selection.hpp"
#include "feature_table.hpp"
#include "units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace tunnelrange {

/// Statistical TOA ranging model. All delays in the model are nanoseconds,
/// all ranges meters.
///
/// LOS:  c tau_1 = d + mu_L + N(0, sigma_L^2)
/// NLOS: c tau_1 = d + g(tau_MAX) + N(0, sigma_N^2), g quadratic in tau_MAX
///
/// Rise time is exponential per class with rates lambda_L and lambda_N and
/// drives the LOS/NLOS posterior.
struct RangingModel {
    double mu_L_m = 0.0;
    double sigma_L_m = 1.0;
    double sigma_N_m = 1.0;
    std::array<double, 3> poly{0.0, 0.0, 0.0}; // p2, p1, p0
    double lambda_L_per_ns = 1.0;
    double lambda_N_per_ns = 1.0;
    double prior_nlos = 0.25;

    void validate() const
    {
        const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(sigma_L_m) || !positive(sigma_N_m))
            throw Error(ErrorCode::InvalidInput, "model sigmas must be > 0");
        if (!positive(lambda_L_per_ns) || !positive(lambda_N_per_ns))
            throw Error(ErrorCode::InvalidInput, "model rise-time rates must be > 0");
        if (!(prior_nlos >= 0.0 && prior_nlos <= 1.0))
            throw Error(ErrorCode::InvalidInput, "prior_nlos must be in [0, 1]");
        if (!std::isfinite(mu_L_m) || !std::all_of(poly.begin(), poly.end(), [](double v) { return std::isfinite(v); }))
            throw Error(ErrorCode::InvalidInput, "model constants must be finite");
    }
};

/// Fitted constants reported for the LiU tunnel, with the default prior.
inline RangingModel reference_tunnel_model()
{
    RangingModel m;
    m.mu_L_m = -0.27;
    m.sigma_L_m = 0.16;
    m.sigma_N_m = 1.61;
    m.poly = {0.00087, -0.2, 11.72};
    m.lambda_L_per_ns = 0.333;
    m.lambda_N_per_ns = 0.075;
    m.prior_nlos = 0.25;
    return m;
}

/// NLOS ranging error g(tau_MAX) = p2 tau^2 + p1 tau + p0, tau in ns. Not clamped.
inline double nlos_error(const std::array<double, 3>& poly, double tau_max_ns)
{
    return (poly[0] * tau_max_ns + poly[1]) * tau_max_ns + poly[2];
}

inline double nlos_error(const RangingModel& model, double tau_max_ns)
{
    return nlos_error(model.poly, tau_max_ns);
}

/// Ordinary least-squares quadratic y = p2 x^2 + p1 x + p0. The regressor is
/// centered and scaled before solving the normal equations.
inline std::array<double, 3> fit_quadratic(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.empty())
        throw Error(ErrorCode::InvalidInput, "quadratic fit needs equal-length non-empty inputs");

    std::vector<double> distinct(x.begin(), x.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw Error(ErrorCode::DegenerateFit, "need at least 3 distinct tau_MAX values for a quadratic");

    const double n = static_cast<double>(x.size());
    const double m = stats::mean(x);
    double var = 0.0;
    for (double v : x)
        var += (v - m) * (v - m);
    const double s = std::sqrt(var / n);

    // Normal equations in u = (x - m) / s, unknowns ordered (a2, a1, a0).
    double su[5] = {0, 0, 0, 0, 0};
    double sy[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - m) / s;
        double up = 1.0;
        for (int k = 0; k < 5; ++k) {
            su[k] += up;
            if (k < 3)
                sy[k] += up * y[i];
            up *= u;
        }
    }
    double a[3][4] = {
        {su[4], su[3], su[2], sy[2]},
        {su[3], su[2], su[1], sy[1]},
        {su[2], su[1], su[0], sy[0]},
    };
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12 * n)
            throw Error(ErrorCode::DegenerateFit, "singular normal equations");
        for (int k = 0; k < 4; ++k)
            std::swap(a[col][k], a[pivot][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == col)
                continue;
            const double f = a[r][col] / a[col][col];
            for (int k = col; k < 4; ++k)
                a[r][k] -= f * a[col][k];
        }
    }
    const double a2 = a[0][3] / a[0][0];
    const double a1 = a[1][3] / a[1][1];
    const double a0 = a[2][3] / a[2][2];

    const double p2 = a2 / (s * s);
    const double p1 = a1 / s - 2.0 * a2 * m / (s * s);
    const double p0 = a2 * m * m / (s * s) - a1 * m / s + a0;
    return {p2, p1, p0};
}

/// Fit every model constant from a labeled feature table. The NLOS prior is
/// an input because it comes from deployment geometry, not from the data.
inline RangingModel fit(std::span<const FeatureRow> rows, double prior_nlos)
{
    std::vector<double> los_err;
    std::vector<double> los_rise;
    std::vector<double> nlos_err;
    std::vector<double> nlos_tau_max;
    std::vector<double> nlos_rise;
    for (const auto& r : rows) {
        const auto cls = r.link_class();
        const auto err = r.ranging_error_m();
        if (!cls || !err)
            throw Error(ErrorCode::InvalidInput, "record " + r.record_id + " lacks scenario or true distance");
        if (*cls == LinkClass::Los) {
            los_err.push_back(*err);
            los_rise.push_back(r.features.rise_time_ns());
        } else {
            nlos_err.push_back(*err);
            nlos_tau_max.push_back(r.features.max_excess_delay_ns());
            nlos_rise.push_back(r.features.rise_time_ns());
        }
    }
    if (los_err.size() < 2)
        throw Error(ErrorCode::InsufficientData, "fit needs at least 2 LOS samples");
    if (nlos_err.size() < 10)
        throw Error(ErrorCode::InsufficientData, "fit needs at least 10 NLOS samples");

    RangingModel model;
    model.prior_nlos = prior_nlos;
    model.mu_L_m = stats::mean(los_err);
    model.sigma_L_m = stats::stddev(los_err);

    model.poly = fit_quadratic(nlos_tau_max, nlos_err);
    std::vector<double> residual(nlos_err.size());
    for (std::size_t i = 0; i < nlos_err.size(); ++i)
        residual[i] = nlos_err[i] - nlos_error(model.poly, nlos_tau_max[i]);
    model.sigma_N_m = stats::stddev(residual);

    const double mean_rise_l = stats::mean(los_rise);
    const double mean_rise_n = stats::mean(nlos_rise);
    if (!(mean_rise_l > 0.0) || !(mean_rise_n > 0.0))
        throw Error(ErrorCode::DegenerateFit, "zero mean rise time; exponential rate undefined");
    model.lambda_L_per_ns = 1.0 / mean_rise_l;
    model.lambda_N_per_ns = 1.0 / mean_rise_n;

    if (!(model.sigma_L_m > 0.0) || !(model.sigma_N_m > 0.0))
        throw Error(ErrorCode::DegenerateFit, "zero residual spread");
    model.validate();
    return model;
}

/// p(NLOS | tau_RT) by Bayes' rule with exponential rise-time likelihoods.
/// Evaluated in the log domain so large rise times do not underflow.
inline double posterior_nlos(const RangingModel& model, double rise_time_ns)
{
    const double prior = model.prior_nlos;
    if (prior <= 0.0)
        return 0.0;
    if (prior >= 1.0)
        return 1.0;
    const double log_n = std::log(prior) + std::log(model.lambda_N_per_ns) - model.lambda_N_per_ns * rise_time_ns;
    const double log_l =
        std::log1p(-prior) + std::log(model.lambda_L_per_ns) - model.lambda_L_per_ns * rise_time_ns;
    return 1.0 / (1.0 + std::exp(log_l - log_n));
}

struct PointEstimate {
    double distance_m = 0.0;
    LinkClass decision = LinkClass::Los;
    double posterior_nlos = 0.0;
};

/// Hard decision: NLOS only when the posterior strictly exceeds 0.5.
inline PointEstimate point_estimate(const RangingModel& model, const ChannelFeatures& features)
{
    PointEstimate est;
    est.posterior_nlos = posterior_nlos(model, features.rise_time_ns());
    est.decision = est.posterior_nlos > 0.5 ? LinkClass::Nlos : LinkClass::Los;
    const double range = kMetersPerNs * features.toa_ns();
    est.distance_m = est.decision == LinkClass::Los ? range - model.mu_L_m
                                                    : range - nlos_error(model, features.max_excess_delay_ns());
    return est;
}

/// Two-component Gaussian mixture over the true distance.
struct RangeLikelihood {
    struct Component {
        double weight = 0.0;
        double mean_m = 0.0;
        double std_m = 1.0;
    };
    std::array<Component, 2> components{}; // LOS, NLOS

    double density(double distance_m) const
    {
        double total = 0.0;
        for (const auto& c : components) {
            if (c.weight == 0.0)
                continue;
            const double z = (distance_m - c.mean_m) / c.std_m;
            total += c.weight * std::exp(-0.5 * z * z) / (c.std_m * std::sqrt(2.0 * std::numbers::pi));
        }
        return total;
    }
};

inline RangeLikelihood range_likelihood(const RangingModel& model, const ChannelFeatures& features)
{
    const double p_nlos = posterior_nlos(model, features.rise_time_ns());
    const double range = kMetersPerNs * features.toa_ns();
    RangeLikelihood lh;
    lh.components[0] = {1.0 - p_nlos, range - model.mu_L_m, model.sigma_L_m};
    lh.components[1] = {p_nlos, range - nlos_error(model, features.max_excess_delay_ns()), model.sigma_N_m};
    return lh;
}

} // namespace tunnelrange
