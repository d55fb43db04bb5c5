// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "error.hpp"
#include "feature_table.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tunnelrange {

namespace stats {

inline double mean(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v;
    return s / static_cast<double>(x.size());
}

/// Sample (n - 1) standard deviation.
inline double stddev(std::span<const double> x)
{
    const double m = mean(x);
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

} // namespace stats

/// Class-separation metric sqrt(sigma_L sigma_N) / |mu_N - mu_L|. Smaller
/// means the LOS and NLOS distributions overlap less.
inline double overlap_metric(std::span<const double> los, std::span<const double> nlos)
{
    if (los.size() < 2 || nlos.size() < 2)
        throw Error(ErrorCode::InsufficientData, "overlap metric needs >= 2 samples per class");
    const double mu_l = stats::mean(los);
    const double mu_n = stats::mean(nlos);
    if (mu_l == mu_n)
        throw Error(ErrorCode::UndefinedOverlap, "class means are equal");
    return std::sqrt(stats::stddev(los) * stats::stddev(nlos)) / std::abs(mu_n - mu_l);
}

/// Pearson sample correlation.
inline double correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw Error(ErrorCode::InvalidInput, "correlation inputs differ in length");
    if (x.size() < 2)
        throw Error(ErrorCode::InsufficientData, "correlation needs >= 2 samples");
    const double mx = stats::mean(x);
    const double my = stats::mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw Error(ErrorCode::UndefinedCorrelation, "zero variance input");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

/// Per-feature separation and correlation metrics. Entries that cannot be
/// computed (zero variance, equal means) are empty.
struct FeatureDiagnostics {
    std::array<std::optional<double>, kNumFeatures> overlap{};
    std::array<std::optional<double>, kNumFeatures> corr_distance{};
    std::array<std::optional<double>, kNumFeatures> corr_nlos_error{};
    std::array<std::array<std::optional<double>, kNumFeatures>, kNumFeatures> pairwise{};
    std::size_t los_count = 0;
    std::size_t nlos_count = 0;
};

namespace detail {

template <typename F>
std::optional<double> try_metric(F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidInput)
            throw;
        return std::nullopt;
    }
}

inline std::vector<double> column(std::span<const FeatureRow> rows, Feature which)
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(feature_value(r.features, which));
    return out;
}

} // namespace detail

/// Diagnostics over a labeled table. nlos_errors holds nu_N for the NLOS
/// rows in table order. Overlap uses the class split, distance and pairwise
/// correlations use all rows, error correlation uses NLOS rows only.
inline FeatureDiagnostics build_diagnostics(std::span<const FeatureRow> rows, std::span<const double> nlos_errors)
{
    std::vector<FeatureRow> los_rows;
    std::vector<FeatureRow> nlos_rows;
    std::vector<double> distances;
    for (const auto& r : rows) {
        const auto cls = r.link_class();
        if (!cls || !r.true_distance_m)
            throw Error(ErrorCode::InvalidInput, "record " + r.record_id + " lacks scenario or true distance");
        (*cls == LinkClass::Los ? los_rows : nlos_rows).push_back(r);
        distances.push_back(*r.true_distance_m);
    }
    if (los_rows.empty() || nlos_rows.empty())
        throw Error(ErrorCode::InsufficientData, "diagnostics need both LOS and NLOS rows");
    if (nlos_errors.size() != nlos_rows.size())
        throw Error(ErrorCode::InvalidInput, "NLOS error vector is not aligned with NLOS rows");

    FeatureDiagnostics diag;
    diag.los_count = los_rows.size();
    diag.nlos_count = nlos_rows.size();

    std::array<std::vector<double>, kNumFeatures> all_cols;
    for (std::size_t a = 0; a < kNumFeatures; ++a) {
        const auto which = static_cast<Feature>(a);
        all_cols[a] = detail::column(rows, which);
        const auto los_col = detail::column(los_rows, which);
        const auto nlos_col = detail::column(nlos_rows, which);
        diag.overlap[a] = detail::try_metric([&] { return overlap_metric(los_col, nlos_col); });
        diag.corr_distance[a] = detail::try_metric([&] { return correlation(all_cols[a], distances); });
        diag.corr_nlos_error[a] = detail::try_metric([&] { return correlation(nlos_col, nlos_errors); });
    }
    for (std::size_t a = 0; a < kNumFeatures; ++a)
        for (std::size_t b = a; b < kNumFeatures; ++b) {
            auto r = detail::try_metric([&] { return correlation(all_cols[a], all_cols[b]); });
            if (a == b && r)
                r = 1.0;
            diag.pairwise[a][b] = r;
            diag.pairwise[b][a] = r;
        }
    return diag;
}

/// Same as above with nu_N = c * tau_1 - d taken from the table itself.
inline FeatureDiagnostics build_diagnostics(std::span<const FeatureRow> rows)
{
    std::vector<double> nlos_errors;
    for (const auto& r : rows)
        if (r.link_class() == LinkClass::Nlos && r.ranging_error_m())
            nlos_errors.push_back(*r.ranging_error_m());
    return build_diagnostics(rows, nlos_errors);
}

} // namespace tunnelrange
