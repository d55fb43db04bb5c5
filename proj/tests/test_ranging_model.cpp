// SPDX-License-Identifier: Apache-2.0
#include <tunnelrange/ranging_model.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace tunnelrange;

namespace {

ChannelFeatures features(double toa_ns, double max_excess_ns, double rise_ns)
{
    ChannelFeatures f;
    f.toa_s = toa_ns * 1e-9;
    f.max_excess_delay_s = max_excess_ns * 1e-9;
    f.rise_time_s = rise_ns * 1e-9;
    return f;
}

// Hand evaluation of Bayes' rule with exponential likelihoods.
double hand_posterior(double ll, double ln, double prior, double t)
{
    const double pn = prior * ln * std::exp(-ln * t);
    const double pl = (1.0 - prior) * ll * std::exp(-ll * t);
    return pn / (pn + pl);
}

} // namespace

TEST(NlosError, PolynomialValues)
{
    const auto m = reference_tunnel_model();
    EXPECT_NEAR(nlos_error(m, 60.0), 2.852, 1e-9);
    EXPECT_NEAR(nlos_error(m, 0.0), 11.72, 1e-9);
    EXPECT_NEAR(nlos_error(m, 40.0), 5.112, 1e-9);
}

TEST(Posterior, HandEvaluatedValues)
{
    auto m = reference_tunnel_model();
    m.prior_nlos = 0.5;
    EXPECT_NEAR(posterior_nlos(m, 20.0), 0.9751, 1e-4);
    EXPECT_NEAR(posterior_nlos(m, 2.0), 0.2739, 1e-4);
    for (double t : {0.0, 0.5, 3.0, 7.7, 13.0, 40.0})
        EXPECT_NEAR(posterior_nlos(m, t), hand_posterior(0.333, 0.075, 0.5, t), 1e-12) << t;
}

TEST(Posterior, DegeneratePriors)
{
    auto m = reference_tunnel_model();
    for (double t : {0.0, 2.0, 20.0, 1e4}) {
        m.prior_nlos = 0.0;
        EXPECT_EQ(posterior_nlos(m, t), 0.0);
        m.prior_nlos = 1.0;
        EXPECT_EQ(posterior_nlos(m, t), 1.0);
    }
}

TEST(Posterior, LargeRiseTimeDoesNotUnderflow)
{
    const auto m = reference_tunnel_model();
    EXPECT_NEAR(posterior_nlos(m, 5000.0), 1.0, 1e-12);
}

TEST(PointEstimate, Branches)
{
    auto m = reference_tunnel_model();
    // Rise time 0 favors LOS.
    const auto los = point_estimate(m, features(30.0, 60.0, 0.0));
    EXPECT_EQ(los.decision, LinkClass::Los);
    EXPECT_NEAR(los.distance_m, 9.27, 1e-9);

    const auto nlos = point_estimate(m, features(30.0, 60.0, 60.0));
    EXPECT_EQ(nlos.decision, LinkClass::Nlos);
    EXPECT_NEAR(nlos.distance_m, 6.148, 1e-9);
}

TEST(PointEstimate, HalfPosteriorChoosesLos)
{
    auto m = reference_tunnel_model();
    m.lambda_N_per_ns = m.lambda_L_per_ns;
    m.prior_nlos = 0.5;
    const auto est = point_estimate(m, features(30.0, 60.0, 4.0));
    EXPECT_DOUBLE_EQ(est.posterior_nlos, 0.5);
    EXPECT_EQ(est.decision, LinkClass::Los);
}

TEST(Likelihood, WeightsAndNormalization)
{
    const auto m = reference_tunnel_model();
    for (double rise : {0.0, 3.0, 12.0, 50.0}) {
        const auto lh = range_likelihood(m, features(30.0, 60.0, rise));
        EXPECT_NEAR(lh.components[0].weight + lh.components[1].weight, 1.0, 1e-12);
        // Composite Simpson over +-12 sigma of the wider component.
        const double lo = -30.0, hi = 50.0;
        const int n = 80000;
        const double h = (hi - lo) / n;
        double s = lh.density(lo) + lh.density(hi);
        for (int i = 1; i < n; ++i)
            s += (i % 2 ? 4.0 : 2.0) * lh.density(lo + i * h);
        EXPECT_NEAR(s * h / 3.0, 1.0, 1e-6) << rise;
    }
}

TEST(Likelihood, PureLosPeak)
{
    auto m = reference_tunnel_model();
    m.prior_nlos = 0.0;
    const auto lh = range_likelihood(m, features(30.0, 60.0, 1.0));
    EXPECT_EQ(lh.components[1].weight, 0.0);
    EXPECT_NEAR(lh.components[0].mean_m, 9.27, 1e-12);
    EXPECT_NEAR(lh.density(9.27), 2.4934, 1e-4);
    EXPECT_NEAR(lh.density(9.27), 1.0 / (0.16 * std::sqrt(2.0 * std::numbers::pi)), 1e-12);
}

TEST(Likelihood, EvenPosteriorIsBimodal)
{
    auto m = reference_tunnel_model();
    m.lambda_N_per_ns = m.lambda_L_per_ns;
    m.prior_nlos = 0.5;
    const auto lh = range_likelihood(m, features(30.0, 60.0, 2.0));
    ASSERT_DOUBLE_EQ(lh.components[1].weight, 0.5);
    std::vector<double> modes;
    const double step = 0.001;
    for (double d = 0.0; d < 20.0; d += step) {
        const double c = lh.density(d);
        if (c > lh.density(d - step) && c >= lh.density(d + step))
            modes.push_back(d);
    }
    ASSERT_EQ(modes.size(), 2u);
    EXPECT_NEAR(modes[0], 6.148, 0.05);
    EXPECT_NEAR(modes[1], 9.27, 0.01);
}

TEST(Fit, NoiselessQuadraticIsExact)
{
    const std::array<double, 3> truth{0.00087, -0.2, 11.72};
    std::vector<double> x, y;
    for (double t = 13.0; t <= 120.0; t += 0.5) {
        x.push_back(t);
        y.push_back(nlos_error(truth, t));
    }
    const auto p = fit_quadratic(x, y);
    for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(p[k], truth[k], 1e-9) << k;
}

TEST(Fit, TooFewDistinctRegressors)
{
    const std::vector<double> x{10, 10, 20, 20}, y{1, 2, 3, 4};
    try {
        fit_quadratic(x, y);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateFit);
    }
}

TEST(Fit, RecoversConstantsFromTable)
{
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> dist(5.0, 40.0), tau(15.0, 120.0);
    std::exponential_distribution<double> rise_l(0.333), rise_n(0.075);
    const std::array<double, 3> poly{0.00087, -0.2, 11.72};
    FeatureTable rows;
    for (int i = 0; i < 4000; ++i) {
        const bool nlos = i % 4 == 3;
        FeatureRow r;
        r.record_id = "r" + std::to_string(i);
        r.scenario = nlos ? Scenario::NlosWall : Scenario::Los;
        r.true_distance_m = dist(rng);
        const double t = tau(rng);
        const double err = nlos ? nlos_error(poly, t) + 1.61 * g(rng) : -0.27 + 0.16 * g(rng);
        r.features.toa_s = (*r.true_distance_m + err) / kSpeedOfLightMps;
        r.features.max_excess_delay_s = t * 1e-9;
        r.features.rise_time_s = (nlos ? rise_n(rng) : rise_l(rng)) * 1e-9;
        rows.push_back(r);
    }
    const auto m = fit(rows, 0.25);
    EXPECT_NEAR(m.mu_L_m, -0.27, 0.02);
    EXPECT_NEAR(m.sigma_L_m, 0.16, 0.016);
    EXPECT_NEAR(m.sigma_N_m, 1.61, 0.16);
    EXPECT_NEAR(m.lambda_L_per_ns, 0.333, 0.0333);
    EXPECT_NEAR(m.lambda_N_per_ns, 0.075, 0.0075);
    EXPECT_DOUBLE_EQ(m.prior_nlos, 0.25);
    for (double t = 20.0; t <= 120.0; t += 5.0)
        EXPECT_NEAR(nlos_error(m, t), nlos_error(poly, t), 0.4) << t;
}

TEST(Fit, NeedsBothClasses)
{
    FeatureTable rows(3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].scenario = Scenario::Los;
        rows[i].true_distance_m = 5.0 + i;
        rows[i].features.rise_time_s = 1e-9;
    }
    try {
        fit(rows, 0.25);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
    }
}

TEST(Model, Validation)
{
    auto m = reference_tunnel_model();
    EXPECT_NO_THROW(m.validate());
    m.sigma_L_m = 0.0;
    EXPECT_THROW(m.validate(), Error);
    m = reference_tunnel_model();
    m.prior_nlos = 1.5;
    EXPECT_THROW(m.validate(), Error);
}
