// SPDX-License-Identifier: Apache-2.0
#include <tunnelrange/channel_features.hpp>
#include <tunnelrange/feature_selection.hpp>
#include <tunnelrange/tunnel_synth.hpp>

#include <gtest/gtest.h>

#include <cstring>

using namespace tunnelrange;

namespace {

SynthProfile small_liu()
{
    auto p = liu_profile();
    p.repetitions = {1, 1, 1, 3};
    return p;
}

} // namespace

TEST(Profiles, DefaultsValidate)
{
    EXPECT_NO_THROW(liu_profile().validate());
    EXPECT_NO_THROW(kiruna_profile().validate());
    EXPECT_EQ(liu_profile().record_count(), 3600u);
}

TEST(Profiles, RejectsNegativeNlosBias)
{
    auto p = liu_profile();
    p.nlos_poly = {0.0, -0.2, 5.0}; // negative past 25 ns
    try {
        p.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidProfile);
    }
}

TEST(Profiles, RejectsWindowOverflow)
{
    auto p = liu_profile();
    p.rx_positions.push_back({400.0, 1.0});
    EXPECT_THROW(p.validate(), Error);
}

TEST(Generator, SinglePathGeometry)
{
    auto p = liu_profile();
    p.tx_positions = {{0.0, 0.0}};
    p.rx_positions = {{9.0, 0.0}};
    p.repetitions = {1, 0, 0, 0};
    p.multipath = false;
    p.add_noise = false;
    p.los_bias_m = 0.0;
    p.los_sigma_m = 1e-9;
    p.shadowing_db = 0.0;
    const auto recs = generate_campaign(p);
    ASSERT_EQ(recs.size(), 1u);
    const auto f = extract_features(compute_pdp(recs[0].cir, -43.8), recs[0].cir);
    EXPECT_NEAR(f.toa_ns(), 30.0, 0.5);
    EXPECT_DOUBLE_EQ(f.max_excess_delay_s, 0.0);
    EXPECT_DOUBLE_EQ(f.rise_time_s, 0.0);
}

TEST(Generator, SameSeedSameBytes)
{
    const auto p = small_liu();
    const auto a = generate_campaign(p);
    const auto b = generate_campaign(p);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].record_id, b[i].record_id);
        ASSERT_EQ(a[i].cir.taps.size(), b[i].cir.taps.size());
        EXPECT_EQ(std::memcmp(a[i].cir.taps.data(), b[i].cir.taps.data(), a[i].cir.taps.size() * sizeof(Complex)), 0);
    }
    auto q = p;
    q.seed += 1;
    const auto c = generate_campaign(q);
    EXPECT_NE(std::memcmp(a[0].cir.taps.data(), c[0].cir.taps.data(), a[0].cir.taps.size() * sizeof(Complex)), 0);
}

TEST(Generator, OrderAndIds)
{
    const auto recs = generate_campaign(small_liu());
    ASSERT_EQ(recs.size(), 3u * 30u * 6u);
    EXPECT_EQ(recs.front().record_id, "LOS-tx1-rx01-00");
    EXPECT_EQ(recs.back().record_id, "NLOS-W-tx3-rx30-02");
    EXPECT_EQ(recs.back().tx_id, "tx3");
    EXPECT_EQ(recs.back().rx_id, "rx30");
}

TEST(Generator, TruthMatchesExtractedFeatures)
{
    const auto recs = generate_campaign_with_truth(small_liu());
    for (const auto& r : recs) {
        const auto f = extract_features(compute_pdp(r.record.cir, -43.8), r.record.cir);
        EXPECT_NEAR(f.rise_time_ns(), r.truth.rise_time_ns, 1e-9) << r.record.record_id;
        EXPECT_NEAR(f.max_excess_delay_ns(), r.truth.max_excess_ns, 1e-9) << r.record.record_id;
        EXPECT_NEAR(kSpeedOfLightMps * f.toa_s - *r.record.true_distance_m, r.truth.ranging_error_m, 1e-9);
    }
}

TEST(Generator, DefaultProfileMeetsTargets)
{
    const auto p = liu_profile();
    const auto recs = generate_campaign(p);
    const auto report = verify_profile(recs, p);
    for (const auto& c : report.checks)
        EXPECT_TRUE(c.pass) << c.name << ": " << c.measured << " vs " << c.target;
    EXPECT_EQ(report.missed_detections, 0u);
    ASSERT_TRUE(report.rise_time_overlap.has_value());
    EXPECT_GE(*report.rise_time_overlap, 0.4);
    EXPECT_LE(*report.rise_time_overlap, 0.8);

    // NLOS error spread before mitigation, and pooled soft obstructions stay LOS-like.
    std::vector<double> nlos, metal, person;
    for (const auto& r : recs) {
        const auto f = extract_features(compute_pdp(r.cir, -43.8), r.cir);
        const double err = kSpeedOfLightMps * f.toa_s - *r.true_distance_m;
        if (*r.scenario == Scenario::NlosWall)
            nlos.push_back(err);
        else if (*r.scenario == Scenario::NlosMetal)
            metal.push_back(err);
        else if (*r.scenario == Scenario::NlosPerson)
            person.push_back(err);
    }
    ASSERT_EQ(nlos.size(), 900u);
    EXPECT_GE(stats::stddev(nlos), 2.7);
    EXPECT_LE(stats::stddev(nlos), 3.7);
    EXPECT_LT(std::abs(stats::mean(metal)), 0.5);
    EXPECT_LT(std::abs(stats::mean(person)), 0.5);
}

TEST(Generator, EqualRatesOverlapHeavily)
{
    auto p = small_liu();
    p.lambda_N_per_ns = p.lambda_L_per_ns;
    const auto report = verify_profile(generate_campaign(p), p);
    ASSERT_TRUE(report.rise_time_overlap.has_value());
    EXPECT_GT(*report.rise_time_overlap, 2.0);
}

TEST(Generator, NoiseOnlyIsAllMissed)
{
    auto p = small_liu();
    p.noise_only = true;
    const auto recs = generate_campaign(p);
    const auto report = verify_profile(recs, p, -43.8);
    EXPECT_EQ(report.missed_detections, recs.size());
    EXPECT_DOUBLE_EQ(report.md_rate(), 1.0);
}

TEST(Generator, KirunaProfileRuns)
{
    const auto p = kiruna_profile();
    const auto recs = generate_campaign(p);
    EXPECT_EQ(recs.size(), 80u);
    EXPECT_NEAR(recs.front().cir.delay_step_s, 2e-9, 1e-18);
    const auto report = verify_profile(recs, p);
    EXPECT_EQ(report.missed_detections, 0u);
}

TEST(Generator, TwoClusterOptionCentersErrors)
{
    auto p = small_liu();
    p.nlos_two_cluster = true;
    p.repetitions = {0, 0, 0, 10};
    const auto recs = generate_campaign_with_truth(p);
    std::size_t near4 = 0, near10 = 0;
    for (const auto& r : recs) {
        const double e = r.truth.ranging_error_m;
        near4 += std::abs(e - 4.0) < 5.0 && e < 7.0;
        near10 += e >= 7.0;
    }
    EXPECT_GT(near4, recs.size() / 3);
    EXPECT_GT(near10, recs.size() / 3);
}
