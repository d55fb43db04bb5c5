// SPDX-License-Identifier: Apache-2.0
#include <tunnelrange/io.hpp>
#include <tunnelrange/tunnel_synth.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace tunnelrange;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("tunnelrange_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    auto out = io::open_output(p);
    out << text;
}

std::string header_line()
{
    io::DatasetManifest m;
    return io::manifest_text(m);
}

} // namespace

TEST(Numbers, RoundTripExactly)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        EXPECT_EQ(io::parse_number(io::format_number(v)), v);
    }
    EXPECT_EQ(io::format_number(-43.8), "-43.8");
    EXPECT_EQ(io::format_number(0.5e-9), "0.0000000005");
    EXPECT_EQ(io::format_number(3.0), "3");
    EXPECT_EQ(io::format_number(1.5e-52), "1.5e-52");
    EXPECT_EQ(io::parse_number(io::format_number(-4.9e-324)), -4.9e-324);
    EXPECT_EQ(io::parse_number(io::format_number(1.7e308)), 1.7e308);
    EXPECT_TRUE(std::isnan(io::parse_number("nan")));
    EXPECT_THROW(io::parse_number("1,5"), Error);
    EXPECT_THROW(io::parse_number("abc"), Error);
}

TEST(ComplexCsv, RoundTrip)
{
    const auto dir = scratch("complex");
    std::vector<Complex> v{{1.0, -2.5}, {0.0, 0.0}, {1e-7, 3.25}};
    io::write_complex_csv(dir / "a.csv", v);
    EXPECT_EQ(io::read_complex_csv(dir / "a.csv"), v);
    EXPECT_EQ(slurp(dir / "a.csv").substr(0, 12), "index,re,im\n");
}

TEST(ComplexCsv, RejectsOutOfOrderIndex)
{
    const auto dir = scratch("complex_bad");
    write_text(dir / "a.csv", "index,re,im\n0,1,0\n2,1,0\n");
    EXPECT_THROW(io::read_complex_csv(dir / "a.csv"), Error);
}

TEST(Manifest, EmptyEntryListIsValid)
{
    const auto dir = scratch("empty");
    write_text(dir / "manifest.jsonl", header_line());
    const auto m = io::load_manifest(dir / "manifest.jsonl");
    EXPECT_TRUE(m.entries.empty());
    EXPECT_EQ(m.config.num_points, 3001u);
}

TEST(Manifest, DuplicateIdIsNamed)
{
    const auto dir = scratch("dup");
    io::write_complex_csv(dir / "a.csv", std::vector<Complex>{{1.0, 0.0}});
    const std::string entry = R"({"record_id":"rec-7","tx_id":"tx1","rx_id":"rx1","cir_path":"a.csv","domain":"time"})";
    write_text(dir / "manifest.jsonl", header_line() + entry + "\n" + entry + "\n");
    try {
        io::load_manifest(dir / "manifest.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LoadError);
        EXPECT_NE(std::string(e.what()).find("rec-7"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    }
}

TEST(Manifest, MissingFileAndHalfLabelsAreNamed)
{
    const auto dir = scratch("missing");
    write_text(dir / "manifest.jsonl",
               header_line() + R"({"record_id":"ghost","tx_id":"t","rx_id":"r","cir_path":"nope.csv"})" "\n");
    try {
        io::load_manifest(dir / "manifest.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }

    io::write_complex_csv(dir / "a.csv", std::vector<Complex>{{1.0, 0.0}});
    write_text(dir / "manifest.jsonl",
               header_line() + R"({"record_id":"half","cir_path":"a.csv","scenario":"LOS"})" "\n");
    try {
        io::load_manifest(dir / "manifest.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("half"), std::string::npos);
    }
}

TEST(Manifest, MalformedLineIsLoadError)
{
    const auto dir = scratch("malformed");
    write_text(dir / "manifest.jsonl", header_line() + "{not json\n");
    try {
        io::load_manifest(dir / "manifest.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LoadError);
    }
}

TEST(Manifest, SimulatedDatasetRoundTripsByteIdentical)
{
    const auto dir = scratch("roundtrip");
    auto p = liu_profile();
    p.repetitions = {1, 0, 0, 1};
    p.rx_positions.resize(3);
    const auto recs = generate_campaign(p);
    io::write_dataset(dir, recs, p.sweep);

    const auto first = slurp(dir / "manifest.jsonl");
    const auto m = io::load_manifest(dir / "manifest.jsonl");
    io::write_manifest(dir / "again.jsonl", m);
    EXPECT_EQ(slurp(dir / "again.jsonl"), first);

    ASSERT_EQ(m.entries.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto back = io::load_record(m, m.entries[i]);
        EXPECT_EQ(back.record_id, recs[i].record_id);
        EXPECT_EQ(back.scenario, recs[i].scenario);
        EXPECT_EQ(back.true_distance_m, recs[i].true_distance_m);
        EXPECT_EQ(back.cir.taps, recs[i].cir.taps);
        EXPECT_DOUBLE_EQ(back.cir.delay_step_s, recs[i].cir.delay_step_s);
    }
}

TEST(Manifest, FrequencyDomainEntryIsTransformed)
{
    const auto dir = scratch("freq");
    SweepConfig cfg;
    cfg.window = WindowKind::None;
    std::vector<Complex> spectrum(cfg.num_points);
    for (std::size_t k = 0; k < cfg.num_points; ++k)
        spectrum[k] = std::polar(1.0, -2.0 * std::numbers::pi * cfg.frequency_at(k) * 30e-9);
    io::write_complex_csv(dir / "f.csv", spectrum);
    io::write_frequency_sidecar(dir / "f.csv", cfg);
    write_text(dir / "manifest.jsonl",
               header_line() + R"({"record_id":"f","cir_path":"f.csv","domain":"frequency"})" "\n");
    const auto m = io::load_manifest(dir / "manifest.jsonl");
    const auto rec = io::load_record(m, m.entries[0]);
    const auto peak = std::max_element(rec.cir.taps.begin(), rec.cir.taps.end(),
                                       [](Complex a, Complex b) { return std::norm(a) < std::norm(b); });
    EXPECT_EQ(peak - rec.cir.taps.begin(), 60);
}

TEST(FeatureTable, RoundTrip)
{
    const auto dir = scratch("features");
    FeatureTable rows(2);
    rows[0].record_id = "a";
    rows[0].scenario = Scenario::NlosWall;
    rows[0].true_distance_m = 12.25;
    rows[0].features = {31.5e-9, -40.1, -22.0, 40e-9, 60e-9, 12.3e-9, 7.5e-9, 5.25};
    rows[1].record_id = "b";
    rows[1].features = {3e-9, -30.0, -10.0, 4e-9, 1e-9, 0.5e-9, 0.0, 12.0};
    io::write_feature_table(dir / "f.csv", rows);
    const auto back = io::read_feature_table(dir / "f.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].scenario, Scenario::NlosWall);
    EXPECT_FALSE(back[1].scenario.has_value());
    EXPECT_FALSE(back[1].true_distance_m.has_value());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t a = 0; a < kNumFeatures; ++a)
            EXPECT_NEAR(feature_value(back[i].features, static_cast<Feature>(a)),
                        feature_value(rows[i].features, static_cast<Feature>(a)), 1e-12);
    EXPECT_EQ(io::feature_table_text(back), slurp(dir / "f.csv"));
    EXPECT_EQ(slurp(dir / "f.csv").substr(0, io::kFeatureHeader.size()), io::kFeatureHeader);
}

TEST(ModelFile, RoundTripAndValidation)
{
    const auto dir = scratch("model");
    const auto m = reference_tunnel_model();
    io::write_model(dir / "model.json", m);
    const auto back = io::read_model(dir / "model.json");
    EXPECT_EQ(back.poly, m.poly);
    EXPECT_EQ(back.sigma_N_m, m.sigma_N_m);
    EXPECT_EQ(back.prior_nlos, m.prior_nlos);

    write_text(dir / "bad.json", R"({"mu_L_m":0,"sigma_L_m":-1,"sigma_N_m":1,"poly":[0,0,0],)"
                                 R"("lambda_L_per_ns":1,"lambda_N_per_ns":1,"prior_nlos":0.2})");
    EXPECT_THROW(io::read_model(dir / "bad.json"), Error);
}

TEST(ProfileFile, OverridesKeepDefaults)
{
    const auto dir = scratch("profile");
    write_text(dir / "p.json", R"({"base":"liu","lambda_N_per_ns":0.333,"seed":5})");
    const auto p = io::load_profile((dir / "p.json").string());
    EXPECT_DOUBLE_EQ(p.lambda_N_per_ns, 0.333);
    EXPECT_EQ(p.seed, 5u);
    EXPECT_EQ(p.rx_positions.size(), 30u);

    const auto full = io::to_json(liu_profile());
    const auto again = io::profile_from_json(full);
    EXPECT_EQ(io::to_json(again).dump(), full.dump());
}
