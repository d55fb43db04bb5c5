// SPDX-License-Identifier: Apache-2.0
#include <tunnelrange/pipeline.hpp>
#include <tunnelrange/tunnel_synth.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace tunnelrange;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("tunnelrange_pipe_" + name);
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

SynthProfile reduced()
{
    auto p = liu_profile();
    p.repetitions = {1, 1, 1, 3};
    return p;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(TUNNELRANGE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Histogram, AlignedBinsIncludeEmpty)
{
    const std::vector<double> v{0.1, 0.2, 0.9, -0.3};
    const auto h = histogram(v, 0.25);
    ASSERT_EQ(h.size(), 6u); // [-0.5, 1.0)
    EXPECT_DOUBLE_EQ(h[0].first, -0.375);
    EXPECT_EQ(h[0].second, 1u);
    EXPECT_EQ(h[2].second, 2u);
    EXPECT_EQ(h[3].second, 0u);
    EXPECT_EQ(h[5].second, 1u);
}

TEST(RunConfig, JsonRoundTripAndValidation)
{
    RunConfig c;
    c.prior_nlos = 0.4;
    c.output_dir = "x/y";
    const auto back = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    io::Json bad = to_json(c);
    bad["prior_nlos"] = 1.5;
    EXPECT_THROW(run_config_from_json(bad), Error);
    bad = to_json(c);
    bad["grid_step_db"] = 0.0;
    EXPECT_THROW(run_config_from_json(bad), Error);
}

TEST(Pipeline, SmokeRunWritesValidModel)
{
    const auto dir = scratch("smoke");
    RunConfig c;
    c.output_dir = dir;
    const auto recs = generate_campaign(reduced());
    const auto res = run_pipeline(recs, c);
    ASSERT_EQ(res.status, RunStatus::Ok) << res.message;
    ASSERT_TRUE(fs::exists(dir / "model.json"));
    EXPECT_NO_THROW(io::read_model(dir / "model.json").validate());
    for (const char* f : {"features.csv", "threshold_curve.csv", "classifications.csv", "likelihood_grids.csv",
                          "summary.json", "diagnostics/overlap.csv", "diagnostics/diagnostics.json",
                          "plots/error_hist_nlos.csv", "plots/likelihood_example.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;

    // Emitted tables parse back through the loaders.
    EXPECT_EQ(io::read_feature_table(dir / "features.csv").size(), recs.size());
    const auto curve = io::read_threshold_curve(dir / "threshold_curve.csv");
    EXPECT_EQ(curve.thresholds.size(), 251u);
    const auto summary = io::read_json_file(dir / "summary.json");
    EXPECT_EQ(summary["status"], "OK");
    EXPECT_EQ(summary["histogram_bin_m"], 0.25);
    EXPECT_EQ(summary["seed"], c.seed);
}

TEST(Pipeline, ThresholdAboveAllSignalsIsMdAll)
{
    const auto dir = scratch("mdall");
    RunConfig c;
    c.output_dir = dir;
    c.threshold_dbm = 10.0;
    const auto res = run_pipeline(generate_campaign(reduced()), c);
    EXPECT_EQ(res.status, RunStatus::AllMissed);
    EXPECT_FALSE(res.model.has_value());
    EXPECT_FALSE(fs::exists(dir / "model.json"));
    const auto summary = io::read_json_file(dir / "summary.json");
    EXPECT_EQ(summary["status"], "MD_ALL");
    EXPECT_EQ(summary["md_rate"], 1.0);
    EXPECT_EQ(summary["exit_code"], 3);
}

TEST(Pipeline, RepeatRunIsByteIdentical)
{
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto recs = generate_campaign(reduced());
    RunConfig c;
    c.output_dir = a;
    run_pipeline(recs, c);
    c.output_dir = b;
    run_pipeline(recs, c);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file())
            continue;
        const auto rel = fs::relative(e.path(), a);
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    }
    EXPECT_GT(files, 15u);
}

TEST(Cli, ExitCodes)
{
    const auto dir = scratch("cli");
    const auto profile = dir / "profile.json";
    {
        std::ofstream out(profile);
        out << R"({"base":"liu","repetitions":{"LOS":1,"NLOS-M":0,"NLOS-P":0,"NLOS-W":1}})";
    }
    EXPECT_EQ(run_cli("simulate --profile " + profile.string() + " --out-dir " + (dir / "data").string()), 0);
    const auto manifest = dir / "data" / "manifest.jsonl";
    ASSERT_TRUE(fs::exists(manifest));

    EXPECT_EQ(run_cli("features --manifest " + manifest.string() + " --out " + (dir / "f.csv").string()), 0);
    EXPECT_EQ(run_cli("features --manifest " + manifest.string() + " --threshold-dbm 20 --out " +
                      (dir / "g.csv").string()),
              3);
    EXPECT_EQ(run_cli("fit --features " + (dir / "f.csv").string() + " --out " + (dir / "m.json").string()), 0);
    EXPECT_EQ(run_cli("classify --model " + (dir / "m.json").string() + " --features " + (dir / "f.csv").string()), 0);
    EXPECT_EQ(run_cli("range-likelihood --model " + (dir / "m.json").string() + " --features " +
                      (dir / "f.csv").string() + " --record LOS-tx1-rx01-00 --out " + (dir / "lk.csv").string()),
              0);
    EXPECT_EQ(slurp(dir / "lk.csv").substr(0, 10), "d_m,densit");
    EXPECT_EQ(run_cli("tune-threshold --manifest " + manifest.string() + " --min-dbm -60 --max-dbm -30 --step-db 1"),
              0);
    EXPECT_EQ(run_cli("analyze-features --features " + (dir / "f.csv").string() + " --out-dir " +
                      (dir / "diag").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "diag" / "corr_pairwise.csv"));

    // Only LOS rows: NLOS fit cannot proceed.
    {
        std::ifstream in(dir / "f.csv");
        std::ofstream out(dir / "los.csv");
        std::string line;
        while (std::getline(in, line))
            if (line.find("NLOS-W") == std::string::npos)
                out << line << '\n';
    }
    EXPECT_EQ(run_cli("fit --features " + (dir / "los.csv").string()), 4);
    EXPECT_EQ(run_cli("fit --features " + (dir / "missing.csv").string()), 2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
}
