// SPDX-License-Identifier: Apache-2.0
// Command-line front end: simulate, per-stage commands, and run-all.

#include <tunnelrange/tunnelrange.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tunnelrange;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

RunConfig load_run_config(const Globals& g)
{
    RunConfig c = g.config_path.empty() ? RunConfig{} : run_config_from_json(io::read_json_file(g.config_path));
    if (g.seed)
        c.seed = *g.seed;
    return c;
}

std::vector<SweepRecord> load_records(const io::DatasetManifest& m)
{
    std::vector<SweepRecord> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries)
        out.push_back(io::load_record(m, e));
    return out;
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    auto f = io::open_output(out_path);
    f << text;
}

int cmd_simulate(const Globals& g, const std::string& profile_name, const std::string& out_dir)
{
    auto profile = io::load_profile(profile_name);
    if (g.seed)
        profile.seed = *g.seed;
    const auto records = generate_campaign(profile);
    io::write_dataset(out_dir, records, profile.sweep);
    io::write_json_file(fs::path(out_dir) / "profile.json", io::to_json(profile));
    std::cout << records.size() << " records written to " << out_dir << '\n';
    return 0;
}

int cmd_features(const Globals& g, const std::string& manifest, std::optional<double> threshold, const std::string& out)
{
    auto config = load_run_config(g);
    if (threshold)
        config.threshold_dbm = *threshold;
    const auto m = io::load_manifest(manifest);
    const auto records = load_records(m);
    FeatureOptions options;
    options.kurtosis_on_thresholded = config.kurtosis_on_thresholded;
    const auto ex = extract_feature_table(records, config.threshold_dbm, options, m.config.reference_power_mw);
    emit(out, io::feature_table_text(ex.rows));
    for (const auto& id : ex.missed)
        std::cerr << "missed detection: " << id << '\n';
    if (!records.empty() && ex.rows.empty()) {
        std::cerr << "MD_ALL: no record crossed " << io::format_number(config.threshold_dbm) << " dBm\n";
        return static_cast<int>(RunStatus::AllMissed);
    }
    return 0;
}

struct TuneArgs {
    std::string manifest;
    std::optional<double> min_dbm, max_dbm, step_db, fa_guard_ns;
    bool all_records = false;
    std::string out;
};

int cmd_tune(const Globals& g, const TuneArgs& a)
{
    const auto config = load_run_config(g);
    const auto m = io::load_manifest(a.manifest);
    const auto all = load_records(m);
    const auto records = a.all_records ? std::vector<SweepRecord>(all) : tuning_records(all);
    const auto grid = make_threshold_grid(a.min_dbm.value_or(config.grid_min_dbm), a.max_dbm.value_or(config.grid_max_dbm),
                                          a.step_db.value_or(config.grid_step_db));
    const double guard_s = a.fa_guard_ns.value_or(config.fa_guard_ns) * kSecondsPerNs;
    const auto curve = sweep_thresholds(records, grid, guard_s, m.config.reference_power_mw);
    if (a.out.empty()) {
        std::cout << io::threshold_curve_text(curve);
    } else {
        emit(a.out, io::threshold_curve_text(curve));
    }
    std::cout << "selected_dbm," << io::format_number(curve.selected) << '\n';
    try {
        const auto noise = estimate_noise_stats(records, config.noise_guard_ns * kSecondsPerNs, m.config.reference_power_mw);
        std::cout << "noise_mean_dbm," << io::format_number(noise.mean_dbm) << '\n'
                  << "noise_std_db," << io::format_number(noise.std_db) << '\n'
                  << "k," << io::format_number(noise.sigma_multiple(curve.selected)) << '\n';
    } catch (const Error& e) {
        std::cerr << "noise statistics unavailable: " << e.what() << '\n';
    }
    return 0;
}

int cmd_analyze(const std::string& features, const std::string& out_dir)
{
    const auto rows = io::read_feature_table(features);
    FeatureTable labeled;
    for (const auto& r : rows)
        if (r.link_class() && r.true_distance_m)
            labeled.push_back(r);
    const auto diag = build_diagnostics(labeled);
    write_diagnostics(out_dir, diag);
    std::cout << io::read_json_file(fs::path(out_dir) / "diagnostics.json").dump(2) << '\n';
    return 0;
}

int cmd_fit(const Globals& g, const std::string& features, const std::string& out, std::optional<double> prior)
{
    const auto config = load_run_config(g);
    const auto rows = io::read_feature_table(features);
    FeatureTable labeled;
    for (const auto& r : rows)
        if (r.link_class() && r.true_distance_m)
            labeled.push_back(r);
    const auto model = fit(labeled, prior.value_or(config.prior_nlos));
    if (out.empty())
        std::cout << io::to_json(model).dump(2) << '\n';
    else
        io::write_model(out, model);
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& features, const std::string& out)
{
    const auto model = io::read_model(model_path);
    const auto rows = io::read_feature_table(features);
    emit(out, classification_text(model, rows));
    return 0;
}

struct LikelihoodArgs {
    std::string model;
    std::string features;
    std::string record;
    std::optional<double> grid_min, grid_max, grid_step;
    std::string out;
};

int cmd_likelihood(const Globals& g, const LikelihoodArgs& a)
{
    const auto config = load_run_config(g);
    const auto model = io::read_model(a.model);
    const auto rows = io::read_feature_table(a.features);
    const auto grid = distance_grid(a.grid_min.value_or(config.likelihood_min_m), a.grid_max.value_or(config.likelihood_max_m),
                                    a.grid_step.value_or(config.likelihood_step_m));
    if (!a.record.empty()) {
        for (const auto& r : rows)
            if (r.record_id == a.record) {
                emit(a.out, likelihood_grid_text(range_likelihood(model, r.features), grid));
                return 0;
            }
        throw Error(ErrorCode::InvalidInput, "record '" + a.record + "' not in feature table");
    }
    std::string text = "record_id,d_m,density\n";
    for (const auto& r : rows) {
        const auto lh = range_likelihood(model, r.features);
        for (double d : grid)
            text += r.record_id + ',' + io::format_number(d) + ',' + io::format_number(lh.density(d)) + '\n';
    }
    emit(a.out, text);
    return 0;
}

struct RunAllArgs {
    std::string manifest;
    std::string profile;
    std::string out_dir;
    bool write_dataset = false;
};

int cmd_run_all(const Globals& g, const RunAllArgs& a)
{
    auto config = load_run_config(g);
    if (!a.out_dir.empty())
        config.output_dir = a.out_dir;
    std::vector<SweepRecord> records;
    SweepConfig sweep;
    if (!a.manifest.empty()) {
        const auto m = io::load_manifest(a.manifest);
        records = load_records(m);
        sweep = m.config;
    } else {
        auto profile = io::load_profile(a.profile.empty() ? "liu" : a.profile);
        profile.seed = config.seed;
        records = generate_campaign(profile);
        sweep = profile.sweep;
        if (a.write_dataset)
            io::write_dataset(config.output_dir / "dataset", records, sweep);
        io::write_json_file(config.output_dir / "profile.json", io::to_json(profile));
    }
    const auto result = run_pipeline(records, config, sweep);
    std::cout << "status " << to_string(result.status) << '\n';
    if (!result.message.empty())
        std::cerr << result.message << '\n';
    return static_cast<int>(result.status);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UWB tunnel TOA ranging toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Globals g;
    app.add_option("--config", g.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Random seed (overrides config and profile)");

    std::string profile = "liu";
    std::string out_dir;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic campaign as manifest plus CIR files");
    simulate->add_option("--profile", profile, "liu, kiruna, or a profile JSON file");
    simulate->add_option("--out-dir", out_dir, "Output directory")->required();

    std::string manifest;
    std::optional<double> threshold;
    std::string out;
    auto* features = app.add_subcommand("features", "Extract channel features from a manifest");
    features->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    features->add_option("--threshold-dbm", threshold, "Detection threshold");
    features->add_option("--out", out, "Feature CSV (default: stdout)");

    TuneArgs tune;
    auto* tune_cmd = app.add_subcommand("tune-threshold", "Sweep FA/MD rates and select a threshold");
    tune_cmd->add_option("--manifest", tune.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    tune_cmd->add_option("--min-dbm", tune.min_dbm, "Lowest candidate threshold (default -70)");
    tune_cmd->add_option("--max-dbm", tune.max_dbm, "Highest candidate threshold (default -20)");
    tune_cmd->add_option("--step-db", tune.step_db, "Candidate spacing (default 0.2)");
    tune_cmd->add_option("--fa-guard-ns", tune.fa_guard_ns, "Pre-arrival margin excluded from FA (default 3)");
    tune_cmd->add_flag("--all-records", tune.all_records, "Include wall-blocked records in the sweep");
    tune_cmd->add_option("--out", tune.out, "Curve CSV (default: stdout)");

    std::string features_path;
    auto* analyze = app.add_subcommand("analyze-features", "Overlap and correlation diagnostics");
    analyze->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
    analyze->add_option("--out-dir", out_dir, "Output directory")->required();

    std::optional<double> prior;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the ranging model");
    fit_cmd->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", out, "Model JSON (default: stdout)");
    fit_cmd->add_option("--prior-nlos", prior, "NLOS prior probability");

    std::string model_path;
    auto* classify = app.add_subcommand("classify", "Posterior, decision and point estimate per record");
    classify->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    classify->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
    classify->add_option("--out", out, "Output CSV (default: stdout)");

    LikelihoodArgs lk;
    auto* likelihood = app.add_subcommand("range-likelihood", "Mixture likelihood over distance");
    likelihood->add_option("--model", lk.model, "Model JSON")->required()->check(CLI::ExistingFile);
    likelihood->add_option("--features", lk.features, "Feature CSV")->required()->check(CLI::ExistingFile);
    likelihood->add_option("--record", lk.record, "Single record id; emits d_m,density");
    likelihood->add_option("--grid-min-m", lk.grid_min, "Distance grid start (default 0)");
    likelihood->add_option("--grid-max-m", lk.grid_max, "Distance grid end (default 60)");
    likelihood->add_option("--grid-step-m", lk.grid_step, "Distance grid spacing (default 0.05)");
    likelihood->add_option("--out", lk.out, "Output CSV (default: stdout)");

    RunAllArgs ra;
    auto* run_all = app.add_subcommand("run-all", "Full pipeline on a manifest or a generated profile");
    auto* ra_manifest = run_all->add_option("--manifest", ra.manifest, "Dataset manifest")->check(CLI::ExistingFile);
    run_all->add_option("--profile", ra.profile, "liu, kiruna, or a profile JSON file")->excludes(ra_manifest);
    run_all->add_option("--out-dir", ra.out_dir, "Output directory (overrides config)");
    run_all->add_flag("--write-dataset", ra.write_dataset, "Also write the generated dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(RunStatus::InputError);
    }

    try {
        if (*simulate)
            return cmd_simulate(g, profile, out_dir);
        if (*features)
            return cmd_features(g, manifest, threshold, out);
        if (*tune_cmd)
            return cmd_tune(g, tune);
        if (*analyze)
            return cmd_analyze(features_path, out_dir);
        if (*fit_cmd)
            return cmd_fit(g, features_path, out, prior);
        if (*classify)
            return cmd_classify(model_path, features_path, out);
        if (*likelihood)
            return cmd_likelihood(g, lk);
        if (*run_all)
            return cmd_run_all(g, ra);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(status_for(e.code()));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(RunStatus::InputError);
    }
    return 0;
}
