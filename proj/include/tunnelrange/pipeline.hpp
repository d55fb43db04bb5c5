// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "cir_processing.hpp"
#include "error.hpp"
#include "feature_selection.hpp"
#include "io.hpp"
#include "ranging_model.hpp"
#include "threshold_tuner.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tunnelrange {

inline constexpr std::string_view kVersion = "1.0.0";

/// Exit statuses shared by the CLI and the pipeline summary.
enum class RunStatus : int { Ok = 0, InputError = 2, AllMissed = 3, FitFailure = 4 };

inline std::string_view to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Ok: return "OK";
    case RunStatus::InputError: return "INPUT_ERROR";
    case RunStatus::AllMissed: return "MD_ALL";
    case RunStatus::FitFailure: return "FIT_FAILURE";
    }
    return "UNKNOWN";
}

inline RunStatus status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NoSignalDetected: return RunStatus::AllMissed;
    case ErrorCode::DegenerateFit:
    case ErrorCode::InsufficientData: return RunStatus::FitFailure;
    default: return RunStatus::InputError;
    }
}

struct RunConfig {
    double threshold_dbm = -43.8;
    double fa_guard_ns = 3.0;
    double noise_guard_ns = 5.0;
    double prior_nlos = 0.25;
    double grid_min_dbm = -70.0;
    double grid_max_dbm = -20.0;
    double grid_step_db = 0.2;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 20140826;
    bool kurtosis_on_thresholded = false;
    double histogram_bin_m = 0.25;
    double likelihood_min_m = 0.0;
    double likelihood_max_m = 60.0;
    double likelihood_step_m = 0.05;
    std::size_t likelihood_records = 10;

    void validate() const
    {
        if (!(prior_nlos >= 0.0 && prior_nlos <= 1.0))
            throw Error(ErrorCode::InvalidInput, "prior_nlos must be in [0, 1]");
        make_threshold_grid(grid_min_dbm, grid_max_dbm, grid_step_db);
        if (!(histogram_bin_m > 0.0) || !(likelihood_step_m > 0.0) || !(likelihood_max_m > likelihood_min_m))
            throw Error(ErrorCode::InvalidInput, "histogram and likelihood grids need positive widths");
        if (!std::isfinite(threshold_dbm) || !(fa_guard_ns >= 0.0) || !(noise_guard_ns >= 0.0))
            throw Error(ErrorCode::InvalidInput, "threshold must be finite and guards >= 0");
    }
};

inline io::Json to_json(const RunConfig& c)
{
    io::Json j;
    j["threshold_dbm"] = c.threshold_dbm;
    j["fa_guard_ns"] = c.fa_guard_ns;
    j["noise_guard_ns"] = c.noise_guard_ns;
    j["prior_nlos"] = c.prior_nlos;
    j["grid_min_dbm"] = c.grid_min_dbm;
    j["grid_max_dbm"] = c.grid_max_dbm;
    j["grid_step_db"] = c.grid_step_db;
    j["output_dir"] = c.output_dir.generic_string();
    j["seed"] = c.seed;
    j["kurtosis_on_thresholded"] = c.kurtosis_on_thresholded;
    j["histogram_bin_m"] = c.histogram_bin_m;
    j["likelihood_min_m"] = c.likelihood_min_m;
    j["likelihood_max_m"] = c.likelihood_max_m;
    j["likelihood_step_m"] = c.likelihood_step_m;
    j["likelihood_records"] = c.likelihood_records;
    return j;
}

inline RunConfig run_config_from_json(const io::Json& j)
{
    try {
        RunConfig c;
        c.threshold_dbm = j.value("threshold_dbm", c.threshold_dbm);
        c.fa_guard_ns = j.value("fa_guard_ns", c.fa_guard_ns);
        c.noise_guard_ns = j.value("noise_guard_ns", c.noise_guard_ns);
        c.prior_nlos = j.value("prior_nlos", c.prior_nlos);
        c.grid_min_dbm = j.value("grid_min_dbm", c.grid_min_dbm);
        c.grid_max_dbm = j.value("grid_max_dbm", c.grid_max_dbm);
        c.grid_step_db = j.value("grid_step_db", c.grid_step_db);
        if (j.contains("output_dir"))
            c.output_dir = j["output_dir"].get<std::string>();
        c.seed = j.value("seed", c.seed);
        c.kurtosis_on_thresholded = j.value("kurtosis_on_thresholded", c.kurtosis_on_thresholded);
        c.histogram_bin_m = j.value("histogram_bin_m", c.histogram_bin_m);
        c.likelihood_min_m = j.value("likelihood_min_m", c.likelihood_min_m);
        c.likelihood_max_m = j.value("likelihood_max_m", c.likelihood_max_m);
        c.likelihood_step_m = j.value("likelihood_step_m", c.likelihood_step_m);
        c.likelihood_records = j.value("likelihood_records", c.likelihood_records);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("run config: ") + e.what());
    }
}

/// Feature rows for every detected record plus the ids of missed detections.
struct FeatureExtraction {
    FeatureTable rows;
    std::vector<std::string> missed;
};

inline FeatureExtraction extract_feature_table(std::span<const SweepRecord> records, double threshold_dbm,
                                               const FeatureOptions& options = {}, double reference_power_mw = 1.0)
{
    FeatureExtraction out;
    for (const auto& rec : records) {
        try {
            const auto pdp = compute_pdp(rec.cir, threshold_dbm, reference_power_mw);
            if (!pdp.any_detected()) {
                out.missed.push_back(rec.record_id);
                continue;
            }
            FeatureRow row;
            row.record_id = rec.record_id;
            row.scenario = rec.scenario;
            row.true_distance_m = rec.true_distance_m;
            row.features = extract_features(pdp, rec.cir, options);
            out.rows.push_back(std::move(row));
        } catch (const Error& e) {
            throw Error(e.code(), "record '" + rec.record_id + "': " + e.what());
        }
    }
    return out;
}

/// Records used for threshold tuning: labeled records whose direct path is
/// present (LOS-pooled scenarios). Wall-blocked records arrive at d/c + bias,
/// so an early crossing there is not necessarily noise. Falls back to all
/// labeled records when no LOS-pooled record exists.
inline std::vector<SweepRecord> tuning_records(std::span<const SweepRecord> records)
{
    std::vector<SweepRecord> los;
    std::vector<SweepRecord> labeled;
    for (const auto& r : records) {
        if (!r.true_distance_m)
            continue;
        labeled.push_back(r);
        if (r.scenario && pooled_class(*r.scenario) == LinkClass::Los)
            los.push_back(r);
    }
    return los.empty() ? labeled : los;
}

/// Fixed-width histogram with bins aligned to multiples of the width.
/// Returns (bin center, count) for every bin between the extremes.
inline std::vector<std::pair<double, std::size_t>> histogram(std::span<const double> values, double width)
{
    std::vector<std::pair<double, std::size_t>> out;
    if (values.empty())
        return out;
    std::map<long long, std::size_t> counts;
    for (double v : values)
        ++counts[static_cast<long long>(std::floor(v / width))];
    const auto lo = counts.begin()->first;
    const auto hi = counts.rbegin()->first;
    for (auto k = lo; k <= hi; ++k) {
        const auto it = counts.find(k);
        out.emplace_back((static_cast<double>(k) + 0.5) * width, it == counts.end() ? 0 : it->second);
    }
    return out;
}

/// Text of the diagnostics files, keyed by file name.
inline std::map<std::string, std::string> diagnostics_files(const FeatureDiagnostics& d)
{
    const auto cell = [](const std::optional<double>& v) { return v ? io::format_number(*v) : std::string("nan"); };
    std::map<std::string, std::string> files;
    const auto per_feature = [&](const std::string& column,
                                 const std::array<std::optional<double>, kNumFeatures>& values) {
        std::string text = "feature," + column + "\n";
        for (std::size_t a = 0; a < kNumFeatures; ++a)
            text += std::string(kFeatureNames[a]) + ',' + cell(values[a]) + '\n';
        return text;
    };
    files["overlap.csv"] = per_feature("xi", d.overlap);
    files["corr_distance.csv"] = per_feature("rho_d", d.corr_distance);
    files["corr_nlos_error.csv"] = per_feature("rho_nu", d.corr_nlos_error);
    std::string pair = "feature";
    for (auto name : kFeatureNames)
        pair += "," + std::string(name);
    pair += '\n';
    for (std::size_t a = 0; a < kNumFeatures; ++a) {
        pair += std::string(kFeatureNames[a]);
        for (std::size_t b = 0; b < kNumFeatures; ++b)
            pair += ',' + cell(d.pairwise[a][b]);
        pair += '\n';
    }
    files["corr_pairwise.csv"] = pair;
    return files;
}

inline io::Json diagnostics_json(const FeatureDiagnostics& d)
{
    const auto cell = [](const std::optional<double>& v) { return v ? io::Json(*v) : io::Json(nullptr); };
    io::Json j;
    j["los_count"] = d.los_count;
    j["nlos_count"] = d.nlos_count;
    io::Json features = io::Json::object();
    for (std::size_t a = 0; a < kNumFeatures; ++a) {
        io::Json f;
        f["xi"] = cell(d.overlap[a]);
        f["rho_d"] = cell(d.corr_distance[a]);
        f["rho_nu"] = cell(d.corr_nlos_error[a]);
        io::Json row = io::Json::array();
        for (std::size_t b = 0; b < kNumFeatures; ++b)
            row.push_back(cell(d.pairwise[a][b]));
        f["pairwise"] = row;
        features[std::string(kFeatureNames[a])] = f;
    }
    j["features"] = features;
    return j;
}

inline void write_diagnostics(const std::filesystem::path& dir, const FeatureDiagnostics& d)
{
    for (const auto& [name, text] : diagnostics_files(d)) {
        auto out = io::open_output(dir / name);
        out << text;
    }
    io::write_json_file(dir / "diagnostics.json", diagnostics_json(d));
}

inline std::string classification_header()
{
    return "record_id,posterior_nlos,decision,d_hat_m,w_los,mean_los_m,std_los_m,w_nlos,mean_nlos_m,std_nlos_m";
}

inline std::string classification_text(const RangingModel& model, std::span<const FeatureRow> rows)
{
    std::string text = classification_header() + "\n";
    for (const auto& r : rows) {
        const auto est = point_estimate(model, r.features);
        const auto lh = range_likelihood(model, r.features);
        std::vector<std::string> f{r.record_id, io::format_number(est.posterior_nlos),
                                   std::string(to_string(est.decision)), io::format_number(est.distance_m)};
        for (const auto& c : lh.components) {
            f.push_back(io::format_number(c.weight));
            f.push_back(io::format_number(c.mean_m));
            f.push_back(io::format_number(c.std_m));
        }
        text += io::join(f) + '\n';
    }
    return text;
}

/// Distance grid min, min + step, ... <= max with values rounded to 1e-9 m.
inline std::vector<double> distance_grid(double min_m, double max_m, double step_m)
{
    if (!(step_m > 0.0) || !(max_m >= min_m))
        throw Error(ErrorCode::InvalidInput, "distance grid needs min <= max and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((max_m - min_m) / step_m + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = std::round((min_m + static_cast<double>(i) * step_m) * 1e9) / 1e9;
    return grid;
}

inline std::string likelihood_grid_text(const RangeLikelihood& lh, std::span<const double> grid)
{
    std::string text = "d_m,density\n";
    for (double d : grid)
        text += io::format_number(d) + ',' + io::format_number(lh.density(d)) + '\n';
    return text;
}

struct PipelineResult {
    RunStatus status = RunStatus::Ok;
    std::string message;
    io::Json summary;
    std::optional<RangingModel> model;
    std::optional<ThresholdCurve> curve;
    std::optional<NoiseStats> noise;
    std::optional<FeatureDiagnostics> diagnostics;
    FeatureExtraction features;
};

/// Threshold curve, features, diagnostics, model fit, classification and
/// plot data for one dataset. Every artifact goes under config.output_dir;
/// nothing time- or host-dependent is written so reruns are byte-identical.
inline PipelineResult run_pipeline(std::span<const SweepRecord> records, const RunConfig& config,
                                   const SweepConfig& sweep = {})
{
    namespace fs = std::filesystem;
    config.validate();
    const fs::path out = config.output_dir;
    fs::create_directories(out);
    const double ref = sweep.reference_power_mw;

    PipelineResult result;
    io::Json summary;
    summary["tool"] = "tunnelrange";
    summary["version"] = std::string(kVersion);
    // The output location is left out so runs into different directories compare equal.
    auto config_json = to_json(config);
    config_json.erase("output_dir");
    summary["config"] = config_json;
    summary["seed"] = config.seed;
    summary["histogram_bin_m"] = config.histogram_bin_m;
    summary["record_count"] = records.size();
    io::Json artifacts = io::Json::array();

    const auto finish = [&](RunStatus status, const std::string& message) {
        result.status = status;
        result.message = message;
        summary["status"] = std::string(to_string(status));
        summary["exit_code"] = static_cast<int>(status);
        if (!message.empty())
            summary["message"] = message;
        summary["artifacts"] = artifacts;
        io::write_json_file(out / "summary.json", summary);
        result.summary = summary;
        return result;
    };
    const auto write_text = [&](const std::string& rel, const std::string& text) {
        auto f = io::open_output(out / rel);
        f << text;
        artifacts.push_back(rel);
    };

    const auto labeled = tuning_records(records);

    // Threshold trade-off and noise floor, only possible with ground truth.
    if (!labeled.empty()) {
        const auto grid = make_threshold_grid(config.grid_min_dbm, config.grid_max_dbm, config.grid_step_db);
        result.curve = sweep_thresholds(labeled, grid, config.fa_guard_ns * kSecondsPerNs, ref);
        write_text("threshold_curve.csv", io::threshold_curve_text(*result.curve));
        io::Json t;
        t["selected_dbm"] = result.curve->selected;
        t["tuning_records"] = labeled.size();
        try {
            result.noise = estimate_noise_stats(labeled, config.noise_guard_ns * kSecondsPerNs, ref);
            t["noise_mean_dbm"] = result.noise->mean_dbm;
            t["noise_std_db"] = result.noise->std_db;
            t["noise_samples"] = result.noise->sample_count;
            t["k"] = result.noise->sigma_multiple(result.curve->selected);

            // Noise level histogram, 1 dB bins.
            std::vector<double> levels;
            for (const auto& r : labeled) {
                const double cutoff = *r.true_toa_s() - config.noise_guard_ns * kSecondsPerNs;
                for (std::size_t i = 0; i < r.cir.size() && r.cir.delay_at(i) < cutoff; ++i)
                    if (std::norm(r.cir.taps[i]) > 0.0)
                        levels.push_back(to_dbm(std::norm(r.cir.taps[i]), ref));
            }
            std::string text = "level_dbm,count\n";
            for (const auto& [c, n] : histogram(levels, 1.0))
                text += io::format_number(c) + ',' + std::to_string(n) + '\n';
            write_text("plots/noise_hist.csv", text);
        } catch (const Error& e) {
            t["noise_error"] = e.what();
        }
        summary["threshold"] = t;
    }

    FeatureOptions options;
    options.observation_interval_s = 0.0;
    options.kurtosis_on_thresholded = config.kurtosis_on_thresholded;
    try {
        result.features = extract_feature_table(records, config.threshold_dbm, options, ref);
    } catch (const Error& e) {
        return finish(RunStatus::InputError, e.what());
    }
    const auto& rows = result.features.rows;
    summary["detected"] = rows.size();
    summary["missed_detections"] = result.features.missed.size();
    summary["md_rate"] = records.empty() ? 0.0
                                         : static_cast<double>(result.features.missed.size()) /
                                               static_cast<double>(records.size());
    write_text("features.csv", io::feature_table_text(rows));
    {
        std::string text = "record_id\n";
        for (const auto& id : result.features.missed)
            text += id + '\n';
        write_text("missed_detections.csv", text);
    }
    if (rows.empty())
        return finish(RunStatus::AllMissed, "no record crossed the detection threshold");

    FeatureTable train;
    for (const auto& r : rows)
        if (r.link_class() && r.true_distance_m)
            train.push_back(r);

    // Diagnostics need both classes; their absence is reported, not fatal.
    try {
        result.diagnostics = build_diagnostics(train);
        for (const auto& [name, text] : diagnostics_files(*result.diagnostics))
            write_text("diagnostics/" + name, text);
        io::write_json_file(out / "diagnostics/diagnostics.json", diagnostics_json(*result.diagnostics));
        artifacts.push_back("diagnostics/diagnostics.json");
    } catch (const Error& e) {
        summary["diagnostics_error"] = e.what();
    }

    try {
        result.model = fit(train, config.prior_nlos);
    } catch (const Error& e) {
        return finish(RunStatus::FitFailure, e.what());
    }
    io::write_model(out / "model.json", *result.model);
    artifacts.push_back("model.json");
    summary["model"] = io::to_json(*result.model);
    const auto& model = *result.model;

    write_text("classifications.csv", classification_text(model, rows));

    const auto grid = distance_grid(config.likelihood_min_m, config.likelihood_max_m, config.likelihood_step_m);
    {
        std::string text = "record_id,d_m,density\n";
        for (std::size_t i = 0; i < rows.size() && i < config.likelihood_records; ++i) {
            const auto lh = range_likelihood(model, rows[i].features);
            for (double d : grid)
                text += rows[i].record_id + ',' + io::format_number(d) + ',' + io::format_number(lh.density(d)) + '\n';
        }
        write_text("likelihood_grids.csv", text);
    }

    // Plot data. Ranging error scatter and histograms per class.
    std::vector<double> err_los, err_nlos, err_all, mitigated;
    {
        std::string toa = "record_id,class,true_distance_m,range_m,error_m\n";
        std::string scatter = "record_id,class,true_distance_m,rss_dbm,mean_excess_ns,rise_ns\n";
        std::string nlos = "record_id,toa_ns,max_excess_ns,rms_ns,error_m,mitigated_error_m\n";
        for (const auto& r : train) {
            const double err = *r.ranging_error_m();
            const auto cls = std::string(to_string(*r.link_class()));
            toa += r.record_id + ',' + cls + ',' + io::format_number(*r.true_distance_m) + ',' +
                   io::format_number(kSpeedOfLightMps * r.features.toa_s) + ',' + io::format_number(err) + '\n';
            scatter += r.record_id + ',' + cls + ',' + io::format_number(*r.true_distance_m) + ',' +
                       io::format_number(r.features.rss_dbm) + ',' +
                       io::format_number(feature_value(r.features, Feature::MeanExcessDelay)) + ',' +
                       io::format_number(r.features.rise_time_ns()) + '\n';
            err_all.push_back(err);
            if (*r.link_class() == LinkClass::Los) {
                err_los.push_back(err);
            } else {
                err_nlos.push_back(err);
                const double m = err - nlos_error(model, r.features.max_excess_delay_ns());
                mitigated.push_back(m);
                nlos += r.record_id + ',' + io::format_number(r.features.toa_ns()) + ',' +
                        io::format_number(r.features.max_excess_delay_ns()) + ',' +
                        io::format_number(feature_value(r.features, Feature::RmsDelaySpread)) + ',' +
                        io::format_number(err) + ',' + io::format_number(m) + '\n';
            }
        }
        write_text("plots/toa_vs_distance.csv", toa);
        write_text("plots/feature_scatter.csv", scatter);
        write_text("plots/nlos_error_scatter.csv", nlos);
    }
    const auto hist_text = [&](std::span<const double> v) {
        std::string text = "bin_center_m,count\n";
        for (const auto& [c, n] : histogram(v, config.histogram_bin_m))
            text += io::format_number(c) + ',' + std::to_string(n) + '\n';
        return text;
    };
    write_text("plots/error_hist_los.csv", hist_text(err_los));
    write_text("plots/error_hist_nlos.csv", hist_text(err_nlos));
    write_text("plots/error_hist_all.csv", hist_text(err_all));
    write_text("plots/mitigation_before_hist.csv", hist_text(err_nlos));
    write_text("plots/mitigation_after_hist.csv", hist_text(mitigated));
    if (err_nlos.size() >= 2) {
        io::Json mit;
        mit["nlos_error_mean_before_m"] = stats::mean(err_nlos);
        mit["nlos_error_std_before_m"] = stats::stddev(err_nlos);
        mit["nlos_error_mean_after_m"] = stats::mean(mitigated);
        mit["nlos_error_std_after_m"] = stats::stddev(mitigated);
        summary["mitigation"] = mit;
    }

    // Example likelihoods at tau_1 = 30 ns, tau_MAX = 60 ns for a range of posteriors.
    {
        std::string text = "posterior_nlos,d_m,density\n";
        for (double post : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            RangeLikelihood lh;
            const double range = kMetersPerNs * 30.0;
            lh.components[0] = {1.0 - post, range - model.mu_L_m, model.sigma_L_m};
            lh.components[1] = {post, range - nlos_error(model, 60.0), model.sigma_N_m};
            for (double d : distance_grid(0.0, 20.0, 0.05))
                text += io::format_number(post) + ',' + io::format_number(d) + ',' + io::format_number(lh.density(d)) +
                        '\n';
        }
        write_text("plots/likelihood_example.csv", text);
    }

    return finish(RunStatus::Ok, "");
}

} // namespace tunnelrange
