// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "cir_processing.hpp"
#include "error.hpp"
#include "feature_table.hpp"
#include "ranging_model.hpp"
#include "records.hpp"
#include "threshold_tuner.hpp"
#include "tunnel_synth.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tunnelrange::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Numbers. Plain decimal, '.' separator, shortest text that round-trips.

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    // Plain decimals in the everyday range, shortest round-trip form outside it.
    const double mag = std::abs(v);
    const bool plain = mag == 0.0 || (mag >= 1e-12 && mag < 1e15);
    char buf[64];
    const auto res = plain ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                           : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (text == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw Error(ErrorCode::InvalidInput, "not a number: '" + std::string(text) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Minimal CSV: comma separated, no quoting. Identifiers must not contain commas.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw Error(ErrorCode::InvalidInput, "missing CSV column '" + std::string(name) + "'");
    }
};

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline CsvTable read_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::LoadError, "cannot open " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw Error(ErrorCode::LoadError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                                  std::to_string(table.header.size()) + " fields");
        table.rows.push_back(std::move(fields));
    }
    if (!have_header)
        throw Error(ErrorCode::LoadError, path.string() + ": missing CSV header");
    return table;
}

inline void ensure_parent(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
}

inline std::ofstream open_output(const fs::path& path)
{
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::LoadError, "cannot write " + path.string());
    return out;
}

inline std::string join(const std::vector<std::string>& fields)
{
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            s += ',';
        s += fields[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Complex sample files (index,re,im) and their sidecars.

inline void write_complex_csv(const fs::path& path, std::span<const Complex> samples)
{
    auto out = open_output(path);
    std::string buf = "index,re,im\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        buf += std::to_string(i);
        buf += ',';
        buf += format_number(samples[i].real());
        buf += ',';
        buf += format_number(samples[i].imag());
        buf += '\n';
    }
    out << buf;
}

inline std::vector<Complex> read_complex_csv(const fs::path& path)
{
    const auto table = read_csv(path);
    const auto ci = table.column("index");
    const auto cr = table.column("re");
    const auto cim = table.column("im");
    std::vector<Complex> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (parse_number(row[ci]) != static_cast<double>(r))
            throw Error(ErrorCode::LoadError, path.string() + ": index column out of order at row " + std::to_string(r));
        out.emplace_back(parse_number(row[cr]), parse_number(row[cim]));
    }
    return out;
}

enum class Domain { Frequency, Time };

inline std::string_view to_string(Domain d) { return d == Domain::Time ? "time" : "frequency"; }

inline Domain parse_domain(std::string_view s)
{
    if (s == "time")
        return Domain::Time;
    if (s == "frequency")
        return Domain::Frequency;
    throw Error(ErrorCode::InvalidInput, "unknown domain '" + std::string(s) + "'");
}

inline Json to_json(const SweepConfig& c)
{
    Json j;
    j["center_frequency_hz"] = c.center_frequency_hz;
    j["bandwidth_hz"] = c.bandwidth_hz;
    j["num_points"] = c.num_points;
    j["time_resolution_s"] = c.time_resolution_s;
    j["observation_interval_s"] = c.observation_interval_s;
    j["reference_power_mw"] = c.reference_power_mw;
    j["window"] = c.window == WindowKind::Hann ? "hann" : "none";
    return j;
}

inline SweepConfig sweep_config_from_json(const Json& j)
{
    SweepConfig c;
    c.center_frequency_hz = j.value("center_frequency_hz", c.center_frequency_hz);
    c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
    c.num_points = j.value("num_points", c.num_points);
    c.time_resolution_s = j.value("time_resolution_s", c.time_resolution_s);
    c.observation_interval_s = j.value("observation_interval_s", c.observation_interval_s);
    c.reference_power_mw = j.value("reference_power_mw", c.reference_power_mw);
    const auto w = j.value("window", std::string("hann"));
    if (w == "hann")
        c.window = WindowKind::Hann;
    else if (w == "none")
        c.window = WindowKind::None;
    else
        throw Error(ErrorCode::InvalidInput, "unknown window '" + w + "'");
    return c;
}

inline Json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::LoadError, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::LoadError, path.string() + ": " + e.what());
    }
}

inline void write_json_file(const fs::path& path, const Json& j)
{
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

inline fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".json"); }

inline void write_time_sidecar(const fs::path& csv, const ImpulseResponse& cir)
{
    Json j;
    j["domain"] = "time";
    j["delay_step_s"] = cir.delay_step_s;
    j["origin_delay_s"] = cir.origin_delay_s;
    write_json_file(sidecar_path(csv), j);
}

inline void write_frequency_sidecar(const fs::path& csv, const SweepConfig& config)
{
    Json j;
    j["domain"] = "frequency";
    j["sweep_config"] = to_json(config);
    write_json_file(sidecar_path(csv), j);
}

// ---------------------------------------------------------------------------
// Dataset manifest: JSON lines, one header object then one object per record.

struct ManifestEntry {
    std::string record_id;
    std::string tx_id;
    std::string rx_id;
    std::optional<double> true_distance_m;
    std::optional<Scenario> scenario;
    std::string cir_path; // relative to the manifest directory
    Domain domain = Domain::Time;
};

struct DatasetManifest {
    SweepConfig config{};
    std::vector<ManifestEntry> entries;
    fs::path base_dir;

    fs::path resolve(const ManifestEntry& e) const { return base_dir / e.cir_path; }
};

inline constexpr std::string_view kManifestFormat = "tunnelrange-manifest";

inline Json to_json(const ManifestEntry& e)
{
    Json j;
    j["record_id"] = e.record_id;
    j["tx_id"] = e.tx_id;
    j["rx_id"] = e.rx_id;
    if (e.true_distance_m)
        j["true_distance_m"] = *e.true_distance_m;
    if (e.scenario)
        j["scenario"] = std::string(to_string(*e.scenario));
    j["cir_path"] = e.cir_path;
    j["domain"] = std::string(to_string(e.domain));
    return j;
}

inline std::string manifest_text(const DatasetManifest& m)
{
    Json header;
    header["format"] = std::string(kManifestFormat);
    header["version"] = 1;
    header["sweep_config"] = to_json(m.config);
    std::string text = header.dump() + "\n";
    for (const auto& e : m.entries)
        text += to_json(e).dump() + "\n";
    return text;
}

inline void write_manifest(const fs::path& path, const DatasetManifest& m)
{
    auto out = open_output(path);
    out << manifest_text(m);
}

/// Parse and validate a manifest. Errors name the offending record_id.
inline DatasetManifest load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::LoadError, "cannot open manifest " + path.string());
    DatasetManifest m;
    m.base_dir = path.parent_path();
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::LoadError, path.string() + ":" + std::to_string(line_no) + ": malformed JSON");
        }
        if (!have_header && j.contains("format")) {
            if (j["format"] != kManifestFormat)
                throw Error(ErrorCode::LoadError, path.string() + ": unknown manifest format");
            m.config = sweep_config_from_json(j.value("sweep_config", Json::object()));
            have_header = true;
            continue;
        }
        const std::string id = j.contains("record_id") && j["record_id"].is_string()
                                   ? j["record_id"].get<std::string>()
                                   : std::string();
        const auto fail = [&](const std::string& what) {
            return Error(ErrorCode::LoadError,
                         "record '" + (id.empty() ? "line " + std::to_string(line_no) : id) + "': " + what);
        };
        if (id.empty())
            throw fail("missing record_id");
        if (id.find(',') != std::string::npos)
            throw fail("record_id must not contain commas");
        if (!ids.insert(id).second)
            throw fail("duplicate record_id");
        ManifestEntry e;
        e.record_id = id;
        try {
            e.tx_id = j.value("tx_id", std::string());
            e.rx_id = j.value("rx_id", std::string());
            if (j.contains("true_distance_m"))
                e.true_distance_m = j["true_distance_m"].get<double>();
            if (j.contains("scenario"))
                e.scenario = parse_scenario(j["scenario"].get<std::string>());
            e.cir_path = j.at("cir_path").get<std::string>();
            e.domain = parse_domain(j.value("domain", std::string("time")));
        } catch (const nlohmann::json::exception& ex) {
            throw fail(std::string("malformed entry: ") + ex.what());
        } catch (const Error& ex) {
            throw fail(ex.what());
        }
        if (e.true_distance_m.has_value() != e.scenario.has_value())
            throw fail("scenario and true_distance_m must be given together");
        if (e.true_distance_m && !(*e.true_distance_m > 0.0))
            throw fail("true_distance_m must be > 0");
        if (!fs::exists(m.base_dir / e.cir_path))
            throw fail("missing file " + (m.base_dir / e.cir_path).string());
        m.entries.push_back(std::move(e));
    }
    return m;
}

/// Read the CIR of one manifest entry, transforming frequency-domain sweeps.
inline SweepRecord load_record(const DatasetManifest& m, const ManifestEntry& e)
{
    try {
        const auto path = m.resolve(e);
        const auto samples = read_complex_csv(path);
        const auto side = sidecar_path(path);
        Json sidecar = fs::exists(side) ? read_json_file(side) : Json::object();
        if (sidecar.contains("domain") && parse_domain(sidecar["domain"].get<std::string>()) != e.domain)
            throw Error(ErrorCode::InvalidInput, "sidecar domain disagrees with manifest");

        SweepRecord rec;
        rec.record_id = e.record_id;
        rec.tx_id = e.tx_id;
        rec.rx_id = e.rx_id;
        rec.true_distance_m = e.true_distance_m;
        rec.scenario = e.scenario;
        if (e.domain == Domain::Time) {
            rec.cir.taps = samples;
            rec.cir.delay_step_s = sidecar.value("delay_step_s", m.config.delay_step_s());
            rec.cir.origin_delay_s = sidecar.value("origin_delay_s", 0.0);
            rec.cir.validate();
        } else {
            FrequencyResponse fr;
            fr.samples = samples;
            fr.config = sidecar.contains("sweep_config") ? sweep_config_from_json(sidecar["sweep_config"]) : m.config;
            rec.cir = ingest_frequency_response(fr);
        }
        return rec;
    } catch (const Error& ex) {
        throw Error(ex.code(), "record '" + e.record_id + "': " + ex.what());
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::LoadError, "record '" + e.record_id + "': " + ex.what());
    }
}

/// Write records as time-domain CSVs plus sidecars and a manifest.
inline DatasetManifest write_dataset(const fs::path& out_dir, std::span<const SweepRecord> records,
                                     const SweepConfig& config)
{
    DatasetManifest m;
    m.config = config;
    m.base_dir = out_dir;
    for (const auto& rec : records) {
        ManifestEntry e;
        e.record_id = rec.record_id;
        e.tx_id = rec.tx_id;
        e.rx_id = rec.rx_id;
        e.true_distance_m = rec.true_distance_m;
        e.scenario = rec.scenario;
        e.cir_path = "cir/" + rec.record_id + ".csv";
        e.domain = Domain::Time;
        const auto path = out_dir / e.cir_path;
        write_complex_csv(path, rec.cir.taps);
        write_time_sidecar(path, rec.cir);
        m.entries.push_back(std::move(e));
    }
    write_manifest(out_dir / "manifest.jsonl", m);
    return m;
}

// ---------------------------------------------------------------------------
// Feature table.

inline constexpr std::string_view kFeatureHeader =
    "record_id,scenario,true_distance_m,toa_ns,rss_dbm,pmax_dbm,mean_excess_ns,max_excess_ns,rms_ns,rise_ns,kurtosis";

inline std::string feature_table_text(std::span<const FeatureRow> rows)
{
    std::string text(kFeatureHeader);
    text += '\n';
    for (const auto& r : rows) {
        std::vector<std::string> f;
        f.push_back(r.record_id);
        f.push_back(r.scenario ? std::string(to_string(*r.scenario)) : std::string());
        f.push_back(r.true_distance_m ? format_number(*r.true_distance_m) : std::string());
        for (std::size_t a = 0; a < kNumFeatures; ++a)
            f.push_back(format_number(feature_value(r.features, static_cast<Feature>(a))));
        text += join(f) + '\n';
    }
    return text;
}

inline void write_feature_table(const fs::path& path, std::span<const FeatureRow> rows)
{
    auto out = open_output(path);
    out << feature_table_text(rows);
}

inline FeatureTable read_feature_table(const fs::path& path)
{
    const auto table = read_csv(path);
    const auto col = [&](std::string_view n) { return table.column(n); };
    const auto c_id = col("record_id"), c_sc = col("scenario"), c_d = col("true_distance_m");
    const auto c_toa = col("toa_ns"), c_rss = col("rss_dbm"), c_pmax = col("pmax_dbm"), c_mean = col("mean_excess_ns");
    const auto c_max = col("max_excess_ns"), c_rms = col("rms_ns"), c_rise = col("rise_ns"), c_k = col("kurtosis");
    FeatureTable rows;
    for (const auto& r : table.rows) {
        try {
            FeatureRow row;
            row.record_id = r[c_id];
            if (!r[c_sc].empty())
                row.scenario = parse_scenario(r[c_sc]);
            if (!r[c_d].empty())
                row.true_distance_m = parse_number(r[c_d]);
            auto& f = row.features;
            f.toa_s = parse_number(r[c_toa]) * kSecondsPerNs;
            f.rss_dbm = parse_number(r[c_rss]);
            f.max_power_dbm = parse_number(r[c_pmax]);
            f.mean_excess_delay_s = parse_number(r[c_mean]) * kSecondsPerNs;
            f.max_excess_delay_s = parse_number(r[c_max]) * kSecondsPerNs;
            f.rms_delay_spread_s = parse_number(r[c_rms]) * kSecondsPerNs;
            f.rise_time_s = parse_number(r[c_rise]) * kSecondsPerNs;
            f.kurtosis = parse_number(r[c_k]);
            rows.push_back(std::move(row));
        } catch (const Error& e) {
            throw Error(ErrorCode::LoadError, "feature row '" + r[c_id] + "': " + e.what());
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Ranging model file.

inline Json to_json(const RangingModel& m)
{
    Json j;
    j["mu_L_m"] = m.mu_L_m;
    j["sigma_L_m"] = m.sigma_L_m;
    j["sigma_N_m"] = m.sigma_N_m;
    j["poly"] = Json::array({m.poly[0], m.poly[1], m.poly[2]});
    j["lambda_L_per_ns"] = m.lambda_L_per_ns;
    j["lambda_N_per_ns"] = m.lambda_N_per_ns;
    j["prior_nlos"] = m.prior_nlos;
    return j;
}

inline RangingModel model_from_json(const Json& j)
{
    try {
        RangingModel m;
        m.mu_L_m = j.at("mu_L_m").get<double>();
        m.sigma_L_m = j.at("sigma_L_m").get<double>();
        m.sigma_N_m = j.at("sigma_N_m").get<double>();
        const auto& p = j.at("poly");
        if (!p.is_array() || p.size() != 3)
            throw Error(ErrorCode::InvalidInput, "poly must hold [p2, p1, p0]");
        m.poly = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
        m.lambda_L_per_ns = j.at("lambda_L_per_ns").get<double>();
        m.lambda_N_per_ns = j.at("lambda_N_per_ns").get<double>();
        m.prior_nlos = j.at("prior_nlos").get<double>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("model file: ") + e.what());
    }
}

inline void write_model(const fs::path& path, const RangingModel& m) { write_json_file(path, to_json(m)); }

inline RangingModel read_model(const fs::path& path) { return model_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Threshold curve.

inline std::string threshold_curve_text(const ThresholdCurve& c)
{
    std::string text = "threshold_dbm,fa_rate,md_rate\n";
    for (std::size_t i = 0; i < c.thresholds.size(); ++i)
        text += format_number(c.thresholds[i]) + ',' + format_number(c.fa_rate[i]) + ',' +
                format_number(c.md_rate[i]) + '\n';
    return text;
}

inline ThresholdCurve read_threshold_curve(const fs::path& path)
{
    const auto t = read_csv(path);
    ThresholdCurve c;
    for (const auto& r : t.rows) {
        c.thresholds.push_back(parse_number(r[t.column("threshold_dbm")]));
        c.fa_rate.push_back(parse_number(r[t.column("fa_rate")]));
        c.md_rate.push_back(parse_number(r[t.column("md_rate")]));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Synthetic profile. Missing keys keep the LiU defaults.

inline Json to_json(const SynthProfile& p)
{
    Json j;
    j["name"] = p.name;
    j["sweep_config"] = to_json(p.sweep);
    const auto positions = [](const std::vector<Position>& ps) {
        Json a = Json::array();
        for (const auto& q : ps)
            a.push_back(Json::array({q.x_m, q.y_m}));
        return a;
    };
    j["tx_positions_m"] = positions(p.tx_positions);
    j["rx_positions_m"] = positions(p.rx_positions);
    j["repetitions"] = {{"LOS", p.repetitions[0]},
                        {"NLOS-M", p.repetitions[1]},
                        {"NLOS-P", p.repetitions[2]},
                        {"NLOS-W", p.repetitions[3]}};
    j["ref_power_dbm_at_1m"] = p.ref_power_dbm_at_1m;
    j["path_loss_exponent"] = p.path_loss_exponent;
    j["shadowing_db"] = p.shadowing_db;
    j["obstacle_loss_db"] = {{"LOS", p.obstacle_loss_db[0]},
                             {"NLOS-M", p.obstacle_loss_db[1]},
                             {"NLOS-P", p.obstacle_loss_db[2]},
                             {"NLOS-W", p.obstacle_loss_db[3]}};
    j["min_peak_dbm"] = p.min_peak_dbm;
    j["tap_floor_dbm"] = p.tap_floor_dbm;
    j["peak_margin_db"] = p.peak_margin_db;
    j["mean_tap_spacing_ns"] = p.mean_tap_spacing_ns;
    j["decay_ns"] = p.decay_ns;
    j["tap_jitter_db"] = p.tap_jitter_db;
    j["los_bias_m"] = p.los_bias_m;
    j["los_sigma_m"] = p.los_sigma_m;
    j["nlos_poly"] = Json::array({p.nlos_poly[0], p.nlos_poly[1], p.nlos_poly[2]});
    j["nlos_sigma_m"] = p.nlos_sigma_m;
    j["nlos_two_cluster"] = p.nlos_two_cluster;
    j["nlos_cluster_centers_m"] = Json::array({p.nlos_cluster_centers_m[0], p.nlos_cluster_centers_m[1]});
    const auto excess = [](const ExcessDelayModel& e) {
        return Json{{"min_ns", e.min_ns}, {"max_ns", e.max_ns}, {"skew", e.skew}};
    };
    j["los_excess"] = excess(p.los_excess);
    j["nlos_excess"] = excess(p.nlos_excess);
    j["lambda_L_per_ns"] = p.lambda_L_per_ns;
    j["lambda_N_per_ns"] = p.lambda_N_per_ns;
    j["noise_mean_dbm"] = p.noise_mean_dbm;
    j["noise_std_db"] = p.noise_std_db;
    j["noise_tail_cap_sigma"] = p.noise_tail_cap_sigma;
    j["noise_only"] = p.noise_only;
    j["multipath"] = p.multipath;
    j["add_noise"] = p.add_noise;
    j["seed"] = p.seed;
    return j;
}

inline SynthProfile profile_from_json(const Json& j)
{
    try {
        SynthProfile p = j.value("base", std::string("liu")) == "kiruna" ? kiruna_profile() : liu_profile();
        p.name = j.value("name", p.name);
        if (j.contains("sweep_config"))
            p.sweep = sweep_config_from_json(j["sweep_config"]);
        const auto positions = [](const Json& a) {
            std::vector<Position> out;
            for (const auto& q : a)
                out.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
            return out;
        };
        if (j.contains("tx_positions_m"))
            p.tx_positions = positions(j["tx_positions_m"]);
        if (j.contains("rx_positions_m"))
            p.rx_positions = positions(j["rx_positions_m"]);
        const std::array<const char*, 4> names{"LOS", "NLOS-M", "NLOS-P", "NLOS-W"};
        for (std::size_t s = 0; s < 4; ++s) {
            if (j.contains("repetitions"))
                p.repetitions[s] = j["repetitions"].value(names[s], p.repetitions[s]);
            if (j.contains("obstacle_loss_db"))
                p.obstacle_loss_db[s] = j["obstacle_loss_db"].value(names[s], p.obstacle_loss_db[s]);
        }
        p.ref_power_dbm_at_1m = j.value("ref_power_dbm_at_1m", p.ref_power_dbm_at_1m);
        p.path_loss_exponent = j.value("path_loss_exponent", p.path_loss_exponent);
        p.shadowing_db = j.value("shadowing_db", p.shadowing_db);
        p.min_peak_dbm = j.value("min_peak_dbm", p.min_peak_dbm);
        p.tap_floor_dbm = j.value("tap_floor_dbm", p.tap_floor_dbm);
        p.peak_margin_db = j.value("peak_margin_db", p.peak_margin_db);
        p.mean_tap_spacing_ns = j.value("mean_tap_spacing_ns", p.mean_tap_spacing_ns);
        p.decay_ns = j.value("decay_ns", p.decay_ns);
        p.tap_jitter_db = j.value("tap_jitter_db", p.tap_jitter_db);
        p.los_bias_m = j.value("los_bias_m", p.los_bias_m);
        p.los_sigma_m = j.value("los_sigma_m", p.los_sigma_m);
        if (j.contains("nlos_poly"))
            p.nlos_poly = {j["nlos_poly"].at(0).get<double>(), j["nlos_poly"].at(1).get<double>(),
                           j["nlos_poly"].at(2).get<double>()};
        p.nlos_sigma_m = j.value("nlos_sigma_m", p.nlos_sigma_m);
        p.nlos_two_cluster = j.value("nlos_two_cluster", p.nlos_two_cluster);
        if (j.contains("nlos_cluster_centers_m"))
            p.nlos_cluster_centers_m = {j["nlos_cluster_centers_m"].at(0).get<double>(),
                                        j["nlos_cluster_centers_m"].at(1).get<double>()};
        const auto excess = [](const Json& e, ExcessDelayModel base) {
            base.min_ns = e.value("min_ns", base.min_ns);
            base.max_ns = e.value("max_ns", base.max_ns);
            base.skew = e.value("skew", base.skew);
            return base;
        };
        if (j.contains("los_excess"))
            p.los_excess = excess(j["los_excess"], p.los_excess);
        if (j.contains("nlos_excess"))
            p.nlos_excess = excess(j["nlos_excess"], p.nlos_excess);
        p.lambda_L_per_ns = j.value("lambda_L_per_ns", p.lambda_L_per_ns);
        p.lambda_N_per_ns = j.value("lambda_N_per_ns", p.lambda_N_per_ns);
        p.noise_mean_dbm = j.value("noise_mean_dbm", p.noise_mean_dbm);
        p.noise_std_db = j.value("noise_std_db", p.noise_std_db);
        p.noise_tail_cap_sigma = j.value("noise_tail_cap_sigma", p.noise_tail_cap_sigma);
        p.noise_only = j.value("noise_only", p.noise_only);
        p.multipath = j.value("multipath", p.multipath);
        p.add_noise = j.value("add_noise", p.add_noise);
        p.seed = j.value("seed", p.seed);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidProfile, std::string("profile: ") + e.what());
    }
}

/// "liu", "kiruna", or a path to a profile JSON file.
inline SynthProfile load_profile(const std::string& name_or_path)
{
    if (name_or_path == "liu")
        return liu_profile();
    if (name_or_path == "kiruna")
        return kiruna_profile();
    return profile_from_json(read_json_file(name_or_path));
}

} // namespace tunnelrange::io
