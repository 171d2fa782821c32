#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyo/csv.hpp"
#include "lyo/empirical.hpp"
#include "lyo/run_config.hpp"
#include "lyo/studies.hpp"

namespace lyo {

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

inline nlohmann::json config_echo(const RunConfig& rc) {
    nlohmann::json j;
    j["subcommand"] = rc.subcommand;
    nlohmann::json echo;
    for (const auto& [k, v] : rc.resolved.entries) echo[k] = v;
    j["config"] = std::move(echo);
    j["seed"] = rc.seed;
    return j;
}

inline void write_band_csv(const std::vector<double>& grid, const TimeSeriesBand& band,
                           const std::string& unit, const std::string& path) {
    CsvWriter csv(path, {"t_s", "mean_" + unit, "ci_lo_" + unit, "ci_hi_" + unit});
    for (size_t k = 0; k < grid.size(); ++k)
        csv.row(std::vector<double>{grid[k], band.mean[k], band.lo[k], band.hi[k]});
}

inline void write_cdf_csv(const EmpiricalDistribution& dist, const std::string& unit,
                          const std::string& path) {
    CsvWriter csv(path, {"value_" + unit, "cdf"});
    const auto& s = dist.sorted_samples();
    for (size_t i = 0; i < s.size(); ++i)
        csv.row(std::vector<double>{s[i], static_cast<double>(i + 1) / static_cast<double>(s.size())});
}

inline void write_histogram_csv(const Histogram& h, const std::string& unit, const std::string& path) {
    CsvWriter csv(path, {"bin_lo_" + unit, "bin_hi_" + unit, "count", "density"});
    for (size_t k = 0; k < h.counts.size(); ++k)
        csv.row(std::vector<double>{h.edges[k], h.edges[k + 1], h.counts[k], h.density[k]});
}

inline void write_scan_csv(const std::vector<ScanPoint>& scan, const std::string& path) {
    CsvWriter csv(path, {"T_b_K", "probability"});
    for (const auto& p : scan) csv.row(std::vector<double>{p.T_b, p.probability});
}

inline const char* output_unit(const std::string& output_name) {
    if (output_name == "temperature") return "K";
    if (output_name == "front") return "m";
    return "wt_wt";
}

/// Emits the full UQ artifact set into `dir`: per-output band CSVs per
/// method, final-time CDFs and histograms, the serialized surrogate, a
/// deterministic summary, and the quarantined timing file.
inline void write_uq_artifacts(const UqStudyResult& res, const RunConfig& rc,
                               const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json summary = config_echo(rc);
    nlohmann::json jout;
    for (const auto& o : res.outputs) {
        const std::string unit = output_unit(o.name);
        nlohmann::json jo;
        if (o.pce_band) {
            write_band_csv(res.grid, *o.pce_band, unit, dir + "/pce_band_" + o.name + ".csv");
            write_cdf_csv(*o.pce_final, unit, dir + "/pce_final_cdf_" + o.name + ".csv");
            write_histogram_csv(o.pce_final->histogram(), unit,
                                dir + "/pce_final_hist_" + o.name + ".csv");
            jo["pce"] = {{"final_mean", o.pce_final->mean()},
                         {"final_variance", o.pce_final->variance()},
                         {"final_ci", {o.pce_final->confidence_interval(rc.study.ci_level).first,
                                       o.pce_final->confidence_interval(rc.study.ci_level).second}}};
        }
        if (o.mc_band) {
            write_band_csv(res.grid, *o.mc_band, unit, dir + "/mc_band_" + o.name + ".csv");
            write_cdf_csv(*o.mc_final, unit, dir + "/mc_final_cdf_" + o.name + ".csv");
            write_histogram_csv(o.mc_final->histogram(), unit,
                                dir + "/mc_final_hist_" + o.name + ".csv");
            jo["mc"] = {{"final_mean", o.mc_final->mean()},
                        {"final_variance", o.mc_final->variance()},
                        {"final_ci", {o.mc_final->confidence_interval(rc.study.ci_level).first,
                                      o.mc_final->confidence_interval(rc.study.ci_level).second}}};
        }
        if (o.ks_final) jo["ks_final"] = *o.ks_final;
        jout[o.name] = std::move(jo);
    }
    summary["outputs"] = std::move(jout);
    summary["pce_runs"] = res.pce_runs;
    summary["mc_runs"] = res.mc_runs;
    summary["pce_failures"] = res.pce_failures;
    summary["mc_failures"] = res.mc_failures;
    write_json_file(summary, dir + "/summary.json");
    if (res.surrogate) save_surrogate(*res.surrogate, dir + "/surrogate.json");
    if (res.ensemble) {
        const Ensemble& e = *res.ensemble;
        std::vector<std::string> sample_cols;
        for (const auto& in : rc.study.inputs) sample_cols.push_back(in.name);
        CsvWriter samples_csv(dir + "/mc_samples.csv", sample_cols);
        for (size_t i = 0; i < e.n; ++i)
            samples_csv.row(std::span<const double>(e.samples.data() + i * e.input_dim, e.input_dim));
        std::vector<std::string> out_cols;
        for (const auto& o : res.outputs)
            for (double t : res.grid) out_cols.push_back(o.name + "@" + format_double(t) + "s");
        CsvWriter outputs_csv(dir + "/mc_outputs.csv", out_cols);
        for (size_t i = 0; i < e.n; ++i)
            outputs_csv.row(std::span<const double>(e.outputs.data() + i * e.output_dim, e.output_dim));
    }

    nlohmann::json timings;
    timings["pce_seconds"] = res.pce_seconds;
    timings["mc_seconds"] = res.mc_seconds;
    write_json_file(timings, dir + "/timings.json");
}

} // namespace lyo
