// regolith command-line front end: scenario execution, model fitting,
// steady-state sweeps and DEM export.
//
// Exit codes: 0 success, 1 configuration/input error, 2 runtime error.
// Diagnostics go to stderr; results go to files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regolith/calibration.hpp"
#include "regolith/config.hpp"
#include "regolith/errors.hpp"
#include "regolith/io.hpp"
#include "regolith/sim.hpp"
#include "regolith/terrain.hpp"

namespace {

namespace fs = std::filesystem;
using namespace regolith;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

terrain::Channel channel_from_string(const std::string& name) {
  if (name == "base") return terrain::Channel::base;
  if (name == "depth") return terrain::Channel::depth;
  if (name == "trace") return terrain::Channel::trace;
  if (name == "rendered") return terrain::Channel::rendered;
  throw ConfigError("channel must be one of base | depth | trace | rendered");
}

/// Binary mask of cells whose permanent depth exceeds the threshold.
void export_depth_mask(const terrain::TerrainGrid& grid, const std::string& path,
                       double threshold_mm) {
  std::ofstream out(path);
  if (!out) throw IoError("mask export: cannot open " + path);
  char buf[64];
  out << "ncols " << grid.nx() << "\n";
  out << "nrows " << grid.ny() << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", grid.origin_x());
  out << "xllcorner " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", grid.origin_y());
  out << "yllcorner " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", grid.resolution());
  out << "cellsize " << buf << "\n";
  out << "NODATA_value -9999\n";
  for (int j = grid.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const bool deep = -grid.depth(i, j) * 1000.0 > threshold_mm;
      out << (deep ? 1 : 0) << (i + 1 < grid.nx() ? " " : "");
    }
    out << "\n";
  }
  if (!out) throw IoError("mask export: write failed for " + path);
}

std::string mask_path_for(const std::string& out_asc) {
  fs::path p(out_asc);
  fs::path stem = p.stem();
  stem += "_mask";
  stem += p.extension();
  return (p.parent_path() / stem).string();
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  sim::Scenario sc;
  try {
    sc = config::load_scenario(config_path);
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    sim::WorldState ws{.grid = terrain::TerrainGrid(2, 2, 1.0, 0.0, 0.0)};
    const auto records = sim::run_scenario(sc, ws);
    sim::write_telemetry_csv((fs::path(out_dir) / "telemetry.csv").string(), records);

    const auto stats = sim::error_report(records, sc.models, sc.settle_s, sc.dt());
    nlohmann::json err_json = {
        {"slip_mae_pct", stats.slip_mae_pct},
        {"slip_max_pct", stats.slip_max_pct},
        {"sinkage_mae_mm", stats.sinkage_mae_mm},
        {"steady_samples", stats.steady_samples},
        {"settle_s", sc.settle_s},
    };
    std::ofstream err_out(fs::path(out_dir) / "errors.json");
    err_out << err_json.dump(2) << "\n";
    if (!err_out) throw IoError("cannot write errors.json");

    if (sc.terrain.deformation_enabled) {
      ws.grid.export_asc((fs::path(out_dir) / "dem_rendered.asc").string(),
                         terrain::Channel::rendered);
      ws.grid.export_asc((fs::path(out_dir) / "dem_depth.asc").string(),
                         terrain::Channel::depth);
      ws.grid.export_asc((fs::path(out_dir) / "dem_trace.asc").string(),
                         terrain::Channel::trace);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_fit(const std::string& data_glob, const std::string& kind_str,
            const std::string& out_path, double r_eff, double f_ref) {
  try {
    const auto kind = calibration::fit_kind_from_string(kind_str);
    const auto report = calibration::fit_from_logs(data_glob, kind, r_eff, f_ref);
    io::save_model_params(out_path, report.params);
    std::cout << report.summary() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& v_list,
              const std::vector<double>& alpha_list, const std::string& out_csv) {
  sim::Scenario sc;
  std::vector<sim::SweepPoint> points;
  try {
    sc = config::load_scenario(config_path);
    if (v_list.empty() || alpha_list.empty())
      throw ConfigError("sweep: --v-list and --alpha-list must not be empty");
    points = sim::sweep(v_list, alpha_list, sc);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  try {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw IoError("sweep: cannot open " + out_csv);
    out << sim::sweep_to_csv(points);
    if (!out) throw IoError("sweep: write failed for " + out_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_export_dem(const std::string& config_path, const std::string& out_asc,
                   const std::string& channel, double threshold_mm, bool with_threshold) {
  sim::Scenario sc;
  terrain::Channel ch;
  try {
    sc = config::load_scenario(config_path);
    ch = channel_from_string(channel);
    if (!sc.terrain.deformation_enabled)
      throw ConfigError("export-dem requires terrain.deformation_enabled = true");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    sim::WorldState ws{.grid = terrain::TerrainGrid(2, 2, 1.0, 0.0, 0.0)};
    sim::run_scenario(sc, ws);
    ws.grid.export_asc(out_asc, ch);
    if (with_threshold) export_depth_mask(ws.grid, mask_path_for(out_asc), threshold_mm);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regolith: data-driven wheel slip, sinkage and terrain deformation simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_glob, kind, out_path, out_csv, out_asc;
  std::string channel = "rendered";
  double r_eff = 0.10;
  double f_ref = 8.72;
  double threshold_mm = 12.0;
  std::vector<double> v_list, alpha_list;

  auto* run = app.add_subcommand("run", "Run a scenario; writes telemetry.csv and errors.json");
  run->add_option("config", config_path, "Scenario config JSON")->required();
  run->add_option("out_dir", out_dir, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Fit model coefficients from run-log CSVs");
  fit->add_option("data_glob", data_glob, "Glob pattern for run logs (quote it)")->required();
  fit->add_option("kind", kind, "slip_flat | slip_slope | sinkage")->required();
  fit->add_option("out_path", out_path, "Output model-parameter JSON")->required();
  fit->add_option("--r-eff", r_eff, "Effective wheel radius r + h [m]")
      ->capture_default_str();
  fit->add_option("--f-ref", f_ref, "Reference load for the sinkage fit [N]")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Steady-state slip map over a (v_w, alpha) grid");
  sweep->add_option("config", config_path, "Scenario config JSON (template)")->required();
  sweep->add_option("out_csv", out_csv, "Output CSV")->required();
  sweep->add_option("--v-list", v_list, "Wheel speeds [m/s]")->expected(-1);
  sweep->add_option("--alpha-list", alpha_list, "Slope angles [deg]")->expected(-1);

  auto* dem = app.add_subcommand("export-dem", "Run a deformation scenario and export the DEM");
  dem->add_option("config", config_path, "Scenario config JSON")->required();
  dem->add_option("out_asc", out_asc, "Output ESRI ASCII grid")->required();
  dem->add_option("--channel", channel, "base | depth | trace | rendered")
      ->capture_default_str();
  auto* thr = dem->add_option("--threshold-mm", threshold_mm,
                              "Also write a binary mask of cells deeper than this");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_dir);
  if (fit->parsed()) return cmd_fit(data_glob, kind, out_path, r_eff, f_ref);
  if (sweep->parsed()) return cmd_sweep(config_path, v_list, alpha_list, out_csv);
  if (dem->parsed())
    return cmd_export_dem(config_path, out_asc, channel, threshold_mm, thr->count() > 0);
  return kExitConfig;
}
