#pragma once

// Calibration pipeline: raw run logs -> slip/sinkage datasets -> fitted
// model coefficients. This is the code path behind `regolith fit`.

#include <cmath>
#include <glob.h>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/errors.hpp"
#include "regolith/io.hpp"
#include "regolith/model.hpp"

namespace regolith::calibration {

enum class FitKind { slip_flat, slip_slope, sinkage };

inline FitKind fit_kind_from_string(const std::string& s) {
  if (s == "slip_flat") return FitKind::slip_flat;
  if (s == "slip_slope") return FitKind::slip_slope;
  if (s == "sinkage") return FitKind::sinkage;
  throw ConfigError("fit kind must be one of slip_flat | slip_slope | sinkage");
}

/// POSIX glob expansion, sorted. A plain path matches itself.
inline std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t hits{};
  std::vector<std::string> paths;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &hits);
  if (rc == 0) {
    for (std::size_t i = 0; i < hits.gl_pathc; ++i) paths.emplace_back(hits.gl_pathv[i]);
  }
  ::globfree(&hits);
  if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("glob failed for pattern " + pattern);
  return paths;
}

struct SlipDataset {
  std::vector<model::SlopeSample> samples;  // (v_w, alpha, s)
};

struct SinkageDataset {
  std::vector<model::SinkageSample> samples;  // (s, F_z, z)
};

/// Per-row slip observations: v_w from the (interpolated) encoder stream,
/// slip from the piecewise ratio of tracked speed to wheel surface speed.
inline SlipDataset build_slip_dataset(const std::vector<std::vector<model::RunSample>>& runs,
                                      double radius_eff) {
  SlipDataset ds;
  for (const auto& run : runs) {
    const auto slips = model::slip_from_run(run, radius_eff);
    for (std::size_t i = 0; i < run.size(); ++i)
      ds.samples.push_back({run[i].omega * radius_eff, run[i].alpha, slips[i].second});
  }
  return ds;
}

/// Rows carrying both load and measured sinkage become (s, F_z, z) samples.
inline SinkageDataset build_sinkage_dataset(const std::vector<std::vector<model::RunSample>>& runs,
                                            double radius_eff) {
  SinkageDataset ds;
  for (const auto& run : runs) {
    const auto slips = model::slip_from_run(run, radius_eff);
    for (std::size_t i = 0; i < run.size(); ++i) {
      if (!run[i].F_z || !run[i].z) continue;
      ds.samples.push_back({slips[i].second, *run[i].F_z, *run[i].z});
    }
  }
  return ds;
}

struct FitReport {
  model::ModelParams params;      // fitted fields updated, the rest defaulted
  double residual_rms = 0.0;
  std::size_t n_samples = 0;
  FitKind kind = FitKind::slip_flat;

  std::string summary() const {
    std::ostringstream os;
    switch (kind) {
      case FitKind::slip_flat:
        os << "slip_flat: a_v=" << params.slip.a_v << " b_v=" << params.slip.b_v;
        break;
      case FitKind::slip_slope:
        os << "slip_slope: a_v=" << params.slip.a_v << " b_v=" << params.slip.b_v
           << " a_alpha=" << params.slip.a_alpha << " b_alpha=" << params.slip.b_alpha;
        break;
      case FitKind::sinkage:
        os << "sinkage: c_s=" << params.sinkage.c_s << " c_F=" << params.sinkage.c_F
           << " c_0=" << params.sinkage.c_0 << " F_ref=" << params.sinkage.F_ref;
        break;
    }
    os << "  (n=" << n_samples << ", residual rms=" << residual_rms << ")";
    return os.str();
  }
};

/// Fit the requested model from run logs matching the glob pattern.
inline FitReport fit_from_logs(const std::string& data_glob, FitKind kind, double radius_eff,
                               double F_ref) {
  const auto paths = expand_glob(data_glob);
  if (paths.empty()) throw IoError("fit: no run logs match " + data_glob);
  std::vector<std::vector<model::RunSample>> runs;
  runs.reserve(paths.size());
  for (const auto& path : paths) runs.push_back(io::load_run_log(path));

  FitReport report;
  report.kind = kind;
  double sq_sum = 0.0;

  if (kind == FitKind::sinkage) {
    const auto ds = build_sinkage_dataset(runs, radius_eff);
    if (ds.samples.empty())
      throw FitError("fit: no rows with both F_z and z columns in the matched logs");
    report.params.sinkage = model::fit_sinkage(ds.samples, F_ref);
    report.n_samples = ds.samples.size();
    for (const auto& smp : ds.samples) {
      const double fitted = report.params.sinkage.c_s * smp.s +
                            report.params.sinkage.c_F * (smp.F_z - F_ref) +
                            report.params.sinkage.c_0;
      sq_sum += (smp.z - fitted) * (smp.z - fitted);
    }
  } else {
    const auto ds = build_slip_dataset(runs, radius_eff);
    report.n_samples = ds.samples.size();
    if (kind == FitKind::slip_flat) {
      std::vector<model::FlatSample> flat;
      flat.reserve(ds.samples.size());
      for (const auto& smp : ds.samples) flat.push_back({smp.v_w, smp.s});
      report.params.slip = model::fit_slip_flat(flat);
      for (const auto& smp : flat) {
        const double fitted = report.params.slip.a_v * smp.v_w + report.params.slip.b_v;
        sq_sum += (smp.s - fitted) * (smp.s - fitted);
      }
    } else {
      report.params.slip = model::fit_slip_slope(ds.samples);
      for (const auto& smp : ds.samples) {
        const double fitted =
            (report.params.slip.a_alpha * smp.v_w + report.params.slip.b_alpha) * smp.alpha *
                smp.alpha +
            report.params.slip.a_v * smp.v_w + report.params.slip.b_v;
        sq_sum += (smp.s - fitted) * (smp.s - fitted);
      }
    }
  }
  if (report.n_samples > 0) report.residual_rms = std::sqrt(sq_sum / report.n_samples);
  return report;
}

}  // namespace regolith::calibration
