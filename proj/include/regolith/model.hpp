#pragma once

// Regression models for slip and sinkage plus the least-squares calibration
// that recovers their coefficients from run data.
//
// Unit conventions: wheel speed v_w in m/s, slope angle alpha in degrees,
// sinkage in mm (negative down). Conversions to SI happen at module
// boundaries, not here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "regolith/errors.hpp"
#include "regolith/vehicle.hpp"

namespace regolith::model {

/// Slope-angle window the slip model has been validated for.
inline constexpr double kAlphaValidityDeg = 25.0;

struct SlipModelParams {
  double a_v = 0.0265;      // per (m/s)
  double b_v = 0.0256;      // intercept
  double a_alpha = 0.00522; // per (deg^2 * m/s)
  double b_alpha = 0.00105; // per deg^2
  double s_max = 0.95;      // clamp ceiling; 1.0 would immobilise the rover for good

  void validate() const {
    if (!(s_max > 0.0 && s_max < 1.0)) throw ConfigError("model.slip.s_max must be in (0, 1)");
  }
};

struct SinkageModelParams {
  double c_s = -33.56;   // mm per unit slip
  double c_F = -0.9291;  // mm/N
  double c_0 = -3.11;    // static-sinkage intercept [mm]
  double F_ref = 8.72;   // nominal per-wheel load [N]

  void validate() const {
    if (!(F_ref > 0.0)) throw ConfigError("model.sinkage.F_ref must be > 0");
  }
};

struct ModelParams {
  SlipModelParams slip;
  SinkageModelParams sinkage;
};

/// One row of a run log. t strictly increasing within a run; F_z and z are
/// optional columns.
struct RunSample {
  double t = 0.0;      // [s]
  double v = 0.0;      // translational speed [m/s]
  double omega = 0.0;  // wheel angular velocity [rad/s]
  double alpha = 0.0;  // slope angle [deg]
  std::optional<double> F_z;  // vertical load [N]
  std::optional<double> z;    // measured sinkage [mm], negative down
};

namespace detail {

inline double slip_flat_raw(double v_w, const SlipModelParams& p) {
  return p.a_v * v_w + p.b_v;
}

/// Solve the K x K normal equations A x = b by Gaussian elimination with
/// partial pivoting. Throws FitError on a (near-)singular system.
template <std::size_t K>
std::array<double, K> solve_normal(std::array<std::array<double, K>, K> a,
                                   std::array<double, K> b) {
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1e-300);

  for (std::size_t col = 0; col < K; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < K; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) <= tol)
      throw FitError("least squares: rank-deficient design matrix");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < K; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < K; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, K> x{};
  for (std::size_t i = K; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < K; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

/// Ordinary least squares over rows of K regressors.
template <std::size_t K>
std::array<double, K> least_squares(std::span<const std::array<double, K>> rows,
                                    std::span<const double> rhs) {
  std::array<std::array<double, K>, K> ata{};
  std::array<double, K> atb{};
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < K; ++i) {
      atb[i] += rows[n][i] * rhs[n];
      for (std::size_t j = 0; j < K; ++j) ata[i][j] += rows[n][i] * rows[n][j];
    }
  }
  return solve_normal<K>(ata, atb);
}

}  // namespace detail

/// Flat-terrain slip: a_v * v_w + b_v, clamped to [0, s_max].
inline double slip_flat(double v_w, const SlipModelParams& p) {
  if (v_w < 0.0) throw DomainError("slip_flat: v_w must be >= 0");
  return std::clamp(detail::slip_flat_raw(v_w, p), 0.0, p.s_max);
}

/// Slope slip: (a_alpha * v_w + b_alpha) * alpha^2 on top of the flat model,
/// clamped to [0, s_max]. alpha in degrees, even in sign; must lie inside the
/// validity window.
inline double slip_slope(double v_w, double alpha_deg, const SlipModelParams& p) {
  if (v_w < 0.0) throw DomainError("slip_slope: v_w must be >= 0");
  if (std::abs(alpha_deg) > kAlphaValidityDeg)
    throw DomainError("slip_slope: alpha outside validity window [-25, 25] deg");
  const double quad = (p.a_alpha * v_w + p.b_alpha) * alpha_deg * alpha_deg;
  return std::clamp(quad + detail::slip_flat_raw(v_w, p), 0.0, p.s_max);
}

/// Sinkage in mm (negative down): c_s * s + c_F * (F_z - F_ref) + c_0.
inline double sinkage(double s, double F_z, const SinkageModelParams& p) {
  if (s < 0.0 || s > 1.0) throw DomainError("sinkage: s must be in [0, 1]");
  if (F_z < 0.0) throw DomainError("sinkage: F_z must be >= 0");
  return p.c_s * s + p.c_F * (F_z - p.F_ref) + p.c_0;
}

struct FlatSample {
  double v_w = 0.0;
  double s = 0.0;
};

struct SlopeSample {
  double v_w = 0.0;
  double alpha = 0.0;  // [deg]
  double s = 0.0;
};

struct SinkageSample {
  double s = 0.0;
  double F_z = 0.0;  // [N]
  double z = 0.0;    // [mm]
};

/// Least-squares line through (v_w, s) points. Only a_v and b_v are fitted;
/// the slope terms stay zero and s_max keeps its default.
inline SlipModelParams fit_slip_flat(std::span<const FlatSample> samples) {
  if (samples.size() < 2) throw FitError("fit_slip_flat: need at least 2 samples");
  std::vector<std::array<double, 2>> rows;
  std::vector<double> rhs;
  rows.reserve(samples.size());
  rhs.reserve(samples.size());
  for (const auto& smp : samples) {
    rows.push_back({smp.v_w, 1.0});
    rhs.push_back(smp.s);
  }
  const auto coef = detail::least_squares<2>(rows, rhs);
  SlipModelParams p;
  p.a_v = coef[0];
  p.b_v = coef[1];
  p.a_alpha = 0.0;
  p.b_alpha = 0.0;
  return p;
}

/// Two-stage fit of the combined slip model: the flat line comes from the
/// alpha = 0 subset, then (a_alpha, b_alpha) are regressed on the residual
/// s - slip_flat(v_w) against (v_w * alpha^2, alpha^2).
inline SlipModelParams fit_slip_slope(std::span<const SlopeSample> samples) {
  constexpr double kZeroAlphaTol = 1e-9;
  std::vector<FlatSample> flat;
  std::vector<std::array<double, 2>> rows;
  std::vector<double> rhs;
  for (const auto& smp : samples) {
    if (std::abs(smp.alpha) <= kZeroAlphaTol) flat.push_back({smp.v_w, smp.s});
  }
  if (flat.empty()) throw FitError("fit_slip_slope: no alpha = 0 subset");
  SlipModelParams p = fit_slip_flat(flat);
  for (const auto& smp : samples) {
    if (std::abs(smp.alpha) <= kZeroAlphaTol) continue;
    const double a2 = smp.alpha * smp.alpha;
    rows.push_back({smp.v_w * a2, a2});
    rhs.push_back(smp.s - detail::slip_flat_raw(smp.v_w, p));
  }
  if (rows.size() < 2) throw FitError("fit_slip_slope: need at least 2 nonzero-slope samples");
  const auto coef = detail::least_squares<2>(rows, rhs);
  p.a_alpha = coef[0];
  p.b_alpha = coef[1];
  return p;
}

/// Least-squares plane z = c_s * s + c_F * (F_z - F_ref) + c_0. F_ref is
/// supplied by the caller, not fitted.
inline SinkageModelParams fit_sinkage(std::span<const SinkageSample> samples, double F_ref) {
  if (!(F_ref > 0.0)) throw FitError("fit_sinkage: F_ref must be > 0");
  if (samples.size() < 3) throw FitError("fit_sinkage: need at least 3 samples");
  std::vector<std::array<double, 3>> rows;
  std::vector<double> rhs;
  rows.reserve(samples.size());
  rhs.reserve(samples.size());
  for (const auto& smp : samples) {
    rows.push_back({smp.s, smp.F_z - F_ref, 1.0});
    rhs.push_back(smp.z);
  }
  const auto coef = detail::least_squares<3>(rows, rhs);
  SinkageModelParams p;
  p.c_s = coef[0];
  p.c_F = coef[1];
  p.c_0 = coef[2];
  p.F_ref = F_ref;
  return p;
}

/// Per-sample slip ratio of a time-aligned run (encoder already resampled
/// onto the velocity timestamps). Output length equals input length.
inline std::vector<std::pair<double, double>> slip_from_run(std::span<const RunSample> samples,
                                                            double radius_eff) {
  if (!(radius_eff > 0.0)) throw DomainError("slip_from_run: R_eff must be > 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(samples.size());
  for (const auto& smp : samples) {
    if (smp.v < 0.0) throw DomainError("slip_from_run: sample with v < 0");
    out.emplace_back(smp.t, vehicle::slip_ratio(smp.v, smp.omega, radius_eff));
  }
  return out;
}

}  // namespace regolith::model
