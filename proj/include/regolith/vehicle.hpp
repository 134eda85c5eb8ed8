#pragma once

// Wheel and rover longitudinal kinematics: slip ratio, slip-adjusted
// actuation, Coulomb deceleration and the piecewise acceleration limiter.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "regolith/errors.hpp"

namespace regolith::vehicle {

struct WheelGeometry {
  double r = 0.09;      // base radius [m], grousers excluded
  double h = 0.01;      // grouser height [m]
  int n_grousers = 18;
  double width = 0.12;  // footprint width [m]

  /// Effective rolling radius R = r + h. Slip computed against R stays
  /// non-negative during steady driving.
  double effective_radius() const { return r + h; }

  void validate() const {
    if (!(r > 0.0)) throw ConfigError("rover.wheel.r must be > 0");
    if (!(h >= 0.0)) throw ConfigError("rover.wheel.h must be >= 0");
    if (n_grousers < 1) throw ConfigError("rover.wheel.n_grousers must be >= 1");
    if (!(width > 0.0)) throw ConfigError("rover.wheel.width must be > 0");
  }
};

struct LimiterBreakpoint {
  double v_upper = std::numeric_limits<double>::infinity();  // [m/s]
  double a_max = 0.0;                                        // [m/s^2]
};

/// Piecewise-constant ceiling on translational acceleration. The last
/// breakpoint is open-ended (v_upper = +inf).
struct LimiterParams {
  std::vector<LimiterBreakpoint> breakpoints = {
      {0.75, 3.476},
      {1.02, 0.612},
      {std::numeric_limits<double>::infinity(), 0.114},
  };

  void validate() const {
    if (breakpoints.empty()) throw ConfigError("limiter.breakpoints must not be empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& bp : breakpoints) {
      if (!(bp.v_upper > prev))
        throw ConfigError("limiter.breakpoints v_upper must be strictly increasing");
      if (!(bp.a_max > 0.0)) throw ConfigError("limiter.breakpoints a_max must be > 0");
      prev = bp.v_upper;
    }
  }
};

struct FrictionParams {
  double mu_s = 1.0;  // static, configured for completeness; breakaway is limiter-governed
  double mu_d = 0.8;  // dynamic, drives deceleration

  void validate() const {
    if (!(mu_d > 0.0)) throw ConfigError("friction.mu_d must be > 0");
    if (!(mu_s >= mu_d)) throw ConfigError("friction.mu_s must be >= friction.mu_d");
  }
};

/// Planar longitudinal state. Wheel order is FL, FR, RL, RR.
struct RoverState {
  double x = 0.0;        // [m]
  double y = 0.0;        // [m]
  double heading = 0.0;  // [rad]
  double v = 0.0;        // translational speed along heading [m/s], >= 0

  std::array<double, 4> theta_cmd{};   // commanded (visual) wheel angles [rad]
  std::array<double, 4> theta_phys{};  // slip-adjusted (physics) wheel angles [rad]
  std::array<double, 4> wheel_load{};  // vertical load per wheel [N]
  std::array<double, 4> sinkage_mm{};  // base sinkage per wheel [mm], negative down
};

/// Slip ratio:
///   s = 1 - v/(wR)   if wR >= v   (driving)
///   s = wR/v - 1     if wR <  v   (skid)
/// Returns 0 when both speeds are below 1e-6 m/s.
inline double slip_ratio(double v, double omega, double radius_eff) {
  if (v < 0.0) throw DomainError("slip_ratio: v must be >= 0");
  if (omega < 0.0) throw DomainError("slip_ratio: omega must be >= 0");
  if (!(radius_eff > 0.0)) throw DomainError("slip_ratio: effective radius must be > 0");
  const double surface = omega * radius_eff;
  constexpr double kEps = 1e-6;
  if (v < kEps && surface < kEps) return 0.0;
  if (surface >= v) return 1.0 - v / surface;
  return surface / v - 1.0;
}

/// Slip-adjusted translational velocity v = (1 - s) * v_w.
inline double target_velocity(double v_w, double s) {
  if (v_w < 0.0) throw DomainError("target_velocity: v_w must be >= 0");
  if (s < 0.0 || s > 1.0) throw DomainError("target_velocity: s must be in [0, 1]");
  return (1.0 - s) * v_w;
}

/// Maximum allowed acceleration at speed v: a_max of the first breakpoint
/// with v <= v_upper (v = 0.75 maps to the first interval).
inline double accel_limit(double v, const LimiterParams& lim) {
  if (v < 0.0) throw DomainError("accel_limit: v must be >= 0");
  for (const auto& bp : lim.breakpoints)
    if (v <= bp.v_upper) return bp.a_max;
  return lim.breakpoints.back().a_max;
}

/// One fixed-dt longitudinal step. Accelerating toward the slip-adjusted
/// target is capped by the limiter; decelerating is capped by dynamic
/// Coulomb friction mu_d * g. Position advances by the post-step velocity.
inline RoverState step_longitudinal(const RoverState& in, double v_w_cmd, double s,
                                    const WheelGeometry& geom, const FrictionParams& fric,
                                    const LimiterParams& lim, double g, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_longitudinal: dt must be > 0");
  if (!(g > 0.0)) throw DomainError("step_longitudinal: g must be > 0");
  RoverState out = in;
  const double v_t = target_velocity(v_w_cmd, s);
  double v_new = in.v;
  if (in.v < v_t) {
    v_new = std::min(v_t, in.v + accel_limit(in.v, lim) * dt);
  } else if (in.v > v_t) {
    v_new = std::max(v_t, in.v - fric.mu_d * g * dt);
  }
  out.v = v_new;
  out.x += v_new * dt * std::cos(in.heading);
  out.y += v_new * dt * std::sin(in.heading);
  const double radius = geom.effective_radius();
  for (int i = 0; i < 4; ++i) {
    out.theta_cmd[i] += (v_w_cmd / radius) * dt;
    out.theta_phys[i] += (v_new / radius) * dt;
  }
  return out;
}

struct StoppingProfile {
  double t_stop = 0.0;  // [s]
  double d_stop = 0.0;  // [m]
};

/// Closed-form stop time/distance under constant deceleration a = mu_d * g.
/// Serves as the oracle for the deceleration acceptance tests.
inline StoppingProfile stopping_profile(double v0, const FrictionParams& fric, double g) {
  if (v0 < 0.0) throw DomainError("stopping_profile: v0 must be >= 0");
  if (!(g > 0.0)) throw DomainError("stopping_profile: g must be > 0");
  if (v0 == 0.0) return {0.0, 0.0};
  const double a = fric.mu_d * g;
  return {v0 / a, v0 * v0 / (2.0 * a)};
}

}  // namespace regolith::vehicle
