#pragma once

// Compliant (spring-damper) vertical contact per wheel. Stiffness is derived
// from the sinkage regression each step, damping is critical, and the
// penetration is resolved either quasi-statically or by integrating the
// vertical ODE.
//
// Internal convention: penetration p of the physics geometry in meters,
// positive into the ground (p = -z of the surface-frame coordinate). The
// regression side speaks mm, negative down; conversions happen only here.

#include <algorithm>
#include <cmath>
#include <optional>

#include "regolith/errors.hpp"
#include "regolith/model.hpp"
#include "regolith/vehicle.hpp"

namespace regolith::contact {

enum class Mode { quasi_static, ode };

struct ContactParams {
  int n_points = 1;          // contact points per wheel
  double F_z_min = 0.5;      // force floor [N]
  double denom_min = 0.001;  // stiffness-denominator floor [m]
  double v_min = 0.1;        // sinkage latch threshold [m/s]
  Mode mode = Mode::quasi_static;

  void validate() const {
    if (n_points < 1) throw ConfigError("contact.n_points must be >= 1");
    if (!(F_z_min > 0.0)) throw ConfigError("contact.F_z_min must be > 0");
    if (!(denom_min > 0.0)) throw ConfigError("contact.denom_min must be > 0");
    if (!(v_min >= 0.0)) throw ConfigError("contact.v_min must be >= 0");
  }
};

struct ContactState {
  double k = 0.0;             // stiffness [N/m]
  double c = 0.0;             // damping [N*s/m]
  double p = 0.0;             // penetration of the physics geometry [m], >= 0 in contact
  double pdot = 0.0;          // penetration rate [m/s] (= -zdot), ODE mode
  double z_latched_mm = 0.0;  // most recent committed sinkage [mm], negative down
};

/// Stiffness that reproduces the target sinkage under load F_z:
///   k = max(F_z, F_z_min) / (N * max(|z_target| + h, denom_min))
/// with z_target in mm and h in m. Equals k = -(1/N) F_z / (z - h) for
/// negative z. The floors absorb degenerate inputs, so this never throws.
inline double stiffness(double F_z, double z_target_mm, double h, int n_points,
                        const ContactParams& params) {
  const double force = std::max(F_z, params.F_z_min);
  const double denom = std::max(std::abs(z_target_mm) / 1000.0 + h, params.denom_min);
  return force / (static_cast<double>(std::max(n_points, 1)) * denom);
}

/// c = 2 sqrt(k m): fastest non-oscillatory settling.
inline double critical_damping(double k, double m) {
  if (!(k > 0.0)) throw DomainError("critical_damping: k must be > 0");
  if (!(m > 0.0)) throw DomainError("critical_damping: m must be > 0");
  return 2.0 * std::sqrt(k * m);
}

/// Quasi-static penetration p = F_z / k.
inline double quasi_static_penetration(double F_z, double k) {
  if (F_z < 0.0) throw DomainError("quasi_static_penetration: F_z must be >= 0");
  if (!(k > 0.0)) throw DomainError("quasi_static_penetration: k must be > 0");
  return F_z / k;
}

/// Base-radius sinkage reported for a penetration p of the R = r + h
/// geometry: z = -(p - h) * 1000 mm (negative down).
inline double base_sinkage_mm(double p, double h) { return -(p - h) * 1000.0; }

/// Contact normal force: spring term plus damping only while compressing.
inline double contact_force(const ContactState& st) {
  if (st.p <= 0.0) return 0.0;
  return st.k * st.p + st.c * std::max(0.0, st.pdot);
}

/// Semi-implicit integration of the vertical contact ODE
///   pddot = g - (k/m) p - (c/m) pdot     while p > 0,
///   pddot = g                            out of contact,
/// at substeps of at most 1 ms.
inline ContactState step_vertical_ode(ContactState st, double m, double g, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_vertical_ode: dt must be > 0");
  if (!(m > 0.0)) throw DomainError("step_vertical_ode: m must be > 0");
  if (!std::isfinite(st.p) || !std::isfinite(st.pdot) || !std::isfinite(st.k) ||
      !std::isfinite(st.c))
    throw NumericError("step_vertical_ode: non-finite contact state");
  const int n_sub = std::max(1, static_cast<int>(std::ceil(dt / 0.001)));
  const double h_sub = dt / n_sub;
  for (int i = 0; i < n_sub; ++i) {
    double acc = g;
    if (st.p > 0.0) acc -= (st.k / m) * st.p + (st.c / m) * st.pdot;
    st.pdot += acc * h_sub;
    st.p += st.pdot * h_sub;
  }
  if (!std::isfinite(st.p) || !std::isfinite(st.pdot))
    throw NumericError("step_vertical_ode: integration diverged");
  return st;
}

/// Sinkage latch: below v_min the deeper (more negative) of the previous and
/// new values wins, preventing the wheel from visibly rising after a skid
/// stop. Above the threshold the new value passes through.
inline double latch_sinkage(double z_prev_mm, double z_new_mm, double v, double v_min) {
  if (v <= v_min) return std::min(z_prev_mm, z_new_mm);
  return z_new_mm;
}

/// Full per-step contact update:
///   sinkage regression -> latch -> stiffness -> critical damping ->
///   penetration (quasi-static or ODE) -> commit latched sinkage.
/// k_override, when present (rigid obstacle cell), replaces the regression
/// stiffness.
inline ContactState update_contact(double F_z, double s, double v,
                                   const vehicle::WheelGeometry& geom,
                                   const model::SinkageModelParams& sink_model,
                                   const ContactParams& params, const ContactState& state,
                                   double m, double g, double dt,
                                   std::optional<double> k_override = std::nullopt) {
  if (!std::isfinite(F_z) || !std::isfinite(s) || !std::isfinite(v))
    throw NumericError("update_contact: non-finite input");
  double z_target = model::sinkage(s, F_z, sink_model);
  z_target = latch_sinkage(state.z_latched_mm, z_target, v, params.v_min);

  ContactState out = state;
  out.k = k_override ? *k_override : stiffness(F_z, z_target, geom.h, params.n_points, params);
  out.c = critical_damping(out.k, m);
  if (params.mode == Mode::quasi_static) {
    out.p = quasi_static_penetration(F_z, out.k);
    out.pdot = 0.0;
  } else {
    out = step_vertical_ode(out, m, g, dt);
  }
  out.z_latched_mm = z_target;
  return out;
}

}  // namespace regolith::contact
