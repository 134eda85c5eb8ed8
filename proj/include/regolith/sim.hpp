#pragma once

// Fixed-timestep orchestrator: per step it reads the command profile, queries
// the local slope, evaluates the slip model, advances the longitudinal state,
// distributes wheel loads, updates the compliant contacts and (optionally)
// imprints the terrain, emitting one telemetry record per step.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "regolith/contact.hpp"
#include "regolith/errors.hpp"
#include "regolith/model.hpp"
#include "regolith/terrain.hpp"
#include "regolith/vehicle.hpp"

namespace regolith::sim {

enum class TerrainKind { flat, slope, heightmap };
enum class PathKind { straight, arc };

struct RockSpec {
  double x = 0.0, y = 0.0;  // center [m]
  double radius = 0.0;      // [m]
  double k = 1e7;           // override stiffness [N/m]
};

struct TerrainConfig {
  TerrainKind kind = TerrainKind::flat;
  double slope_deg = 0.0;
  std::string heightmap_path;
  double size_x = 40.0;   // [m]
  double size_y = 6.0;    // [m]
  double resolution = 0.025;
  double origin_x = -2.0;
  double origin_y = -3.0;
  bool deformation_enabled = false;
  terrain::TracePatternParams trace;
  std::vector<RockSpec> rocks;
};

struct RoverConfig {
  double mass = 21.63;  // [kg]
  vehicle::WheelGeometry wheel;
  double wheelbase = 0.55;   // [m]
  double track = 0.40;       // [m]
  double cg_height = 0.2;    // [m]
  double init_x = 0.0;
  double init_y = 0.0;
  double init_heading = 0.0;  // [rad]
  // Fixed per-wheel load [N]; bypasses the pitch-shift distribution.
  std::array<std::optional<double>, 4> wheel_load_override{};
};

struct Waypoint {
  double t = 0.0;    // [s]
  double v_w = 0.0;  // commanded wheel surface speed [m/s]
};

struct CommandProfile {
  std::vector<Waypoint> waypoints = {{0.0, 0.0}};  // step-hold
  PathKind path = PathKind::straight;
  double arc_radius = 2.0;      // [m]; positive turns left
  double arc_load_boost = 0.25; // extra load fraction on the outer front wheel
};

struct Scenario {
  double duration_s = 10.0;
  double dt_hz = 30.0;
  double gravity = 1.62;  // [m/s^2]
  double settle_s = 3.0;  // steady-state window starts here
  RoverConfig rover;
  TerrainConfig terrain;
  CommandProfile command;
  vehicle::FrictionParams friction;
  vehicle::LimiterParams limiter;
  contact::ContactParams contact_params;
  model::ModelParams models;

  double dt() const { return 1.0 / dt_hz; }

  void validate() const {
    if (!(dt_hz > 0.0)) throw ConfigError("sim.dt_hz must be > 0");
    if (!(duration_s > 0.0)) throw ConfigError("sim.duration_s must be > 0");
    if (!(gravity > 0.0)) throw ConfigError("sim.gravity must be > 0");
    if (!(settle_s >= 0.0)) throw ConfigError("sim.settle_s must be >= 0");
    if (!(rover.mass > 0.0)) throw ConfigError("rover.mass must be > 0");
    if (!(rover.wheelbase > 0.0)) throw ConfigError("rover.wheelbase must be > 0");
    if (!(rover.track > 0.0)) throw ConfigError("rover.track must be > 0");
    if (!(rover.cg_height >= 0.0)) throw ConfigError("rover.cg_height must be >= 0");
    rover.wheel.validate();
    for (const auto& ovr : rover.wheel_load_override)
      if (ovr && !(*ovr >= 0.0))
        throw ConfigError("rover.wheel_load_override entries must be >= 0");
    friction.validate();
    limiter.validate();
    contact_params.validate();
    models.slip.validate();
    models.sinkage.validate();
    terrain.trace.validate();
    if (!(terrain.resolution > 0.0)) throw ConfigError("terrain.resolution must be > 0");
    if (!(terrain.size_x > 0.0)) throw ConfigError("terrain.size_x must be > 0");
    if (!(terrain.size_y > 0.0)) throw ConfigError("terrain.size_y must be > 0");
    if (terrain.kind == TerrainKind::heightmap && terrain.heightmap_path.empty())
      throw ConfigError("terrain.heightmap_path must be set for heightmap terrain");
    for (const auto& rock : terrain.rocks)
      if (!(rock.radius > 0.0) || !(rock.k > 0.0))
        throw ConfigError("terrain.rocks entries need radius > 0 and k > 0");
    if (command.waypoints.empty()) throw ConfigError("command.waypoints must not be empty");
    if (command.waypoints.front().t != 0.0)
      throw ConfigError("command.waypoints must start at t = 0");
    double prev = 0.0;
    for (const auto& wp : command.waypoints) {
      if (wp.t < prev) throw ConfigError("command.waypoints times must be non-decreasing");
      if (wp.v_w < 0.0) throw ConfigError("command.waypoints v_w must be >= 0");
      prev = wp.t;
    }
    if (command.path == PathKind::arc && command.arc_radius == 0.0)
      throw ConfigError("command.arc_radius must be nonzero");
  }
};

/// One telemetry row. Wheel order FL, FR, RL, RR. The slip column is the
/// measured ratio of body speed against the commanded wheel surface speed.
struct TelemetryRecord {
  double t = 0.0;
  double v_cmd = 0.0;  // omega_cmd * R [m/s]
  double v = 0.0;      // [m/s]
  double s = 0.0;
  double alpha = 0.0;  // [deg]
  std::array<double, 4> z_mm{};
  std::array<double, 4> F_z{};
  std::array<double, 4> k{};
  double x = 0.0;
  double y = 0.0;
  double theta_cmd = 0.0;   // wheel 0 [rad]
  double theta_phys = 0.0;  // wheel 0 [rad]
};

struct WorldState {
  vehicle::RoverState rover;
  std::array<contact::ContactState, 4> contacts{};
  std::array<double, 4> odometer{};  // per-wheel travelled arc length [m]
  terrain::TerrainGrid grid;
  double t = 0.0;
};

inline terrain::TerrainGrid build_terrain(const TerrainConfig& cfg) {
  const int nx = std::max(2, static_cast<int>(std::round(cfg.size_x / cfg.resolution)));
  const int ny = std::max(2, static_cast<int>(std::round(cfg.size_y / cfg.resolution)));
  terrain::TerrainGrid grid = [&] {
    switch (cfg.kind) {
      case TerrainKind::flat:
        return terrain::TerrainGrid::flat(nx, ny, cfg.resolution, cfg.origin_x, cfg.origin_y);
      case TerrainKind::slope:
        return terrain::TerrainGrid::inclined(nx, ny, cfg.resolution, cfg.origin_x,
                                              cfg.origin_y, cfg.slope_deg);
      case TerrainKind::heightmap:
        return terrain::TerrainGrid::import_asc(cfg.heightmap_path);
    }
    throw ConfigError("terrain.type is invalid");
  }();
  for (const auto& rock : cfg.rocks) grid.set_rock(rock.x, rock.y, rock.radius, rock.k);
  return grid;
}

inline WorldState init_world(const Scenario& sc) {
  WorldState ws{.grid = build_terrain(sc.terrain)};
  ws.rover.x = sc.rover.init_x;
  ws.rover.y = sc.rover.init_y;
  ws.rover.heading = sc.rover.init_heading;
  return ws;
}

inline double command_at(const CommandProfile& cmd, double t) {
  double v_w = cmd.waypoints.front().v_w;
  for (const auto& wp : cmd.waypoints) {
    if (wp.t <= t) v_w = wp.v_w;
    else break;
  }
  return v_w;
}

namespace detail {

/// Wheel positions in world frame (FL, FR, RL, RR).
inline std::array<std::pair<double, double>, 4> wheel_positions(const RoverConfig& rover,
                                                                const vehicle::RoverState& st) {
  const double cs = std::cos(st.heading);
  const double sn = std::sin(st.heading);
  const double hx = rover.wheelbase / 2.0;
  const double hy = rover.track / 2.0;
  auto place = [&](double bx, double by) {
    return std::pair{st.x + bx * cs - by * sn, st.y + bx * sn + by * cs};
  };
  return {place(hx, hy), place(hx, -hy), place(-hx, hy), place(-hx, -hy)};
}

/// Static load split: uniform mg/4 with a front/rear shift proportional to
/// (h_cg / L) tan(alpha); uphill loads the rear axle. Arc paths boost the
/// outer front wheel; explicit overrides win over everything.
inline std::array<double, 4> distribute_loads(const Scenario& sc, double alpha_deg) {
  const double base = sc.rover.mass * sc.gravity / 4.0;
  const double shift =
      (sc.rover.cg_height / sc.rover.wheelbase) * std::tan(alpha_deg * std::numbers::pi / 180.0);
  std::array<double, 4> load{base * (1.0 - shift), base * (1.0 - shift),
                             base * (1.0 + shift), base * (1.0 + shift)};
  if (sc.command.path == PathKind::arc) {
    const int outer_front = sc.command.arc_radius > 0.0 ? 1 : 0;  // left turn -> FR outer
    load[outer_front] *= 1.0 + sc.command.arc_load_boost;
  }
  for (int i = 0; i < 4; ++i) {
    if (sc.rover.wheel_load_override[i]) load[i] = *sc.rover.wheel_load_override[i];
    load[i] = std::max(0.0, load[i]);
  }
  return load;
}

}  // namespace detail

/// Advance the world by one timestep and return the telemetry record for it.
inline TelemetryRecord step(const Scenario& sc, WorldState& ws) {
  const double dt = sc.dt();
  const double v_w = command_at(sc.command, ws.t);
  const double radius = sc.rover.wheel.effective_radius();

  double alpha = ws.grid.slope_at(ws.rover.x, ws.rover.y, ws.rover.heading);
  const double alpha_model = std::clamp(alpha, -model::kAlphaValidityDeg,
                                        model::kAlphaValidityDeg);
  const double s_model = model::slip_slope(v_w, alpha_model, sc.models.slip);

  vehicle::RoverState rover = vehicle::step_longitudinal(
      ws.rover, v_w, s_model, sc.rover.wheel, sc.friction, sc.limiter, sc.gravity, dt);
  if (sc.command.path == PathKind::arc)
    rover.heading += rover.v * dt / sc.command.arc_radius;

  // Measured slip: body speed against the commanded wheel surface speed,
  // exactly what an encoder-plus-tracking rig would report.
  const double s_meas = vehicle::slip_ratio(rover.v, v_w / radius, radius);
  // Sinkage responds to slip magnitude; a full skid digs in as hard as a
  // full spin-in-place.
  const double s_sink = std::clamp(std::abs(s_meas), 0.0, 1.0);

  const auto loads = detail::distribute_loads(sc, alpha_model);
  const auto wheel_pos = detail::wheel_positions(sc.rover, rover);

  TelemetryRecord rec;
  for (int wheel = 0; wheel < 4; ++wheel) {
    const auto [wx, wy] = wheel_pos[wheel];
    const std::optional<double> k_over = ws.grid.stiffness_override_at(wx, wy);
    const double m_eff = sc.rover.wheel_load_override[wheel]
                             ? *sc.rover.wheel_load_override[wheel] / sc.gravity
                             : sc.rover.mass / 4.0;
    ws.contacts[wheel] =
        contact::update_contact(loads[wheel], s_sink, rover.v, sc.rover.wheel,
                                sc.models.sinkage, sc.contact_params, ws.contacts[wheel],
                                m_eff, sc.gravity, dt, k_over);
    const double z_mm = contact::base_sinkage_mm(ws.contacts[wheel].p, sc.rover.wheel.h);
    rover.wheel_load[wheel] = loads[wheel];
    rover.sinkage_mm[wheel] = z_mm;
    ws.odometer[wheel] += rover.v * dt;

    if (sc.terrain.deformation_enabled) {
      ws.grid.imprint_wheel(wx, wy, rover.heading, z_mm, s_sink, loads[wheel],
                            sc.models.sinkage.F_ref, sc.rover.wheel, sc.terrain.trace,
                            ws.odometer[wheel]);
    }
    rec.z_mm[wheel] = z_mm;
    rec.F_z[wheel] = loads[wheel];
    rec.k[wheel] = ws.contacts[wheel].k;
  }

  rec.t = ws.t;
  rec.v_cmd = v_w;
  rec.v = rover.v;
  rec.s = s_meas;
  rec.alpha = alpha;
  rec.x = rover.x;
  rec.y = rover.y;
  rec.theta_cmd = rover.theta_cmd[0];
  rec.theta_phys = rover.theta_phys[0];

  ws.rover = rover;
  ws.t += dt;
  return rec;
}

/// Run a scenario start to finish. Deterministic: identical scenarios yield
/// bit-identical telemetry.
inline std::vector<TelemetryRecord> run_scenario(const Scenario& sc) {
  sc.validate();
  WorldState ws = init_world(sc);
  const std::size_t n_steps =
      static_cast<std::size_t>(std::ceil(sc.duration_s * sc.dt_hz - 1e-9));
  std::vector<TelemetryRecord> records;
  records.reserve(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) {
    ws.t = i * sc.dt();  // keep t = k*dt exact against accumulation drift
    records.push_back(step(sc, ws));
  }
  return records;
}

/// Run a scenario and also return the deformed terrain.
inline std::vector<TelemetryRecord> run_scenario(const Scenario& sc, WorldState& ws_out) {
  sc.validate();
  ws_out = init_world(sc);
  const std::size_t n_steps =
      static_cast<std::size_t>(std::ceil(sc.duration_s * sc.dt_hz - 1e-9));
  std::vector<TelemetryRecord> records;
  records.reserve(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) {
    ws_out.t = i * sc.dt();
    records.push_back(step(sc, ws_out));
  }
  return records;
}

inline constexpr const char* kTelemetryHeader =
    "t,v_cmd,v,s,alpha,z_fl,z_fr,z_rl,z_rr,Fz_fl,Fz_fr,Fz_rl,Fz_rr,"
    "k_fl,k_fr,k_rl,k_rr,x,y,theta_cmd,theta_phys";

inline std::string telemetry_to_csv(std::span<const TelemetryRecord> records) {
  std::string out(kTelemetryHeader);
  out += '\n';
  char buf[640];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.t, r.v_cmd, r.v, r.s, r.alpha, r.z_mm[0], r.z_mm[1], r.z_mm[2], r.z_mm[3],
                  r.F_z[0], r.F_z[1], r.F_z[2], r.F_z[3], r.k[0], r.k[1], r.k[2], r.k[3], r.x,
                  r.y, r.theta_cmd, r.theta_phys);
    out += buf;
  }
  return out;
}

inline void write_telemetry_csv(const std::string& path,
                                std::span<const TelemetryRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_telemetry_csv: cannot open " + path);
  out << telemetry_to_csv(records);
  if (!out) throw IoError("write_telemetry_csv: write failed for " + path);
}

struct ErrorStats {
  double slip_mae_pct = 0.0;     // mean |s_sim - s_model| in percentage points
  double slip_max_pct = 0.0;     // max  |s_sim - s_model| in percentage points
  double sinkage_mae_mm = 0.0;   // mean |z_sim - z_model| over wheels
  std::size_t steady_samples = 0;
};

/// Reference slip for a telemetry row: the regression value at the recorded
/// (v_w, alpha), zero when the rover is not commanded to move.
inline double reference_slip(double v_cmd, double alpha, const model::ModelParams& models) {
  if (v_cmd <= 0.0) return 0.0;
  const double alpha_model =
      std::clamp(alpha, -model::kAlphaValidityDeg, model::kAlphaValidityDeg);
  return model::slip_slope(v_cmd, alpha_model, models.slip);
}

/// Compare steady-state telemetry against direct regression evaluation at the
/// same (v_w, alpha, F_z). The settle window excludes transients.
inline ErrorStats error_report(std::span<const TelemetryRecord> records,
                               const model::ModelParams& models, double settle_s, double dt) {
  ErrorStats stats;
  double slip_sum = 0.0;
  double sink_sum = 0.0;
  std::size_t sink_count = 0;
  for (const auto& rec : records) {
    if (rec.t < settle_s) continue;
    const double s_ref = reference_slip(rec.v_cmd, rec.alpha, models);
    const double slip_err = std::abs(rec.s - s_ref);
    slip_sum += slip_err;
    stats.slip_max_pct = std::max(stats.slip_max_pct, slip_err);
    for (int wheel = 0; wheel < 4; ++wheel) {
      const double z_ref = model::sinkage(s_ref, rec.F_z[wheel], models.sinkage);
      sink_sum += std::abs(rec.z_mm[wheel] - z_ref);
      ++sink_count;
    }
    ++stats.steady_samples;
  }
  if (stats.steady_samples * dt < 2.0)
    throw AnalysisError("error_report: need >= 2 s of steady-state telemetry");
  stats.slip_mae_pct = 100.0 * slip_sum / stats.steady_samples;
  stats.slip_max_pct *= 100.0;
  stats.sinkage_mae_mm = sink_sum / sink_count;
  return stats;
}

struct SweepPoint {
  double v_w = 0.0;
  double alpha = 0.0;       // [deg]
  double s_steady = 0.0;
  double z_steady_mm = 0.0; // mean over wheels
};

inline std::size_t sweep_thread_count(std::size_t n_points) {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REGOLITH_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) threads = static_cast<std::size_t>(parsed);
  }
  return std::max<std::size_t>(1, std::min(threads, std::max<std::size_t>(1, n_points)));
}

/// Steady-state slip map over a (v_w, alpha) grid. Points run in parallel
/// (REGOLITH_THREADS caps the fan-out) but the output order is always
/// sorted by (v_w, alpha).
inline std::vector<SweepPoint> sweep(std::vector<double> v_list, std::vector<double> alpha_list,
                                     const Scenario& tmpl) {
  if (v_list.empty() || alpha_list.empty())
    throw ConfigError("sweep: velocity and slope lists must not be empty");
  for (double v : v_list)
    if (v < 0.0) throw ConfigError("sweep: v_w values must be >= 0");
  for (double a : alpha_list)
    if (std::abs(a) > model::kAlphaValidityDeg)
      throw ConfigError("sweep: alpha values must lie within [-25, 25] deg");
  std::sort(v_list.begin(), v_list.end());
  std::sort(alpha_list.begin(), alpha_list.end());

  std::vector<SweepPoint> points;
  for (double v : v_list)
    for (double a : alpha_list) points.push_back({v, a, 0.0, 0.0});

  auto run_point = [&tmpl](SweepPoint& pt) {
    Scenario sc = tmpl;
    sc.terrain.kind = pt.alpha == 0.0 ? TerrainKind::flat : TerrainKind::slope;
    sc.terrain.slope_deg = pt.alpha;
    sc.terrain.deformation_enabled = false;
    sc.command.waypoints = {{0.0, pt.v_w}};
    sc.command.path = PathKind::straight;
    const auto records = run_scenario(sc);
    double s_sum = 0.0, z_sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : records) {
      if (rec.t < sc.settle_s) continue;
      s_sum += rec.s;
      z_sum += (rec.z_mm[0] + rec.z_mm[1] + rec.z_mm[2] + rec.z_mm[3]) / 4.0;
      ++n;
    }
    if (n == 0) throw AnalysisError("sweep: no steady-state samples; extend sim.duration_s");
    pt.s_steady = s_sum / n;
    pt.z_steady_mm = z_sum / n;
  };

  const std::size_t n_threads = sweep_thread_count(points.size());
  if (n_threads <= 1) {
    for (auto& pt : points) run_point(pt);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
            run_point(points[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return points;
}

inline std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::string out = "v_w,alpha,s_steady,z_steady_mm\n";
  char buf[160];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", pt.v_w, pt.alpha, pt.s_steady,
                  pt.z_steady_mm);
    out += buf;
  }
  return out;
}

}  // namespace regolith::sim
