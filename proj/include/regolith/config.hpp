#pragma once

// Scenario configuration file: a strict JSON document. Unknown keys are
// rejected (typos in physical parameters must not silently fall back to
// defaults), missing keys take the built-in defaults, and every physical
// quantity is validated on load with its full key path in the message.

#include <array>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regolith/errors.hpp"
#include "regolith/io.hpp"
#include "regolith/sim.hpp"

namespace regolith::config {

namespace detail {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + " must be a JSON object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* name : allowed)
      if (key == name) { ok = true; break; }
    if (!ok) throw ConfigError("unknown key: " + (path.empty() ? key : path + "." + key));
  }
}

inline double get_num(const json& j, const char* key, const std::string& path, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline int get_int(const json& j, const char* key, const std::string& path, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) throw ConfigError(path + "." + key + " must be an integer");
  return j.at(key).get<int>();
}

inline bool get_bool(const json& j, const char* key, const std::string& path, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean()) throw ConfigError(path + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

inline std::string get_str(const json& j, const char* key, const std::string& path,
                           const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) throw ConfigError(path + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace detail

inline sim::Scenario scenario_from_json(const nlohmann::json& root) {
  using detail::expect_object;
  using detail::get_bool;
  using detail::get_int;
  using detail::get_num;
  using detail::get_str;
  using detail::reject_unknown;

  sim::Scenario sc;
  expect_object(root, "config");
  reject_unknown(root, "",
                 {"rover", "model", "friction", "limiter", "contact", "terrain", "command",
                  "sim"});

  if (root.contains("rover")) {
    const auto& r = root.at("rover");
    expect_object(r, "rover");
    reject_unknown(r, "rover",
                   {"mass", "wheel", "wheelbase", "track", "cg_height", "init",
                    "wheel_load_override"});
    sc.rover.mass = get_num(r, "mass", "rover", sc.rover.mass);
    sc.rover.wheelbase = get_num(r, "wheelbase", "rover", sc.rover.wheelbase);
    sc.rover.track = get_num(r, "track", "rover", sc.rover.track);
    sc.rover.cg_height = get_num(r, "cg_height", "rover", sc.rover.cg_height);
    if (r.contains("wheel")) {
      const auto& w = r.at("wheel");
      expect_object(w, "rover.wheel");
      reject_unknown(w, "rover.wheel", {"r", "h", "n_grousers", "width"});
      sc.rover.wheel.r = get_num(w, "r", "rover.wheel", sc.rover.wheel.r);
      sc.rover.wheel.h = get_num(w, "h", "rover.wheel", sc.rover.wheel.h);
      sc.rover.wheel.n_grousers = get_int(w, "n_grousers", "rover.wheel",
                                          sc.rover.wheel.n_grousers);
      sc.rover.wheel.width = get_num(w, "width", "rover.wheel", sc.rover.wheel.width);
    }
    if (r.contains("init")) {
      const auto& init = r.at("init");
      expect_object(init, "rover.init");
      reject_unknown(init, "rover.init", {"x", "y", "heading"});
      sc.rover.init_x = get_num(init, "x", "rover.init", sc.rover.init_x);
      sc.rover.init_y = get_num(init, "y", "rover.init", sc.rover.init_y);
      sc.rover.init_heading = get_num(init, "heading", "rover.init", sc.rover.init_heading);
    }
    if (r.contains("wheel_load_override")) {
      const auto& arr = r.at("wheel_load_override");
      if (!arr.is_array() || arr.size() != 4)
        throw ConfigError("rover.wheel_load_override must be an array of 4 entries");
      for (int i = 0; i < 4; ++i) {
        if (arr[i].is_null()) continue;
        if (!arr[i].is_number())
          throw ConfigError("rover.wheel_load_override entries must be numbers or null");
        sc.rover.wheel_load_override[i] = arr[i].get<double>();
      }
    }
  }

  if (root.contains("model")) {
    const auto& m = root.at("model");
    expect_object(m, "model");
    reject_unknown(m, "model", {"slip", "sinkage"});
    if (m.contains("slip")) {
      const auto& s = m.at("slip");
      expect_object(s, "model.slip");
      reject_unknown(s, "model.slip", {"a_v", "b_v", "a_alpha", "b_alpha", "s_max"});
      sc.models.slip.a_v = get_num(s, "a_v", "model.slip", sc.models.slip.a_v);
      sc.models.slip.b_v = get_num(s, "b_v", "model.slip", sc.models.slip.b_v);
      sc.models.slip.a_alpha = get_num(s, "a_alpha", "model.slip", sc.models.slip.a_alpha);
      sc.models.slip.b_alpha = get_num(s, "b_alpha", "model.slip", sc.models.slip.b_alpha);
      sc.models.slip.s_max = get_num(s, "s_max", "model.slip", sc.models.slip.s_max);
    }
    if (m.contains("sinkage")) {
      const auto& s = m.at("sinkage");
      expect_object(s, "model.sinkage");
      reject_unknown(s, "model.sinkage", {"c_s", "c_F", "c_0", "F_ref"});
      sc.models.sinkage.c_s = get_num(s, "c_s", "model.sinkage", sc.models.sinkage.c_s);
      sc.models.sinkage.c_F = get_num(s, "c_F", "model.sinkage", sc.models.sinkage.c_F);
      sc.models.sinkage.c_0 = get_num(s, "c_0", "model.sinkage", sc.models.sinkage.c_0);
      sc.models.sinkage.F_ref = get_num(s, "F_ref", "model.sinkage", sc.models.sinkage.F_ref);
    }
  }

  if (root.contains("friction")) {
    const auto& f = root.at("friction");
    expect_object(f, "friction");
    reject_unknown(f, "friction", {"mu_s", "mu_d"});
    sc.friction.mu_s = get_num(f, "mu_s", "friction", sc.friction.mu_s);
    sc.friction.mu_d = get_num(f, "mu_d", "friction", sc.friction.mu_d);
  }

  if (root.contains("limiter")) {
    const auto& l = root.at("limiter");
    expect_object(l, "limiter");
    reject_unknown(l, "limiter", {"breakpoints"});
    if (l.contains("breakpoints")) {
      const auto& arr = l.at("breakpoints");
      if (!arr.is_array() || arr.empty())
        throw ConfigError("limiter.breakpoints must be a non-empty array");
      sc.limiter.breakpoints.clear();
      for (const auto& bp : arr) {
        expect_object(bp, "limiter.breakpoints[]");
        reject_unknown(bp, "limiter.breakpoints[]", {"v_upper", "a_max"});
        vehicle::LimiterBreakpoint out;
        if (bp.contains("v_upper") && !bp.at("v_upper").is_null()) {
          if (!bp.at("v_upper").is_number())
            throw ConfigError("limiter.breakpoints[].v_upper must be a number or null");
          out.v_upper = bp.at("v_upper").get<double>();
        }
        if (!bp.contains("a_max") || !bp.at("a_max").is_number())
          throw ConfigError("limiter.breakpoints[].a_max must be a number");
        out.a_max = bp.at("a_max").get<double>();
        sc.limiter.breakpoints.push_back(out);
      }
    }
  }

  if (root.contains("contact")) {
    const auto& c = root.at("contact");
    expect_object(c, "contact");
    reject_unknown(c, "contact", {"n_points", "F_z_min", "denom_min", "v_min", "mode"});
    sc.contact_params.n_points = get_int(c, "n_points", "contact", sc.contact_params.n_points);
    sc.contact_params.F_z_min = get_num(c, "F_z_min", "contact", sc.contact_params.F_z_min);
    sc.contact_params.denom_min =
        get_num(c, "denom_min", "contact", sc.contact_params.denom_min);
    sc.contact_params.v_min = get_num(c, "v_min", "contact", sc.contact_params.v_min);
    const std::string mode = get_str(c, "mode", "contact", "quasi_static");
    if (mode == "quasi_static") sc.contact_params.mode = contact::Mode::quasi_static;
    else if (mode == "ode") sc.contact_params.mode = contact::Mode::ode;
    else throw ConfigError("contact.mode must be 'quasi_static' or 'ode'");
  }

  if (root.contains("terrain")) {
    const auto& t = root.at("terrain");
    expect_object(t, "terrain");
    reject_unknown(t, "terrain",
                   {"type", "slope_deg", "heightmap_path", "size_x", "size_y", "resolution",
                    "origin_x", "origin_y", "deformation_enabled", "trace", "rocks"});
    const std::string kind = get_str(t, "type", "terrain", "flat");
    if (kind == "flat") sc.terrain.kind = sim::TerrainKind::flat;
    else if (kind == "slope") sc.terrain.kind = sim::TerrainKind::slope;
    else if (kind == "heightmap") sc.terrain.kind = sim::TerrainKind::heightmap;
    else throw ConfigError("terrain.type must be 'flat', 'slope' or 'heightmap'");
    sc.terrain.slope_deg = get_num(t, "slope_deg", "terrain", sc.terrain.slope_deg);
    sc.terrain.heightmap_path =
        get_str(t, "heightmap_path", "terrain", sc.terrain.heightmap_path);
    sc.terrain.size_x = get_num(t, "size_x", "terrain", sc.terrain.size_x);
    sc.terrain.size_y = get_num(t, "size_y", "terrain", sc.terrain.size_y);
    sc.terrain.resolution = get_num(t, "resolution", "terrain", sc.terrain.resolution);
    sc.terrain.origin_x = get_num(t, "origin_x", "terrain", sc.terrain.origin_x);
    sc.terrain.origin_y = get_num(t, "origin_y", "terrain", sc.terrain.origin_y);
    sc.terrain.deformation_enabled =
        get_bool(t, "deformation_enabled", "terrain", sc.terrain.deformation_enabled);
    if (t.contains("trace")) {
      const auto& tr = t.at("trace");
      expect_object(tr, "terrain.trace");
      reject_unknown(tr, "terrain.trace", {"A0_mm", "s_clamp", "lambda_scale"});
      sc.terrain.trace.A0 =
          get_num(tr, "A0_mm", "terrain.trace", sc.terrain.trace.A0 * 1000.0) / 1000.0;
      sc.terrain.trace.s_clamp = get_num(tr, "s_clamp", "terrain.trace",
                                         sc.terrain.trace.s_clamp);
      sc.terrain.trace.lambda_scale =
          get_num(tr, "lambda_scale", "terrain.trace", sc.terrain.trace.lambda_scale);
    }
    if (t.contains("rocks")) {
      const auto& rocks = t.at("rocks");
      if (!rocks.is_array()) throw ConfigError("terrain.rocks must be an array");
      for (const auto& rock : rocks) {
        expect_object(rock, "terrain.rocks[]");
        reject_unknown(rock, "terrain.rocks[]", {"x", "y", "radius", "k"});
        sim::RockSpec spec;
        spec.x = get_num(rock, "x", "terrain.rocks[]", 0.0);
        spec.y = get_num(rock, "y", "terrain.rocks[]", 0.0);
        spec.radius = get_num(rock, "radius", "terrain.rocks[]", 0.0);
        spec.k = get_num(rock, "k", "terrain.rocks[]", 1e7);
        sc.terrain.rocks.push_back(spec);
      }
    }
  }

  if (root.contains("command")) {
    const auto& c = root.at("command");
    expect_object(c, "command");
    reject_unknown(c, "command", {"waypoints", "path", "arc_radius", "arc_load_boost"});
    if (c.contains("waypoints")) {
      const auto& arr = c.at("waypoints");
      if (!arr.is_array() || arr.empty())
        throw ConfigError("command.waypoints must be a non-empty array");
      sc.command.waypoints.clear();
      for (const auto& wp : arr) {
        expect_object(wp, "command.waypoints[]");
        reject_unknown(wp, "command.waypoints[]", {"t", "v_w"});
        sim::Waypoint out;
        out.t = get_num(wp, "t", "command.waypoints[]", 0.0);
        out.v_w = get_num(wp, "v_w", "command.waypoints[]", 0.0);
        sc.command.waypoints.push_back(out);
      }
    }
    const std::string path = get_str(c, "path", "command", "straight");
    if (path == "straight") sc.command.path = sim::PathKind::straight;
    else if (path == "arc") sc.command.path = sim::PathKind::arc;
    else throw ConfigError("command.path must be 'straight' or 'arc'");
    sc.command.arc_radius = get_num(c, "arc_radius", "command", sc.command.arc_radius);
    sc.command.arc_load_boost =
        get_num(c, "arc_load_boost", "command", sc.command.arc_load_boost);
  }

  if (root.contains("sim")) {
    const auto& s = root.at("sim");
    expect_object(s, "sim");
    reject_unknown(s, "sim", {"dt_hz", "duration_s", "gravity", "settle_s"});
    sc.dt_hz = get_num(s, "dt_hz", "sim", sc.dt_hz);
    sc.duration_s = get_num(s, "duration_s", "sim", sc.duration_s);
    sc.gravity = get_num(s, "gravity", "sim", sc.gravity);
    sc.settle_s = get_num(s, "settle_s", "sim", sc.settle_s);
  }

  sc.validate();
  return sc;
}

inline nlohmann::json scenario_to_json(const sim::Scenario& sc) {
  nlohmann::json root;
  root["rover"] = {
      {"mass", sc.rover.mass},
      {"wheel",
       {{"r", sc.rover.wheel.r},
        {"h", sc.rover.wheel.h},
        {"n_grousers", sc.rover.wheel.n_grousers},
        {"width", sc.rover.wheel.width}}},
      {"wheelbase", sc.rover.wheelbase},
      {"track", sc.rover.track},
      {"cg_height", sc.rover.cg_height},
      {"init", {{"x", sc.rover.init_x}, {"y", sc.rover.init_y}, {"heading", sc.rover.init_heading}}},
  };
  nlohmann::json overrides = nlohmann::json::array();
  bool any_override = false;
  for (const auto& ovr : sc.rover.wheel_load_override) {
    if (ovr) {
      overrides.push_back(*ovr);
      any_override = true;
    } else {
      overrides.push_back(nullptr);
    }
  }
  if (any_override) root["rover"]["wheel_load_override"] = overrides;

  root["model"] = io::model_params_to_json(sc.models);
  root["friction"] = {{"mu_s", sc.friction.mu_s}, {"mu_d", sc.friction.mu_d}};

  nlohmann::json bps = nlohmann::json::array();
  for (const auto& bp : sc.limiter.breakpoints) {
    nlohmann::json out = {{"a_max", bp.a_max}};
    if (std::isfinite(bp.v_upper)) out["v_upper"] = bp.v_upper;
    else out["v_upper"] = nullptr;
    bps.push_back(out);
  }
  root["limiter"] = {{"breakpoints", bps}};

  root["contact"] = {
      {"n_points", sc.contact_params.n_points},
      {"F_z_min", sc.contact_params.F_z_min},
      {"denom_min", sc.contact_params.denom_min},
      {"v_min", sc.contact_params.v_min},
      {"mode", sc.contact_params.mode == contact::Mode::quasi_static ? "quasi_static" : "ode"},
  };

  root["terrain"] = {
      {"type", sc.terrain.kind == sim::TerrainKind::flat
                   ? "flat"
                   : (sc.terrain.kind == sim::TerrainKind::slope ? "slope" : "heightmap")},
      {"slope_deg", sc.terrain.slope_deg},
      {"size_x", sc.terrain.size_x},
      {"size_y", sc.terrain.size_y},
      {"resolution", sc.terrain.resolution},
      {"origin_x", sc.terrain.origin_x},
      {"origin_y", sc.terrain.origin_y},
      {"deformation_enabled", sc.terrain.deformation_enabled},
      {"trace",
       {{"A0_mm", sc.terrain.trace.A0 * 1000.0},
        {"s_clamp", sc.terrain.trace.s_clamp},
        {"lambda_scale", sc.terrain.trace.lambda_scale}}},
  };
  if (!sc.terrain.heightmap_path.empty())
    root["terrain"]["heightmap_path"] = sc.terrain.heightmap_path;
  if (!sc.terrain.rocks.empty()) {
    nlohmann::json rocks = nlohmann::json::array();
    for (const auto& rock : sc.terrain.rocks)
      rocks.push_back({{"x", rock.x}, {"y", rock.y}, {"radius", rock.radius}, {"k", rock.k}});
    root["terrain"]["rocks"] = rocks;
  }

  nlohmann::json wps = nlohmann::json::array();
  for (const auto& wp : sc.command.waypoints) wps.push_back({{"t", wp.t}, {"v_w", wp.v_w}});
  root["command"] = {
      {"waypoints", wps},
      {"path", sc.command.path == sim::PathKind::straight ? "straight" : "arc"},
      {"arc_radius", sc.command.arc_radius},
      {"arc_load_boost", sc.command.arc_load_boost},
  };

  root["sim"] = {
      {"dt_hz", sc.dt_hz},
      {"duration_s", sc.duration_s},
      {"gravity", sc.gravity},
      {"settle_s", sc.settle_s},
  };
  return root;
}

inline sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: bad JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(root);
}

inline void save_scenario(const std::string& path, const sim::Scenario& sc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("config: cannot open " + path + " for writing");
  out << scenario_to_json(sc).dump(2) << "\n";
  if (!out) throw IoError("config: write failed for " + path);
}

}  // namespace regolith::config
