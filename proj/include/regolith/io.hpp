#pragma once

// File formats: run-log CSV (t,v,omega,alpha,F_z,z) and the model-parameter
// JSON document.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regolith/errors.hpp"
#include "regolith/model.hpp"

namespace regolith::io {

inline constexpr const char* kRunLogHeader = "t,v,omega,alpha,F_z,z";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

inline double parse_num(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && (s[used] == ' ' || s[used] == '\r')) ++used;
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("run log: bad numeric value '" + s + "' in " + context);
  }
}

}  // namespace detail

/// Load a run log. The encoder column (omega) may be sparse (5 Hz readings
/// among 180 Hz tracking rows); missing entries are linearly interpolated
/// onto the tracking timestamps, clamped at the ends. F_z and z stay absent
/// where their cells are empty. An empty alpha cell means flat terrain.
inline std::vector<model::RunSample> load_run_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("run log: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("run log: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogHeader)
    throw IoError("run log: bad header in " + path + " (expected '" +
                  std::string(kRunLogHeader) + "')");

  std::vector<model::RunSample> samples;
  std::vector<bool> omega_known;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 6)
      throw IoError("run log: expected 6 columns at " + path + ":" + std::to_string(lineno));
    const std::string where = path + ":" + std::to_string(lineno);
    model::RunSample smp;
    smp.t = detail::parse_num(cells[0], where);
    smp.v = detail::parse_num(cells[1], where);
    const bool has_omega = !detail::blank(cells[2]);
    smp.omega = has_omega ? detail::parse_num(cells[2], where) : 0.0;
    smp.alpha = detail::blank(cells[3]) ? 0.0 : detail::parse_num(cells[3], where);
    if (!detail::blank(cells[4])) smp.F_z = detail::parse_num(cells[4], where);
    if (!detail::blank(cells[5])) smp.z = detail::parse_num(cells[5], where);
    if (!samples.empty() && !(smp.t > samples.back().t))
      throw IoError("run log: timestamps must be strictly increasing at " + where);
    samples.push_back(smp);
    omega_known.push_back(has_omega);
  }

  // Interpolate the sparse encoder stream onto the tracking timestamps.
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (omega_known[i]) known.push_back(i);
  if (known.empty() && !samples.empty())
    throw IoError("run log: no encoder (omega) readings in " + path);
  for (std::size_t i = 0, seg = 0; i < samples.size(); ++i) {
    if (omega_known[i]) continue;
    while (seg + 1 < known.size() && samples[known[seg + 1]].t < samples[i].t) ++seg;
    const std::size_t lo = known[seg];
    const std::size_t hi = known[std::min(seg + 1, known.size() - 1)];
    if (samples[i].t <= samples[lo].t || lo == hi) {
      samples[i].omega = samples[samples[i].t <= samples[lo].t ? lo : hi].omega;
    } else if (samples[i].t >= samples[hi].t) {
      samples[i].omega = samples[hi].omega;
    } else {
      const double f = (samples[i].t - samples[lo].t) / (samples[hi].t - samples[lo].t);
      samples[i].omega = (1.0 - f) * samples[lo].omega + f * samples[hi].omega;
    }
  }
  return samples;
}

inline void save_run_log(const std::string& path, const std::vector<model::RunSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("run log: cannot open " + path + " for writing");
  out << kRunLogHeader << "\n";
  char buf[256];
  for (const auto& smp : samples) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f", smp.t, smp.v, smp.omega, smp.alpha);
    out << buf;
    if (smp.F_z) {
      std::snprintf(buf, sizeof(buf), ",%.6f", *smp.F_z);
      out << buf;
    } else {
      out << ",";
    }
    if (smp.z) {
      std::snprintf(buf, sizeof(buf), ",%.6f", *smp.z);
      out << buf;
    } else {
      out << ",";
    }
    out << "\n";
  }
  if (!out) throw IoError("run log: write failed for " + path);
}

inline nlohmann::json model_params_to_json(const model::ModelParams& p) {
  return nlohmann::json{
      {"slip",
       {{"a_v", p.slip.a_v},
        {"b_v", p.slip.b_v},
        {"a_alpha", p.slip.a_alpha},
        {"b_alpha", p.slip.b_alpha},
        {"s_max", p.slip.s_max}}},
      {"sinkage",
       {{"c_s", p.sinkage.c_s},
        {"c_F", p.sinkage.c_F},
        {"c_0", p.sinkage.c_0},
        {"F_ref", p.sinkage.F_ref}}},
  };
}

inline model::ModelParams model_params_from_json(const nlohmann::json& j) {
  model::ModelParams p;
  const auto& slip = j.at("slip");
  p.slip.a_v = slip.at("a_v").get<double>();
  p.slip.b_v = slip.at("b_v").get<double>();
  p.slip.a_alpha = slip.at("a_alpha").get<double>();
  p.slip.b_alpha = slip.at("b_alpha").get<double>();
  p.slip.s_max = slip.at("s_max").get<double>();
  const auto& sink = j.at("sinkage");
  p.sinkage.c_s = sink.at("c_s").get<double>();
  p.sinkage.c_F = sink.at("c_F").get<double>();
  p.sinkage.c_0 = sink.at("c_0").get<double>();
  p.sinkage.F_ref = sink.at("F_ref").get<double>();
  p.slip.validate();
  p.sinkage.validate();
  return p;
}

inline void save_model_params(const std::string& path, const model::ModelParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("model params: cannot open " + path + " for writing");
  out << model_params_to_json(p).dump(2) << "\n";
  if (!out) throw IoError("model params: write failed for " + path);
}

inline model::ModelParams load_model_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("model params: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model params: bad JSON in " + path + ": " + e.what());
  }
  try {
    return model_params_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model params: missing field in " + path + ": " + e.what());
  }
}

}  // namespace regolith::io
