#pragma once

// Heightmap terrain with a two-channel deformation model: permanent depth d
// (min-rule, never shallower) and transient trace w (re-stamped every pass).
// Rendered elevation is always base + d + w. A per-cell stiffness override
// marks rigid obstacles; those cells do not deform.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/errors.hpp"
#include "regolith/vehicle.hpp"

namespace regolith::terrain {

struct TracePatternParams {
  double A0 = 0.002;         // base amplitude [m]
  double s_clamp = 0.8;      // slip at which the pattern is fully smeared
  double lambda_scale = 1.0; // wavelength = lambda_scale * 2 pi R / n_grousers

  void validate() const {
    if (!(A0 >= 0.0)) throw ConfigError("terrain.trace.A0_mm must be >= 0");
    if (!(s_clamp > 0.0 && s_clamp <= 1.0))
      throw ConfigError("terrain.trace.s_clamp must be in (0, 1]");
    if (!(lambda_scale > 0.0)) throw ConfigError("terrain.trace.lambda_scale must be > 0");
  }
};

/// Grouser trace height at along-track position arc_pos: a sinusoid whose
/// amplitude shrinks with slip and scales (capped at 2x) with contact force.
inline double trace_pattern(double s, double F_z, double F_ref, double arc_pos,
                            const vehicle::WheelGeometry& geom, const TracePatternParams& p) {
  const double lambda =
      p.lambda_scale * 2.0 * std::numbers::pi * geom.effective_radius() / geom.n_grousers;
  const double amp = p.A0 * std::max(0.0, 1.0 - s / p.s_clamp) * std::min(2.0, F_z / F_ref);
  return amp * std::sin(2.0 * std::numbers::pi * arc_pos / lambda);
}

enum class Channel { base, depth, trace, rendered };

class TerrainGrid {
 public:
  TerrainGrid(int nx, int ny, double resolution, double origin_x, double origin_y)
      : nx_(nx), ny_(ny), res_(resolution), ox_(origin_x), oy_(origin_y) {
    if (nx_ < 2 || ny_ < 2) throw ConfigError("terrain grid must be at least 2x2 cells");
    if (!(res_ > 0.0)) throw ConfigError("terrain.resolution must be > 0");
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    base_.assign(n, 0.0);
    d_.assign(n, 0.0);
    w_.assign(n, 0.0);
    k_override_.assign(n, std::numeric_limits<double>::quiet_NaN());
  }

  static TerrainGrid flat(int nx, int ny, double resolution, double origin_x, double origin_y,
                          double elevation = 0.0) {
    TerrainGrid g(nx, ny, resolution, origin_x, origin_y);
    std::fill(g.base_.begin(), g.base_.end(), elevation);
    return g;
  }

  /// Plane rising along +x at the given angle; flat across y.
  static TerrainGrid inclined(int nx, int ny, double resolution, double origin_x,
                              double origin_y, double slope_deg) {
    TerrainGrid g(nx, ny, resolution, origin_x, origin_y);
    const double grade = std::tan(slope_deg * std::numbers::pi / 180.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) g.base_[g.idx(i, j)] = grade * g.cell_x(i);
    return g;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return res_; }
  double origin_x() const { return ox_; }
  double origin_y() const { return oy_; }

  double cell_x(int i) const { return ox_ + (i + 0.5) * res_; }
  double cell_y(int j) const { return oy_ + (j + 0.5) * res_; }

  double base(int i, int j) const { return base_[idx(i, j)]; }
  double depth(int i, int j) const { return d_[idx(i, j)]; }
  double trace(int i, int j) const { return w_[idx(i, j)]; }
  double rendered(int i, int j) const { return base_[idx(i, j)] + d_[idx(i, j)] + w_[idx(i, j)]; }

  void set_base(int i, int j, double v) { base_[idx(i, j)] = v; }

  bool in_bounds(double x, double y) const {
    return x >= ox_ && x <= ox_ + nx_ * res_ && y >= oy_ && y <= oy_ + ny_ * res_;
  }

  /// Bilinear interpolation of rendered elevation between cell centers
  /// (clamped at the boundary strip).
  double height_at(double x, double y) const {
    if (!in_bounds(x, y))
      throw BoundsError("height_at: query outside terrain bounds");
    double fx = std::clamp((x - ox_) / res_ - 0.5, 0.0, static_cast<double>(nx_ - 1));
    double fy = std::clamp((y - oy_) / res_ - 0.5, 0.0, static_cast<double>(ny_ - 1));
    const int i0 = std::min(static_cast<int>(fx), nx_ - 2);
    const int j0 = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - i0;
    const double ty = fy - j0;
    const double h00 = rendered(i0, j0);
    const double h10 = rendered(i0 + 1, j0);
    const double h01 = rendered(i0, j0 + 1);
    const double h11 = rendered(i0 + 1, j0 + 1);
    return (1.0 - tx) * (1.0 - ty) * h00 + tx * (1.0 - ty) * h10 + (1.0 - tx) * ty * h01 +
           tx * ty * h11;
  }

  /// Slope angle along the heading, in degrees, positive uphill. Central
  /// differences one cell out, so the query needs a one-cell margin.
  double slope_at(double x, double y, double heading) const {
    if (!in_bounds(x - res_, y - res_) || !in_bounds(x + res_, y + res_))
      throw BoundsError("slope_at: query too close to terrain boundary");
    const double gx = (height_at(x + res_, y) - height_at(x - res_, y)) / (2.0 * res_);
    const double gy = (height_at(x, y + res_) - height_at(x, y - res_)) / (2.0 * res_);
    const double along = gx * std::cos(heading) + gy * std::sin(heading);
    return std::atan(along) * 180.0 / std::numbers::pi;
  }

  /// Deformation update for one cell: depth only ever deepens (min-rule),
  /// the trace is replaced outright.
  void deform(int i, int j, double d_new, double w_new) {
    if (i < 0 || i >= nx_ || j < 0 || j >= ny_)
      throw BoundsError("deform: cell outside grid");
    if (d_new > 0.0) throw DomainError("deform: d_new must be <= 0");
    const std::size_t n = idx(i, j);
    d_[n] += std::min(0.0, d_new - d_[n]);
    w_[n] = w_new;
  }

  /// Stamp one wheel footprint: a heading-aligned rectangle of wheel width by
  /// the chord length of the wheel circle at the sinkage depth. Depth is
  /// uniform across the footprint; the trace varies with each cell's
  /// along-track position. Rigid-override cells are skipped.
  void imprint_wheel(double x, double y, double heading, double z_sink_mm, double s, double F_z,
                     double F_ref, const vehicle::WheelGeometry& geom,
                     const TracePatternParams& tp, double arc_pos) {
    const double depth_m = std::abs(z_sink_mm) / 1000.0;
    const double radius = geom.effective_radius();
    const double chord =
        2.0 * std::sqrt(std::max(0.0, 2.0 * radius * depth_m - depth_m * depth_m));
    const double half_l = chord / 2.0;
    const double half_w = geom.width / 2.0;
    const double cs = std::cos(heading);
    const double sn = std::sin(heading);

    for (const auto [dx, dy] : {std::pair{half_l, half_w}, std::pair{half_l, -half_w},
                                std::pair{-half_l, half_w}, std::pair{-half_l, -half_w}}) {
      const double cx = x + dx * cs - dy * sn;
      const double cy = y + dx * sn + dy * cs;
      if (!in_bounds(cx, cy)) throw BoundsError("imprint_wheel: footprint outside grid");
    }

    const double reach = std::hypot(half_l, half_w);
    const int i_lo = std::max(0, static_cast<int>(std::floor((x - reach - ox_) / res_)));
    const int i_hi = std::min(nx_ - 1, static_cast<int>(std::ceil((x + reach - ox_) / res_)));
    const int j_lo = std::max(0, static_cast<int>(std::floor((y - reach - oy_) / res_)));
    const int j_hi = std::min(ny_ - 1, static_cast<int>(std::ceil((y + reach - oy_) / res_)));
    const double d_new = std::min(0.0, z_sink_mm / 1000.0);

    for (int j = j_lo; j <= j_hi; ++j) {
      for (int i = i_lo; i <= i_hi; ++i) {
        const double rx = cell_x(i) - x;
        const double ry = cell_y(j) - y;
        const double along = rx * cs + ry * sn;
        const double lateral = -rx * sn + ry * cs;
        if (std::abs(along) > half_l || std::abs(lateral) > half_w) continue;
        if (!std::isnan(k_override_[idx(i, j)])) continue;
        const double w_new = trace_pattern(s, F_z, F_ref, arc_pos + along, geom, tp);
        deform(i, j, d_new, w_new);
      }
    }
  }

  /// Mark a circular rigid obstacle with the given contact stiffness.
  void set_rock(double x, double y, double radius, double k) {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        if (std::hypot(cell_x(i) - x, cell_y(j) - y) <= radius) k_override_[idx(i, j)] = k;
  }

  std::optional<double> stiffness_override_at(double x, double y) const {
    if (!in_bounds(x, y)) return std::nullopt;
    const int i = std::clamp(static_cast<int>((x - ox_) / res_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((y - oy_) / res_), 0, ny_ - 1);
    const double k = k_override_[idx(i, j)];
    if (std::isnan(k)) return std::nullopt;
    return k;
  }

  double channel_value(Channel ch, int i, int j) const {
    switch (ch) {
      case Channel::base: return base(i, j);
      case Channel::depth: return depth(i, j);
      case Channel::trace: return trace(i, j);
      case Channel::rendered: return rendered(i, j);
    }
    return 0.0;
  }

  /// ESRI ASCII grid export of the selected channel, row 0 = north.
  void export_asc(const std::string& path, Channel ch = Channel::rendered) const {
    std::ofstream out(path);
    if (!out) throw IoError("export_asc: cannot open " + path);
    out << "ncols " << nx_ << "\n";
    out << "nrows " << ny_ << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", ox_);
    out << "xllcorner " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", oy_);
    out << "yllcorner " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", res_);
    out << "cellsize " << buf << "\n";
    out << "NODATA_value -9999\n";
    for (int j = ny_ - 1; j >= 0; --j) {
      for (int i = 0; i < nx_; ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", channel_value(ch, i, j));
        out << buf << (i + 1 < nx_ ? " " : "");
      }
      out << "\n";
    }
    if (!out) throw IoError("export_asc: write failed for " + path);
  }

  /// Import an ESRI ASCII grid as base elevation (depth/trace start at zero).
  static TerrainGrid import_asc(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("import_asc: cannot open " + path);
    auto read_field = [&in, &path](const std::string& name) {
      std::string key;
      double value = 0.0;
      if (!(in >> key >> value) || key != name)
        throw IoError("import_asc: malformed header in " + path + " (expected " + name + ")");
      return value;
    };
    const int nx = static_cast<int>(read_field("ncols"));
    const int ny = static_cast<int>(read_field("nrows"));
    const double ox = read_field("xllcorner");
    const double oy = read_field("yllcorner");
    const double res = read_field("cellsize");
    read_field("NODATA_value");
    TerrainGrid g(nx, ny, res, ox, oy);
    for (int j = ny - 1; j >= 0; --j)
      for (int i = 0; i < nx; ++i)
        if (!(in >> g.base_[g.idx(i, j)]))
          throw IoError("import_asc: truncated data in " + path);
    return g;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  int nx_, ny_;
  double res_, ox_, oy_;
  std::vector<double> base_;        // undeformed elevation [m]
  std::vector<double> d_;           // permanent depth [m], <= 0
  std::vector<double> w_;           // transient trace [m]
  std::vector<double> k_override_;  // rigid-obstacle stiffness [N/m], NaN = none
};

}  // namespace regolith::terrain
