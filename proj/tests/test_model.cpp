#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "regolith/model.hpp"

using namespace regolith;
using namespace regolith::model;

namespace {

// Independent least-squares oracles. These deliberately avoid the normal-
// equation/Gaussian-elimination route used by the implementation: the line
// fit goes through mean/covariance identities, the 2x2 and 3x3 systems
// through Cramer's rule.

struct LineFit {
  double a = 0.0, b = 0.0;
};

LineFit oracle_line_fit(const std::vector<FlatSample>& pts) {
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.v_w;
    my += p.s;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.v_w - mx) * (p.v_w - mx);
    sxy += (p.v_w - mx) * (p.s - my);
  }
  return {sxy / sxx, my - (sxy / sxx) * mx};
}

// 2-regressor no-intercept LS via Cramer on the normal matrix.
std::array<double, 2> oracle_fit2(const std::vector<std::array<double, 2>>& rows,
                                  const std::vector<double>& rhs) {
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a11 += rows[i][0] * rows[i][0];
    a12 += rows[i][0] * rows[i][1];
    a22 += rows[i][1] * rows[i][1];
    b1 += rows[i][0] * rhs[i];
    b2 += rows[i][1] * rhs[i];
  }
  const double det = a11 * a22 - a12 * a12;
  return {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det};
}

// Plane fit z = c0*s + c1*dF + c2 via Cramer's rule on the 3x3 normal matrix.
std::array<double, 3> oracle_plane_fit(const std::vector<SinkageSample>& pts, double F_ref) {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (const auto& p : pts) {
    const double row[3] = {p.s, p.F_z - F_ref, 1.0};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += row[i] * p.z;
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
    }
  }
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det3(m);
  std::array<double, 3> out{};
  for (int col = 0; col < 3; ++col) {
    double tmp[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tmp[i][j] = j == col ? rhs[i] : m[i][j];
    out[col] = det3(tmp) / d;
  }
  return out;
}

const SlipModelParams kPaperSlip{};       // 0.0265, 0.0256, 0.00522, 0.00105, 0.95
const SinkageModelParams kPaperSinkage{}; // -33.56, -0.9291, -3.11, 8.72

}  // namespace

TEST_CASE("slip_flat examples") {
  CHECK(slip_flat(0.0, kPaperSlip) == Catch::Approx(0.0256).margin(1e-15));
  CHECK(slip_flat(1.17, kPaperSlip) == Catch::Approx(0.056605).margin(1e-12));
  CHECK(slip_flat(0.47, kPaperSlip) == Catch::Approx(0.038055).margin(1e-12));
  CHECK_THROWS_AS(slip_flat(-0.1, kPaperSlip), DomainError);
}

TEST_CASE("slip_slope examples") {
  CHECK(slip_slope(0.47, 0.0, kPaperSlip) == Catch::Approx(0.038055).margin(1e-12));
  // (0.00522*0.2 + 0.00105)*100 + (0.0265*0.2 + 0.0256)
  CHECK(slip_slope(0.2, 10.0, kPaperSlip) == Catch::Approx(0.2403).margin(1e-12));
  // raw value 1.17316 exceeds the ceiling -> clamped
  CHECK(slip_slope(0.47, 18.0, kPaperSlip) == kPaperSlip.s_max);
  CHECK_THROWS_AS(slip_slope(0.47, 25.5, kPaperSlip), DomainError);
  CHECK_THROWS_AS(slip_slope(0.47, -26.0, kPaperSlip), DomainError);
  CHECK(slip_slope(0.47, -18.0, kPaperSlip) == slip_slope(0.47, 18.0, kPaperSlip));
}

TEST_CASE("slip_slope at zero slope equals slip_flat exactly") {
  for (double v = 0.0; v <= 2.0; v += 0.01)
    REQUIRE(slip_slope(v, 0.0, kPaperSlip) == slip_flat(v, kPaperSlip));
}

TEST_CASE("slip outputs always clamped to [0, s_max]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> v_dist(0.0, 3.0);
  std::uniform_real_distribution<double> a_dist(-25.0, 25.0);
  for (int i = 0; i < 5000; ++i) {
    const double sf = slip_flat(v_dist(rng), kPaperSlip);
    const double ss = slip_slope(v_dist(rng), a_dist(rng), kPaperSlip);
    REQUIRE(sf >= 0.0);
    REQUIRE(sf <= kPaperSlip.s_max);
    REQUIRE(ss >= 0.0);
    REQUIRE(ss <= kPaperSlip.s_max);
  }
}

TEST_CASE("slip_flat monotone in wheel speed for positive a_v") {
  double prev = -1.0;
  for (double v = 0.0; v <= 3.0; v += 0.003) {
    const double s = slip_flat(v, kPaperSlip);
    REQUIRE(s >= prev);
    prev = s;
  }
}

TEST_CASE("sinkage examples") {
  CHECK(sinkage(0.0, 8.72, kPaperSinkage) == Catch::Approx(-3.11).margin(1e-12));
  CHECK(sinkage(0.2, 8.72, kPaperSinkage) == Catch::Approx(-9.822).margin(1e-12));
  CHECK(sinkage(0.2, 13.72, kPaperSinkage) == Catch::Approx(-14.4675).margin(1e-12));
  CHECK_THROWS_AS(sinkage(-0.1, 8.72, kPaperSinkage), DomainError);
  CHECK_THROWS_AS(sinkage(1.1, 8.72, kPaperSinkage), DomainError);
  CHECK_THROWS_AS(sinkage(0.2, -1.0, kPaperSinkage), DomainError);
}

TEST_CASE("sinkage is affine: mixed second difference vanishes") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> s_dist(0.0, 1.0);
  std::uniform_real_distribution<double> f_dist(0.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const double s0 = s_dist(rng), s1 = s_dist(rng);
    const double f0 = f_dist(rng), f1 = f_dist(rng);
    const double mixed = sinkage(s0, f0, kPaperSinkage) + sinkage(s1, f1, kPaperSinkage) -
                         sinkage(s1, f0, kPaperSinkage) - sinkage(s0, f1, kPaperSinkage);
    REQUIRE(std::abs(mixed) < 1e-12);
  }
}

TEST_CASE("fit_slip_flat noiseless recovery") {
  std::vector<FlatSample> pts;
  for (double v : {0.23, 0.47, 0.82, 1.17})
    pts.push_back({v, kPaperSlip.a_v * v + kPaperSlip.b_v});
  const auto fit = fit_slip_flat(pts);
  CHECK(fit.a_v == Catch::Approx(0.0265).margin(1e-10));
  CHECK(fit.b_v == Catch::Approx(0.0256).margin(1e-10));
  CHECK(fit.a_alpha == 0.0);
  CHECK(fit.b_alpha == 0.0);
}

TEST_CASE("fit_slip_flat line through two points") {
  const std::vector<FlatSample> pts = {{0.0, 0.02}, {1.0, 0.05}};
  const auto fit = fit_slip_flat(pts);
  CHECK(fit.a_v == Catch::Approx(0.03).margin(1e-12));
  CHECK(fit.b_v == Catch::Approx(0.02).margin(1e-12));
}

TEST_CASE("fit_slip_flat rank deficiency") {
  const std::vector<FlatSample> pts = {{0.5, 0.03}, {0.5, 0.04}, {0.5, 0.05}};
  CHECK_THROWS_AS(fit_slip_flat(pts), FitError);
  CHECK_THROWS_AS(fit_slip_flat(std::vector<FlatSample>{{0.5, 0.03}}), FitError);
}

TEST_CASE("fit_slip_flat Monte Carlo with uniform noise matches oracle") {
  std::vector<double> v_grid;
  for (double v = 0.1; v < 1.25; v += 0.1) v_grid.push_back(v);
  for (unsigned seed = 0; seed < 120; ++seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-0.002, 0.002);
    std::vector<FlatSample> pts;
    for (double v : v_grid) pts.push_back({v, kPaperSlip.a_v * v + kPaperSlip.b_v + noise(rng)});
    const auto fit = fit_slip_flat(pts);
    const auto ora = oracle_line_fit(pts);
    REQUIRE(std::abs(fit.a_v - ora.a) < 1e-10);
    REQUIRE(std::abs(fit.b_v - ora.b) < 1e-10);
    REQUIRE(std::abs(fit.a_v - kPaperSlip.a_v) < 0.005);
    REQUIRE(std::abs(fit.b_v - kPaperSlip.b_v) < 0.005);
  }
}

TEST_CASE("fit_slip_slope noiseless recovery on the paper grid") {
  std::vector<SlopeSample> pts;
  for (double v : {0.2, 0.47})
    for (double a : {0.0, 5.0, 10.0, 15.0}) {
      const double s = (kPaperSlip.a_alpha * v + kPaperSlip.b_alpha) * a * a +
                       kPaperSlip.a_v * v + kPaperSlip.b_v;
      pts.push_back({v, a, s});
    }
  const auto fit = fit_slip_slope(pts);
  CHECK(fit.a_v == Catch::Approx(0.0265).margin(1e-9));
  CHECK(fit.b_v == Catch::Approx(0.0256).margin(1e-9));
  CHECK(fit.a_alpha == Catch::Approx(0.00522).margin(1e-9));
  CHECK(fit.b_alpha == Catch::Approx(0.00105).margin(1e-9));
}

TEST_CASE("fit_slip_slope degenerate designs") {
  std::vector<SlopeSample> flat_only;
  for (double v : {0.2, 0.47, 0.8}) flat_only.push_back({v, 0.0, slip_flat(v, kPaperSlip)});
  CHECK_THROWS_AS(fit_slip_slope(flat_only), FitError);

  std::vector<SlopeSample> no_flat = {{0.2, 5.0, 0.1}, {0.47, 10.0, 0.3}};
  CHECK_THROWS_AS(fit_slip_slope(no_flat), FitError);
}

TEST_CASE("fit_slip_slope Monte Carlo with gaussian noise") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, 0.005);
    std::vector<SlopeSample> pts;
    for (int rep = 0; rep < 3; ++rep)
      for (double v : {0.2, 0.35, 0.47, 0.6})
        for (double a : {0.0, 5.0, 10.0, 15.0, 20.0}) {
          const double s = (kPaperSlip.a_alpha * v + kPaperSlip.b_alpha) * a * a +
                           kPaperSlip.a_v * v + kPaperSlip.b_v + noise(rng);
          pts.push_back({v, a, s});
        }
    const auto fit = fit_slip_slope(pts);
    REQUIRE(std::abs(fit.a_alpha - kPaperSlip.a_alpha) < 0.2 * kPaperSlip.a_alpha);
    REQUIRE(std::abs(fit.b_alpha - kPaperSlip.b_alpha) < 0.2 * kPaperSlip.b_alpha);

    // cross-check the residual stage against the Cramer oracle
    std::vector<std::array<double, 2>> rows;
    std::vector<double> rhs;
    for (const auto& p : pts) {
      if (p.alpha == 0.0) continue;
      rows.push_back({p.v_w * p.alpha * p.alpha, p.alpha * p.alpha});
      rhs.push_back(p.s - (fit.a_v * p.v_w + fit.b_v));
    }
    const auto ora = oracle_fit2(rows, rhs);
    REQUIRE(std::abs(fit.a_alpha - ora[0]) < 1e-10);
    REQUIRE(std::abs(fit.b_alpha - ora[1]) < 1e-10);
  }
}

TEST_CASE("fit_sinkage noiseless recovery") {
  std::vector<SinkageSample> pts;
  for (double s : {0.0, 0.2, 0.4})
    for (double dF : {-5.0, 0.0, 5.0})
      pts.push_back({s, 8.72 + dF, sinkage(s, 8.72 + dF, kPaperSinkage)});
  const auto fit = fit_sinkage(pts, 8.72);
  CHECK(fit.c_s == Catch::Approx(-33.56).margin(1e-9));
  CHECK(fit.c_F == Catch::Approx(-0.9291).margin(1e-9));
  CHECK(fit.c_0 == Catch::Approx(-3.11).margin(1e-9));
  CHECK(fit.F_ref == 8.72);
}

TEST_CASE("fit_sinkage three non-collinear points give the exact plane") {
  const std::vector<SinkageSample> pts = {
      {0.0, 8.72, -3.11}, {0.3, 8.72, -13.178}, {0.0, 13.72, -7.7555}};
  const auto fit = fit_sinkage(pts, 8.72);
  for (const auto& p : pts) {
    const double z = fit.c_s * p.s + fit.c_F * (p.F_z - 8.72) + fit.c_0;
    REQUIRE(z == Catch::Approx(p.z).margin(1e-9));
  }
}

TEST_CASE("fit_sinkage rank deficiency") {
  // load column identically zero: no way to identify c_F
  std::vector<SinkageSample> no_load_span;
  for (double s : {0.0, 0.1, 0.2, 0.3}) no_load_span.push_back({s, 8.72, -33.56 * s - 3.11});
  CHECK_THROWS_AS(fit_sinkage(no_load_span, 8.72), FitError);

  // identical samples
  std::vector<SinkageSample> repeated(3, {0.1, 8.72, -6.466});
  CHECK_THROWS_AS(fit_sinkage(repeated, 8.72), FitError);
  CHECK_THROWS_AS(fit_sinkage(std::vector<SinkageSample>{{0.0, 8.72, -3.11}}, 8.72), FitError);
}

TEST_CASE("fit_sinkage Monte Carlo with 0.3 mm noise") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(9000 + seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<SinkageSample> pts;
    for (int rep = 0; rep < 3; ++rep)
      for (double s : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5})
        for (double dF : {-5.0, 0.0, 5.0})
          pts.push_back({s, 8.72 + dF, sinkage(s, 8.72 + dF, kPaperSinkage) + noise(rng)});
    const auto fit = fit_sinkage(pts, 8.72);
    const auto ora = oracle_plane_fit(pts, 8.72);
    REQUIRE(std::abs(fit.c_s - ora[0]) < 1e-9);
    REQUIRE(std::abs(fit.c_F - ora[1]) < 1e-9);
    REQUIRE(std::abs(fit.c_0 - ora[2]) < 1e-9);
    REQUIRE(std::abs(fit.c_s - kPaperSinkage.c_s) < 0.1 * std::abs(kPaperSinkage.c_s));
    REQUIRE(std::abs(fit.c_F - kPaperSinkage.c_F) < 0.1 * std::abs(kPaperSinkage.c_F));
    REQUIRE(std::abs(fit.c_0 - kPaperSinkage.c_0) < 0.1 * std::abs(kPaperSinkage.c_0));
  }
}

TEST_CASE("fit/evaluate round trip recovers random coefficients") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a_true = coef(rng), b_true = coef(rng);
    std::vector<FlatSample> pts;
    for (double v : {0.1, 0.4, 0.7, 1.0, 1.3}) pts.push_back({v, a_true * v + b_true});
    const auto fit = fit_slip_flat(pts);
    REQUIRE(std::abs(fit.a_v - a_true) <= 1e-8 * std::max(1.0, std::abs(a_true)));
    REQUIRE(std::abs(fit.b_v - b_true) <= 1e-8 * std::max(1.0, std::abs(b_true)));
  }
}

TEST_CASE("slip_from_run") {
  std::vector<RunSample> run;
  SECTION("constant slip stream") {
    for (int i = 0; i < 50; ++i) run.push_back({i * 0.01, 0.95, 10.0, 0.0, {}, {}});
    const auto slips = slip_from_run(run, 0.1);
    REQUIRE(slips.size() == run.size());
    for (const auto& [t, s] : slips) REQUIRE(s == Catch::Approx(0.05).margin(1e-12));
  }
  SECTION("no slip when v equals wR") {
    for (int i = 0; i < 50; ++i) run.push_back({i * 0.01, 1.0, 10.0, 0.0, {}, {}});
    for (const auto& [t, s] : slip_from_run(run, 0.1)) REQUIRE(s == 0.0);
  }
  SECTION("ramp descends from 1 to 0") {
    const int n = 100;
    for (int i = 0; i < n; ++i)
      run.push_back({i * 0.01, static_cast<double>(i) / (n - 1), 10.0, 0.0, {}, {}});
    const auto slips = slip_from_run(run, 0.1);
    CHECK(slips.front().second == Catch::Approx(1.0));
    CHECK(slips.back().second == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t i = 1; i < slips.size(); ++i)
      REQUIRE(slips[i].second <= slips[i - 1].second + 1e-12);
  }
  SECTION("negative v rejected") {
    run.push_back({0.0, -0.1, 10.0, 0.0, {}, {}});
    CHECK_THROWS_AS(slip_from_run(run, 0.1), DomainError);
  }
}

TEST_CASE("parameter validation") {
  SlipModelParams slip;
  slip.s_max = 1.0;
  CHECK_THROWS_AS(slip.validate(), ConfigError);
  slip.s_max = 0.0;
  CHECK_THROWS_AS(slip.validate(), ConfigError);
  SinkageModelParams sink;
  sink.F_ref = 0.0;
  CHECK_THROWS_AS(sink.validate(), ConfigError);
}
