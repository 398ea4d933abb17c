#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "ricci/constructions.hpp"
#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/profiles.hpp"
#include "ricci/tensor_oracle.hpp"

using namespace ricci;
using namespace ricci::construct;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector4d pt(double x0, double x1, double x2, double x3) {
  Eigen::Vector4d x;
  x << x0, x1, x2, x3;
  return x;
}

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double scale = std::max({1e-12, std::abs(a(i, j)), std::abs(b(i, j))});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

}  // namespace

TEST_CASE("instanton chart matches closed forms and is Ricci-flat") {
  const auto chart = eguchi_hanson_chart(1.0);
  REQUIRE(chart.dim == 4);

  // At r = 2 the radial coefficient is 1/f = 1/(1 - 1/16) = 16/15.
  const auto g2 = chart.metric_at(pt(2.0, 1.1, 2.0, 4.0));
  CHECK(g2(0, 0) == doctest::Approx(16.0 / 15.0).epsilon(1e-14));
  // The fiber direction collapses at the core: its coefficient is r^2 f / 4.
  const auto gc = chart.metric_at(pt(1.0001, 1.1, 2.0, 4.0));
  CHECK(gc(3, 3) > 0.0);
  CHECK(gc(3, 3) < 2e-4);

  CHECK(oracle::chart_is_positive_definite(chart, 50));

  for (double r : {1.2, 1.7, 2.5, 4.0, 8.0}) {
    const auto x = pt(r, 1.1, 2.0, 4.0);
    const auto ric = oracle::ricci_tensor(chart, x);
    CHECK(ric.norm() < 1e-4);
    CHECK(std::abs(oracle::ricci_eigen_min(chart, x)) < 1e-4);
  }
}

TEST_CASE("the two instanton charts describe the same geometry") {
  const double a = 1.0;
  const auto rc = eguchi_hanson_chart(a);
  const auto uc = eguchi_hanson_u_chart(a);

  for (double u : {0.4, 1.0, 2.5, 7.0}) {
    const double r = eh_radius_from_u(a, u);
    // Round trip u = r sqrt(1 - (a/r)^4).
    const double f = 1.0 - std::pow(a / r, 4);
    CHECK(r * std::sqrt(f) == doctest::Approx(u).epsilon(1e-12));

    const auto gu = uc.metric_at(pt(u, 1.2, 2.0, 4.0));
    const auto gr = rc.metric_at(pt(r, 1.2, 2.0, 4.0));
    // Angular blocks agree once evaluated at matching radii.
    for (int i = 1; i < 4; ++i)
      for (int j = 1; j < 4; ++j)
        CHECK(gu(i, j) == doctest::Approx(gr(i, j)).epsilon(1e-10));
    // Radial coefficients agree through the chart change u(r).
    const double h = 1e-6 * r;
    auto u_of_r = [&](double rr) { return rr * std::sqrt(1.0 - std::pow(a / rr, 4)); };
    const double dudr = (u_of_r(r + h) - u_of_r(r - h)) / (2.0 * h);
    CHECK(gu(0, 0) * dudr * dudr == doctest::Approx(gr(0, 0)).epsilon(1e-7));
  }
}

TEST_CASE("instanton arc length is monotone with a bounded lag") {
  const double a = 1.0;
  CHECK(eh_arclength(a, 0.0) == 0.0);
  double prev = 0.0;
  for (double u = 0.5; u <= 6.0; u += 0.5) {
    const double t = eh_arclength(a, u);
    CHECK(t > prev);
    CHECK(t < u);
    prev = t;
  }
  // The lag u - t(u) saturates; its limit is a fixed multiple of the core
  // scale, about 0.59 a.
  const double lag6 = 6.0 - eh_arclength(a, 6.0);
  const double lag12 = 12.0 - eh_arclength(a, 12.0);
  CHECK(std::abs(lag12 - lag6) < 2e-3);
  CHECK(std::abs(lag12 - 0.59 * a) < 1e-2);
  // The lag scales linearly with a.
  CHECK(std::abs((3.0 - eh_arclength(0.25, 3.0)) - 0.25 * 0.59) < 3e-3);
}

TEST_CASE("comparison sphere has every Ricci eigenvalue equal to twelve") {
  const auto chart = model_metric_chart();
  for (double u : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double m = oracle::ricci_eigen_min(chart, pt(u, 1.2, 2.0, 4.0));
    CHECK(m == doctest::Approx(12.0).epsilon(2e-3));
  }

  // Closed form through the polar warp sin(2s)/2: both curvature components
  // are exactly 12 at every radius.
  const auto warp = profiles::make_sinusoid(0.0, kPi / 2.0, 0.5, 2.0, 0.0, 0.0, "w");
  const curvature::WarpedMetric wm(warp, 3, 1);
  for (double s : {0.3, 0.8, 1.2}) {
    const auto rw = curvature::ricci_warped(wm, s);
    CHECK(rw.radial == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(rw.spherical == doctest::Approx(12.0).epsilon(1e-12));
  }

  // The polar and u charts agree through u = tan(s).
  const auto polar = model_polar_chart();
  for (double s : {0.3, 0.7, 1.1}) {
    const double u = std::tan(s);
    const auto gp = polar.metric_at(pt(s, 0.7, 2.0, 4.0));
    const auto gu = chart.metric_at(pt(u, 0.7, 2.0, 4.0));
    const double sec2 = 1.0 + u * u;
    CHECK(gu(0, 0) * sec2 * sec2 == doctest::Approx(gp(0, 0)).epsilon(1e-12));
    // Same fiber size: compare the warp coefficient against u^2/(1+u^2)^2.
    CHECK(gp(1, 1) == doctest::Approx(u * u / (sec2 * sec2)).epsilon(1e-12));
  }
}

TEST_CASE("conformal factor is convex, flat at the origin, quadratic at the far end") {
  const auto h = conformal_factor_profile();
  CHECK(h.lo() == 0.0);
  CHECK(h.hi() >= 29.0);

  CHECK(h(0.0) == 1.0);
  CHECK(h(0.1) == 1.0);
  CHECK(h(0.25) == 1.0);
  // At the junction s = 0.7 the left piece answers, correct to rounding;
  // strictly inside the far piece the quadratic is reproduced bitwise.
  CHECK(h(0.7) == doctest::Approx(0.7 * 0.7 + 1.0).epsilon(1e-14));
  for (double s : {1.0, 5.0, 29.5}) CHECK(h(s) == s * s + 1.0);
  CHECK(h(0.363142857142857155) == doctest::Approx(1.0625).epsilon(1e-14));

  double min_d2 = 1e300, min_v = 1e300;
  for (double s = 0.0; s <= 30.0; s += 1e-3) {
    min_d2 = std::min(min_d2, h.eval(s, 2));
    min_v = std::min(min_v, h.eval(s, 0));
  }
  CHECK(min_d2 >= -1e-9);
  CHECK(min_v >= 1.0 - 1e-12);

  // Matched value, slope and curvature at every junction.
  const auto& pcs = h.pieces();
  for (std::size_t i = 0; i + 1 < pcs.size(); ++i) {
    const double b = pcs[i].hi;
    CHECK(std::abs(pcs[i].eval(b, 0) - pcs[i + 1].eval(b, 0)) < 1e-12);
    CHECK(std::abs(pcs[i].eval(b, 1) - pcs[i + 1].eval(b, 1)) < 1e-9);
    CHECK(std::abs(pcs[i].eval(b, 2) - pcs[i + 1].eval(b, 2)) < 1e-6);
  }
}

TEST_CASE("conformal interpolation reaches the sphere with certified curvature") {
  ConstructionParams params;
  params.a = 0.05;
  const auto h = conformal_factor_profile();
  const auto res = conformal_modified(params, h);

  CHECK(res.blend_lo == doctest::Approx(0.75));
  CHECK(res.blend_hi == doctest::Approx(0.95));

  // The curvature certificate depends on the instanton scale.  The blend
  // window mixes two metrics whose relative gap grows linearly with a, and
  // the mixing cost has to stay below the sphere's curvature floor of 12.
  // At a = 0.05 the gap is ~6% and the certificate honestly fails; at
  // a = 0.01 it is ~1% and every sampled eigenvalue clears the tolerance.
  CHECK_FALSE(res.certificate.passed);
  CHECK(res.certificate.min_values.size() == 1);

  ConstructionParams small = params;
  small.a = 0.01;
  const auto res_small = conformal_modified(small, h);
  CHECK(res_small.certificate.passed);
  REQUIRE(res_small.certificate.min_values.size() == 1);
  CHECK(res_small.certificate.min_values[0] >= -1e-4);
  REQUIRE(res_small.certificate.witness_points.size() == 1);
  // The worst node sits at the low end of the grid where the finite
  // difference noise floor lives, not inside the blend window.
  CHECK(res_small.certificate.witness_points[0] < res_small.blend_lo);

  // Below the conformal onset the metric is the untouched instanton chart.
  const auto raw = eguchi_hanson_u_chart(params.a);
  const auto x_low = pt(0.25, 1.2, 2.0, 3.0);
  CHECK(max_rel_diff(res.chart.metric_at(x_low), raw.metric_at(x_low)) < 1e-13);

  // Beyond the window it is the comparison sphere exactly; just below the
  // window's end it is already within one percent of it.
  const auto model = model_metric_chart();
  const auto x_hi = pt(1.0, 1.2, 2.0, 3.0);
  CHECK(max_rel_diff(res.chart.metric_at(x_hi), model.metric_at(x_hi)) < 1e-15);
  const auto x_mid = pt(0.9, 1.2, 2.0, 3.0);
  CHECK(max_rel_diff(res.chart.metric_at(x_mid), model.metric_at(x_mid)) < 1e-2);

  // Tabulated arc length matches the quadrature and lags u by the recorded
  // shift.
  CHECK(res.arclength(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  for (double u : {0.3, 0.9, 1.5})
    CHECK(res.arclength(u) == doctest::Approx(eh_arclength(params.a, u)).epsilon(1e-9));
  CHECK(std::abs(res.arclength_shift / params.a - 0.59) < 1e-2);

  // A non-convex rise is rejected before any geometry is built.
  const profiles::ScalarProfile bad(
      {profiles::ProfilePiece::affine(0.0, 0.5, 1.0, 0.0),
       profiles::ProfilePiece::sinusoid(0.5, 3.0, 2.0, 0.5, -0.25, 1.0)},
      "bad-h");
  CHECK_THROWS_AS(conformal_modified(params, bad), ParameterError);
}

TEST_CASE("open single-warp family is gauge-fixed to the straight cone") {
  const double b = 0.3, c = 0.5 * std::sin(b);
  const auto spec = build_m_profile(c, b);
  CHECK(spec.kind == "m-open");
  CHECK(spec.group == "iota");
  CHECK(spec.constants.at("quotient_order") == 4.0);
  CHECK(spec.all_certificates_pass());

  // In the conical region the warp is exactly c (r + 1).
  const auto& warp = spec.profile("warp");
  CHECK(warp(2.0) == 3.0 * c);
  CHECK(warp(10.0) == 11.0 * c);
  CHECK(&spec.sampling_warp() == &warp);

  // The compatibility relation between cone slope and cap angle is enforced.
  CHECK_THROWS_AS(build_m_profile(0.2, 0.3), ParameterError);
}

TEST_CASE("closed single-warp family is mirror symmetric with passing certificates") {
  const double c = 0.075, d = 0.25;
  const auto spec = build_m_closed_profile(c, d);
  CHECK(spec.kind == "m-closed");
  CHECK(spec.group == "iota");
  REQUIRE(spec.certificates.size() == 3);
  CHECK(spec.all_certificates_pass());

  CHECK(spec.constants.at("mirror_residual") <= 1e-12);
  CHECK(spec.constants.at("endpoint_extrapolation") <= 1e-6);
  CHECK(spec.constants.at("residual_vs_statement") < 0.05);

  const auto& warp = spec.profile("warp");
  const double k_off = c * d - 0.5 * c * std::sin(0.9 * d);
  CHECK(warp(kPi / 2.0) ==
        doctest::Approx(0.5 * c * std::sin(kPi / 2.0) + k_off).epsilon(1e-14));
  CHECK(warp(1.0) == doctest::Approx(warp(kPi - 1.0)).epsilon(1e-13));

  const auto rep =
      profiles::check_regularity(warp, GridSpec{1e-4, kPi - 1e-4, 1e-3, {}});
  CHECK(rep.concave);
  CHECK(rep.lipschitz_constant <= 1.0 + 1e-9);
  CHECK(rep.min_value > 0.0);

  CHECK_THROWS_AS(build_m_closed_profile(0.6, 0.25), ParameterError);
  CHECK_THROWS_AS(build_m_closed_profile(0.075, 0.7), ParameterError);
}

TEST_CASE("open doubly warped family keeps the fiber below the base") {
  const int n = 4;
  const double c = 0.01;
  const auto spec = build_n_profiles(n, c);
  CHECK(spec.kind == "n-open");
  CHECK(spec.group == "mu_4");
  CHECK(spec.all_certificates_pass());

  const auto& rho = spec.profile("rho");
  const auto& phi = spec.profile("phi");
  CHECK(&spec.sampling_warp() == &phi);

  // Away from the mollified window both profiles are their defining lines.
  CHECK(rho(0.5) == 2.0);
  CHECK(rho(0.6) == n * 0.6);
  CHECK(phi(0.0) == 4.0);
  CHECK(phi(0.5) == 4.0);
  CHECK(rho(2.0) == (n - c) + c * 2.0);
  CHECK(phi(3.0) == (n - c) + c * 3.0);
  CHECK(rho(40.0) == phi(40.0));

  // The collapsing circle never exceeds the base sphere.
  for (double r = 0.0; r <= 50.5; r += 0.01) CHECK(rho(r) <= phi(r) + 1e-12);

  CHECK(spec.constants.at("norm_scale") == doctest::Approx(2.0 * c / n));
  CHECK(spec.constants.at("norm_shift") == doctest::Approx(1.0 - 2.0 * c / n));

  // The certificate still passes at the recorded threshold slope and fails
  // beyond it.
  CHECK(build_n_profiles(4, kRecordedBergerThreshold).all_certificates_pass());
  CHECK_FALSE(build_n_profiles(4, 0.155).all_certificates_pass());
  CHECK_THROWS_AS(build_n_profiles(4, 4.5), ParameterError);
}

TEST_CASE("closed doubly warped family shares its middle with the single-warp one") {
  const double c = 0.075, d = 0.25;
  const auto nc = build_n_closed_profiles(c, d);
  const auto mc = build_m_closed_profile(c, d);
  CHECK(nc.kind == "n-closed");
  CHECK(nc.group == "mu_4");
  REQUIRE(nc.certificates.size() == 3);
  CHECK(nc.all_certificates_pass());

  const auto& rho = nc.profile("rho");
  const auto& phi = nc.profile("phi");
  const auto& warp = mc.profile("warp");

  // Identical sinusoidal middle at equal parameters.
  CHECK(phi(kPi / 2.0) == warp(kPi / 2.0));
  CHECK(phi(1.0) == warp(1.0));
  CHECK(phi(2.0) == warp(2.0));
  CHECK(rho(1.0) == phi(1.0));

  CHECK(nc.constants.at("mirror_residual") <= 1e-12);

  // Near the ends the circle closes with slope n while the base sphere stays
  // at the scaled core size.
  const double mu3 = c * d / (10.0 * (4 - c));
  CHECK(rho.eval(1e-5, 1) == 4.0);
  CHECK(phi(0.0) == 4.0 * mu3);
  CHECK(phi(kPi) == doctest::Approx(4.0 * mu3).epsilon(1e-12));
  CHECK(&nc.sampling_warp() == &phi);
}

TEST_CASE("limit suspension passes exactly up to unit amplitude") {
  const auto good = limit_suspension(1.0);
  CHECK(good.kind == "suspension-limit");
  CHECK(good.group == "mu_4");
  CHECK(good.all_certificates_pass());
  CHECK(good.profile("warp")(kPi / 2.0) == 1.0);

  const curvature::WarpedMetric wm(good.profile("warp"), 3, 4);
  const auto rw = curvature::ricci_warped(wm, kPi / 2.0);
  CHECK(rw.radial == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(rw.spherical == doctest::Approx(3.0).epsilon(1e-12));

  CHECK(limit_suspension(0.5).all_certificates_pass());
  CHECK_FALSE(limit_suspension(1.05).all_certificates_pass());
  CHECK_THROWS_AS(limit_suspension(-1.0), ParameterError);
}

TEST_CASE("family specifications round trip through JSON unchanged") {
  const auto specs = {
      build_m_profile(0.5 * std::sin(0.3), 0.3),
      build_m_closed_profile(0.075, 0.25),
      build_n_profiles(4, 0.01),
      build_n_closed_profiles(0.075, 0.25),
      limit_suspension(0.5),
  };
  for (const auto& spec : specs) {
    const auto j1 = spec.to_json();
    const auto back = MetricFamilySpec::from_json(j1);
    const auto j2 = back.to_json();
    CHECK(j1 == j2);
    const auto& w1 = spec.sampling_warp();
    const auto& w2 = back.sampling_warp();
    const double mid = 0.5 * (w1.lo() + w1.hi());
    CHECK(w1(mid) == w2(mid));
    CHECK(back.all_certificates_pass() == spec.all_certificates_pass());
  }
}

TEST_CASE("threshold search reproduces the recorded collapse slope") {
  const auto th = find_berger_threshold(4, 0.01, 1.0, 1e-6);
  CHECK(th.c_max == kRecordedBergerThreshold);
  CHECK(th.bracket_hi - th.bracket_lo <= 1e-6);
  CHECK(th.witness.passed);
  CHECK(th.c_max > 0.01);
  CHECK(th.c_max < 1.0);

  // The bracket must actually straddle the transition.
  CHECK_THROWS_AS(find_berger_threshold(4, 0.2, 1.0, 1e-6), ParameterError);
  CHECK_THROWS_AS(find_berger_threshold(4, 0.01, 0.1, 1e-6), ParameterError);
}

TEST_CASE("construction parameters validate their ranges") {
  ConstructionParams p;
  CHECK_NOTHROW(p.validate());

  const auto j = p.to_json();
  const auto q = ConstructionParams::from_json(j);
  CHECK(q.to_json() == j);

  ConstructionParams bad = p;
  bad.a = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = p;
  bad.b = 0.7;  // violates b < b_prime
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = p;
  bad.d = 0.5;
  CHECK_NOTHROW(bad.validate());
  bad.d = 0.6;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = p;
  bad.n = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}
