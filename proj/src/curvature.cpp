#include "ricci/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ricci/errors.hpp"
#include "ricci/parallel.hpp"

namespace ricci::curvature {

WarpedMetric::WarpedMetric(profiles::ScalarProfile w, int k, int m)
    : warp(std::move(w)), fiber_dim(k), quotient_order(m) {
  if (fiber_dim < 1) throw ParameterError("fiber dimension must be >= 1");
  if (quotient_order < 1) throw ParameterError("quotient order must be >= 1");
  if (quotient_order != 1 && fiber_dim != 3)
    throw ParameterError("fiber quotients are supported only for S^3 fibers");
}

BergerMetric::BergerMetric(profiles::ScalarProfile rho_in, profiles::ScalarProfile phi_in,
                           int n_in)
    : rho(std::move(rho_in)), phi(std::move(phi_in)), n(n_in) {
  if (n < 1) throw ParameterError("quotient order must be >= 1");
  if (std::abs(rho.lo() - phi.lo()) > 1e-9 || std::abs(rho.hi() - phi.hi()) > 1e-9)
    throw ParameterError("rho and phi must share a domain");
}

double BergerMetric::lo() const { return std::max(rho.lo(), phi.lo()); }
double BergerMetric::hi() const { return std::min(rho.hi(), phi.hi()); }

WarpedRicci ricci_warped(const WarpedMetric& m, double r) {
  const double p = m.warp.eval(r, 0);
  if (!(p > 0)) throw DomainError("warp factor is nonpositive at r = " + std::to_string(r));
  const double d1 = m.warp.eval(r, 1);
  const double d2 = m.warp.eval(r, 2);
  const double k = m.fiber_dim;
  WarpedRicci out;
  out.radial = -k * d2 / p;
  out.spherical = -d2 / p + (k - 1.0) * (1.0 - d1 * d1) / (p * p);
  return out;
}

double BergerConditions::min() const { return std::min({q1, q2, q3}); }

BergerConditions berger_conditions(const BergerMetric& m, double r) {
  const double rho = m.rho.eval(r, 0);
  const double phi = m.phi.eval(r, 0);
  if (!(rho > 0) || !(phi > 0))
    throw DomainError("warp factor is nonpositive at r = " + std::to_string(r));
  const double rho1 = m.rho.eval(r, 1), rho2 = m.rho.eval(r, 2);
  const double phi1 = m.phi.eval(r, 1), phi2 = m.phi.eval(r, 2);
  const double ratio = rho / phi;
  BergerConditions out;
  out.q1 = -rho2 / rho - 2.0 * phi2 / phi;
  out.q2 = 2.0 * ratio * ratio * ratio * ratio - 2.0 * ratio * rho1 * phi1 - rho * rho2;
  out.q3 = 4.0 - 2.0 * ratio * ratio - (phi / rho) * rho1 * phi1 - phi * phi2 - phi1 * phi1;
  return out;
}

namespace {

constexpr double kDegenerate = -std::numeric_limits<double>::infinity();

CurvatureCertificate reduce_certificate(std::string family, const GridSpec& grid,
                                        const std::vector<double>& nodes,
                                        const std::vector<std::vector<double>>& values,
                                        double tolerance) {
  CurvatureCertificate cert;
  cert.family = std::move(family);
  cert.grid = grid;
  cert.tolerance = tolerance;
  const std::size_t n_cond = values.size();
  cert.min_values.assign(n_cond, std::numeric_limits<double>::infinity());
  cert.witness_points.assign(n_cond, nodes.empty() ? 0.0 : nodes.front());
  for (std::size_t c = 0; c < n_cond; ++c) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (values[c][i] < cert.min_values[c]) {
        cert.min_values[c] = values[c][i];
        cert.witness_points[c] = nodes[i];
      }
    }
    if (cert.min_values[c] == kDegenerate) cert.degenerate = true;
  }
  cert.passed = true;
  for (double v : cert.min_values)
    if (!(v >= -tolerance)) cert.passed = false;
  return cert;
}

}  // namespace

CurvatureCertificate verify_nonneg(const WarpedMetric& m, const GridSpec& grid,
                                   double tolerance) {
  if (!(tolerance > 0)) throw ParameterError("certificate tolerance must be positive");
  const auto nodes = grid.nodes();
  std::vector<std::vector<double>> values(2, std::vector<double>(nodes.size()));
  parallel_for(nodes.size(), [&](std::size_t i) {
    try {
      const auto e = ricci_warped(m, nodes[i]);
      values[0][i] = e.radial;
      values[1][i] = e.spherical;
    } catch (const DomainError&) {
      values[0][i] = kDegenerate;
      values[1][i] = kDegenerate;
    }
  });
  return reduce_certificate("warped", grid, nodes, values, tolerance);
}

CurvatureCertificate verify_nonneg(const BergerMetric& m, const GridSpec& grid,
                                   double tolerance) {
  if (!(tolerance > 0)) throw ParameterError("certificate tolerance must be positive");
  const auto nodes = grid.nodes();
  std::vector<std::vector<double>> values(3, std::vector<double>(nodes.size()));
  parallel_for(nodes.size(), [&](std::size_t i) {
    try {
      const auto q = berger_conditions(m, nodes[i]);
      values[0][i] = q.q1;
      values[1][i] = q.q2;
      values[2][i] = q.q3;
    } catch (const DomainError&) {
      values[0][i] = kDegenerate;
      values[1][i] = kDegenerate;
      values[2][i] = kDegenerate;
    }
  });
  return reduce_certificate("berger", grid, nodes, values, tolerance);
}

nlohmann::json CurvatureCertificate::to_json() const {
  nlohmann::json j;
  j["family"] = family;
  j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}};
  auto encode = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return "degenerate";
  };
  nlohmann::json mins = nlohmann::json::array();
  for (double v : min_values) mins.push_back(encode(v));
  j["min_values"] = std::move(mins);
  j["witnesses"] = witness_points;
  j["passed"] = passed;
  j["degenerate"] = degenerate;
  j["tolerance"] = tolerance;
  j["note"] = "grid certificate; non-negativity is certified at the listed nodes only";
  return j;
}

CurvatureCertificate CurvatureCertificate::from_json(const nlohmann::json& j) {
  CurvatureCertificate cert;
  cert.family = j.at("family").get<std::string>();
  cert.grid.lo = j.at("grid").at("lo").get<double>();
  cert.grid.hi = j.at("grid").at("hi").get<double>();
  cert.grid.step = j.at("grid").at("step").get<double>();
  for (const auto& v : j.at("min_values"))
    cert.min_values.push_back(v.is_string() ? kDegenerate : v.get<double>());
  cert.witness_points = j.at("witnesses").get<std::vector<double>>();
  cert.passed = j.at("passed").get<bool>();
  cert.degenerate = j.at("degenerate").get<bool>();
  cert.tolerance = j.at("tolerance").get<double>();
  return cert;
}

nlohmann::json ThresholdResult::to_json() const {
  nlohmann::json j;
  j["c_max"] = c_max;
  j["bracket"] = {bracket_lo, bracket_hi};
  j["certificate"] = witness.to_json();
  return j;
}

ThresholdResult threshold_search(
    const std::function<CurvatureCertificate(double)>& builder, double c_lo, double c_hi,
    double width_tol) {
  if (!(c_lo < c_hi)) throw ParameterError("threshold bracket must have c_lo < c_hi");
  if (!(width_tol > 0)) throw ParameterError("bracket width tolerance must be positive");
  CurvatureCertificate lo_cert = builder(c_lo);
  if (!lo_cert.passed)
    throw ParameterError("threshold bracket: certificate already fails at the low end");
  if (builder(c_hi).passed)
    throw ParameterError("threshold bracket: certificate still passes at the high end");

  double lo = c_lo, hi = c_hi;
  CurvatureCertificate best = std::move(lo_cert);
  double best_c = c_lo;
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    CurvatureCertificate cert = builder(mid);
    if (cert.passed) {
      lo = mid;
      best = std::move(cert);
      best_c = mid;
    } else {
      hi = mid;
    }
  }
  ThresholdResult out;
  out.c_max = best_c;
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.witness = std::move(best);
  return out;
}

}  // namespace ricci::curvature
