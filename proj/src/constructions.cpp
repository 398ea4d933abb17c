#include "ricci/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ricci/errors.hpp"
#include "ricci/parallel.hpp"
#include "ricci/quadrature.hpp"

namespace ricci::construct {

using curvature::BergerMetric;
using curvature::CurvatureCertificate;
using curvature::WarpedMetric;
using oracle::ChartMetric;
using profiles::MollifierKernel;
using profiles::ProfilePiece;
using profiles::ScalarProfile;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCertTol = 1e-8;
constexpr double kCertStep = 1e-3;

double smoothstep5(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 + t * (-15 + 6 * t));
}

double pow4(double x) { return (x * x) * (x * x); }

// Squared radius r^2 as a function of u, from inverting u = r sqrt(1 - (a/r)^4).
double radius_sq_from_u(double a, double u) {
  const double u2 = u * u;
  return 0.5 * (u2 + std::sqrt(u2 * u2 + 4 * pow4(a)));
}

Eigen::MatrixXd eh_u_components(double a, double u, double th) {
  const double r2 = radius_sq_from_u(a, u);
  const double q = pow4(a) / (r2 * r2);
  const double big_f = 1.0 + q;
  const double st = std::sin(th), ct = std::cos(th);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 0) = 1.0 / (big_f * big_f);
  g(1, 1) = r2 / 4.0;
  g(2, 2) = (r2 * st * st + u * u * ct * ct) / 4.0;
  g(2, 3) = g(3, 2) = u * u * ct / 4.0;
  g(3, 3) = u * u / 4.0;
  return g;
}

Eigen::MatrixXd model_components(double u, double th) {
  const double den = 1.0 + u * u;
  const double a_rad = 1.0 / (den * den);      // radial coefficient
  const double b_fib = u * u * a_rad;          // fiber coefficient
  const double ct = std::cos(th);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 0) = a_rad;
  g(1, 1) = b_fib / 4.0;
  g(2, 2) = b_fib / 4.0;
  g(2, 3) = g(3, 2) = b_fib * ct / 4.0;
  g(3, 3) = b_fib / 4.0;
  return g;
}

// Middle-piece vertical offset shared by both closed families.
double middle_offset(double c, double d) {
  return c * d - 0.5 * c * std::sin(0.9 * d);
}

// Mollified open doubly warped pair on (-3/4, 50 + 3/4): rho ramps with slope
// n through the origin, phi starts flat at n; both continue with slope c.
std::pair<ScalarProfile, ScalarProfile> mollified_pair(int n, double c) {
  const double nn = n;
  std::vector<ProfilePiece> rho_pieces = {
      ProfilePiece::affine(-1.0, 1.0, 0.0, nn),
      ProfilePiece::affine(1.0, 51.0, nn - c, c)};
  std::vector<ProfilePiece> phi_pieces = {
      ProfilePiece::affine(-1.0, 1.0, nn, 0.0),
      ProfilePiece::affine(1.0, 51.0, nn - c, c)};
  const MollifierKernel kernel(0.25);
  ScalarProfile rho = profiles::mollify(ScalarProfile(rho_pieces, "n-open-rho"), kernel);
  ScalarProfile phi = profiles::mollify(ScalarProfile(phi_pieces, "n-open-phi"), kernel);
  return {std::move(rho), std::move(phi)};
}

void record_symmetry_constants(MetricFamilySpec& spec, const ScalarProfile& warp,
                               double c, double d) {
  double mirror_residual = 0;
  double statement_residual = 0;
  for (double r = kCertStep; r < kPi / 2; r += kCertStep) {
    mirror_residual = std::max(mirror_residual, std::abs(warp(r) - warp(kPi - r)));
  }
  for (double r = 0.95 * d; r <= kPi - 0.95 * d; r += kCertStep) {
    const double statement = c * (std::sin(r) - std::sin(0.45 * d) + d);
    statement_residual = std::max(statement_residual, std::abs(warp(r) - statement));
  }
  spec.constants["mirror_residual"] = mirror_residual;
  spec.constants["residual_vs_statement"] = statement_residual;
  const double eps = 1e-4;
  const double left = std::abs(warp(eps) - eps * warp.eval(eps, 1));
  const double right = std::abs(warp(kPi - eps) + eps * warp.eval(kPi - eps, 1));
  spec.constants["endpoint_extrapolation"] = std::max(left, right);
}

}  // namespace

void ConstructionParams::validate() const {
  if (!(a > 0)) throw ParameterError("core scale a must be positive");
  if (!(b > 0 && b < b_prime && b_prime < 1))
    throw ParameterError("gluing window must satisfy 0 < b < b_prime < 1");
  if (!(c > 0)) throw ParameterError("cone slope c must be positive");
  if (!(d > 0 && d <= 0.5)) throw ParameterError("cap size d must lie in (0, 1/2]");
  if (n < 1) throw ParameterError("fiber quotient order n must be at least 1");
}

nlohmann::json ConstructionParams::to_json() const {
  return {{"a", a}, {"b", b}, {"b_prime", b_prime}, {"c", c}, {"d", d}, {"n", n}};
}

ConstructionParams ConstructionParams::from_json(const nlohmann::json& j) {
  ConstructionParams p;
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
  p.b_prime = j.at("b_prime").get<double>();
  p.c = j.at("c").get<double>();
  p.d = j.at("d").get<double>();
  p.n = j.at("n").get<int>();
  return p;
}

bool MetricFamilySpec::all_certificates_pass() const {
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const CurvatureCertificate& c) { return c.passed; });
}

const ScalarProfile& MetricFamilySpec::profile(const std::string& name) const {
  const auto it = profiles.find(name);
  if (it == profiles.end())
    throw ParameterError("metric family '" + kind + "' has no profile named '" + name + "'");
  return it->second;
}

const ScalarProfile& MetricFamilySpec::sampling_warp() const {
  const auto it = profiles.find("warp");
  return it != profiles.end() ? it->second : profile("phi");
}

nlohmann::json MetricFamilySpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["params"] = params.to_json();
  nlohmann::json profs = nlohmann::json::object();
  for (const auto& [name, p] : profiles) profs[name] = p.to_json();
  j["profiles"] = std::move(profs);
  j["group"] = group;
  j["constants"] = constants;
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : certificates) certs.push_back(c.to_json());
  j["certificates"] = std::move(certs);
  return j;
}

MetricFamilySpec MetricFamilySpec::from_json(const nlohmann::json& j) {
  MetricFamilySpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.params = ConstructionParams::from_json(j.at("params"));
  for (const auto& [name, pj] : j.at("profiles").items())
    spec.profiles.emplace(name, ScalarProfile::from_json(pj));
  spec.group = j.at("group").get<std::string>();
  spec.constants = j.at("constants").get<std::map<std::string, double>>();
  for (const auto& cj : j.at("certificates"))
    spec.certificates.push_back(CurvatureCertificate::from_json(cj));
  return spec;
}

ChartMetric eguchi_hanson_chart(double a) {
  if (!(a > 0)) throw ParameterError("instanton scale a must be positive");
  ChartMetric chart;
  chart.chart_name = "eguchi-hanson-r";
  chart.valid_region = {
      {1.05 * a, 12.0 * a}, {0.05, kPi - 0.05}, {0.0, 2 * kPi}, {0.0, 2 * kPi}};
  chart.metric_at = [a](const Eigen::VectorXd& x) {
    const double r = x(0), th = x(1);
    const double f = 1.0 - pow4(a / r);
    const double r2 = r * r;
    const double st = std::sin(th), ct = std::cos(th);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = 1.0 / f;
    g(1, 1) = r2 / 4.0;
    g(2, 2) = (r2 * st * st + r2 * f * ct * ct) / 4.0;
    g(2, 3) = g(3, 2) = r2 * f * ct / 4.0;
    g(3, 3) = r2 * f / 4.0;
    return g;
  };
  return chart;
}

ChartMetric eguchi_hanson_u_chart(double a) {
  if (!(a > 0)) throw ParameterError("instanton scale a must be positive");
  ChartMetric chart;
  chart.chart_name = "eguchi-hanson-u";
  chart.valid_region = {{0.1 * a, std::max(12.0 * a, 1.6)},
                        {0.05, kPi - 0.05},
                        {0.0, 2 * kPi},
                        {0.0, 2 * kPi}};
  chart.metric_at = [a](const Eigen::VectorXd& x) {
    return eh_u_components(a, x(0), x(1));
  };
  return chart;
}

double eh_radius_from_u(double a, double u) {
  if (!(a > 0)) throw ParameterError("instanton scale a must be positive");
  if (u < 0) throw DomainError("radial coordinate u must be non-negative");
  return std::sqrt(radius_sq_from_u(a, u));
}

double eh_arclength(double a, double u) {
  if (!(a > 0)) throw ParameterError("instanton scale a must be positive");
  if (u < 0) throw DomainError("radial coordinate u must be non-negative");
  if (u == 0) return 0;
  const double a4 = pow4(a);
  return integrate(
      [a4](double v) {
        const double v2 = v * v;
        const double r2 = 0.5 * (v2 + std::sqrt(v2 * v2 + 4 * a4));
        return 1.0 / (1.0 + a4 / (r2 * r2));
      },
      0.0, u, 1e-12);
}

ChartMetric model_metric_chart() {
  ChartMetric chart;
  chart.chart_name = "model-sphere-u";
  chart.valid_region = {{0.01, 25.0}, {0.05, kPi - 0.05}, {0.0, 2 * kPi}, {0.0, 2 * kPi}};
  chart.metric_at = [](const Eigen::VectorXd& x) {
    return model_components(x(0), x(1));
  };
  return chart;
}

ChartMetric model_polar_chart() {
  return oracle::warped_product_chart(
      [](double s) { return 0.5 * std::sin(2 * s); }, 0.02, kPi / 2 - 0.02,
      "model-sphere-polar");
}

ScalarProfile conformal_factor_profile() {
  const double p = 0.55, q = 0.70, wb = 0.05, delta = 0.15;
  const double slope = p + q;                         // common slope of 1 + s^2 averages
  const double amp = 15.0 * slope / (16.0 * wb);      // bump height of h''
  const double hp = 1.0 + q * q - slope * delta - (2.0 / 7.0) * delta * delta;
  const double m = p + (1.0 - hp) / slope;            // center of the rise window

  // Window polynomial: h'' = amp (1 - y^2)^2 on y = (s-m)/wb in [-1, 1],
  // integrated twice with h(m - wb) = 1 and h'(m - wb) = 0.
  const std::vector<double> window = {1.0 + amp * wb * wb / 6.0,
                                      amp * wb * 8.0 / 15.0,
                                      amp / 2.0,
                                      0.0,
                                      -amp / (6.0 * wb * wb),
                                      0.0,
                                      amp / (30.0 * pow4(wb))};
  // Ramp polynomial on [p, q]: h'' rises 0 -> 2 as a quintic step in
  // t = (s-p)/delta, integrated twice with h(p) = hp, h'(p) = slope.
  const double d3 = delta * delta * delta;
  const std::vector<double> ramp = {hp, slope, 0.0, 0.0, 0.0, 1.0 / d3,
                                    -1.0 / (d3 * delta),
                                    2.0 / (7.0 * d3 * delta * delta)};
  std::vector<ProfilePiece> pieces = {
      ProfilePiece::affine(0.0, m - wb, 1.0, 0.0),
      ProfilePiece::polynomial(m - wb, m + wb, m, window),
      ProfilePiece::affine(m + wb, p, hp - slope * p, slope),
      ProfilePiece::polynomial(p, q, p, ramp),
      ProfilePiece::polynomial(q, 30.0, 0.0, {1.0, 0.0, 1.0})};
  return ScalarProfile(std::move(pieces), "conformal-factor");
}

ConformalResult conformal_modified(const ConstructionParams& params,
                                   const ScalarProfile& h) {
  params.validate();
  const double a = params.a;
  if (h.empty()) throw ParameterError("conformal factor profile is empty");
  if (!(h.lo() <= 1e-12)) throw ParameterError("conformal factor must start at 0");

  // The factor must be convex, at least 1, and flat (= 1) at the start so the
  // core metric is untouched; sampled preconditions, analytic derivatives.
  const int n_check = 2000;
  for (int i = 0; i <= n_check; ++i) {
    const double s = h.lo() + (h.hi() - h.lo()) * i / n_check;
    if (h.eval(s, 2) < -1e-9)
      throw ParameterError("conformal factor must be convex");
    if (h(s) < 1.0 - 1e-12)
      throw ParameterError("conformal factor must be at least 1");
  }
  if (std::abs(h(std::min(0.2, h.hi())) - 1.0) > 1e-12)
    throw ParameterError("conformal factor must equal 1 near the core");

  const double blend_lo = 0.75, blend_hi = 0.95;
  const double u_table_hi = 1.7;
  if (h.hi() < u_table_hi)
    throw ParameterError("conformal factor domain must reach past the chart");

  // Cumulative arc length t(u) on a fine table; a fixed-panel rule per step
  // keeps the tabulated values a smooth function of the node positions.
  const double a4 = pow4(a);
  const auto speed = [a4](double v) {
    const double v2 = v * v;
    const double r2 = 0.5 * (v2 + std::sqrt(v2 * v2 + 4 * a4));
    return 1.0 / (1.0 + a4 / (r2 * r2));
  };
  const double spacing = 2e-4;
  const int n_tab = static_cast<int>(std::lround(u_table_hi / spacing));
  std::vector<double> tvals(n_tab + 1, 0.0);
  for (int i = 0; i < n_tab; ++i)
    tvals[i + 1] = tvals[i] + integrate_gl(speed, i * spacing, (i + 1) * spacing, 1);
  ScalarProfile t_of_u(
      {ProfilePiece::table(0.0, u_table_hi, 0.0, spacing, tvals)}, "arclength");

  ConformalResult out;
  out.arclength = t_of_u;
  out.blend_lo = blend_lo;
  out.blend_hi = blend_hi;

  ChartMetric chart;
  chart.chart_name = "eh-conformal";
  chart.valid_region = {{0.02, 1.5}, {0.05, kPi - 0.05}, {0.0, 2 * kPi}, {0.0, 2 * kPi}};
  chart.metric_at = [a, h, t_of_u, blend_lo, blend_hi](const Eigen::VectorXd& x) {
    const double u = x(0), th = x(1);
    if (u >= blend_hi) return model_components(u, th);
    const double hv = h(t_of_u(u));
    Eigen::MatrixXd g = eh_u_components(a, u, th) / (hv * hv);
    if (u > blend_lo) {
      const double chi = smoothstep5((u - blend_lo) / (blend_hi - blend_lo));
      g = (1.0 - chi) * g + chi * model_components(u, th);
    }
    return g;
  };
  out.chart = chart;
  out.arclength_shift = 1.5 - t_of_u(1.5);

  // Certificate: minimal Ricci eigenvalue sampled on a u grid at fixed generic
  // angles. Nodes are nudged off the finitely many radii where the metric is
  // only C^2 (differencing there reports spurious values of either sign).
  const double cert_lo = 0.05, cert_hi = 1.45, cert_step = 0.025;
  std::vector<double> seams = {blend_lo, blend_hi};
  for (double bp : h.breakpoints()) {
    if (bp <= 1e-12 || bp >= t_of_u(cert_hi)) continue;
    double lo = 0.0, hi = cert_hi;  // invert t at the breakpoint by bisection
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (t_of_u(mid) < bp ? lo : hi) = mid;
    }
    seams.push_back(0.5 * (lo + hi));
  }
  std::vector<double> nodes;
  for (double u = cert_lo; u <= cert_hi + 1e-12; u += cert_step) {
    double un = u;
    for (double s : seams)
      if (std::abs(un - s) < 0.012) un = s + (un >= s ? 0.012 : -0.012);
    nodes.push_back(un);
  }
  out.sample_nodes = nodes;

  const double fd_step = 2e-5;
  std::vector<double> mins(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    Eigen::VectorXd x(4);
    x << nodes[i], 1.1, 0.7, 1.9;
    try {
      mins[i] = oracle::ricci_eigen_min(chart, x, fd_step);
    } catch (const NumericError&) {
      mins[i] = -std::numeric_limits<double>::infinity();
    }
  });
  CurvatureCertificate cert;
  cert.family = "eh-conformal-oracle";
  cert.grid = GridSpec{cert_lo, cert_hi, cert_step};
  cert.tolerance = 1e-4;
  double min_val = mins[0];
  double witness = nodes[0];
  for (std::size_t i = 1; i < mins.size(); ++i)
    if (mins[i] < min_val) min_val = mins[i], witness = nodes[i];
  cert.min_values = {min_val};
  cert.witness_points = {witness};
  cert.degenerate = !std::isfinite(min_val);
  cert.passed = !cert.degenerate && min_val >= -cert.tolerance;
  out.certificate = cert;
  return out;
}

MetricFamilySpec build_m_profile(double c, double b) {
  if (!(b > 0 && b < 1)) throw ParameterError("cap angle b must lie in (0, 1)");
  if (std::abs(c - 0.5 * std::sin(b)) > 1e-9)
    throw ParameterError("open single-warp family needs the slope relation c = sin(b)/2");

  const double beta0 = kPi / 2 - b;
  const double w = 0.5 * b;
  const double cosb = std::cos(b);
  ScalarProfile rough(
      {ProfilePiece::sinusoid(0.0, beta0, 1.0, 1.0, 0.0, 0.0),
       ProfilePiece::affine(beta0, 200.0, cosb - c * beta0, c)},
      "m-open-raw");
  ScalarProfile smooth = profiles::concave_smooth(rough, beta0, w);

  // Gauge: send the end of the smoothing window to r = 1 with value 2c, which
  // makes the straight part identically c (r + 1); snap its coefficients.
  const double scale = 2.0 * c / (c * w + cosb);
  const double shift = 1.0 - scale * (beta0 + w);
  ScalarProfile gauged = profiles::affine_change(smooth, scale, shift, "m-open-warp");
  ScalarProfile clipped = profiles::restrict_to(gauged, gauged.lo(), 50.0);
  std::vector<ProfilePiece> pieces = clipped.pieces();
  ProfilePiece& far = pieces.back();
  far = ProfilePiece::affine(far.lo, far.hi, c, c);
  ScalarProfile warp(std::move(pieces), "m-open-warp");

  MetricFamilySpec spec;
  spec.kind = "m-open";
  spec.params.c = c;
  spec.params.b = b;
  spec.group = "iota";
  spec.constants = {{"scale", scale},
                    {"shift", shift},
                    {"cap_angle", beta0},
                    {"smoothing_halfwidth", w},
                    {"quotient_order", 4.0}};
  spec.certificates.push_back(curvature::verify_nonneg(
      WarpedMetric(warp, 3, 4), GridSpec{warp.lo() + kCertStep, 50.0, kCertStep},
      kCertTol));
  spec.profiles.emplace("warp", std::move(warp));
  return spec;
}

MetricFamilySpec build_m_closed_profile(double c, double d) {
  if (!(c > 0 && c < 0.5)) throw ParameterError("closed families need 0 < c < 1/2");
  if (!(d > 0 && d <= 0.5)) throw ParameterError("cap size d must lie in (0, 1/2]");

  const double beta0 = std::acos(2 * c);
  const double cb = std::sqrt(1 - 4 * c * c);
  const double amp = c * d / (10.0 * (cb - c * beta0));  // cap radius
  const double r_cap = amp * beta0;                      // cap/straight junction
  const double k_off = middle_offset(c, d);
  ScalarProfile left({ProfilePiece::sinusoid(0.0, r_cap, amp, 1.0 / amp, 0.0, 0.0),
                      ProfilePiece::affine(r_cap, 0.9 * d, c * d / 10.0, c)});
  ScalarProfile right = profiles::mirror_about(left, kPi);
  std::vector<ProfilePiece> pieces = left.pieces();
  pieces.push_back(
      ProfilePiece::sinusoid(0.9 * d, kPi - 0.9 * d, 0.5 * c, 1.0, 0.0, k_off));
  for (const ProfilePiece& pc : right.pieces()) pieces.push_back(pc);
  ScalarProfile warp(std::move(pieces), "m-closed-warp");
  // Cap halfwidth is 0.15 of an arc unit of the cap sinusoid, the same
  // normalized window the open family uses; wider windows let the quintic
  // drift above the sine.
  for (double corner : {r_cap, 0.9 * d, kPi - 0.9 * d, kPi - r_cap}) {
    const double hw = (corner == r_cap || corner == kPi - r_cap) ? 0.15 * amp : d / 20.0;
    warp = profiles::concave_smooth(warp, corner, hw);
  }

  MetricFamilySpec spec;
  spec.kind = "m-closed";
  spec.params.c = c;
  spec.params.d = d;
  spec.group = "iota";
  spec.constants = {{"cap_radius", amp},
                    {"cap_break", r_cap},
                    {"middle_offset", k_off},
                    {"quotient_order", 4.0}};
  record_symmetry_constants(spec, warp, c, d);

  const WarpedMetric metric(warp, 3, 4);
  const double fine = r_cap / 50.0;
  spec.certificates.push_back(curvature::verify_nonneg(
      metric, GridSpec{fine, 2.5 * r_cap, fine}, kCertTol));
  spec.certificates.push_back(curvature::verify_nonneg(
      metric, GridSpec{2.5 * r_cap, kPi - 2.5 * r_cap, kCertStep}, kCertTol));
  spec.certificates.push_back(curvature::verify_nonneg(
      metric, GridSpec{kPi - 2.5 * r_cap, kPi - fine, fine}, kCertTol));
  spec.profiles.emplace("warp", std::move(warp));
  return spec;
}

MetricFamilySpec build_n_profiles(int n, double c) {
  if (n < 1) throw ParameterError("fiber quotient order n must be at least 1");
  if (!(c > 0 && c < n))
    throw ParameterError("cone slope must satisfy 0 < c < n");

  auto [rho_m, phi_m] = mollified_pair(n, c);
  ScalarProfile rho = profiles::restrict_to(rho_m, 0.0, 50.5);
  ScalarProfile phi = profiles::restrict_to(phi_m, 0.0, 50.5);

  MetricFamilySpec spec;
  spec.kind = "n-open";
  spec.params.c = c;
  spec.params.n = n;
  spec.group = "mu_" + std::to_string(n);
  spec.constants = {{"norm_scale", 2.0 * c / n},
                    {"norm_shift", 1.0 - 2.0 * c / n},
                    {"quotient_order", static_cast<double>(n)}};
  spec.certificates.push_back(curvature::verify_nonneg(
      BergerMetric(rho, phi, n), GridSpec{0.01, 50.0, kCertStep}, kCertTol));
  spec.profiles.emplace("rho", std::move(rho));
  spec.profiles.emplace("phi", std::move(phi));
  return spec;
}

MetricFamilySpec build_n_closed_profiles(double c, double d) {
  if (!(c > 0 && c < 0.5)) throw ParameterError("closed families need 0 < c < 1/2");
  if (!(d > 0 && d <= 0.5)) throw ParameterError("cap size d must lie in (0, 1/2]");

  const int n = 4;
  const double mu3 = c * d / (10.0 * (n - c));
  auto [rho_m, phi_m] = mollified_pair(n, c);
  // The scale mu3 turns the open far form n + c (r/mu3 - 1) into exactly
  // c r + c d / 10, so the straight piece continues with no new corner.
  ScalarProfile rho_core =
      profiles::affine_change(profiles::restrict_to(rho_m, 0.0, 1.25), mu3, 0.0);
  ScalarProfile phi_core =
      profiles::affine_change(profiles::restrict_to(phi_m, 0.0, 1.25), mu3, 0.0);
  const double core_hi = rho_core.hi();
  const double k_off = middle_offset(c, d);

  const auto assemble = [&](const ScalarProfile& core, const std::string& name) {
    std::vector<ProfilePiece> pieces = core.pieces();
    pieces.push_back(ProfilePiece::affine(core_hi, 0.9 * d, c * d / 10.0, c));
    pieces.push_back(
        ProfilePiece::sinusoid(0.9 * d, kPi - 0.9 * d, 0.5 * c, 1.0, 0.0, k_off));
    pieces.push_back(ProfilePiece::affine(kPi - 0.9 * d, kPi - core_hi,
                                          c * kPi + c * d / 10.0, -c));
    const ScalarProfile mirrored = profiles::mirror_about(core, kPi);
    for (const ProfilePiece& pc : mirrored.pieces()) pieces.push_back(pc);
    ScalarProfile out(std::move(pieces), name);
    out = profiles::concave_smooth(out, 0.9 * d, d / 20.0);
    return profiles::concave_smooth(out, kPi - 0.9 * d, d / 20.0);
  };
  ScalarProfile rho = assemble(rho_core, "n-closed-rho");
  ScalarProfile phi = assemble(phi_core, "n-closed-phi");

  MetricFamilySpec spec;
  spec.kind = "n-closed";
  spec.params.c = c;
  spec.params.d = d;
  spec.params.n = n;
  spec.group = "mu_4";
  spec.constants = {{"core_scale", mu3},
                    {"core_break", core_hi},
                    {"middle_offset", k_off},
                    {"quotient_order", 4.0}};
  record_symmetry_constants(spec, phi, c, d);

  // Doubly warped conditions resolve the caps; the single-warp certificate
  // covers the middle where the two profiles coincide.
  const BergerMetric caps(rho, phi, n);
  const double fine = mu3 / 100.0;
  spec.certificates.push_back(curvature::verify_nonneg(
      caps, GridSpec{fine, 2.5 * mu3, fine}, kCertTol));
  spec.certificates.push_back(curvature::verify_nonneg(
      WarpedMetric(phi, 3, 4), GridSpec{2.5 * mu3, kPi - 2.5 * mu3, kCertStep},
      kCertTol));
  spec.certificates.push_back(curvature::verify_nonneg(
      caps, GridSpec{kPi - 2.5 * mu3, kPi - fine, fine}, kCertTol));
  spec.profiles.emplace("rho", std::move(rho));
  spec.profiles.emplace("phi", std::move(phi));
  return spec;
}

MetricFamilySpec limit_suspension(double c) {
  if (!(c > 0)) throw ParameterError("suspension amplitude must be positive");
  ScalarProfile warp = profiles::make_sinusoid(0.0, kPi, c, 1.0, 0.0, 0.0,
                                               "suspension-warp");
  MetricFamilySpec spec;
  spec.kind = "suspension-limit";
  spec.params.c = c;
  spec.group = "mu_4";
  spec.constants = {{"amplitude", c}, {"quotient_order", 4.0}};
  spec.certificates.push_back(curvature::verify_nonneg(
      WarpedMetric(warp, 3, 4), GridSpec{kCertStep, kPi - kCertStep, kCertStep},
      kCertTol));
  spec.profiles.emplace("warp", std::move(warp));
  return spec;
}

curvature::ThresholdResult find_berger_threshold(int n, double c_lo, double c_hi,
                                                 double width_tol) {
  return curvature::threshold_search(
      [n](double c) {
        auto [rho_m, phi_m] = mollified_pair(n, c);
        return curvature::verify_nonneg(
            BergerMetric(profiles::restrict_to(rho_m, 0.0, 50.5),
                         profiles::restrict_to(phi_m, 0.0, 50.5), n),
            GridSpec{0.01, 50.0, kCertStep}, kCertTol);
      },
      c_lo, c_hi, width_tol);
}

}  // namespace ricci::construct
