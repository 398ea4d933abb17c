#include "ricci/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <utility>

#include "ricci/errors.hpp"
#include "ricci/parallel.hpp"
#include "ricci/quadrature.hpp"

namespace ricci::spaces {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kUnitTol = 1e-10;
constexpr std::size_t kNeighbors = 12;
// Points in one stratum closer than this in the quotient collapse to one node.
constexpr double kDedupAngle = 1e-9;

double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Eigen::Matrix4d double_rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  m(2, 2) = c;
  m(2, 3) = -s;
  m(3, 2) = s;
  m(3, 3) = c;
  return m;
}

Eigen::Matrix4d iota_generator() {
  // (z1, z2) |-> (-conj(z2), conj(z1)) as a real matrix.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 2) = -1.0;
  m(1, 3) = 1.0;
  m(2, 0) = 1.0;
  m(3, 1) = -1.0;
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double profile_max(const profiles::ScalarProfile& p, double lo, double hi) {
  double best = 0.0;
  for (int i = 0; i <= 4; ++i) {
    const double r = lo + (hi - lo) * (static_cast<double>(i) / 4.0);
    best = std::max(best, p(r));
  }
  return best;
}

double smallest_piece_width(const profiles::ScalarProfile& p) {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& pc : p.pieces()) w = std::min(w, pc.hi - pc.lo);
  return w;
}

// Covering radius of m quasi-uniform points on a three-manifold of volume v:
// the radius of the ball holding 1/m of the volume.
double fiber_cover_angle(double quotient_volume, std::size_t m) {
  return std::cbrt(3.0 * quotient_volume /
                   (4.0 * kPi * static_cast<double>(std::max<std::size_t>(m, 1))));
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

GroupAction group_trivial() {
  return {"trivial", 1, {Eigen::Matrix4d::Identity()}};
}

GroupAction group_mu(int k) {
  if (k < 1) throw ParameterError("group_mu needs a positive order");
  GroupAction a;
  a.name = "mu_" + std::to_string(k);
  a.order = k;
  for (int j = 0; j < k; ++j)
    a.maps.push_back(double_rotation(2.0 * kPi * static_cast<double>(j) / k));
  return a;
}

GroupAction group_iota() {
  GroupAction a;
  a.name = "iota";
  a.order = 4;
  const Eigen::Matrix4d g = iota_generator();
  Eigen::Matrix4d pw = Eigen::Matrix4d::Identity();
  for (int j = 0; j < 4; ++j) {
    a.maps.push_back(pw);
    pw = g * pw;
  }
  return a;
}

GroupAction action_from_label(const std::string& label) {
  if (label == "trivial") return group_trivial();
  if (label == "iota" || label == "nu_4") {
    GroupAction a = group_iota();
    a.name = label;
    return a;
  }
  if (label.rfind("mu_", 0) == 0) {
    try {
      const int k = std::stoi(label.substr(3));
      return group_mu(k);
    } catch (const std::exception&) {
    }
  }
  throw ParameterError("unknown group label '" + label + "'");
}

Eigen::Matrix4d psi_matrix() {
  // Swaps the middle coordinates and flips the last one; an involution.
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 0) = 1.0;
  p(1, 2) = 1.0;
  p(2, 1) = 1.0;
  p(3, 3) = -1.0;
  return p;
}

double quotient_distance(const Eigen::Vector4d& x, const Eigen::Vector4d& y,
                         const GroupAction& action) {
  if (std::abs(x.norm() - 1.0) > kUnitTol || std::abs(y.norm() - 1.0) > kUnitTol)
    throw ParameterError("quotient_distance needs unit vectors");
  double best = kPi;
  for (const auto& g : action.maps) {
    const double dot = std::clamp(x.dot(g * y), -1.0, 1.0);
    best = std::min(best, std::acos(dot));
  }
  return best;
}

SamplingPlan build_sampling_plan(const profiles::ScalarProfile& warp,
                                 const GroupAction& action, std::size_t n_points,
                                 double resolution, std::uint64_t seed) {
  if (n_points < 2) throw ParameterError("sampling needs at least two points");
  if (!(resolution > 0)) throw ParameterError("resolution must be positive");
  if (warp.empty()) throw ParameterError("sampling needs a nonempty warp profile");
  const double lo = warp.lo(), hi = warp.hi(), span = hi - lo;
  if (!(span > 0)) throw ParameterError("warp domain has zero length");

  // Radial shells at uniform grid points, both endpoints included, so closed
  // families keep their tips. A shell covers half an interval on each side.
  std::size_t n_r = static_cast<std::size_t>(std::ceil(span / resolution));
  n_r = std::min(std::max<std::size_t>(n_r, 1), n_points - 1);
  const double dr = span / static_cast<double>(n_r);
  const std::size_t shells = n_r + 1;

  // Fiber counts proportional to warp^3, every shell keeping at least one
  // node so radial chains stay connected, remainders to the largest fractions.
  std::vector<double> shell_r(shells);
  for (std::size_t j = 0; j < shells; ++j)
    shell_r[j] = std::clamp(lo + static_cast<double>(j) * dr, lo, hi);
  shell_r.back() = hi;

  std::vector<double> weight(shells);
  double total = 0.0;
  for (std::size_t j = 0; j < shells; ++j) {
    const double w = std::max(warp(shell_r[j]), 0.0);
    weight[j] = w * w * w;
    total += weight[j];
  }
  if (!(total > 0))
    throw ParameterError("warp vanishes on every shell; nothing to sample");

  std::vector<std::size_t> count(shells, 1);
  const std::size_t spare = n_points - shells;
  std::vector<double> frac(shells);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < shells; ++j) {
    const double quota = static_cast<double>(spare) * weight[j] / total;
    const auto whole = static_cast<std::size_t>(std::floor(quota));
    count[j] += whole;
    assigned += whole;
    frac[j] = quota - static_cast<double>(whole);
  }
  std::vector<std::size_t> order_idx(shells);
  std::iota(order_idx.begin(), order_idx.end(), std::size_t{0});
  std::stable_sort(order_idx.begin(), order_idx.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t t = 0; assigned < spare; ++t) {
    ++count[order_idx[t % shells]];
    ++assigned;
  }

  // Halton points in Hopf coordinates with a seeded rotation. Unlike a
  // rank-1 lattice, the set has no preferred directions, which keeps the
  // nearest-neighbor graph isotropic; index blocks stay low-discrepancy.
  // The first node of every shell reuses the first Halton point, so one
  // fiber spoke runs the whole radial interval. Radial lines are geodesics
  // of every warped metric sampled here, and the shared spoke lets shortest
  // paths cross the interval without fiber-angle detours; the remaining
  // nodes continue the global sequence for coverage.
  std::mt19937_64 rng(seed);
  const double o1 = to_unit(rng()), o2 = to_unit(rng()), o3 = to_unit(rng());

  SamplingPlan plan;
  plan.requested_resolution = resolution;
  plan.seed = seed;
  std::size_t cursor = 2;
  for (std::size_t j = 0; j < shells; ++j) {
    const double r_shell = shell_r[j];
    Stratum st{std::max(lo, r_shell - 0.5 * dr), std::min(hi, r_shell + 0.5 * dr),
               0};
    std::vector<Eigen::Vector4d> kept;
    for (std::size_t t = 0; t < count[j]; ++t) {
      const std::size_t idx = (t == 0) ? 1 : cursor++;
      const double u1 = std::fmod(o1 + radical_inverse(idx, 2), 1.0);
      const double u2 = std::fmod(o2 + radical_inverse(idx, 3), 1.0);
      const double u3 = std::fmod(o3 + radical_inverse(idx, 5), 1.0);
      const double eta = std::asin(std::sqrt(u1));
      const double xi1 = 2.0 * kPi * u2;
      const double xi2 = 2.0 * kPi * u3;
      const Eigen::Vector4d f(std::cos(eta) * std::cos(xi1),
                              std::cos(eta) * std::sin(xi1),
                              std::sin(eta) * std::cos(xi2),
                              std::sin(eta) * std::sin(xi2));
      bool duplicate = false;
      for (const auto& k : kept)
        if (quotient_distance(f, k, action) < kDedupAngle) {
          duplicate = true;
          break;
        }
      if (duplicate) continue;
      kept.push_back(f);
      plan.r.push_back(r_shell);
      plan.fiber.push_back(f);
      ++st.count;
    }
    plan.strata.push_back(st);
  }
  return plan;
}

double suggest_resolution(const profiles::ScalarProfile& warp, int order,
                          std::size_t n_points) {
  if (order < 1) throw ParameterError("group order must be positive");
  if (n_points < 2) throw ParameterError("sampling needs at least two points");
  const double lo = warp.lo(), hi = warp.hi(), span = hi - lo;
  const double vq = 2.0 * kPi * kPi / static_cast<double>(order);
  const double mean_cube =
      integrate_split([&](double r) { const double w = warp(r); return w * w * w; },
                      lo, hi, warp.breakpoints(), 1e-10) /
      span;
  const double w_bar = std::cbrt(std::max(mean_cube, 0.0));
  // Balance stratum half-width against the fiber covering radius: with
  // span/res strata and points split evenly, both scale like res/2 when
  // res^(4/3) = 2 w (3 vq span / (4 pi n))^(1/3).
  const double balanced = std::pow(
      2.0 * w_bar *
          std::cbrt(3.0 * vq * span / (4.0 * kPi * static_cast<double>(n_points))),
      0.75);
  // A thin interval degenerates to a single stratum; then only the fiber
  // covering radius matters.
  const double single =
      2.0 * profile_max(warp, lo, hi) * fiber_cover_angle(vq, n_points);
  return std::max(balanced, single);
}

SampledSpace sample_space_with_plan(
    const construct::MetricFamilySpec& spec, const SamplingPlan& plan,
    const std::optional<Eigen::Matrix4d>& fiber_transform) {
  const GroupAction action = action_from_label(spec.group);
  const profiles::ScalarProfile& warp = spec.sampling_warp();
  const std::size_t n = plan.size();
  if (n < 2) throw ParameterError("sampling plan holds fewer than two points");
  if (plan.strata.empty()) throw ParameterError("sampling plan has no strata");
  const double scale = std::max({1.0, std::abs(warp.lo()), std::abs(warp.hi())});
  if (std::abs(plan.strata.front().lo - warp.lo()) > 1e-9 * scale ||
      std::abs(plan.strata.back().hi - warp.hi()) > 1e-9 * scale)
    throw ParameterError("sampling plan does not cover the family's radial domain");

  SampledSpace out;
  out.source = spec;
  out.seed = plan.seed;
  out.r = plan.r;
  out.fiber.reserve(n);
  for (const auto& f : plan.fiber) {
    Eigen::Vector4d g = fiber_transform ? Eigen::Vector4d(*fiber_transform * f) : f;
    out.fiber.push_back(g / g.norm());
  }
  out.orbit_label.resize(n);
  std::iota(out.orbit_label.begin(), out.orbit_label.end(), 0);

  // Stratum index per point, for the adjacent-stratum bridging below.
  std::vector<std::size_t> stratum_of(n);
  {
    std::size_t p = 0;
    for (std::size_t j = 0; j < plan.strata.size(); ++j)
      for (std::size_t t = 0; t < plan.strata[j].count; ++t) stratum_of[p++] = j;
    if (p != n) throw ParameterError("sampling plan strata counts are inconsistent");
  }

  const auto edge_weight = [&](std::size_t i, std::size_t j) {
    const double dr = out.r[i] - out.r[j];
    const double rbar = 0.5 * (out.r[i] + out.r[j]);
    const double theta = quotient_distance(out.fiber[i], out.fiber[j], action);
    const double w = warp(rbar);
    return std::sqrt(dr * dr + w * w * theta * theta);
  };

  // k nearest neighbors per node, plus the nearest node in each adjacent
  // stratum so radial chains survive even when a warp collapses the fibers.
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  {
    std::vector<std::vector<std::pair<double, std::size_t>>> picked(n);
    parallel_for(n, [&](std::size_t i) {
      std::vector<std::pair<double, std::size_t>> cand;
      cand.reserve(n - 1);
      double best_lo = std::numeric_limits<double>::infinity();
      double best_hi = std::numeric_limits<double>::infinity();
      std::size_t lo_pick = n, hi_pick = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = edge_weight(i, j);
        cand.emplace_back(w, j);
        if (stratum_of[j] + 1 == stratum_of[i] && w < best_lo) {
          best_lo = w;
          lo_pick = j;
        }
        if (stratum_of[j] == stratum_of[i] + 1 && w < best_hi) {
          best_hi = w;
          hi_pick = j;
        }
      }
      const std::size_t k = std::min(kNeighbors, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                        cand.end());
      cand.resize(k);
      if (lo_pick < n) cand.emplace_back(best_lo, lo_pick);
      if (hi_pick < n) cand.emplace_back(best_hi, hi_pick);
      picked[i] = std::move(cand);
    });
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [w, j] : picked[i]) {
        adj[i].emplace_back(j, w);
        adj[j].emplace_back(i, w);
      }
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  out.dist.assign(n * n, inf);
  parallel_for(n, [&](std::size_t s) {
    double* row = out.dist.data() + s * n;
    row[s] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > row[v]) continue;
      for (const auto& [u, w] : adj[v]) {
        const double nd = d + w;
        if (nd < row[u]) {
          row[u] = nd;
          heap.emplace(nd, u);
        }
      }
    }
  });
  for (double d : out.dist)
    if (!std::isfinite(d))
      throw NumericError(
          "sampled space graph is disconnected; increase the point budget");
  for (std::size_t i = 0; i < n; ++i) {
    out.dist[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(out.dist[i * n + j], out.dist[j * n + i]);
      out.dist[i * n + j] = d;
      out.dist[j * n + i] = d;
    }
  }

  // Achieved covering scale: stratum half-width plus the warped fiber
  // covering radius, maximized over strata.
  const double vq = 2.0 * kPi * kPi / static_cast<double>(action.order);
  double achieved = 0.0;
  for (const auto& st : plan.strata) {
    const double wmax = profile_max(warp, st.lo, st.hi);
    achieved = std::max(achieved, 0.5 * (st.hi - st.lo) +
                                      wmax * fiber_cover_angle(vq, st.count));
  }
  out.resolution = achieved;

  const double feature = smallest_piece_width(warp);
  if (plan.requested_resolution > feature)
    out.warnings.push_back("requested resolution " +
                           format_double(plan.requested_resolution) +
                           " is coarser than the smallest warp feature " +
                           format_double(feature));
  if (achieved > plan.requested_resolution * (1.0 + 1e-9))
    out.warnings.push_back("achieved resolution " + format_double(achieved) +
                           " misses the requested " +
                           format_double(plan.requested_resolution) +
                           "; increase the point budget");
  return out;
}

SampledSpace sample_space(const construct::MetricFamilySpec& spec,
                          std::size_t n_points, double resolution,
                          std::uint64_t seed) {
  const SamplingPlan plan =
      build_sampling_plan(spec.sampling_warp(), action_from_label(spec.group),
                          n_points, resolution, seed);
  return sample_space_with_plan(spec, plan);
}

double diameter(const SampledSpace& s) {
  double best = 0.0;
  for (double d : s.dist) {
    if (!std::isfinite(d)) throw NumericError("distance matrix is not connected");
    best = std::max(best, d);
  }
  return best;
}

namespace {

// Radial density of the 4-volume: warp^3 for one warp, rho phi^2 for two.
std::function<double(double)> volume_density(const construct::MetricFamilySpec& spec,
                                             std::vector<double>* breaks) {
  const auto warp_it = spec.profiles.find("warp");
  if (warp_it != spec.profiles.end()) {
    const profiles::ScalarProfile& w = warp_it->second;
    *breaks = w.breakpoints();
    return [&w](double r) {
      const double v = w(r);
      return v * v * v;
    };
  }
  const profiles::ScalarProfile& rho = spec.profile("rho");
  const profiles::ScalarProfile& phi = spec.profile("phi");
  *breaks = rho.breakpoints();
  for (double b : phi.breakpoints()) breaks->push_back(b);
  std::sort(breaks->begin(), breaks->end());
  breaks->erase(std::unique(breaks->begin(), breaks->end()), breaks->end());
  return [&rho, &phi](double r) {
    const double p = phi(r);
    return rho(r) * p * p;
  };
}

}  // namespace

double volume_closed(const construct::MetricFamilySpec& spec) {
  const GroupAction action = action_from_label(spec.group);
  std::vector<double> breaks;
  const auto density = volume_density(spec, &breaks);
  const profiles::ScalarProfile& w = spec.sampling_warp();
  const double radial = integrate_split(density, w.lo(), w.hi(), breaks, 1e-11);
  return 2.0 * kPi * kPi / static_cast<double>(action.order) * radial;
}

MonteCarloVolume volume_mc(const construct::MetricFamilySpec& spec,
                           std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 10000)
    throw ParameterError("volume_mc needs at least 10000 samples");
  const GroupAction action = action_from_label(spec.group);
  std::vector<double> breaks;
  const auto density = volume_density(spec, &breaks);
  const profiles::ScalarProfile& w = spec.sampling_warp();
  const double lo = w.lo(), span = w.hi() - w.lo();

  const std::size_t blocks = std::min<std::size_t>(4096, n_samples / 4);
  const std::size_t per_block = n_samples / blocks;
  std::vector<double> block_mean(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(sq);
    double acc = 0.0;
    for (std::size_t t = 0; t < per_block; ++t)
      acc += density(lo + span * to_unit(rng()));
    block_mean[b] = acc / static_cast<double>(per_block);
  });

  const double factor = 2.0 * kPi * kPi / static_cast<double>(action.order) * span;
  const double mean =
      std::accumulate(block_mean.begin(), block_mean.end(), 0.0) /
      static_cast<double>(blocks);
  double var = 0.0;
  for (double m : block_mean) var += (m - mean) * (m - mean);
  var /= static_cast<double>(blocks - 1);
  MonteCarloVolume out;
  out.estimate = factor * mean;
  out.stderror = factor * std::sqrt(var / static_cast<double>(blocks));
  return out;
}

double min_displacement(const GroupAction& action, std::size_t n_samples,
                        std::uint64_t seed, bool* trivial_flag) {
  if (trivial_flag) *trivial_flag = action.trivial();
  if (action.trivial()) return 0.0;
  if (n_samples < 1) throw ParameterError("min_displacement needs samples");
  std::mt19937_64 rng(seed);
  const auto normal_pair = [&](double& a, double& b) {
    double u1 = to_unit(rng());
    while (u1 <= 0.0) u1 = to_unit(rng());
    const double u2 = to_unit(rng());
    const double rad = std::sqrt(-2.0 * std::log(u1));
    a = rad * std::cos(2.0 * kPi * u2);
    b = rad * std::sin(2.0 * kPi * u2);
  };
  double best = kPi;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Eigen::Vector4d x;
    double nrm = 0.0;
    do {
      normal_pair(x[0], x[1]);
      normal_pair(x[2], x[3]);
      nrm = x.norm();
    } while (nrm < 1e-8);
    x /= nrm;
    for (const auto& g : action.maps) {
      if ((g - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12) continue;
      const double dot = std::clamp(x.dot(g * x), -1.0, 1.0);
      best = std::min(best, std::acos(dot));
    }
  }
  return best;
}

construct::MetricFamilySpec rescale(const construct::MetricFamilySpec& spec,
                                    double lambda) {
  if (!(lambda > 0)) throw ParameterError("rescale needs a positive factor");
  if (lambda == 1.0) return spec;
  construct::MetricFamilySpec out = spec;
  out.profiles.clear();
  for (const auto& [name, p] : spec.profiles)
    out.profiles.emplace(name, profiles::affine_change(p, lambda, 0.0, p.name()));
  const double curv = 1.0 / (lambda * lambda);
  for (auto& cert : out.certificates) {
    cert.grid.lo *= lambda;
    cert.grid.hi *= lambda;
    cert.grid.step *= lambda;
    for (double& e : cert.grid.extra) e *= lambda;
    for (double& v : cert.min_values) v *= curv;
    for (double& wp : cert.witness_points) wp *= lambda;
    cert.tolerance *= curv;
  }
  const auto it = out.constants.find("rescale_lambda");
  out.constants["rescale_lambda"] =
      (it == out.constants.end() ? 1.0 : it->second) * lambda;
  return out;
}

SampledSpace rescale(const SampledSpace& s, double lambda) {
  if (!(lambda > 0)) throw ParameterError("rescale needs a positive factor");
  SampledSpace out = s;
  out.source = rescale(s.source, lambda);
  for (double& v : out.r) v *= lambda;
  for (double& v : out.dist) v *= lambda;
  out.resolution *= lambda;
  return out;
}

void write_points_csv(const SampledSpace& s, std::ostream& os) {
  os << "r,x1,x2,x3,x4,orbit_label\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << format_double(s.r[i]);
    for (int k = 0; k < 4; ++k) os << ',' << format_double(s.fiber[i][k]);
    os << ',' << s.orbit_label[i] << '\n';
  }
}

void write_distances_csv(const SampledSpace& s, std::ostream& os) {
  os << "n,resolution,seed\n"
     << s.size() << ',' << format_double(s.resolution) << ',' << s.seed << '\n';
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) os << ',';
      os << format_double(s.dist[i * n + j]);
    }
    os << '\n';
  }
}

}  // namespace ricci::spaces
