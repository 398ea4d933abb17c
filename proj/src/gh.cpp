#include "ricci/gh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "ricci/errors.hpp"
#include "ricci/parallel.hpp"

namespace ricci::gh {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_correspondence(const spaces::SampledSpace& a,
                          const spaces::SampledSpace& b,
                          const Correspondence& corr) {
  if (corr.pairs.empty())
    throw ParameterError("correspondence has no pairs");
  std::vector<char> seen_a(a.size(), 0), seen_b(b.size(), 0);
  for (const auto& [ia, ib] : corr.pairs) {
    if (ia >= a.size() || ib >= b.size())
      throw ParameterError("correspondence index out of range");
    seen_a[ia] = 1;
    seen_b[ib] = 1;
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!seen_a[i])
      throw ParameterError("correspondence misses point " + std::to_string(i) +
                           " of the first space");
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!seen_b[i])
      throw ParameterError("correspondence misses point " + std::to_string(i) +
                           " of the second space");
}

/// Index of the band node nearest to `from` in `s`, smallest index on ties.
std::size_t nearest_in_band(const spaces::SampledSpace& s,
                            const std::vector<std::size_t>& band,
                            std::size_t from) {
  std::size_t best = band.front();
  double best_d = s.distance(from, best);
  for (std::size_t j : band) {
    const double dij = s.distance(from, j);
    if (dij < best_d) {
      best_d = dij;
      best = j;
    }
  }
  return best;
}

}  // namespace

Correspondence identity_correspondence(std::size_t n) {
  if (n == 0) throw ParameterError("identity correspondence needs n >= 1");
  Correspondence corr;
  corr.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) corr.pairs.emplace_back(i, i);
  return corr;
}

Correspondence band_correspondence(const spaces::SampledSpace& a,
                                   const spaces::SampledSpace& b,
                                   double band_lo, double band_hi) {
  if (a.size() != b.size())
    throw ParameterError(
        "band correspondence needs both spaces on one node layout");
  if (!(band_lo < band_hi))
    throw ParameterError("band bounds must satisfy band_lo < band_hi");
  std::vector<std::size_t> band;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.r[i] >= band_lo && a.r[i] <= band_hi && b.r[i] >= band_lo &&
        b.r[i] <= band_hi)
      band.push_back(i);
  if (band.empty())
    throw ParameterError("no sampled nodes inside the comparison band");

  Correspondence corr;
  corr.pairs.reserve(a.size() + b.size() - band.size());
  for (std::size_t i : band) corr.pairs.emplace_back(i, i);
  std::vector<char> in_band(a.size(), 0);
  for (std::size_t i : band) in_band[i] = 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!in_band[i]) corr.pairs.emplace_back(i, nearest_in_band(a, band, i));
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!in_band[i]) corr.pairs.emplace_back(nearest_in_band(b, band, i), i);
  return corr;
}

nlohmann::json DistortionWitness::to_json() const {
  return {{"a1", a1}, {"b1", b1}, {"a2", a2}, {"b2", b2}, {"value", value}};
}

double gh_upper(const spaces::SampledSpace& a, const spaces::SampledSpace& b,
                const Correspondence& corr, DistortionWitness* witness) {
  check_correspondence(a, b, corr);
  const std::size_t m = corr.pairs.size();
  std::vector<double> row_max(m, 0.0);
  std::vector<std::size_t> row_arg(m, 0);
  parallel_for(m, [&](std::size_t p) {
    const auto [ia, ib] = corr.pairs[p];
    double best = -1.0;
    std::size_t arg = p;
    for (std::size_t q = 0; q < m; ++q) {
      const auto [ja, jb] = corr.pairs[q];
      const double gap = std::abs(a.distance(ia, ja) - b.distance(ib, jb));
      if (gap > best) {
        best = gap;
        arg = q;
      }
    }
    row_max[p] = best;
    row_arg[p] = arg;
  });
  std::size_t best_p = 0;
  for (std::size_t p = 1; p < m; ++p)
    if (row_max[p] > row_max[best_p]) best_p = p;
  if (witness != nullptr) {
    const auto [ia, ib] = corr.pairs[best_p];
    const auto [ja, jb] = corr.pairs[row_arg[best_p]];
    *witness = {ia, ib, ja, jb, row_max[best_p]};
  }
  return 0.5 * row_max[best_p];
}

double gh_lower(const spaces::SampledSpace& a, const spaces::SampledSpace& b) {
  return 0.5 * std::abs(spaces::diameter(a) - spaces::diameter(b));
}

void ConvergenceTable::write_csv(std::ostream& os) const {
  os << "i,d_i,gh_MN,gh_MX,gh_NX,resolution\n";
  for (const auto& row : rows)
    os << row.i << ',' << format_double(row.d_i) << ','
       << format_double(row.gh_mn) << ',' << format_double(row.gh_mx) << ','
       << format_double(row.gh_nx) << ',' << format_double(row.resolution)
       << '\n';
}

nlohmann::json ConvergenceTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows)
    rows_json.push_back({{"i", row.i},
                         {"d_i", row.d_i},
                         {"gh_MN", row.gh_mn},
                         {"gh_MX", row.gh_mx},
                         {"gh_NX", row.gh_nx},
                         {"resolution", row.resolution},
                         {"diam_M", row.diam_m},
                         {"diam_N", row.diam_n},
                         {"vol_M", row.vol_m},
                         {"vol_N", row.vol_n},
                         {"witness_MN", row.witness_mn.to_json()},
                         {"witness_MN_r", {row.witness_mn_r1, row.witness_mn_r2}},
                         {"witness_MX", row.witness_mx.to_json()},
                         {"witness_NX", row.witness_nx.to_json()}});
  return {{"c", c},
          {"n_points", n_points},
          {"seed", seed},
          {"fitted_c", fitted_c},
          {"rows", rows_json}};
}

ConvergenceTable convergence_experiment(double c, const std::vector<int>& i_list,
                                        std::size_t n_points,
                                        std::uint64_t seed) {
  if (!(c > 0 && c < 0.5))
    throw ParameterError("cone slope c must lie in (0, 1/2)");
  if (!(c < construct::kRecordedBergerThreshold))
    throw ParameterError(
        "cone slope c must stay below the certified circle-collapse "
        "threshold " +
        format_double(construct::kRecordedBergerThreshold));
  if (i_list.empty()) throw ParameterError("i_list must be nonempty");
  for (std::size_t k = 0; k < i_list.size(); ++k) {
    if (i_list[k] < 2)
      throw ParameterError("every i must be >= 2 (cap size d = 1/i <= 1/2)");
    if (k > 0 && i_list[k] <= i_list[k - 1])
      throw ParameterError("i_list must be strictly ascending");
  }
  if (n_points < 32)
    throw ParameterError("the experiment needs at least 32 points per space");

  auto limit = construct::limit_suspension(c / 2.0);
  if (!limit.all_certificates_pass())
    throw NumericError("curvature certificate failed for the limit family");

  ConvergenceTable table;
  table.c = c;
  table.n_points = n_points;
  table.seed = seed;

  const auto psi = spaces::psi_matrix();
  for (int i : i_list) {
    const double d = 1.0 / static_cast<double>(i);
    auto m_spec = construct::build_m_closed_profile(c, d);
    if (!m_spec.all_certificates_pass())
      throw NumericError(
          "curvature certificate failed for the closed single-warp family "
          "at i = " +
          std::to_string(i));
    auto n_spec = construct::build_n_closed_profiles(c, d);
    if (!n_spec.all_certificates_pass())
      throw NumericError(
          "curvature certificate failed for the closed doubly warped family "
          "at i = " +
          std::to_string(i));

    const double res = spaces::suggest_resolution(m_spec.sampling_warp(),
                                                  4, n_points);
    const auto plan = spaces::build_sampling_plan(
        m_spec.sampling_warp(), spaces::group_iota(), n_points, res, seed);
    const auto space_m = spaces::sample_space_with_plan(m_spec, plan);
    const auto space_n = spaces::sample_space_with_plan(n_spec, plan, psi);
    const auto space_x = spaces::sample_space_with_plan(limit, plan, psi);

    ConvergenceRow row;
    row.i = i;
    row.d_i = d;
    row.resolution = std::max({space_m.resolution, space_n.resolution,
                               space_x.resolution});
    const auto band = band_correspondence(space_m, space_n, d, kPi - d);
    const auto ident = identity_correspondence(plan.size());
    row.gh_mn = gh_upper(space_m, space_n, band, &row.witness_mn);
    row.gh_mx = gh_upper(space_m, space_x, ident, &row.witness_mx);
    row.gh_nx = gh_upper(space_n, space_x, ident, &row.witness_nx);
    row.witness_mn_r1 = space_m.r[row.witness_mn.a1];
    row.witness_mn_r2 = space_m.r[row.witness_mn.a2];
    row.diam_m = spaces::diameter(space_m);
    row.diam_n = spaces::diameter(space_n);
    row.vol_m = spaces::volume_closed(m_spec);
    row.vol_n = spaces::volume_closed(n_spec);
    table.rows.push_back(row);
  }

  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& prev = table.rows[k - 1];
    const auto& cur = table.rows[k];
    const double slack = 2.0 * std::max(prev.resolution, cur.resolution);
    if (cur.gh_mn > prev.gh_mn + slack)
      throw NumericError(
          "family-vs-family upper bound increased beyond slack between i = " +
          std::to_string(prev.i) + " and i = " + std::to_string(cur.i));
  }
  for (const auto& row : table.rows) {
    const double residual =
        std::max(row.gh_mx, row.gh_nx) - 2.0 * row.resolution;
    table.fitted_c = std::max(table.fitted_c,
                              static_cast<double>(row.i) *
                                  std::max(0.0, residual));
  }
  return table;
}

}  // namespace ricci::gh
