#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ricci/constructions.hpp"
#include "ricci/profiles.hpp"

namespace ricci::spaces {

/// A finite isometry group acting on the unit three-sphere in R^4. The maps
/// list holds every element as an orthogonal matrix, identity first.
struct GroupAction {
  std::string name;  // "trivial" | "mu_<k>" | "iota" | "nu_4"
  int order = 1;
  std::vector<Eigen::Matrix4d> maps;

  bool trivial() const { return order <= 1; }
};

GroupAction group_trivial();
/// Simultaneous rotation of both complex coordinates by the k-th roots of
/// unity (the diagonal cyclic action).
GroupAction group_mu(int k);
/// The order-four group generated by (z1, z2) |-> (-conj(z2), conj(z1)); the
/// generator squares to the antipodal map.
GroupAction group_iota();
/// "trivial", "mu_<k>", "iota", or its alias "nu_4".
GroupAction action_from_label(const std::string& label);

/// Orthogonal involution conjugating the iota generator into multiplication
/// by i on both complex coordinates, so it carries iota orbits to mu_4 orbits.
Eigen::Matrix4d psi_matrix();

/// Distance between the orbits of x and y: the minimum over group elements g
/// of the great-circle distance from x to g*y. Inputs must be unit vectors
/// (within 1e-10); the result lies in [0, pi].
double quotient_distance(const Eigen::Vector4d& x, const Eigen::Vector4d& y,
                         const GroupAction& action);

/// Node layout for sampling a warped family: radial strata, each carrying a
/// block of low-discrepancy fiber points. A plan is independent of any
/// particular metric, so two families over the same radial interval can be
/// sampled at identical nodes and compared index by index.
struct Stratum {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

struct SamplingPlan {
  std::vector<Stratum> strata;
  std::vector<double> r;               // one entry per node (shell position)
  std::vector<Eigen::Vector4d> fiber;  // unit fiber representative per node
  double requested_resolution = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return r.size(); }
};

/// Chooses radial shells from the requested resolution, with shells at both
/// interval endpoints, and splits n_points across them proportionally to
/// warp^3 (the fiber volume density), so the fiber covering radius is roughly
/// uniform along the interval. Fiber points come from a seeded low-discrepancy
/// sequence in Hopf coordinates, deduplicated within each shell under the
/// action.
SamplingPlan build_sampling_plan(const profiles::ScalarProfile& warp,
                                 const GroupAction& action, std::size_t n_points,
                                 double resolution, std::uint64_t seed);

/// A target covering scale that balances radial and fiber refinement for the
/// given point budget; useful as the resolution argument to sample_space.
double suggest_resolution(const profiles::ScalarProfile& warp, int order,
                          std::size_t n_points);

/// A metric family reduced to a finite metric space: sampled points with a
/// radial coordinate and a fiber representative, plus pairwise geodesic
/// estimates from shortest paths in a nearest-neighbor graph.
struct SampledSpace {
  construct::MetricFamilySpec source;
  std::vector<double> r;
  std::vector<Eigen::Vector4d> fiber;
  std::vector<int> orbit_label;
  std::vector<double> dist;  // row-major size() x size(); symmetric, zero diagonal
  double resolution = 0;     // achieved covering scale of the discretization
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return r.size(); }
  double distance(std::size_t i, std::size_t j) const {
    return dist[i * size() + j];
  }
};

/// Samples the family and returns graph-geodesic distances. Edge weights come
/// from the warped line element sqrt(dr^2 + warp(rbar)^2 * angle^2) with fiber
/// angles measured in the quotient. Deterministic for a fixed seed. Throws
/// NumericError if the neighbor graph fails to connect; appends warnings when
/// the requested resolution is not met or is coarser than the smallest warp
/// feature.
SampledSpace sample_space(const construct::MetricFamilySpec& spec,
                          std::size_t n_points, double resolution,
                          std::uint64_t seed);

/// Same, but on a fixed node layout. fiber_transform, when given, is applied
/// to every fiber point first; pass the conjugating matrix when the plan was
/// built for a different (conjugate) group action.
SampledSpace sample_space_with_plan(
    const construct::MetricFamilySpec& spec, const SamplingPlan& plan,
    const std::optional<Eigen::Matrix4d>& fiber_transform = {});

/// Largest pairwise distance; read it with a +-resolution error bar.
double diameter(const SampledSpace& s);

/// Volume by reduction to a radial integral. A single-warp family over the
/// quotient of the unit sphere by an order-m group contributes
/// (2 pi^2 / m) * integral warp^3; a doubly warped family contributes
/// (2 pi^2 / m) * integral rho * phi^2.
double volume_closed(const construct::MetricFamilySpec& spec);

struct MonteCarloVolume {
  double estimate = 0;
  double stderror = 0;
};

/// Monte-Carlo volume over the radial chart: an independent cross-check for
/// volume_closed. Block-seeded, so the result is deterministic for a fixed
/// seed regardless of thread count. Requires n_samples >= 10000.
MonteCarloVolume volume_mc(const construct::MetricFamilySpec& spec,
                           std::size_t n_samples, std::uint64_t seed);

/// Minimum over sampled points and nontrivial group elements of the distance
/// a point is moved. Positive displacement witnesses a free action. For the
/// trivial action returns 0 and sets *trivial_flag when provided.
double min_displacement(const GroupAction& action, std::size_t n_samples,
                        std::uint64_t seed, bool* trivial_flag = nullptr);

/// Homothety by lambda > 0: warps and certificate grids stretch by lambda,
/// recorded curvature bounds scale by lambda^-2 (they are rescaled, not
/// recomputed), and the accumulated factor is kept under the constant
/// "rescale_lambda". Volumes derived from the result scale by lambda^4.
construct::MetricFamilySpec rescale(const construct::MetricFamilySpec& spec,
                                    double lambda);
/// Homothety of a sampled space: distances, radii, and resolution stretch by
/// lambda; fiber representatives are unchanged.
SampledSpace rescale(const SampledSpace& s, double lambda);

/// "r,x1,x2,x3,x4,orbit_label" rows, one per point.
void write_points_csv(const SampledSpace& s, std::ostream& os);
/// Header row "n,resolution,seed", then the full row-major distance matrix.
void write_distances_csv(const SampledSpace& s, std::ostream& os);

}  // namespace ricci::spaces
