#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ricci/spaces.hpp"

namespace ricci::gh {

/// A surjective relation between two finite metric spaces, stored as index
/// pairs. Half its metric distortion bounds the Gromov-Hausdorff distance
/// from above, up to the two sampling resolutions.
struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Pairs node i with node i; valid when both spaces have exactly n points.
Correspondence identity_correspondence(std::size_t n);

/// Matches equal indices wherever the radial coordinate lies inside
/// [band_lo, band_hi] and sends every node outside the band, on either side,
/// to the in-band node nearest in its own space (smallest index on ties).
/// Both spaces must be sampled on a common node layout. Intended for two
/// families whose metrics agree on a middle band and differ only in small
/// caps at the ends.
Correspondence band_correspondence(const spaces::SampledSpace& a,
                                   const spaces::SampledSpace& b,
                                   double band_lo, double band_hi);

/// The two correspondence pairs achieving the distortion maximum, with the
/// achieved value: |d_A(a1, a2) - d_B(b1, b2)| = value.
struct DistortionWitness {
  std::size_t a1 = 0;
  std::size_t b1 = 0;
  std::size_t a2 = 0;
  std::size_t b2 = 0;
  double value = 0;

  nlohmann::json to_json() const;
};

/// Half the largest |d_A(a, a') - d_B(b, b')| over pairs of correspondence
/// entries. The result bounds the Gromov-Hausdorff distance of the sampled
/// geometries up to the two sampling resolutions, which the caller should
/// report alongside. Throws ParameterError when the correspondence misses a
/// point of either space or indexes out of range. Deterministic, including
/// the witness, regardless of thread count.
double gh_upper(const spaces::SampledSpace& a, const spaces::SampledSpace& b,
                const Correspondence& corr,
                DistortionWitness* witness = nullptr);

/// Half the diameter gap |diam A - diam B|: a coarse lower bound, never
/// exceeding gh_upper by more than the two sampling resolutions.
double gh_lower(const spaces::SampledSpace& a, const spaces::SampledSpace& b);

/// One refinement step of the cap-size experiment: the two closed families
/// at cap size 1/i compared with each other and with the common limit.
struct ConvergenceRow {
  int i = 0;
  double d_i = 0;      // cap size, exactly 1.0 / i
  double gh_mn = 0;    // single-warp family vs doubly warped family
  double gh_mx = 0;    // single-warp family vs limit
  double gh_nx = 0;    // doubly warped family vs limit
  double resolution = 0;  // largest achieved sampling resolution of the row
  double diam_m = 0;
  double diam_n = 0;
  double vol_m = 0;
  double vol_n = 0;
  DistortionWitness witness_mn;
  DistortionWitness witness_mx;
  DistortionWitness witness_nx;
  double witness_mn_r1 = 0;  // radial coordinates of the family-vs-family
  double witness_mn_r2 = 0;  // witness pair; expected to sit in the caps
};

/// The experiment's output table, rows sorted by ascending i.
struct ConvergenceTable {
  double c = 0;
  std::size_t n_points = 0;
  std::uint64_t seed = 0;
  std::vector<ConvergenceRow> rows;
  /// Smallest constant with gh_mx, gh_nx <= fitted_c / i + 2 * resolution on
  /// every row; an observed rate, not a theorem.
  double fitted_c = 0;

  /// Header "i,d_i,gh_MN,gh_MX,gh_NX,resolution", one row per i.
  void write_csv(std::ostream& os) const;
  /// Full table including diameters, volumes, and distortion witnesses.
  nlohmann::json to_json() const;
};

/// Builds the two closed families at cap sizes d = 1/i for every i in i_list
/// together with the fixed limit family, samples all three on one shared
/// node layout per i, and tabulates the three upper bounds. The family-vs-
/// family column uses the band correspondence on [d, pi - d], where the two
/// metrics' middle formulas coincide; the limit columns use the identity on
/// the shared layout. Requires 0 < c below the certified slope thresholds of
/// both families and i_list ascending with every i >= 2. Throws NumericError
/// if any curvature certificate fails or if the family-vs-family column
/// fails to be non-increasing within a 2x resolution slack.
ConvergenceTable convergence_experiment(double c, const std::vector<int>& i_list,
                                        std::size_t n_points, std::uint64_t seed);

}  // namespace ricci::gh
