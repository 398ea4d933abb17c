#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ricci/grid.hpp"
#include "ricci/profiles.hpp"

namespace ricci::curvature {

/// Rotationally symmetric metric dr^2 + warp(r)^2 ds_k^2 over an interval,
/// with the S^k fiber optionally replaced by a cyclic quotient (k = 3 only).
struct WarpedMetric {
  profiles::ScalarProfile warp;
  int fiber_dim = 3;
  int quotient_order = 1;

  WarpedMetric(profiles::ScalarProfile w, int k = 3, int m = 1);

  double lo() const { return warp.lo(); }
  double hi() const { return warp.hi(); }
};

/// Doubly warped metric dr^2 + rho(r)^2 (fiber circle)^2 + phi(r)^2 (base S^2),
/// the circle being the Hopf fiber of S^3/mu_n.
struct BergerMetric {
  profiles::ScalarProfile rho;
  profiles::ScalarProfile phi;
  int n = 1;

  BergerMetric(profiles::ScalarProfile rho_in, profiles::ScalarProfile phi_in, int n_in = 1);

  double lo() const;
  double hi() const;
};

struct WarpedRicci {
  double radial = 0;
  double spherical = 0;
  double min() const { return radial < spherical ? radial : spherical; }
};

/// Ricci eigenvalues of a WarpedMetric at r: the radial direction and the
/// (repeated) fiber direction. The quotient order never enters (local
/// isometry).
WarpedRicci ricci_warped(const WarpedMetric& m, double r);

struct BergerConditions {
  double q1 = 0;
  double q2 = 0;
  double q3 = 0;
  double min() const;
};

/// The three closed-form quantities whose simultaneous non-negativity is
/// equivalent to Ric >= 0 for a BergerMetric:
///   q1 = -rho''/rho - 2 phi''/phi
///   q2 = 2 rho^4/phi^4 - 2 (rho/phi) rho' phi' - rho rho''
///   q3 = 4 - 2 rho^2/phi^2 - (phi/rho) rho' phi' - phi phi'' - (phi')^2
/// The Ricci endomorphism eigenvalues are (q1, q2/rho^2, q3/phi^2, q3/phi^2),
/// so min(q1,q2,q3) has the same sign as the minimal eigenvalue.
BergerConditions berger_conditions(const BergerMetric& m, double r);

/// Grid certificate for non-negativity of a family of pointwise conditions.
struct CurvatureCertificate {
  std::string family;
  GridSpec grid;
  std::vector<double> min_values;      // one entry per condition
  std::vector<double> witness_points;  // argmin r per condition (smallest r on ties)
  bool passed = false;
  bool degenerate = false;             // a node had a nonpositive warp factor
  double tolerance = 0;

  nlohmann::json to_json() const;
  static CurvatureCertificate from_json(const nlohmann::json& j);
};

/// Evaluates ricci_warped at every grid node; passes iff both eigenvalue
/// minima are >= -tolerance. A nonpositive warp at a node marks the
/// certificate degenerate and failed (with witness) instead of throwing.
CurvatureCertificate verify_nonneg(const WarpedMetric& m, const GridSpec& grid,
                                   double tolerance);

/// Same contract for the three Berger conditions.
CurvatureCertificate verify_nonneg(const BergerMetric& m, const GridSpec& grid,
                                   double tolerance);

struct ThresholdResult {
  double c_max = 0;        // largest parameter with a passing certificate
  double bracket_lo = 0;   // certified-passing endpoint
  double bracket_hi = 0;   // certified-failing endpoint
  CurvatureCertificate witness;  // the certificate at c_max

  nlohmann::json to_json() const;
};

/// Bisects [c_lo, c_hi] for the largest c whose certificate passes. Requires
/// a sign change across the bracket (pass at c_lo, fail at c_hi); the result
/// is certified at c_max only, to bracket width width_tol.
ThresholdResult threshold_search(
    const std::function<CurvatureCertificate(double)>& builder, double c_lo,
    double c_hi, double width_tol);

}  // namespace ricci::curvature
