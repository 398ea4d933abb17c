#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ricci/grid.hpp"

namespace ricci::profiles {

enum class PieceKind { Affine, Sinusoid, Polynomial, Table };

/// One piece of a piecewise scalar function on the closed interval [lo, hi].
///
/// Closed-form kinds evaluate derivatives analytically. Table pieces hold
/// values on a uniform node grid that extends a couple of guard nodes past
/// [lo, hi]; order 0 uses cubic interpolation and orders 1 and 2 use centered
/// differences on the node nearest to the query point.
struct ProfilePiece {
  PieceKind kind = PieceKind::Affine;
  double lo = 0;
  double hi = 0;

  // Affine: a0 + a1 * r
  double a0 = 0;
  double a1 = 0;

  // Sinusoid: amp * sin(freq * r + phase) + offset
  double amp = 0;
  double freq = 0;
  double phase = 0;
  double offset = 0;

  // Polynomial: sum_k coeffs[k] * (r - center)^k
  std::vector<double> coeffs;
  double center = 0;

  // Table: a0 + a1 * (r - start) plus interpolation of values[i] sampled at
  // start + i * spacing. The affine trend keeps the stored values small when
  // the function rides on a steep line, so centered second differences of the
  // values are not washed out by rounding of a large carrier.
  std::vector<double> values;
  double start = 0;
  double spacing = 0;

  double eval(double r, int order) const;

  static ProfilePiece affine(double lo, double hi, double a0, double a1);
  static ProfilePiece sinusoid(double lo, double hi, double amp, double freq,
                               double phase, double offset);
  static ProfilePiece polynomial(double lo, double hi, double center,
                                 std::vector<double> coeffs);
  static ProfilePiece table(double lo, double hi, double start, double spacing,
                            std::vector<double> values);
};

/// Piecewise scalar function with contiguous pieces. Adjacent pieces must
/// agree in value at shared breakpoints to within 1e-12; construction fails
/// otherwise. Evaluation at an interior breakpoint uses the left piece.
class ScalarProfile {
 public:
  ScalarProfile() = default;
  explicit ScalarProfile(std::vector<ProfilePiece> pieces, std::string name = "");

  /// Value (order 0) or derivative (order 1, 2) at r. Throws DomainError for
  /// r outside [lo(), hi()] and ParameterError for an unsupported order.
  double eval(double r, int order = 0) const;
  double operator()(double r) const { return eval(r, 0); }

  double lo() const;
  double hi() const;
  bool empty() const { return pieces_.empty(); }
  const std::vector<ProfilePiece>& pieces() const { return pieces_; }
  /// Interior junction points between consecutive pieces.
  std::vector<double> breakpoints() const;
  const std::string& name() const { return name_; }

  nlohmann::json to_json() const;
  static ScalarProfile from_json(const nlohmann::json& j);

  /// Writes "r,value,d1,d2" rows on the uniform grid with the given step.
  void write_grid_csv(std::ostream& os, double step) const;

 private:
  std::vector<ProfilePiece> pieces_;
  std::string name_;

  std::size_t find_piece(double r) const;
};

ScalarProfile make_affine(double lo, double hi, double a0, double a1,
                          std::string name = "");
ScalarProfile make_sinusoid(double lo, double hi, double amp, double freq,
                            double phase, double offset, std::string name = "");

/// Variable and value rescaling: returns V with V(r) = scale * p((r - shift) / scale).
/// Slopes are preserved; all piece kinds map to the same kind.
ScalarProfile affine_change(const ScalarProfile& p, double scale, double shift,
                            std::string name = "");

/// Reflection: returns V with V(r) = p(axis - r).
ScalarProfile mirror_about(const ScalarProfile& p, double axis,
                           std::string name = "");

/// Restriction of p to [lo, hi] (pieces clipped, same values).
ScalarProfile restrict_to(const ScalarProfile& p, double lo, double hi);

/// Even bump kernel exp(-1 / (1 - (s/radius)^2)) on (-radius, radius),
/// normalized at construction so its integral is 1 to within 1e-10.
class MollifierKernel {
 public:
  explicit MollifierKernel(double radius);

  double radius() const { return radius_; }
  double operator()(double s) const;
  /// Recomputed integral (a check value; approximately 1).
  double integral() const;

 private:
  double radius_;
  double scale_;
};

/// Convolution p * kernel on [p.lo + R, p.hi - R]. Wherever p is affine on a
/// full kernel window the output reproduces that affine piece exactly; the
/// remaining transition windows are tabulated (spacing <= 1e-3 of the window
/// length by default).
ScalarProfile mollify(const ScalarProfile& p, const MollifierKernel& kernel,
                      double spacing = 0.0);

/// Replaces p on (corner - halfwidth, corner + halfwidth) by the quintic
/// matching value and first two derivatives at the window edges. Requires a
/// concave corner of a locally concave, locally Lipschitz input; the result
/// is verified concave, slope-bounded and <= p on the window. Inputs already
/// C^2 at the corner are returned unchanged.
ScalarProfile concave_smooth(const ScalarProfile& p, double corner,
                             double halfwidth);

struct RegularityReport {
  bool concave = false;            // all raw second differences <= +1e-10
  double lipschitz_constant = 0;   // max slope magnitude between grid nodes
  double min_value = 0;
  struct Jump {
    double r;
    double value;
    double d1;
    double d2;
  };
  std::vector<Jump> breakpoint_jumps;  // one entry per interior breakpoint
};

RegularityReport check_regularity(const ScalarProfile& p, const GridSpec& grid);

}  // namespace ricci::profiles
