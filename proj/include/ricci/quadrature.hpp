#pragma once

#include <functional>
#include <vector>

namespace ricci {

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

/// Integrates f over [a, b] splitting first at the given interior points
/// (typically breakpoints of a piecewise integrand).
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& interior, double tol = 1e-12);

/// Fixed composite Gauss-Legendre rule (20 nodes per panel). The panel layout
/// depends only on the panel count, so the result varies smoothly with b.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels);

}  // namespace ricci
