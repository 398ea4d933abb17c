#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ricci/profiles.hpp"

namespace ricci::oracle {

/// Coordinate chart with a metric evaluator. Everything downstream is
/// numerical differentiation of metric_at, so this is the module's single
/// source of geometric truth.
struct ChartMetric {
  int dim = 4;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric_at;
  std::string chart_name;
  std::vector<std::array<double, 2>> valid_region;  // per-coordinate box

  bool contains(const Eigen::VectorXd& x, double margin = 0.0) const;
};

/// Symmetric positive-definite spot check of metric_at at n quasi-random
/// interior points; returns false on the first failure.
bool chart_is_positive_definite(const ChartMetric& chart, int n_samples);

/// Christoffel symbols: result[k](i, j) = Gamma^k_ij, from centered finite
/// differences of the metric with per-coordinate step h * max(1, |x_i|).
std::vector<Eigen::MatrixXd> christoffel(const ChartMetric& chart,
                                         const Eigen::VectorXd& x, double h = 1e-4);

/// Ricci tensor R_ij by contracting finite-differenced Christoffel symbols.
Eigen::MatrixXd ricci_tensor(const ChartMetric& chart, const Eigen::VectorXd& x,
                             double h = 1e-4);

/// Smallest eigenvalue of the Ricci endomorphism g^{-1} R at x; >= 0
/// certifies pointwise Ric >= 0.
double ricci_eigen_min(const ChartMetric& chart, const Eigen::VectorXd& x,
                       double h = 1e-4);

// Chart builders.

/// Flat R^dim.
ChartMetric euclidean_chart(int dim = 4);

/// Round unit 2-sphere, coordinates (theta, phi).
ChartMetric sphere2_chart();

/// Unit round S^3 metric block in coordinates (xi, alpha, beta): alpha is the
/// Hopf circle angle and beta the base angle, so the 3x3 block is
///   [1, 0, 0; 0, 1, cos^2 xi; 0, cos^2 xi, cos^2 xi].
Eigen::Matrix3d round_s3_block(double xi);

/// Product chart (r, xi, alpha, beta) of dr^2 + warp(r)^2 ds_3^2.
ChartMetric warped_product_chart(const profiles::ScalarProfile& warp);

/// Same chart built from closed-form warp callables (value only is needed).
ChartMetric warped_product_chart(std::function<double(double)> warp, double lo, double hi,
                                 std::string name);

/// Doubly warped chart (r, xi, alpha, beta):
///   dr^2 + rho^2 (dalpha + cos^2 xi dbeta)^2 + phi^2 (dxi^2 + sin^2 xi cos^2 xi dbeta^2).
ChartMetric berger_product_chart(const profiles::ScalarProfile& rho,
                                 const profiles::ScalarProfile& phi);

}  // namespace ricci::oracle
