#include "ricci/tensor_oracle.hpp"

#include <cmath>

#include "ricci/errors.hpp"

namespace ricci::oracle {

namespace {

double frac(double x) { return x - std::floor(x); }

// Generalized golden-ratio (Kronecker) lattice directions for up to 4 dims.
std::vector<double> kronecker_alphas(int dim) {
  double g = 1.0;
  for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (dim + 1));
  std::vector<double> a(dim);
  double p = 1.0 / g;
  for (int j = 0; j < dim; ++j) {
    a[j] = p;
    p /= g;
  }
  return a;
}

Eigen::MatrixXd metric_inverse(const ChartMetric& chart, const Eigen::MatrixXd& g) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& s = svd.singularValues();
    const double cond =
        s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
    throw NumericError("singular metric matrix in chart '" + chart.chart_name +
                       "' (condition number ~ " + std::to_string(cond) + ")");
  }
  return lu.inverse();
}

}  // namespace

bool ChartMetric::contains(const Eigen::VectorXd& x, double margin) const {
  if (x.size() != dim) return false;
  for (int i = 0; i < dim; ++i)
    if (x(i) < valid_region[static_cast<std::size_t>(i)][0] + margin ||
        x(i) > valid_region[static_cast<std::size_t>(i)][1] - margin)
      return false;
  return true;
}

bool chart_is_positive_definite(const ChartMetric& chart, int n_samples) {
  const auto alphas = kronecker_alphas(chart.dim);
  for (int s = 0; s < n_samples; ++s) {
    Eigen::VectorXd x(chart.dim);
    for (int j = 0; j < chart.dim; ++j) {
      const auto& box = chart.valid_region[static_cast<std::size_t>(j)];
      const double span = box[1] - box[0];
      const double u = 0.05 + 0.9 * frac((s + 1) * alphas[static_cast<std::size_t>(j)]);
      x(j) = box[0] + u * span;
    }
    const Eigen::MatrixXd g = chart.metric_at(x);
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
      return false;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

std::vector<Eigen::MatrixXd> christoffel(const ChartMetric& chart, const Eigen::VectorXd& x,
                                         double h) {
  if (!(h > 0)) throw ParameterError("finite-difference step must be positive");
  const int d = chart.dim;
  const Eigen::MatrixXd g = chart.metric_at(x);
  const Eigen::MatrixXd ginv = metric_inverse(chart, g);

  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    const double hl = h * std::max(1.0, std::abs(x(l)));
    Eigen::VectorXd xp = x, xm = x;
    xp(l) += hl;
    xm(l) -= hl;
    dg[static_cast<std::size_t>(l)] = (chart.metric_at(xp) - chart.metric_at(xm)) / (2.0 * hl);
  }

  std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d),
                                     Eigen::MatrixXd::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l)
          acc += ginv(k, l) * (dg[static_cast<std::size_t>(i)](j, l) +
                               dg[static_cast<std::size_t>(j)](i, l) -
                               dg[static_cast<std::size_t>(l)](i, j));
        gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
        gamma[static_cast<std::size_t>(k)](j, i) = 0.5 * acc;
      }
  return gamma;
}

Eigen::MatrixXd ricci_tensor(const ChartMetric& chart, const Eigen::VectorXd& x, double h) {
  const int d = chart.dim;
  const auto gamma = christoffel(chart, x, h);

  // dgamma[l][k](i,j) = d_l Gamma^k_ij
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    const double hl = h * std::max(1.0, std::abs(x(l)));
    Eigen::VectorXd xp = x, xm = x;
    xp(l) += hl;
    xm(l) -= hl;
    const auto gp = christoffel(chart, xp, h);
    const auto gm = christoffel(chart, xm, h);
    dgamma[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k)
      dgamma[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] =
          (gp[static_cast<std::size_t>(k)] - gm[static_cast<std::size_t>(k)]) / (2.0 * hl);
  }

  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) {
        acc += dgamma[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)](i, j);
        acc -= dgamma[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)](i, k);
        for (int l = 0; l < d; ++l) {
          acc += gamma[static_cast<std::size_t>(k)](k, l) *
                 gamma[static_cast<std::size_t>(l)](i, j);
          acc -= gamma[static_cast<std::size_t>(k)](j, l) *
                 gamma[static_cast<std::size_t>(l)](i, k);
        }
      }
      ric(i, j) = acc;
    }
  return 0.5 * (ric + ric.transpose());
}

double ricci_eigen_min(const ChartMetric& chart, const Eigen::VectorXd& x, double h) {
  const Eigen::MatrixXd ric = ricci_tensor(chart, x, h);
  const Eigen::MatrixXd g = chart.metric_at(x);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ric, g);
  if (es.info() != Eigen::Success)
    throw NumericError("eigenvalue solve failed in chart '" + chart.chart_name + "'");
  return es.eigenvalues()(0);
}

ChartMetric euclidean_chart(int dim) {
  ChartMetric chart;
  chart.dim = dim;
  chart.chart_name = "euclidean";
  chart.valid_region.assign(static_cast<std::size_t>(dim), {-10.0, 10.0});
  chart.metric_at = [dim](const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Identity(dim, dim).eval();
  };
  return chart;
}

ChartMetric sphere2_chart() {
  ChartMetric chart;
  chart.dim = 2;
  chart.chart_name = "sphere2";
  chart.valid_region = {{0.05, 3.09}, {0.0, 6.28}};
  chart.metric_at = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = 1.0;
    const double s = std::sin(x(0));
    g(1, 1) = s * s;
    return g;
  };
  return chart;
}

Eigen::Matrix3d round_s3_block(double xi) {
  const double c2 = std::cos(xi) * std::cos(xi);
  Eigen::Matrix3d b;
  b << 1.0, 0.0, 0.0, 0.0, 1.0, c2, 0.0, c2, c2;
  return b;
}

namespace {

ChartMetric warped_chart_impl(std::function<double(double)> warp, double lo, double hi,
                              std::string name) {
  ChartMetric chart;
  chart.dim = 4;
  chart.chart_name = std::move(name);
  chart.valid_region = {{lo, hi}, {0.02, 1.55}, {0.0, 6.28}, {0.0, 6.28}};
  chart.metric_at = [warp = std::move(warp)](const Eigen::VectorXd& x) {
    const double p = warp(x(0));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = 1.0;
    g.block<3, 3>(1, 1) = (p * p) * round_s3_block(x(1));
    return g;
  };
  return chart;
}

}  // namespace

ChartMetric warped_product_chart(const profiles::ScalarProfile& warp) {
  return warped_chart_impl([warp](double r) { return warp.eval(r, 0); }, warp.lo(),
                           warp.hi(), "warped:" + warp.name());
}

ChartMetric warped_product_chart(std::function<double(double)> warp, double lo, double hi,
                                 std::string name) {
  return warped_chart_impl(std::move(warp), lo, hi, std::move(name));
}

ChartMetric berger_product_chart(const profiles::ScalarProfile& rho,
                                 const profiles::ScalarProfile& phi) {
  ChartMetric chart;
  chart.dim = 4;
  chart.chart_name = "berger";
  chart.valid_region = {{std::max(rho.lo(), phi.lo()), std::min(rho.hi(), phi.hi())},
                        {0.02, 1.55},
                        {0.0, 6.28},
                        {0.0, 6.28}};
  chart.metric_at = [rho, phi](const Eigen::VectorXd& x) {
    const double a = rho.eval(x(0), 0);
    const double b = phi.eval(x(0), 0);
    const double cs = std::cos(x(1)), sn = std::sin(x(1));
    const double c2 = cs * cs;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = 1.0;
    g(1, 1) = b * b;
    g(2, 2) = a * a;
    g(2, 3) = g(3, 2) = a * a * c2;
    g(3, 3) = a * a * c2 * c2 + b * b * sn * sn * c2;
    return g;
  };
  return chart;
}

}  // namespace ricci::oracle
