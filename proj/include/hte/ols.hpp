#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hte/errors.hpp"
#include "hte/stats.hpp"

namespace hte {

struct WlsFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;  // heteroskedasticity-robust (HC1)
  int n = 0;
  int k = 0;

  double std_error(int j) const { return std::sqrt(covariance(j, j)); }

  // Normal-based confidence interval at the given level.
  std::pair<double, double> confidence_interval(int j, double level = 0.95) const {
    const double z = normal_quantile(0.5 + level / 2.0);
    const double half = z * std_error(j);
    return {beta(j) - half, beta(j) + half};
  }
};

// Weighted least squares with HC1 robust standard errors. Equivalent to OLS
// on sqrt(w)-scaled rows; throws degeneracy_error when the weighted design is
// rank deficient.
inline WlsFit weighted_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights) {
  const auto n = design.rows();
  const auto k = design.cols();
  if (y.size() != n || weights.size() != n) throw validation_error("weighted_ols: size mismatch");
  if (n <= k) throw degeneracy_error("weighted_ols: more coefficients than rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights(i) > 0.0)) throw validation_error("weighted_ols: weights must be positive");
  }

  const Eigen::VectorXd root_w = weights.array().sqrt();
  const Eigen::MatrixXd xw = root_w.asDiagonal() * design;
  const Eigen::VectorXd yw = root_w.asDiagonal() * y;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  if (qr.rank() < k) throw degeneracy_error("weighted_ols: design matrix is rank deficient");

  WlsFit fit;
  fit.n = static_cast<int>(n);
  fit.k = static_cast<int>(k);
  fit.beta = qr.solve(yw);

  const Eigen::VectorXd resid = yw - xw * fit.beta;
  const Eigen::MatrixXd gram_inv =
      (xw.transpose() * xw).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd meat =
      xw.transpose() * resid.array().square().matrix().asDiagonal() * xw;
  const double hc1 = static_cast<double>(n) / static_cast<double>(n - k);
  fit.covariance = hc1 * gram_inv * meat * gram_inv;
  return fit;
}

}  // namespace hte
