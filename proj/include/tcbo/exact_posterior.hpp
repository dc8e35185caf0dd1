#ifndef TCBO_EXACT_POSTERIOR_HPP
#define TCBO_EXACT_POSTERIOR_HPP

#include <Eigen/Dense>

#include "tcbo/kernels.hpp"

namespace tcbo {

// Posterior covariance of f at (z, z') under a visitation-weighted design,
// computed in kernel space without any finite-rank features:
//   k_D(z, z') = k(z, z') - k(z, X) (sigma2_eff D^{-1} + K)^{-1} k(X, z')
// where D = diag(weights) and sigma2_eff = sigma^2 / (T H). Zero-weight rows
// are excluded from the inversion. This is the general-kernel route used to
// cross-check the feature-space utility.
double exact_pair_covariance(const Kernel& kernel, const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& weights, double sigma2_eff,
                             const Eigen::VectorXd& z, const Eigen::VectorXd& zp);

// Var[f(z) - f(z')] = k_D(z,z) + k_D(z',z') - 2 k_D(z,z')
double pair_variance_exact(const Kernel& kernel, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& weights, double sigma2_eff,
                           const Eigen::VectorXd& z, const Eigen::VectorXd& zp);

}  // namespace tcbo

#endif
