#ifndef TCBO_NYSTROM_HPP
#define TCBO_NYSTROM_HPP

#include <Eigen/Dense>

#include "tcbo/kernels.hpp"

namespace tcbo {

// Finite-rank feature map Phi(x) in R^m with Phi(x)' Phi(y) ~= k(x, y).
// Built from landmark points via the eigendecomposition of the landmark
// Gram matrix: Phi(x) = D_r^{-1/2} V_r' (k(x, x_1), ..., k(x, x_n))'.
// On the landmarks themselves the reconstruction is exact up to the
// dropped-eigenvalue tolerance.
class FeatureMap {
public:
    FeatureMap(Kernel kernel, Eigen::MatrixXd landmarks, Eigen::MatrixXd projection)
        : kernel_(std::move(kernel)), landmarks_(std::move(landmarks)), projection_(std::move(projection)) {}

    int rank() const { return static_cast<int>(projection_.rows()); }
    const Eigen::MatrixXd& landmarks() const { return landmarks_; }
    const Kernel& kernel() const { return kernel_; }

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

    // Feature matrix, one column per row of `points` (m x n).
    Eigen::MatrixXd eval(const Eigen::MatrixXd& points) const;

private:
    Kernel kernel_;
    Eigen::MatrixXd landmarks_;   // n_land x dim
    Eigen::MatrixXd projection_;  // m x n_land
};

// Eigenvalues below `drop_tol` are discarded; eigenvalues below
// -`indefinite_tol` raise (landmark Gram numerically indefinite).
FeatureMap build_nystrom(const Kernel& kernel, const Eigen::MatrixXd& landmarks,
                         double drop_tol = 1e-10, double indefinite_tol = 1e-8);

}  // namespace tcbo

#endif
