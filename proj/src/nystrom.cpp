#include "tcbo/nystrom.hpp"

#include <stdexcept>

namespace tcbo {

Eigen::VectorXd FeatureMap::operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd kx(landmarks_.rows());
    for (Eigen::Index i = 0; i < landmarks_.rows(); ++i)
        kx(i) = kernel_(x, landmarks_.row(i).transpose());
    return projection_ * kx;
}

Eigen::MatrixXd FeatureMap::eval(const Eigen::MatrixXd& points) const {
    return projection_ * kernel_.gram(landmarks_, points);
}

FeatureMap build_nystrom(const Kernel& kernel, const Eigen::MatrixXd& landmarks,
                         double drop_tol, double indefinite_tol) {
    if (landmarks.rows() == 0) throw std::invalid_argument("nystrom requires at least one landmark");
    const Eigen::MatrixXd K = kernel.gram(landmarks);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    if (eig.info() != Eigen::Success) throw std::runtime_error("landmark Gram eigendecomposition failed");
    const Eigen::VectorXd& vals = eig.eigenvalues();
    if (vals(0) < -indefinite_tol)
        throw std::runtime_error("landmark kernel matrix is numerically indefinite");

    int kept = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        if (vals(i) > drop_tol) ++kept;
    if (kept == 0) throw std::runtime_error("landmark kernel matrix has no usable eigenvalues");

    // eigenvalues are ascending; keep the top `kept`
    Eigen::MatrixXd proj(kept, landmarks.rows());
    for (int r = 0; r < kept; ++r) {
        const Eigen::Index i = vals.size() - 1 - r;
        proj.row(r) = eig.eigenvectors().col(i).transpose() / std::sqrt(vals(i));
    }
    return FeatureMap(kernel, landmarks, std::move(proj));
}

}  // namespace tcbo
