#include "tcbo/exact_posterior.hpp"

#include <stdexcept>
#include <vector>

namespace tcbo {

namespace {

struct WeightedSystem {
    Eigen::MatrixXd pts;  // rows with positive weight
    Eigen::LDLT<Eigen::MatrixXd> solver;
    bool empty = false;
};

WeightedSystem build_system(const Kernel& kernel, const Eigen::MatrixXd& points,
                            const Eigen::VectorXd& weights, double sigma2_eff) {
    if (points.rows() != weights.size())
        throw std::invalid_argument("points/weights size mismatch");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) < 0.0) throw std::invalid_argument("visitation weights must be nonnegative");
        if (weights(i) > 0.0) keep.push_back(i);
    }
    WeightedSystem sys;
    if (keep.empty()) {
        sys.empty = true;
        return sys;
    }
    sys.pts.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
    for (size_t r = 0; r < keep.size(); ++r) sys.pts.row(static_cast<Eigen::Index>(r)) = points.row(keep[r]);
    Eigen::MatrixXd M = kernel.gram(sys.pts);
    for (size_t r = 0; r < keep.size(); ++r)
        M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) += sigma2_eff / weights(keep[r]);
    sys.solver.compute(M);
    if (sys.solver.info() != Eigen::Success)
        throw std::runtime_error("singular regularized kernel system");
    return sys;
}

double posterior_cov(const Kernel& kernel, const WeightedSystem& sys,
                     const Eigen::VectorXd& z, const Eigen::VectorXd& zp) {
    const double prior = kernel(z, zp);
    if (sys.empty) return prior;
    Eigen::VectorXd kz(sys.pts.rows()), kzp(sys.pts.rows());
    for (Eigen::Index i = 0; i < sys.pts.rows(); ++i) {
        kz(i) = kernel(z, sys.pts.row(i).transpose());
        kzp(i) = kernel(zp, sys.pts.row(i).transpose());
    }
    return prior - kz.dot(sys.solver.solve(kzp));
}

}  // namespace

double exact_pair_covariance(const Kernel& kernel, const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& weights, double sigma2_eff,
                             const Eigen::VectorXd& z, const Eigen::VectorXd& zp) {
    const WeightedSystem sys = build_system(kernel, points, weights, sigma2_eff);
    return posterior_cov(kernel, sys, z, zp);
}

double pair_variance_exact(const Kernel& kernel, const Eigen::MatrixXd& points,
                           const Eigen::VectorXd& weights, double sigma2_eff,
                           const Eigen::VectorXd& z, const Eigen::VectorXd& zp) {
    const WeightedSystem sys = build_system(kernel, points, weights, sigma2_eff);
    const double vzz = posterior_cov(kernel, sys, z, z);
    const double vpp = posterior_cov(kernel, sys, zp, zp);
    const double vzp = posterior_cov(kernel, sys, z, zp);
    return vzz + vpp - 2.0 * vzp;
}

}  // namespace tcbo
