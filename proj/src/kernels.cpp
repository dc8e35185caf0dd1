#include "tcbo/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace tcbo {

void OdeLinearization::eigenvalues(double& lambda1, double& lambda2) const {
    const double s = b * k1 + c * k2 + k3;
    const double disc = (b * k1 + c * k2 - k3) * (b * k1 + c * k2 - k3) + 4.0 * c * k2 * k3;
    const double root = std::sqrt(std::max(disc, 0.0));
    lambda1 = -0.5 * (s + root);
    lambda2 = -0.5 * (s - root);
    if (std::abs(lambda1 - lambda2) < 1e-10)
        throw std::runtime_error("ode linearization has (near-)repeated eigenvalues");
}

double OdeLinearization::y1(double t, double gamma) const {
    double l1, l2;
    eigenvalues(l1, l2);
    const double denom = l1 - l2;
    return gamma * (l2 / denom * std::exp(l1 * t) - l1 / denom * std::exp(l2 * t) + 1.0);
}

double ode_feature(double tau, double B, const OdeCompositeParams& p) {
    OdeLinearization lin1{1.0 - B, p.c1, p.k1, p.k2, p.k3};
    OdeLinearization lin2{B, p.c2, p.k1, p.k2, p.k3};
    const double y1 = lin1.y1(tau, B);        // gamma_1(B) = B
    const double y2 = lin2.y1(tau, 1.0 - B);  // gamma_2(B) = 1 - B
    const double sig = 1.0 / (1.0 + std::exp(-p.alpha_sig * (B - 0.5)));
    return (1.0 - sig) * y1 + sig * y2;
}

Kernel Kernel::rbf(double sigma2, double lengthscale) {
    if (sigma2 <= 0.0 || lengthscale <= 0.0)
        throw std::invalid_argument("rbf kernel requires sigma2 > 0 and lengthscale > 0");
    Kernel k;
    k.variant_ = Variant::rbf;
    k.sigma2_ = sigma2;
    k.lengthscale_ = lengthscale;
    return k;
}

Kernel Kernel::ode_composite(const OdeCompositeParams& p, double rbf_sigma2, double rbf_lengthscale) {
    if (p.alpha_ode < 0.0 || p.alpha_rbf < 0.0)
        throw std::invalid_argument("composite kernel requires alpha_ode, alpha_rbf >= 0");
    Kernel k;
    k.variant_ = Variant::ode_composite;
    k.sigma2_ = rbf_sigma2;
    k.lengthscale_ = rbf_lengthscale;
    k.ode_ = p;
    return k;
}

double Kernel::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("kernel arguments have mismatched dimensions");
    const double r2 = (x - y).squaredNorm();
    const double krbf = sigma2_ * std::exp(-r2 / (2.0 * lengthscale_ * lengthscale_));
    if (variant_ == Variant::rbf) return krbf;
    const double fx = ode_feature(x(0), x(1), ode_);
    const double fy = ode_feature(y(0), y(1), ode_);
    return ode_.alpha_ode * fx * fy + ode_.alpha_rbf * krbf;
}

Eigen::MatrixXd Kernel::gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const {
    if (X.cols() != Y.cols()) throw std::invalid_argument("kernel arguments have mismatched dimensions");
    Eigen::MatrixXd K(X.rows(), Y.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.rows(); ++j)
            K(i, j) = (*this)(X.row(i).transpose(), Y.row(j).transpose());
    return K;
}

std::string Kernel::name() const {
    return variant_ == Variant::rbf ? "rbf" : "ode-composite";
}

}  // namespace tcbo
