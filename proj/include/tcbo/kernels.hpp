#ifndef TCBO_KERNELS_HPP
#define TCBO_KERNELS_HPP

#include <Eigen/Dense>
#include <string>

namespace tcbo {

// Closed-form solution y1(t, B) of the reactor ODE linearized around the
// equilibrium with y2 = b, y5 = c. Eigenvalues of the linearized system:
//   lambda_{1,2} = -1/2 (b k1 + c k2 + k3 -+ sqrt((b k1 + c k2 - k3)^2 + 4 c k2 k3))
// with lambda_1 <= lambda_2 <= 0. Throws if the eigenvalues are closer
// than 1e-10 (repeated-eigenvalue case is rejected).
struct OdeLinearization {
    double b = 0.0;
    double c = 0.0;
    double k1 = 10.0;
    double k2 = 874.0;
    double k3 = 19200.0;

    void eigenvalues(double& lambda1, double& lambda2) const;
    // gamma * (l2/(l1-l2) e^{l1 t} - l1/(l1-l2) e^{l2 t} + 1)
    double y1(double t, double gamma) const;
};

struct OdeCompositeParams {
    double k1 = 10.0;
    double k2 = 874.0;
    double k3 = 19200.0;
    double alpha_sig = 5.0;
    double alpha_ode = 0.6;
    double alpha_rbf = 0.001;
    // equilibrium constants of the two linearizations; b is taken as the
    // initial concentration of the respective reactant (1-B and B), c is free
    double c1 = 0.0;
    double c2 = 0.0;
};

// Sigmoid-blended feature combining the two linearized solutions:
//   Phi_ode(tau, B) = (1 - S(B)) y1^{(1)}(tau, B) + S(B) y1^{(2)}(tau, B)
// with S centered at 0.5 and slope alpha_sig.
double ode_feature(double tau, double B, const OdeCompositeParams& p);

class Kernel {
public:
    enum class Variant { rbf, ode_composite };

    // k(x, y) = sigma2 * exp(-||x - y||^2 / (2 ell^2))
    static Kernel rbf(double sigma2, double lengthscale);
    // k(x, y) = alpha_ode * Phi_ode(x) Phi_ode(y) + alpha_rbf * k_rbf(x, y; sigma2, ell)
    static Kernel ode_composite(const OdeCompositeParams& p, double rbf_sigma2, double rbf_lengthscale);

    Variant variant() const { return variant_; }
    double sigma2() const { return sigma2_; }
    double lengthscale() const { return lengthscale_; }
    const OdeCompositeParams& ode_params() const { return ode_; }

    double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    // Gram matrix on row-wise point sets, K_ij = k(X_i, Y_j)
    Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const;
    Eigen::MatrixXd gram(const Eigen::MatrixXd& X) const { return gram(X, X); }

    std::string name() const;

private:
    Kernel() = default;
    Variant variant_ = Variant::rbf;
    double sigma2_ = 1.0;
    double lengthscale_ = 1.0;
    OdeCompositeParams ode_;
};

}  // namespace tcbo

#endif
