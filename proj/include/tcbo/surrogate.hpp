#ifndef TCBO_SURROGATE_HPP
#define TCBO_SURROGATE_HPP

#include <Eigen/Dense>
#include <vector>

#include "tcbo/nystrom.hpp"
#include "tcbo/random.hpp"

namespace tcbo {

// Observation noise sigma^2(x, a) = s (1 + w ||x - a||^2). w = 0 is the
// homoscedastic case.
struct NoiseModel {
    double s = 1.0;
    double w = 0.0;

    static NoiseModel homoscedastic(double sigma2) { return NoiseModel{sigma2, 0.0}; }
    static NoiseModel transition(double s, double w) { return NoiseModel{s, w}; }

    double variance(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const {
        return w == 0.0 ? s : s * (1.0 + w * (x - a).squaredNorm());
    }
    double worst_case(double max_move_sq) const { return s * (1.0 + w * max_move_sq); }
};

struct Observation {
    Eigen::VectorXd x;  // measured point
    Eigen::VectorXd a;  // action target (equals x when irrelevant)
    double y = 0.0;
    double noise_var = 1.0;
};

// Gaussian model on finite-rank features: f(x) = Phi(x)' theta with prior
// theta ~ N(0, I). Stores the posterior as the precision matrix
// V = I + sum Phi Phi'/sigma^2 and the weighted response sum, so updates are
// incremental. Instances are immutable snapshots; updated() returns a new one.
class Surrogate {
public:
    explicit Surrogate(FeatureMap features);

    const FeatureMap& features() const { return features_; }
    int rank() const { return static_cast<int>(precision_.rows()); }
    const Eigen::MatrixXd& precision() const { return precision_; }
    const Eigen::VectorXd& weight_mean() const { return weight_mean_; }
    const std::vector<Observation>& observations() const { return observations_; }

    Surrogate updated(const std::vector<Observation>& batch) const;

    double mean(const Eigen::VectorXd& x) const { return mean_phi(features_(x)); }
    double variance(const Eigen::VectorXd& x) const { return variance_phi(features_(x)); }
    std::pair<double, double> confidence_bounds(const Eigen::VectorXd& x, double beta) const;

    // fast paths on precomputed feature vectors
    double mean_phi(const Eigen::VectorXd& phi) const { return phi.dot(weight_mean_); }
    double variance_phi(const Eigen::VectorXd& phi) const;
    // means and variances for a feature matrix (one column per point)
    Eigen::VectorXd mean_many(const Eigen::MatrixXd& Phi) const;
    Eigen::VectorXd variance_many(const Eigen::MatrixXd& Phi) const;

    // theta ~ N(weight_mean, V^{-1}); the induced function is x -> Phi(x)' theta
    Eigen::VectorXd sample_weights(Rng& rng) const;

    Eigen::VectorXd solve_precision(const Eigen::VectorXd& rhs) const { return chol_.solve(rhs); }
    Eigen::MatrixXd solve_precision(const Eigen::MatrixXd& rhs) const { return chol_.solve(rhs); }

private:
    void refactor();

    FeatureMap features_;
    Eigen::MatrixXd precision_;    // V
    Eigen::VectorXd info_;         // sum Phi y / sigma^2
    Eigen::VectorXd weight_mean_;  // V^{-1} info
    Eigen::LLT<Eigen::MatrixXd> chol_;
    std::vector<Observation> observations_;
};

}  // namespace tcbo

#endif
