#include "tcbo/surrogate.hpp"

#include <stdexcept>

namespace tcbo {

Surrogate::Surrogate(FeatureMap features)
    : features_(std::move(features)),
      precision_(Eigen::MatrixXd::Identity(features_.rank(), features_.rank())),
      info_(Eigen::VectorXd::Zero(features_.rank())),
      weight_mean_(Eigen::VectorXd::Zero(features_.rank())) {
    refactor();
}

void Surrogate::refactor() {
    chol_.compute(precision_);
    if (chol_.info() != Eigen::Success)
        throw std::runtime_error("ill-conditioned posterior precision update");
    weight_mean_ = chol_.solve(info_);
}

Surrogate Surrogate::updated(const std::vector<Observation>& batch) const {
    if (batch.empty()) return *this;
    Surrogate next(*this);
    for (const Observation& obs : batch) {
        if (!(obs.noise_var > 0.0)) throw std::runtime_error("observation noise variance must be positive");
        const Eigen::VectorXd phi = features_(obs.x);
        next.precision_.noalias() += phi * phi.transpose() / obs.noise_var;
        next.info_.noalias() += phi * (obs.y / obs.noise_var);
        next.observations_.push_back(obs);
    }
    next.refactor();
    return next;
}

double Surrogate::variance_phi(const Eigen::VectorXd& phi) const {
    return phi.dot(chol_.solve(phi));
}

Eigen::VectorXd Surrogate::mean_many(const Eigen::MatrixXd& Phi) const {
    return Phi.transpose() * weight_mean_;
}

Eigen::VectorXd Surrogate::variance_many(const Eigen::MatrixXd& Phi) const {
    const Eigen::MatrixXd solved = chol_.solve(Phi);
    return (Phi.array() * solved.array()).colwise().sum().transpose();
}

std::pair<double, double> Surrogate::confidence_bounds(const Eigen::VectorXd& x, double beta) const {
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    const Eigen::VectorXd phi = features_(x);
    const double mu = mean_phi(phi);
    const double sd = std::sqrt(std::max(variance_phi(phi), 0.0));
    return {mu - beta * sd, mu + beta * sd};
}

Eigen::VectorXd Surrogate::sample_weights(Rng& rng) const {
    Eigen::VectorXd z(rank());
    for (int i = 0; i < rank(); ++i) z(i) = rng.normal();
    // V = L L'; theta = mu + L^{-T} z has covariance V^{-1}
    return weight_mean_ + chol_.matrixU().solve(z);
}

}  // namespace tcbo
