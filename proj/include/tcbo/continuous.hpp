#ifndef TCBO_CONTINUOUS_HPP
#define TCBO_CONTINUOUS_HPP

#include <Eigen/Dense>
#include <functional>

namespace tcbo {

// Linear transition model x_{h+1} = A x_h + B a_h on a box domain with a
// per-coordinate step bound ||a||_inf <= a_max.
struct LinearSystem {
    int dim = 1;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    double a_max = 0.1;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    static LinearSystem additive(int dim, double a_max, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi);

    Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x) const;
    bool identity_dynamics() const;
};

struct ActionPlan {
    Eigen::MatrixXd actions;  // H x dim
    Eigen::MatrixXd states;   // H x dim, induced x_1..x_H
    double objective = 0.0;   // sum of the gradient field along x_1..x_H
};

// Greedy feasible path toward `target`: each step moves by
// clamp(target - x, +-a_max) componentwise, arriving after
// ceil(||target - x0||_inf / a_max) steps and holding thereafter.
// Targets outside the box are projected onto it first.
ActionPlan shortest_feasible_path(const LinearSystem& sys, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& target, int horizon);

// Approximate minimizer of sum_h grad(x_h) subject to the dynamics: evaluate
// the two straight feasible paths toward the gradient-field modes z and zp
// and keep the better one (ties prefer z).
ActionPlan mpc_subproblem(const std::function<double(const Eigen::VectorXd&)>& grad_field,
                          const LinearSystem& sys, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& z, const Eigen::VectorXd& zp, int horizon);

}  // namespace tcbo

#endif
