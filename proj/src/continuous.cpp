#include "tcbo/continuous.hpp"

#include <stdexcept>

namespace tcbo {

LinearSystem LinearSystem::additive(int dim, double a_max, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi) {
    if (a_max <= 0.0) throw std::invalid_argument("a_max must be positive");
    if (lo.size() != dim || hi.size() != dim || ((hi - lo).array() <= 0.0).any())
        throw std::invalid_argument("degenerate box domain");
    LinearSystem sys;
    sys.dim = dim;
    sys.A = Eigen::MatrixXd::Identity(dim, dim);
    sys.B = Eigen::MatrixXd::Identity(dim, dim);
    sys.a_max = a_max;
    sys.lo = lo;
    sys.hi = hi;
    return sys;
}

Eigen::VectorXd LinearSystem::clamp_to_box(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
}

bool LinearSystem::identity_dynamics() const {
    return A.isIdentity(0.0) && B.isIdentity(0.0);
}

ActionPlan shortest_feasible_path(const LinearSystem& sys, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& target, int horizon) {
    if (!sys.identity_dynamics())
        throw std::invalid_argument("shortest feasible path assumes additive dynamics");
    const Eigen::VectorXd goal = sys.clamp_to_box(target);
    ActionPlan plan;
    plan.actions.resize(horizon, sys.dim);
    plan.states.resize(horizon, sys.dim);
    Eigen::VectorXd x = x0;
    for (int h = 0; h < horizon; ++h) {
        const Eigen::VectorXd a =
            (goal - x).cwiseMax(-sys.a_max).cwiseMin(sys.a_max);
        x = sys.clamp_to_box(x + a);
        plan.actions.row(h) = a.transpose();
        plan.states.row(h) = x.transpose();
    }
    return plan;
}

ActionPlan mpc_subproblem(const std::function<double(const Eigen::VectorXd&)>& grad_field,
                          const LinearSystem& sys, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& z, const Eigen::VectorXd& zp, int horizon) {
    ActionPlan to_z = shortest_feasible_path(sys, x0, z, horizon);
    ActionPlan to_zp = shortest_feasible_path(sys, x0, zp, horizon);
    auto score = [&](const ActionPlan& plan) {
        double s = 0.0;
        for (int h = 0; h < plan.states.rows(); ++h) s += grad_field(plan.states.row(h).transpose());
        return s;
    };
    to_z.objective = score(to_z);
    to_zp.objective = score(to_zp);
    return to_zp.objective < to_z.objective ? to_zp : to_z;
}

}  // namespace tcbo
