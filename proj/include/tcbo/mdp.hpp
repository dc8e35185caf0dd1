#ifndef TCBO_MDP_HPP
#define TCBO_MDP_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "tcbo/random.hpp"

namespace tcbo {

struct MdpAction {
    std::string name;
    std::vector<std::pair<int, double>> next;  // (successor state, probability)
};

// Finite-horizon MDP carrying the transition constraints. States have an
// embedding coordinate used for kernel evaluation. Forbidden transitions are
// simply absent from the action successor lists (probability exactly zero).
// An optional stage mask (produced by reachability_filter) restricts the
// feasible actions per stage; state-action pairs are flattened to a single
// pair index for visitations and rewards.
struct FiniteMdp {
    std::vector<std::string> state_names;
    Eigen::MatrixXd embeddings;                   // |X| x dim
    std::vector<std::vector<MdpAction>> actions;  // per state
    int horizon = 1;
    Eigen::VectorXd initial_law;
    std::vector<int> terminal_states;             // empty = unconstrained
    std::vector<std::vector<char>> stage_mask;    // [h][pair]; empty = all feasible

    // flattened pair index
    std::vector<int> pair_offset;
    std::vector<int> pair_state;
    std::vector<int> pair_action;
    int total_pairs = 0;

    void finalize();  // build pair index and validate kernels/normalization

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_actions(int x) const { return static_cast<int>(actions[x].size()); }
    int pair_index(int x, int a) const { return pair_offset[x] + a; }
    bool feasible(int h, int x, int a) const {
        return stage_mask.empty() || stage_mask[h][pair_index(x, a)] != 0;
    }
    const MdpAction& action(int x, int a) const { return actions[x][a]; }
    int sample_initial(Rng& rng) const;
    int sample_successor(int x, int a, Rng& rng) const;

    // same dynamics re-rooted at `x0` with `steps` stages; re-applies the
    // terminal reachability filter when a terminal set is present
    FiniteMdp remaining(int x0, int steps) const;
};

// Stage-indexed joint distribution over state-action pairs. Normalized
// jointly: sum over (h, x, a) is one, so each stage carries mass 1/H.
struct Visitation {
    Eigen::MatrixXd d;  // H x P

    Eigen::VectorXd aggregated() const { return d.colwise().sum().transpose(); }
};

struct NonstationaryPolicy {
    Eigen::MatrixXd pi;  // H x P, rows normalized per state over feasible actions
};

struct MixturePolicy {
    std::vector<std::pair<double, NonstationaryPolicy>> components;

    // inverse-CDF component lookup for u in [0,1)
    int component_at(double u) const;
};

struct TrajectoryStep {
    int state = 0;
    int action = 0;  // local action index within the state's action list
    double y = 0.0;
    bool has_y = false;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    int episode = 0;
};

struct DpResult {
    NonstationaryPolicy policy;
    Visitation visitation;
    double value = 0.0;  // expected per-trajectory total reward
};

// Exact backward induction for a linear stage reward r_h(x, a), followed by
// forward propagation of the induced visitation. Ties broken toward the
// lowest action index. Throws if a positive-mass initial state has no
// feasible continuation, naming the state and stage.
DpResult solve_dp(const FiniteMdp& mdp, const Eigen::MatrixXd& stage_reward);
DpResult solve_dp(const FiniteMdp& mdp, const Eigen::VectorXd& reward);  // stage-independent

Visitation visitation_of_policy(const FiniteMdp& mdp, const NonstationaryPolicy& policy);
Visitation visitation_of_mixture(const FiniteMdp& mdp, const MixturePolicy& mixture);

NonstationaryPolicy marginalize(const FiniteMdp& mdp, const Visitation& vis);

Trajectory rollout(const FiniteMdp& mdp, const NonstationaryPolicy& policy, Rng& rng, int steps);
Trajectory rollout(const FiniteMdp& mdp, const MixturePolicy& mixture, Rng& rng, int steps);

// Stage-indexed pruning of every (x, a) from which the terminal set cannot
// be reached within the remaining steps (backward breadth-first sets).
// Throws if the initial law has mass outside the H-step reachable set.
FiniteMdp reachability_filter(const FiniteMdp& mdp, const std::vector<int>& terminal);

// Uniform mass over all visited state-action atoms (eq. empirical visitation).
struct EmpiricalVisitation {
    std::vector<double> counts;
    long total = 0;

    explicit EmpiricalVisitation(int num_pairs) : counts(num_pairs, 0.0) {}
    void add(int pair) {
        counts[static_cast<size_t>(pair)] += 1.0;
        ++total;
    }
    Eigen::VectorXd aggregated() const;
};

// Maximum violation over nonnegativity, joint normalization, the stage-0
// marginal and flow conservation.
double polytope_violation(const FiniteMdp& mdp, const Visitation& vis);

}  // namespace tcbo

#endif
