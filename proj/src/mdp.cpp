#include "tcbo/mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcbo {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void FiniteMdp::finalize() {
    const int X = num_states();
    if (X == 0) throw std::invalid_argument("mdp has no states");
    if (horizon < 1) throw std::invalid_argument("mdp horizon must be >= 1");
    if (initial_law.size() != X) throw std::invalid_argument("initial law size mismatch");
    if (std::abs(initial_law.sum() - 1.0) > 1e-12 || initial_law.minCoeff() < 0.0)
        throw std::invalid_argument("initial law is not a distribution");

    pair_offset.assign(X, 0);
    pair_state.clear();
    pair_action.clear();
    total_pairs = 0;
    for (int x = 0; x < X; ++x) {
        pair_offset[x] = total_pairs;
        for (int a = 0; a < num_actions(x); ++a) {
            double p = 0.0;
            for (const auto& [nx, pr] : actions[x][a].next) {
                if (nx < 0 || nx >= X) throw std::invalid_argument("transition to unknown state");
                if (pr < 0.0) throw std::invalid_argument("negative transition probability");
                p += pr;
            }
            if (std::abs(p - 1.0) > 1e-12)
                throw std::invalid_argument("transition kernel row does not sum to one at state " +
                                            state_names[x] + " action " + actions[x][a].name);
            pair_state.push_back(x);
            pair_action.push_back(a);
            ++total_pairs;
        }
    }
    for (int t : terminal_states)
        if (t < 0 || t >= X) throw std::invalid_argument("terminal state out of range");
}

int FiniteMdp::sample_initial(Rng& rng) const {
    double u = rng.uniform();
    for (int x = 0; x < num_states(); ++x) {
        u -= initial_law(x);
        if (u < 0.0) return x;
    }
    return num_states() - 1;
}

int FiniteMdp::sample_successor(int x, int a, Rng& rng) const {
    const auto& next = actions[x][a].next;
    if (next.size() == 1) return next[0].first;
    double u = rng.uniform();
    for (const auto& [nx, pr] : next) {
        u -= pr;
        if (u < 0.0) return nx;
    }
    return next.back().first;
}

FiniteMdp FiniteMdp::remaining(int x0, int steps) const {
    FiniteMdp out;
    out.state_names = state_names;
    out.embeddings = embeddings;
    out.actions = actions;
    out.horizon = steps;
    out.initial_law = Eigen::VectorXd::Zero(num_states());
    out.initial_law(x0) = 1.0;
    out.terminal_states = terminal_states;
    out.finalize();
    if (!out.terminal_states.empty()) out = reachability_filter(out, out.terminal_states);
    return out;
}

int MixturePolicy::component_at(double u) const {
    double acc = 0.0;
    for (size_t i = 0; i < components.size(); ++i) {
        acc += components[i].first;
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(components.size()) - 1;
}

DpResult solve_dp(const FiniteMdp& mdp, const Eigen::MatrixXd& stage_reward) {
    const int H = mdp.horizon;
    const int X = mdp.num_states();
    const int P = mdp.total_pairs;
    if (stage_reward.rows() != H || stage_reward.cols() != P)
        throw std::invalid_argument("stage reward has wrong shape");

    // backward induction; -inf marks states with no feasible continuation
    Eigen::MatrixXd value(H + 1, X);
    value.row(H).setZero();
    Eigen::MatrixXi best(H, X);
    best.setConstant(-1);
    for (int h = H - 1; h >= 0; --h) {
        for (int x = 0; x < X; ++x) {
            double vbest = kNegInf;
            int abest = -1;
            for (int a = 0; a < mdp.num_actions(x); ++a) {
                if (!mdp.feasible(h, x, a)) continue;
                const double r = stage_reward(h, mdp.pair_index(x, a));
                if (!std::isfinite(r)) throw std::invalid_argument("non-finite stage reward");
                double cont = 0.0;
                bool dead = false;
                for (const auto& [nx, pr] : mdp.action(x, a).next) {
                    if (value(h + 1, nx) == kNegInf) {
                        dead = true;
                        break;
                    }
                    cont += pr * value(h + 1, nx);
                }
                if (dead) continue;
                const double q = r + cont;
                if (q > vbest) {
                    vbest = q;
                    abest = a;
                }
            }
            value(h, x) = vbest;
            best(h, x) = abest;
        }
    }

    // deterministic greedy policy; infeasible states keep an empty row
    NonstationaryPolicy policy;
    policy.pi = Eigen::MatrixXd::Zero(H, P);
    for (int h = 0; h < H; ++h)
        for (int x = 0; x < X; ++x)
            if (best(h, x) >= 0) policy.pi(h, mdp.pair_index(x, best(h, x))) = 1.0;

    // forward propagation
    Visitation vis;
    vis.d = Eigen::MatrixXd::Zero(H, P);
    Eigen::VectorXd rho = mdp.initial_law;
    double expected = 0.0;
    for (int h = 0; h < H; ++h) {
        Eigen::VectorXd rho_next = Eigen::VectorXd::Zero(X);
        for (int x = 0; x < X; ++x) {
            if (rho(x) <= 0.0) continue;
            if (best(h, x) < 0)
                throw std::runtime_error("no feasible action at state " + mdp.state_names[x] +
                                         " stage " + std::to_string(h));
            const int a = best(h, x);
            const int p = mdp.pair_index(x, a);
            vis.d(h, p) += rho(x);
            expected += rho(x) * stage_reward(h, p);
            for (const auto& [nx, pr] : mdp.action(x, a).next) rho_next(nx) += rho(x) * pr;
        }
        rho = rho_next;
    }
    vis.d /= static_cast<double>(H);  // joint normalization

    return DpResult{std::move(policy), std::move(vis), expected};
}

DpResult solve_dp(const FiniteMdp& mdp, const Eigen::VectorXd& reward) {
    if (reward.size() != mdp.total_pairs) throw std::invalid_argument("reward has wrong size");
    Eigen::MatrixXd stage(mdp.horizon, mdp.total_pairs);
    stage.rowwise() = reward.transpose();
    return solve_dp(mdp, stage);
}

Visitation visitation_of_policy(const FiniteMdp& mdp, const NonstationaryPolicy& policy) {
    const int H = mdp.horizon;
    const int X = mdp.num_states();
    Visitation vis;
    vis.d = Eigen::MatrixXd::Zero(H, mdp.total_pairs);
    Eigen::VectorXd rho = mdp.initial_law;
    for (int h = 0; h < H; ++h) {
        Eigen::VectorXd rho_next = Eigen::VectorXd::Zero(X);
        for (int x = 0; x < X; ++x) {
            if (rho(x) <= 0.0) continue;
            for (int a = 0; a < mdp.num_actions(x); ++a) {
                const int p = mdp.pair_index(x, a);
                const double w = rho(x) * policy.pi(h, p);
                if (w <= 0.0) continue;
                vis.d(h, p) += w;
                for (const auto& [nx, pr] : mdp.action(x, a).next) rho_next(nx) += w * pr;
            }
        }
        rho = rho_next;
    }
    vis.d /= static_cast<double>(H);
    return vis;
}

Visitation visitation_of_mixture(const FiniteMdp& mdp, const MixturePolicy& mixture) {
    Visitation out;
    out.d = Eigen::MatrixXd::Zero(mdp.horizon, mdp.total_pairs);
    for (const auto& [alpha, pol] : mixture.components)
        if (alpha > 0.0) out.d += alpha * visitation_of_policy(mdp, pol).d;
    return out;
}

NonstationaryPolicy marginalize(const FiniteMdp& mdp, const Visitation& vis) {
    const int H = mdp.horizon;
    NonstationaryPolicy policy;
    policy.pi = Eigen::MatrixXd::Zero(H, mdp.total_pairs);
    for (int h = 0; h < H; ++h) {
        for (int x = 0; x < mdp.num_states(); ++x) {
            const int n = mdp.num_actions(x);
            double mass = 0.0;
            for (int a = 0; a < n; ++a) mass += vis.d(h, mdp.pair_index(x, a));
            if (mass > 0.0) {
                for (int a = 0; a < n; ++a)
                    policy.pi(h, mdp.pair_index(x, a)) = vis.d(h, mdp.pair_index(x, a)) / mass;
            } else {
                // zero-mass fallback: uniform over stage-feasible actions
                int feas = 0;
                for (int a = 0; a < n; ++a)
                    if (mdp.feasible(h, x, a)) ++feas;
                if (feas > 0) {
                    for (int a = 0; a < n; ++a)
                        if (mdp.feasible(h, x, a)) policy.pi(h, mdp.pair_index(x, a)) = 1.0 / feas;
                } else if (n > 0) {
                    for (int a = 0; a < n; ++a) policy.pi(h, mdp.pair_index(x, a)) = 1.0 / n;
                }
            }
        }
    }
    return policy;
}

Trajectory rollout(const FiniteMdp& mdp, const NonstationaryPolicy& policy, Rng& rng, int steps) {
    if (steps > mdp.horizon) throw std::invalid_argument("rollout longer than horizon");
    Trajectory traj;
    int x = mdp.sample_initial(rng);
    for (int h = 0; h < steps; ++h) {
        double u = rng.uniform();
        int a = -1;
        for (int cand = 0; cand < mdp.num_actions(x); ++cand) {
            u -= policy.pi(h, mdp.pair_index(x, cand));
            if (u < 0.0) {
                a = cand;
                break;
            }
        }
        if (a < 0) {
            for (int cand = mdp.num_actions(x) - 1; cand >= 0; --cand)
                if (policy.pi(h, mdp.pair_index(x, cand)) > 0.0) {
                    a = cand;
                    break;
                }
        }
        if (a < 0) throw std::runtime_error("policy has no support at visited state " + mdp.state_names[x]);
        traj.steps.push_back({x, a, 0.0, false});
        x = mdp.sample_successor(x, a, rng);
    }
    return traj;
}

Trajectory rollout(const FiniteMdp& mdp, const MixturePolicy& mixture, Rng& rng, int steps) {
    const int c = mixture.component_at(rng.uniform());
    return rollout(mdp, mixture.components[static_cast<size_t>(c)].second, rng, steps);
}

FiniteMdp reachability_filter(const FiniteMdp& mdp, const std::vector<int>& terminal) {
    if (terminal.empty()) throw std::invalid_argument("terminal set must be non-empty");
    const int X = mdp.num_states();
    const int H = mdp.horizon;

    // reach[k](x): terminal reachable from x within <= k steps (surely, i.e.
    // through actions whose whole support stays reachable)
    std::vector<std::vector<char>> reach(static_cast<size_t>(H) + 1, std::vector<char>(X, 0));
    for (int t : terminal) reach[0][t] = 1;
    for (int k = 1; k <= H; ++k) {
        for (int x = 0; x < X; ++x) {
            if (reach[k - 1][x]) {
                reach[k][x] = 1;
                continue;
            }
            for (int a = 0; a < mdp.num_actions(x) && !reach[k][x]; ++a) {
                bool all_in = true;
                for (const auto& [nx, pr] : mdp.action(x, a).next) {
                    (void)pr;
                    if (!reach[k - 1][nx]) {
                        all_in = false;
                        break;
                    }
                }
                if (all_in && !mdp.action(x, a).next.empty()) reach[k][x] = 1;
            }
        }
    }

    for (int x = 0; x < X; ++x)
        if (mdp.initial_law(x) > 0.0 && !reach[H][x])
            throw std::runtime_error("terminal set unreachable from initial state " +
                                     mdp.state_names[x] + " within horizon " + std::to_string(H));

    FiniteMdp out = mdp;
    out.terminal_states = terminal;
    out.stage_mask.assign(H, std::vector<char>(mdp.total_pairs, 0));
    for (int h = 0; h < H; ++h) {
        const int left = H - h;  // steps remaining including this one
        for (int x = 0; x < X; ++x) {
            if (!reach[left][x]) continue;
            for (int a = 0; a < mdp.num_actions(x); ++a) {
                if (!mdp.feasible(h, x, a)) continue;
                bool ok = true;
                for (const auto& [nx, pr] : mdp.action(x, a).next) {
                    (void)pr;
                    if (!reach[left - 1][nx]) {
                        ok = false;
                        break;
                    }
                }
                if (ok) out.stage_mask[h][mdp.pair_index(x, a)] = 1;
            }
        }
    }
    return out;
}

Eigen::VectorXd EmpiricalVisitation::aggregated() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(counts.size()));
    if (total == 0) return out;
    for (size_t p = 0; p < counts.size(); ++p)
        out(static_cast<Eigen::Index>(p)) = counts[p] / static_cast<double>(total);
    return out;
}

double polytope_violation(const FiniteMdp& mdp, const Visitation& vis) {
    const int H = mdp.horizon;
    const int X = mdp.num_states();
    double worst = 0.0;
    worst = std::max(worst, -vis.d.minCoeff());
    worst = std::max(worst, std::abs(vis.d.sum() - 1.0));

    // stage-0 marginal matches the initial law (per-stage mass is 1/H)
    for (int x = 0; x < X; ++x) {
        double m = 0.0;
        for (int a = 0; a < mdp.num_actions(x); ++a) m += vis.d(0, mdp.pair_index(x, a));
        worst = std::max(worst, std::abs(m - mdp.initial_law(x) / H));
    }

    // flow conservation between consecutive stages
    for (int h = 1; h < H; ++h) {
        Eigen::VectorXd inflow = Eigen::VectorXd::Zero(X);
        for (int p = 0; p < mdp.total_pairs; ++p) {
            const double w = vis.d(h - 1, p);
            if (w == 0.0) continue;
            for (const auto& [nx, pr] : mdp.action(mdp.pair_state[p], mdp.pair_action[p]).next)
                inflow(nx) += w * pr;
        }
        for (int x = 0; x < X; ++x) {
            double m = 0.0;
            for (int a = 0; a < mdp.num_actions(x); ++a) m += vis.d(h, mdp.pair_index(x, a));
            worst = std::max(worst, std::abs(m - inflow(x)));
        }
    }
    return worst;
}

}  // namespace tcbo
