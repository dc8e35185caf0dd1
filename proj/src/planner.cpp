#include "tcbo/planner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tcbo {

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double expected_improvement(double mu, double sd, double best) {
    if (sd <= 0.0) return std::max(mu - best, 0.0);
    const double u = (mu - best) / sd;
    const double cdf = 0.5 * std::erfc(-u / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    return (mu - best) * cdf + sd * pdf;
}

FwResult fw_plan(const FiniteMdp& mdp, const FwObjective& objective, const FwConfig& cfg) {
    if (cfg.components < 1) throw std::invalid_argument("fw needs at least one component");

    // linearize at the uniform-policy visitation for the first component
    Visitation zero;
    zero.d = Eigen::MatrixXd::Zero(mdp.horizon, mdp.total_pairs);
    const NonstationaryPolicy uniform = marginalize(mdp, zero);
    const Visitation d_start = visitation_of_policy(mdp, uniform);

    Eigen::VectorXd grad = objective.gradient(d_start.aggregated());
    DpResult comp = solve_dp(mdp, Eigen::VectorXd(-grad));

    FwResult res;
    res.mixture.components.emplace_back(1.0, comp.policy);
    Visitation d_cur = comp.visitation;
    double u_cur = objective.value(d_cur.aggregated());
    res.trace.push_back(u_cur);

    for (int n = 1; n < cfg.components; ++n) {
        grad = objective.gradient(d_cur.aggregated());
        comp = solve_dp(mdp, Eigen::VectorXd(-grad));

        double gamma = cfg.rule == FwConfig::StepRule::harmonic ? 2.0 / (n + 2) : cfg.fixed_step;
        bool accepted = false;
        Eigen::MatrixXd d_cand;
        double u_cand = 0.0;
        // halving backtrack keeps the utility trace non-increasing
        while (gamma > 1e-14) {
            d_cand = (1.0 - gamma) * d_cur.d + gamma * comp.visitation.d;
            u_cand = objective.value(d_cand.colwise().sum().transpose());
            if (u_cand <= u_cur + 1e-12) {
                accepted = true;
                break;
            }
            gamma *= 0.5;
        }
        if (!accepted) break;

        for (auto& c : res.mixture.components) c.first *= (1.0 - gamma);
        res.mixture.components.emplace_back(gamma, comp.policy);
        d_cur.d = d_cand;
        const double decrease = u_cur - u_cand;
        u_cur = u_cand;
        res.trace.push_back(u_cur);
        if (decrease < cfg.tolerance) break;
    }

    double wsum = 0.0;
    for (const auto& c : res.mixture.components) wsum += c.first;
    for (auto& c : res.mixture.components) c.first /= wsum;

    res.mixture_visitation = d_cur;
    res.utility = u_cur;
    return res;
}

// --- discrete campaign ----------------------------------------------------------

DiscreteCampaign::DiscreteCampaign(DiscreteTableEnvironment& env, const FiniteMdp& mdp,
                                   const Kernel& kernel, const CampaignConfig& cfg)
    : env_(&env), mdp_(&mdp), cfg_(cfg),
      horizon_(cfg.horizon > 0 ? cfg.horizon : mdp.horizon),
      model_noise_(cfg.model_noise.value_or(env.noise())),
      rng_(cfg.seed),
      empirical_(mdp.total_pairs) {
    const FeatureMap features = build_nystrom(kernel, mdp.embeddings);
    surrogate_ = std::make_unique<Surrogate>(features);
    Phi_states_ = features.eval(mdp.embeddings);

    pair_noise_.resize(mdp.total_pairs);
    target_coords_.resize(mdp.total_pairs, mdp.embeddings.cols());
    for (int p = 0; p < mdp.total_pairs; ++p) {
        const int x = mdp.pair_state[p];
        Eigen::VectorXd target = Eigen::VectorXd::Zero(mdp.embeddings.cols());
        for (const auto& [nx, pr] : mdp.action(x, mdp.pair_action[p]).next)
            target += pr * mdp.embeddings.row(nx).transpose();
        target_coords_.row(p) = target.transpose();
        pair_noise_(p) = model_noise_.variance(mdp.embeddings.row(x).transpose(), target);
    }
    refresh_maximizers();
}

void DiscreteCampaign::refresh_maximizers() {
    switch (cfg_.zmethod) {
        case MaximizerMethod::credible:
            zset_ = credible_set(*surrogate_, Phi_states_, cfg_.beta);
            break;
        case MaximizerMethod::thompson:
            zset_ = thompson_set(*surrogate_, Phi_states_, cfg_.zsize, rng_);
            break;
        case MaximizerMethod::ucb_batch:
            zset_ = ucb_batch_set(*surrogate_, Phi_states_, cfg_.zsize);
            break;
    }
}

int DiscreteCampaign::recommend() const {
    Eigen::Index best;
    surrogate_->mean_many(Phi_states_).maxCoeff(&best);
    return static_cast<int>(best);
}

DiscreteCampaign::PlanOutcome DiscreteCampaign::plan_step() {
    switch (cfg_.algorithm) {
        case Algorithm::mdp_bo: return plan_mdp_bo();
        case Algorithm::greedy_ucb: return plan_greedy_ucb();
        case Algorithm::mdp_ei: return plan_mdp_ei();
    }
    throw std::logic_error("unknown algorithm");
}

DiscreteCampaign::PlanOutcome DiscreteCampaign::plan_mdp_bo() {
    const int steps_left = horizon_ - h_;
    const FiniteMdp sub = mdp_->remaining(state_, steps_left);

    UtilityConfig ucfg;
    ucfg.allocation = cfg_.allocation;
    ucfg.budget_T = cfg_.episodes;
    ucfg.horizon_H = horizon_;
    VisitationUtility util(sub, Phi_states_, pair_noise_, ucfg);
    util.set_maximizer_set(zset_);

    const Eigen::VectorXd dhat = empirical_.aggregated();
    const double chain = static_cast<double>(horizon_ - h_) / ((1.0 + t_) * horizon_);
    FwObjective obj;
    obj.value = [&](const Eigen::VectorXd& d) {
        return util.value(adaptive_blend(d, dhat, t_, h_, horizon_)).value;
    };
    obj.gradient = [&](const Eigen::VectorXd& d) {
        const Eigen::VectorXd blend = adaptive_blend(d, dhat, t_, h_, horizon_);
        const UtilityEval ev = util.value(blend);
        return Eigen::VectorXd(chain * util.gradient(blend, ev.zi, ev.zj));
    };

    FwResult fw = fw_plan(sub, obj, cfg_.fw);
    if (cfg_.validate) {
        max_violation_ = std::max(max_violation_, polytope_violation(sub, fw.mixture_visitation));
        for (const auto& [alpha, pol] : fw.mixture.components) {
            (void)alpha;
            max_violation_ =
                std::max(max_violation_, polytope_violation(sub, visitation_of_policy(sub, pol)));
        }
    }

    const int comp = fw.mixture.component_at(mix_draw_);
    const NonstationaryPolicy& pol = fw.mixture.components[static_cast<size_t>(comp)].second;
    PlanOutcome out;
    out.utility = fw.utility;
    out.mixture = std::move(fw.mixture);
    for (int a = 0; a < mdp_->num_actions(state_); ++a)
        if (pol.pi(0, mdp_->pair_index(state_, a)) > 0.5) {
            out.action = a;
            break;
        }
    if (out.action < 0) {
        double best = -1.0;
        for (int a = 0; a < mdp_->num_actions(state_); ++a) {
            const double w = pol.pi(0, mdp_->pair_index(state_, a));
            if (w > best) {
                best = w;
                out.action = a;
            }
        }
    }
    if (out.action < 0) throw std::runtime_error("planner produced no action");
    return out;
}

DiscreteCampaign::PlanOutcome DiscreteCampaign::plan_greedy_ucb() {
    const FiniteMdp sub = mdp_->remaining(state_, horizon_ - h_);
    const Eigen::VectorXd mu = surrogate_->mean_many(Phi_states_);
    const Eigen::VectorXd sd = surrogate_->variance_many(Phi_states_).cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd ucb = mu + cfg_.beta * sd;

    PlanOutcome out;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp_->num_actions(state_); ++a) {
        if (!sub.feasible(0, state_, a)) continue;
        double score = 0.0;
        for (const auto& [nx, pr] : mdp_->action(state_, a).next) score += pr * ucb(nx);
        if (score > best) {
            best = score;
            out.action = a;
        }
    }
    if (out.action < 0) throw std::runtime_error("no feasible action for greedy policy");
    out.utility = best;
    return out;
}

DiscreteCampaign::PlanOutcome DiscreteCampaign::plan_mdp_ei() {
    const FiniteMdp sub = mdp_->remaining(state_, horizon_ - h_);
    const Eigen::VectorXd mu = surrogate_->mean_many(Phi_states_);
    const Eigen::VectorXd sd = surrogate_->variance_many(Phi_states_).cwiseMax(0.0).cwiseSqrt();

    double best_observed = 0.0;
    bool any = false;
    for (int s : observed_states_) {
        if (!any || mu(s) > best_observed) best_observed = mu(s);
        any = true;
    }

    Eigen::VectorXd reward(mdp_->total_pairs);
    for (int p = 0; p < mdp_->total_pairs; ++p) {
        const int x = mdp_->pair_state[p];
        reward(p) = expected_improvement(mu(x), sd(x), best_observed);
    }
    const DpResult dp = solve_dp(sub, reward);
    if (cfg_.validate)
        max_violation_ = std::max(max_violation_, polytope_violation(sub, dp.visitation));

    PlanOutcome out;
    out.utility = dp.value;
    for (int a = 0; a < mdp_->num_actions(state_); ++a)
        if (dp.policy.pi(0, mdp_->pair_index(state_, a)) > 0.5) {
            out.action = a;
            break;
        }
    if (out.action < 0) throw std::runtime_error("planner produced no action");
    return out;
}

void DiscreteCampaign::apply_feedback(const std::vector<std::pair<int, Observation>>& batch) {
    if (batch.empty()) return;
    std::vector<Observation> obs;
    obs.reserve(batch.size());
    for (const auto& [pair, o] : batch) {
        observed_states_.push_back(mdp_->pair_state[pair]);
        obs.push_back(o);
    }
    *surrogate_ = surrogate_->updated(obs);
    refresh_maximizers();
}

void DiscreteCampaign::release_due() {
    std::vector<std::pair<int, Observation>> due;
    while (!pending_.empty() && pending_.front().first <= global_step_) {
        due.push_back(std::move(pending_.front().second));
        pending_.pop_front();
    }
    apply_feedback(due);
}

void DiscreteCampaign::begin_episode() {
    state_ = mdp_->sample_initial(rng_);
    mix_draw_ = rng_.uniform();
    episode_batch_.clear();
    trajectories_.push_back(Trajectory{{}, t_});
}

void DiscreteCampaign::advance(const PlanOutcome& plan, double solve_ms,
                               std::vector<StepRecord>& records) {
    const int pair = mdp_->pair_index(state_, plan.action);
    const Eigen::VectorXd x = mdp_->embeddings.row(state_).transpose();
    const Eigen::VectorXd target = target_coords_.row(pair).transpose();

    const double y = env_->query(x, target, rng_);
    trajectories_.back().steps.push_back({state_, plan.action, y, true});
    empirical_.add(pair);

    StepRecord rec;
    rec.t = t_;
    rec.h = h_;
    rec.state = mdp_->state_names[static_cast<size_t>(state_)];
    rec.action = mdp_->action(state_, plan.action).name;
    rec.state_coords = x;
    rec.action_coords = target;
    rec.y = y;
    rec.z_size = zset_.size();
    rec.utility = plan.utility;
    rec.solve_ms = solve_ms;

    Observation obs{x, target, y, model_noise_.variance(x, target)};
    const long total_steps = static_cast<long>(cfg_.episodes) * horizon_;
    switch (cfg_.feedback) {
        case Feedback::instant:
            apply_feedback({{pair, obs}});
            rec.observed = true;
            break;
        case Feedback::episodic:
            episode_batch_.push_back({pair, obs});
            rec.observed = true;  // released at episode end, before the run finishes
            if (h_ == horizon_ - 1) {
                apply_feedback(episode_batch_);
                episode_batch_.clear();
            }
            break;
        case Feedback::asynchronous: {
            const long release = global_step_ + cfg_.delay + 1;
            pending_.emplace_back(release, std::make_pair(pair, obs));
            rec.observed = release <= total_steps - 1;  // due after the end: never delivered
            break;
        }
    }

    const int next = mdp_->sample_successor(state_, plan.action, rng_);
    if (cfg_.validate) {
        bool legal = false;
        for (const auto& [nx, pr] : mdp_->action(state_, plan.action).next)
            if (nx == next && pr > 0.0) legal = true;
        if (!legal) throw std::runtime_error("executed transition has zero probability");
    }
    state_ = next;

    const int rec_state = recommend();
    rec.regret = env_->optimum_value() - env_->value_at(rec_state);
    rec.identified = rec_state == env_->optimum_index();
    if (cfg_.record_sink) cfg_.record_sink(rec);
    records.push_back(std::move(rec));
}

CampaignResult DiscreteCampaign::run() {
    CampaignResult result;
    for (t_ = 0; t_ < cfg_.episodes; ++t_) {
        begin_episode();
        for (h_ = 0; h_ < horizon_; ++h_) {
            if (cfg_.feedback == Feedback::asynchronous) release_due();
            const auto t0 = std::chrono::steady_clock::now();
            const PlanOutcome plan = plan_step();
            advance(plan, elapsed_ms(t0), result.records);
            ++global_step_;
        }
    }

    result.trajectories = trajectories_;
    result.recommendation_state = recommend();
    result.recommendation = mdp_->embeddings.row(result.recommendation_state).transpose();
    result.final_regret = env_->optimum_value() - env_->value_at(result.recommendation_state);
    result.identified = result.recommendation_state == env_->optimum_index();
    result.max_polytope_violation = max_violation_;
    return result;
}

CampaignResult run_campaign(DiscreteTableEnvironment& env, const FiniteMdp& mdp,
                            const Kernel& kernel, const CampaignConfig& cfg) {
    DiscreteCampaign campaign(env, mdp, kernel, cfg);
    return campaign.run();
}

// --- continuous campaign ----------------------------------------------------------

CampaignResult run_campaign(SyntheticEnvironment& env, const LinearSystem& system,
                            const Kernel& kernel, int feature_count, const CampaignConfig& cfg) {
    const int horizon = cfg.horizon > 0 ? cfg.horizon : 100;
    const int total = cfg.episodes * horizon;
    const int d = system.dim;
    Rng rng(cfg.seed);
    const NoiseModel model_noise = cfg.model_noise.value_or(env.noise());

    // fixed landmark sample so replicates share one feature space
    Rng landmark_rng(0x5eed1a2bUL);
    Eigen::MatrixXd landmarks(feature_count, d);
    for (int i = 0; i < feature_count; ++i)
        for (int j = 0; j < d; ++j)
            landmarks(i, j) = system.lo(j) + (system.hi(j) - system.lo(j)) * landmark_rng.uniform();
    const FeatureMap features = build_nystrom(kernel, landmarks);
    Surrogate surrogate(features);
    const BoxMesh mesh(features, system.lo, system.hi);

    UtilityConfig ucfg;
    ucfg.allocation = cfg.allocation;
    ucfg.budget_T = cfg.episodes;
    ucfg.horizon_H = horizon;

    Eigen::VectorXd x = 0.5 * (system.lo + system.hi);
    std::vector<Eigen::VectorXd> visited;
    Eigen::MatrixXd plan_states;  // remaining planned path from the previous step
    std::deque<std::pair<long, Observation>> pending;
    std::vector<Observation> episode_batch;
    CampaignResult result;
    double utility_value = 0.0;

    for (long n = 0; n < total; ++n) {
        const int t = static_cast<int>(n / horizon);
        const int h = static_cast<int>(n % horizon);

        if (cfg.feedback == Feedback::asynchronous) {
            std::vector<Observation> due;
            while (!pending.empty() && pending.front().first <= n) {
                due.push_back(std::move(pending.front().second));
                pending.pop_front();
            }
            if (!due.empty()) surrogate = surrogate.updated(due);
        }

        const auto t0 = std::chrono::steady_clock::now();

        MaximizerSet z;
        if (cfg.zmethod == MaximizerMethod::thompson)
            z = thompson_set_box(surrogate, mesh, cfg.zsize, rng);
        else
            z = ucb_batch_set_box(surrogate, mesh, cfg.zsize);

        // blended design: executed atoms plus the remaining planned path, all
        // carrying equal mass (the continuous form of the receding-horizon blend)
        const long remaining = total - n;
        Eigen::MatrixXd atoms(visited.size() + remaining, d);
        for (size_t i = 0; i < visited.size(); ++i) atoms.row(static_cast<Eigen::Index>(i)) = visited[i].transpose();
        for (long i = 0; i < remaining; ++i) {
            if (plan_states.rows() > i)
                atoms.row(static_cast<Eigen::Index>(visited.size()) + i) = plan_states.row(i);
            else
                atoms.row(static_cast<Eigen::Index>(visited.size()) + i) = x.transpose();
        }

        const Eigen::MatrixXd Phi_atoms = features.eval(atoms);
        Eigen::MatrixXd V = Eigen::MatrixXd::Identity(features.rank(), features.rank()) * ucfg.regularizer();
        Eigen::VectorXd atom_weight(atoms.rows());
        for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
            const Eigen::VectorXd at = atoms.row(i).transpose();
            atom_weight(i) = (1.0 / total) / model_noise.variance(at, at);
        }
        V.noalias() += Phi_atoms * atom_weight.asDiagonal() * Phi_atoms.transpose();
        const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (V + V.transpose()));
        if (llt.info() != Eigen::Success) throw std::runtime_error("utility information matrix not positive definite");

        const Eigen::MatrixXd PhiZ = features.eval(z.points);
        const Eigen::MatrixXd G = PhiZ.transpose() * llt.solve(PhiZ);
        int zi = 0, zj = -1;
        if (cfg.allocation == Allocation::xy && z.size() >= 2) {
            double best = -1.0;
            for (int i = 0; i < z.size(); ++i)
                for (int j = i + 1; j < z.size(); ++j) {
                    const double v = G(i, i) + G(j, j) - 2.0 * G(i, j);
                    if (v > best + 1e-12) {
                        best = v;
                        zi = i;
                        zj = j;
                    }
                }
            utility_value = best;
        } else {
            double best = -1.0;
            for (int i = 0; i < z.size(); ++i)
                if (G(i, i) > best + 1e-12) {
                    best = G(i, i);
                    zi = i;
                }
            utility_value = best;
        }

        Eigen::VectorXd delta = PhiZ.col(zi);
        if (zj >= 0) delta -= PhiZ.col(zj);
        const Eigen::VectorXd w = llt.solve(delta);
        const double sigma2 = model_noise.s;
        auto grad_field = [&](const Eigen::VectorXd& p) {
            const double c = features(p).dot(w);
            return -c * c / sigma2;
        };

        const Eigen::VectorXd target_z = z.points.row(zi).transpose();
        const Eigen::VectorXd target_zp = zj >= 0 ? Eigen::VectorXd(z.points.row(zj).transpose()) : target_z;
        const ActionPlan plan = mpc_subproblem(grad_field, system, x, target_z, target_zp,
                                               static_cast<int>(remaining));
        const double ms = elapsed_ms(t0);

        const Eigen::VectorXd action = plan.actions.row(0).transpose();
        const Eigen::VectorXd x_next = plan.states.row(0).transpose();
        if (cfg.validate) {
            if (action.lpNorm<Eigen::Infinity>() > system.a_max + 1e-12)
                throw std::runtime_error("planned action violates the step bound");
            if (((x_next - system.lo).minCoeff() < -1e-12) || ((system.hi - x_next).minCoeff() < -1e-12))
                throw std::runtime_error("planned state leaves the box");
        }

        const double y = env.query(x, x_next, rng);
        visited.push_back(x);

        StepRecord rec;
        rec.t = t;
        rec.h = h;
        rec.state_coords = x;
        rec.action_coords = action;
        rec.y = y;
        rec.z_size = z.size();
        rec.utility = utility_value;
        rec.solve_ms = ms;

        Observation obs{x, x_next, y, model_noise.variance(x, x_next)};
        switch (cfg.feedback) {
            case Feedback::instant:
                surrogate = surrogate.updated({obs});
                rec.observed = true;
                break;
            case Feedback::episodic:
                episode_batch.push_back(obs);
                rec.observed = true;
                if (h == horizon - 1) {
                    surrogate = surrogate.updated(episode_batch);
                    episode_batch.clear();
                }
                break;
            case Feedback::asynchronous:
                pending.emplace_back(n + cfg.delay + 1, obs);
                rec.observed = n + cfg.delay + 1 <= total - 1;
                break;
        }

        x = x_next;
        plan_states = plan.states.bottomRows(plan.states.rows() - 1);

        const Eigen::VectorXd rec_point = mean_argmax(surrogate, mesh);
        rec.regret = env.optimum_value() - env.truth(rec_point);
        rec.identified = (rec_point - env.optimum_location()).lpNorm<Eigen::Infinity>() <= 0.01;
        if (cfg.record_sink) cfg.record_sink(rec);
        result.records.push_back(std::move(rec));
    }

    result.recommendation = mean_argmax(surrogate, mesh);
    result.final_regret = env.optimum_value() - env.truth(result.recommendation);
    result.identified =
        (result.recommendation - env.optimum_location()).lpNorm<Eigen::Infinity>() <= 0.01;
    return result;
}

}  // namespace tcbo
