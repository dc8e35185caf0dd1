#ifndef TCBO_PLANNER_HPP
#define TCBO_PLANNER_HPP

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tcbo/continuous.hpp"
#include "tcbo/environments.hpp"
#include "tcbo/mdp.hpp"
#include "tcbo/objective.hpp"
#include "tcbo/surrogate.hpp"

namespace tcbo {

enum class Feedback { episodic, instant, asynchronous };
enum class Algorithm { mdp_bo, greedy_ucb, mdp_ei };

struct FwConfig {
    enum class StepRule { harmonic, fixed };
    int components = 1;
    StepRule rule = StepRule::harmonic;
    double fixed_step = 0.5;
    double tolerance = 1e-9;  // stop when the utility decrease falls below this
};

// Objective handed to the Frank-Wolfe loop: utility value and gradient on
// stage-aggregated visitations of the planning MDP.
struct FwObjective {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct FwResult {
    MixturePolicy mixture;
    Visitation mixture_visitation;
    double utility = 0.0;
    std::vector<double> trace;  // utility after each accepted iterate
};

// Conditional-gradient minimization over the visitation polytope. Each
// linearization is an exact DP solve with reward -grad; steps follow the
// configured rule with halving backtracking so the utility trace never
// increases beyond roundoff.
FwResult fw_plan(const FiniteMdp& mdp, const FwObjective& objective, const FwConfig& cfg);

struct StepRecord {
    int t = 0;
    int h = 0;
    std::string state;
    std::string action;
    Eigen::VectorXd state_coords;
    Eigen::VectorXd action_coords;
    bool observed = false;  // released to the surrogate before campaign end
    double y = 0.0;
    int z_size = 0;
    double utility = 0.0;
    double solve_ms = 0.0;
    double regret = 0.0;
    bool identified = false;
};

struct CampaignConfig {
    Algorithm algorithm = Algorithm::mdp_bo;
    Feedback feedback = Feedback::episodic;
    int delay = 25;  // asynchronous feedback
    int episodes = 1;
    int horizon = 0;  // 0 = MDP / benchmark horizon
    Allocation allocation = Allocation::xy;
    MaximizerMethod zmethod = MaximizerMethod::credible;
    int zsize = 50;
    double beta = 2.0;
    FwConfig fw;
    std::uint64_t seed = 0;
    std::optional<NoiseModel> model_noise;  // algorithm-side noise; env noise if unset
    bool validate = true;
    double validate_tol = 1e-9;
    std::function<void(const StepRecord&)> record_sink;  // streaming log, survives aborts
};

struct CampaignResult {
    std::vector<StepRecord> records;
    std::vector<Trajectory> trajectories;
    int recommendation_state = -1;
    Eigen::VectorXd recommendation;
    double final_regret = 0.0;
    bool identified = false;
    double max_polytope_violation = 0.0;
};

// Algorithm-1 campaign on a finite MDP with receding-horizon replanning.
// Exposed as a class so individual planning decisions are testable.
class DiscreteCampaign {
public:
    DiscreteCampaign(DiscreteTableEnvironment& env, const FiniteMdp& mdp, const Kernel& kernel,
                     const CampaignConfig& cfg);

    struct PlanOutcome {
        int action = -1;
        double utility = 0.0;
        MixturePolicy mixture;  // mdp-bo only
    };

    // one planning decision at the current (t, h, state); no side effects
    // beyond rng draws for stochastic maximizer sets
    PlanOutcome plan_step();
    CampaignResult run();

    const Surrogate& surrogate() const { return *surrogate_; }
    const MaximizerSet& maximizer_set() const { return zset_; }
    const EmpiricalVisitation& empirical() const { return empirical_; }
    int state() const { return state_; }
    int episode() const { return t_; }
    int step() const { return h_; }

private:
    void refresh_maximizers();
    void apply_feedback(const std::vector<std::pair<int, Observation>>& batch);
    void release_due();
    int recommend() const;
    PlanOutcome plan_mdp_bo();
    PlanOutcome plan_greedy_ucb();
    PlanOutcome plan_mdp_ei();
    void begin_episode();
    void advance(const PlanOutcome& plan, double solve_ms, std::vector<StepRecord>& records);

    DiscreteTableEnvironment* env_;
    const FiniteMdp* mdp_;
    CampaignConfig cfg_;
    int horizon_;
    NoiseModel model_noise_;
    Rng rng_;
    std::unique_ptr<Surrogate> surrogate_;
    Eigen::MatrixXd Phi_states_;
    Eigen::VectorXd pair_noise_;
    Eigen::MatrixXd target_coords_;  // expected successor embedding per pair
    MaximizerSet zset_;
    EmpiricalVisitation empirical_;
    std::vector<int> observed_states_;
    std::vector<std::pair<int, Observation>> episode_batch_;
    std::deque<std::pair<long, std::pair<int, Observation>>> pending_;  // (release step, obs)
    int t_ = 0, h_ = 0, state_ = 0;
    long global_step_ = 0;
    double mix_draw_ = 0.0;
    double max_violation_ = 0.0;
    std::vector<Trajectory> trajectories_;
};

CampaignResult run_campaign(DiscreteTableEnvironment& env, const FiniteMdp& mdp,
                            const Kernel& kernel, const CampaignConfig& cfg);

// Continuous campaign under additive linear dynamics; planning follows the
// two-target shortest-path heuristic on the linearized utility.
CampaignResult run_campaign(SyntheticEnvironment& env, const LinearSystem& system,
                            const Kernel& kernel, int feature_count, const CampaignConfig& cfg);

// Gaussian expected improvement, EI = (mu - best) Phi(u) + sd phi(u)
double expected_improvement(double mu, double sd, double best);

}  // namespace tcbo

#endif
