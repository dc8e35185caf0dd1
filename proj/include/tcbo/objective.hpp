#ifndef TCBO_OBJECTIVE_HPP
#define TCBO_OBJECTIVE_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tcbo/mdp.hpp"
#include "tcbo/surrogate.hpp"

namespace tcbo {

enum class Allocation { xy, g };
enum class MaximizerMethod { credible, thompson, ucb_batch };

// Candidate maximizers. Discrete sets carry state indices; continuous sets
// carry coordinates (one candidate per row).
struct MaximizerSet {
    MaximizerMethod tag = MaximizerMethod::credible;
    std::vector<int> indices;
    Eigen::MatrixXd points;
    std::vector<double> beta_schedule;  // ucb_batch only

    bool discrete() const { return points.size() == 0; }
    int size() const {
        return discrete() ? static_cast<int>(indices.size()) : static_cast<int>(points.rows());
    }
};

// --- maximizer set construction, discrete domains ---------------------------

// all states whose UCB reaches the best LCB; always contains argmax mu
MaximizerSet credible_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, double beta);
// K argmaxes of independent posterior function samples (duplicates retained)
MaximizerSet thompson_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, int K, Rng& rng);
// one argmax of mu + beta_i sigma per beta_i in linspace(0, 2.5, K)
MaximizerSet ucb_batch_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, int K);

// --- maximizer set construction, box domains ---------------------------------

// deterministic gradient-free maximization: seeded quasi-uniform mesh
// followed by compass-search refinement
Eigen::VectorXd argmax_on_box(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                              int mesh_points = 4096, int refine_iters = 50);

// Mesh with cached feature columns; the feature map is fixed over a campaign
// so the mesh features are computed once and shared across planning steps.
class BoxMesh {
public:
    BoxMesh(const FeatureMap& features, Eigen::VectorXd lo, Eigen::VectorXd hi,
            int mesh_points = 4096);

    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::MatrixXd& phi() const { return Phi_; }
    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }
    const FeatureMap& features() const { return features_; }

private:
    FeatureMap features_;
    Eigen::VectorXd lo_, hi_;
    Eigen::MatrixXd points_;  // N x d
    Eigen::MatrixXd Phi_;     // m x N
};

// batched mesh + compass argmaxes (one row per candidate)
Eigen::MatrixXd ucb_batch_argmax(const Surrogate& s, const BoxMesh& mesh,
                                 const std::vector<double>& betas, int refine_iters = 50);
Eigen::MatrixXd thompson_argmax(const Surrogate& s, const BoxMesh& mesh,
                                const Eigen::MatrixXd& thetas, int refine_iters = 50);
Eigen::VectorXd mean_argmax(const Surrogate& s, const BoxMesh& mesh, int refine_iters = 50);

MaximizerSet thompson_set_box(const Surrogate& s, const BoxMesh& mesh, int K, Rng& rng,
                              int refine_iters = 50);
MaximizerSet ucb_batch_set_box(const Surrogate& s, const BoxMesh& mesh, int K,
                               int refine_iters = 50);

std::vector<double> beta_linspace(int K);  // linspace(0, 2.5, K); K = 1 -> {0}

// --- best-arm utility over visitations ---------------------------------------

struct UtilityConfig {
    Allocation allocation = Allocation::xy;
    double budget_T = 1.0;
    double horizon_H = 1.0;

    double regularizer() const { return 1.0 / (budget_T * horizon_H); }
};

struct UtilityEval {
    double value = 0.0;
    int zi = -1;  // achieving pair, indices into the maximizer set
    int zj = -1;
    bool termination = false;  // xy-allocation with fewer than two candidates
};

// U(d) = max_{z != z'} ||Phi(z) - Phi(z')||^2_{V(d)^{-1}} with
// V(d) = sum_p d(p) Phi(x_p) Phi(x_p)' / sigma^2(p) + I/(TH), evaluated on the
// stage-aggregated visitation. G-allocation uses single embeddings instead of
// pair differences. Gradient follows Danskin on the achieving pair:
// dU/dd(p) = -((Phi(z)-Phi(z'))' V^{-1} Phi(x_p))^2 / sigma^2(p), always <= 0.
class VisitationUtility {
public:
    VisitationUtility(const FiniteMdp& mdp, Eigen::MatrixXd Phi_states,
                      Eigen::VectorXd pair_noise_var, UtilityConfig cfg);

    void set_maximizer_set(const MaximizerSet& z);
    const std::vector<int>& maximizers() const { return z_; }

    UtilityEval value(const Eigen::VectorXd& d_agg) const;
    // gradient using the achieving pair of value(d_agg); zj < 0 selects the
    // g-allocation single-embedding form
    Eigen::VectorXd gradient(const Eigen::VectorXd& d_agg, int zi, int zj) const;
    UtilityEval value_with_gradient(const Eigen::VectorXd& d_agg, Eigen::VectorXd& grad) const;

    const UtilityConfig& config() const { return cfg_; }

private:
    Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::VectorXd& d_agg) const;

    const FiniteMdp* mdp_;
    Eigen::MatrixXd Phi_states_;   // m x X
    Eigen::VectorXd pair_noise_;   // P
    UtilityConfig cfg_;
    std::vector<int> z_;
};

// Receding-horizon blend of a candidate visitation with the empirical one,
//   (1/H) ((H-h)/(1+t) d + (tH+h)/(1+t) dhat),
// a proper distribution under the joint normalization convention. Reduces to
// d at (t,h) = (0,0) and to dhat at h = H.
Eigen::VectorXd adaptive_blend(const Eigen::VectorXd& d_agg, const Eigen::VectorXd& dhat_agg,
                               int t, int h, int H);

}  // namespace tcbo

#endif
