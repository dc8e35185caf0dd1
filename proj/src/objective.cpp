#include "tcbo/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace tcbo {

namespace {

// Halton sequence, bases 2,3,5,...; quasi-uniform and deterministic.
double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    int i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

Eigen::MatrixXd halton_mesh(int n, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    static const int bases[] = {2, 3, 5, 7, 11, 13, 17, 19};
    const int d = static_cast<int>(lo.size());
    if (d > 8) throw std::invalid_argument("box mesh supports up to 8 dimensions");
    Eigen::MatrixXd mesh(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            mesh(i, j) = lo(j) + (hi(j) - lo(j)) * halton(i + 1, bases[j]);
    return mesh;
}

// deterministic compass search around x0
Eigen::VectorXd compass_refine(const std::function<double(const Eigen::VectorXd&)>& f,
                               Eigen::VectorXd x, double fx, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi, int iters) {
    Eigen::VectorXd step = 0.1 * (hi - lo);
    const int d = static_cast<int>(x.size());
    for (int it = 0; it < iters; ++it) {
        bool moved = false;
        for (int j = 0; j < d; ++j) {
            for (double sign : {+1.0, -1.0}) {
                Eigen::VectorXd cand = x;
                cand(j) = std::clamp(cand(j) + sign * step(j), lo(j), hi(j));
                const double fc = f(cand);
                if (fc > fx) {
                    fx = fc;
                    x = cand;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    return x;
}

}  // namespace

MaximizerSet credible_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, double beta) {
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    const Eigen::VectorXd mu = s.mean_many(Phi_states);
    const Eigen::VectorXd sd = s.variance_many(Phi_states).cwiseMax(0.0).cwiseSqrt();
    const double best_lcb = (mu - beta * sd).maxCoeff();
    MaximizerSet z;
    z.tag = MaximizerMethod::credible;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (mu(i) + beta * sd(i) >= best_lcb) z.indices.push_back(static_cast<int>(i));
    return z;
}

MaximizerSet thompson_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("thompson set needs K >= 1");
    MaximizerSet z;
    z.tag = MaximizerMethod::thompson;
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd theta = s.sample_weights(rng);
        Eigen::Index best;
        (Phi_states.transpose() * theta).maxCoeff(&best);
        z.indices.push_back(static_cast<int>(best));
    }
    return z;
}

std::vector<double> beta_linspace(int K) {
    std::vector<double> betas;
    if (K == 1) return {0.0};
    for (int i = 0; i < K; ++i) betas.push_back(2.5 * i / (K - 1));
    return betas;
}

MaximizerSet ucb_batch_set(const Surrogate& s, const Eigen::MatrixXd& Phi_states, int K) {
    if (K < 1) throw std::invalid_argument("ucb batch set needs K >= 1");
    const Eigen::VectorXd mu = s.mean_many(Phi_states);
    const Eigen::VectorXd sd = s.variance_many(Phi_states).cwiseMax(0.0).cwiseSqrt();
    MaximizerSet z;
    z.tag = MaximizerMethod::ucb_batch;
    z.beta_schedule = beta_linspace(K);
    for (double beta : z.beta_schedule) {
        Eigen::Index best;
        (mu + beta * sd).maxCoeff(&best);
        z.indices.push_back(static_cast<int>(best));
    }
    return z;
}

Eigen::VectorXd argmax_on_box(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                              int mesh_points, int refine_iters) {
    const Eigen::MatrixXd mesh = halton_mesh(mesh_points, lo, hi);
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd x = lo;
    for (Eigen::Index i = 0; i < mesh.rows(); ++i) {
        const double v = f(mesh.row(i).transpose());
        if (v > best) {
            best = v;
            x = mesh.row(i).transpose();
        }
    }
    return compass_refine(f, x, best, lo, hi, refine_iters);
}

BoxMesh::BoxMesh(const FeatureMap& features, Eigen::VectorXd lo, Eigen::VectorXd hi,
                 int mesh_points)
    : features_(features), lo_(std::move(lo)), hi_(std::move(hi)) {
    points_ = halton_mesh(mesh_points, lo_, hi_);
    Phi_ = features_.eval(points_);
}

namespace {

// Lockstep compass refinement of several candidates. Each iteration scores
// all 2d probes of every candidate in one batched feature evaluation; a
// candidate that cannot improve halves its step.
Eigen::MatrixXd compass_refine_batch(
    const FeatureMap& features,
    const std::function<Eigen::VectorXd(const Eigen::MatrixXd&, const std::vector<int>&)>& scorer,
    Eigen::MatrixXd X, Eigen::VectorXd fX, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    int iters) {
    const int K = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    Eigen::VectorXd step = Eigen::VectorXd::Constant(K, 0.1);
    const Eigen::VectorXd range = hi - lo;
    for (int it = 0; it < iters; ++it) {
        Eigen::MatrixXd probes(2 * d * K, d);
        std::vector<int> owner(static_cast<size_t>(2 * d * K));
        int n = 0;
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < d; ++j)
                for (double sign : {+1.0, -1.0}) {
                    Eigen::VectorXd cand = X.row(k).transpose();
                    cand(j) = std::clamp(cand(j) + sign * step(k) * range(j), lo(j), hi(j));
                    probes.row(n) = cand.transpose();
                    owner[static_cast<size_t>(n)] = k;
                    ++n;
                }
        const Eigen::MatrixXd Phi = features.eval(probes);
        const Eigen::VectorXd scores = scorer(Phi, owner);
        std::vector<int> best_probe(static_cast<size_t>(K), -1);
        for (int i = 0; i < n; ++i) {
            const int k = owner[static_cast<size_t>(i)];
            if (scores(i) > fX(k) &&
                (best_probe[static_cast<size_t>(k)] < 0 || scores(i) > scores(best_probe[static_cast<size_t>(k)])))
                best_probe[static_cast<size_t>(k)] = i;
        }
        for (int k = 0; k < K; ++k) {
            const int i = best_probe[static_cast<size_t>(k)];
            if (i >= 0) {
                X.row(k) = probes.row(i);
                fX(k) = scores(i);
            } else {
                step(k) *= 0.5;
            }
        }
    }
    return X;
}

}  // namespace

Eigen::MatrixXd ucb_batch_argmax(const Surrogate& s, const BoxMesh& mesh,
                                 const std::vector<double>& betas, int refine_iters) {
    const int K = static_cast<int>(betas.size());
    const Eigen::VectorXd mu = s.mean_many(mesh.phi());
    const Eigen::VectorXd sd = s.variance_many(mesh.phi()).cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd X(K, mesh.points().cols());
    Eigen::VectorXd fX(K);
    for (int k = 0; k < K; ++k) {
        Eigen::Index best;
        fX(k) = (mu + betas[static_cast<size_t>(k)] * sd).maxCoeff(&best);
        X.row(k) = mesh.points().row(best);
    }
    auto scorer = [&](const Eigen::MatrixXd& Phi, const std::vector<int>& owner) {
        const Eigen::VectorXd m = s.mean_many(Phi);
        const Eigen::VectorXd v = s.variance_many(Phi).cwiseMax(0.0).cwiseSqrt();
        Eigen::VectorXd out(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i)
            out(i) = m(i) + betas[static_cast<size_t>(owner[static_cast<size_t>(i)])] * v(i);
        return out;
    };
    return compass_refine_batch(mesh.features(), scorer, X, fX, mesh.lo(), mesh.hi(), refine_iters);
}

Eigen::MatrixXd thompson_argmax(const Surrogate& s, const BoxMesh& mesh,
                                const Eigen::MatrixXd& thetas, int refine_iters) {
    const int K = static_cast<int>(thetas.cols());
    const Eigen::MatrixXd mesh_vals = thetas.transpose() * mesh.phi();  // K x N
    Eigen::MatrixXd X(K, mesh.points().cols());
    Eigen::VectorXd fX(K);
    for (int k = 0; k < K; ++k) {
        Eigen::Index best;
        fX(k) = mesh_vals.row(k).maxCoeff(&best);
        X.row(k) = mesh.points().row(best);
    }
    auto scorer = [&](const Eigen::MatrixXd& Phi, const std::vector<int>& owner) {
        Eigen::VectorXd out(Phi.cols());
        for (Eigen::Index i = 0; i < Phi.cols(); ++i)
            out(i) = Phi.col(i).dot(thetas.col(owner[static_cast<size_t>(i)]));
        return out;
    };
    return compass_refine_batch(mesh.features(), scorer, X, fX, mesh.lo(), mesh.hi(), refine_iters);
}

Eigen::VectorXd mean_argmax(const Surrogate& s, const BoxMesh& mesh, int refine_iters) {
    const Eigen::VectorXd mu = s.mean_many(mesh.phi());
    Eigen::Index best;
    Eigen::VectorXd fX(1);
    fX(0) = mu.maxCoeff(&best);
    Eigen::MatrixXd X = mesh.points().row(best);
    auto scorer = [&](const Eigen::MatrixXd& Phi, const std::vector<int>&) {
        return Eigen::VectorXd(s.mean_many(Phi));
    };
    return compass_refine_batch(mesh.features(), scorer, X, fX, mesh.lo(), mesh.hi(), refine_iters)
        .row(0)
        .transpose();
}

MaximizerSet thompson_set_box(const Surrogate& s, const BoxMesh& mesh, int K, Rng& rng,
                              int refine_iters) {
    if (K < 1) throw std::invalid_argument("thompson set needs K >= 1");
    Eigen::MatrixXd thetas(s.rank(), K);
    for (int k = 0; k < K; ++k) thetas.col(k) = s.sample_weights(rng);
    MaximizerSet z;
    z.tag = MaximizerMethod::thompson;
    z.points = thompson_argmax(s, mesh, thetas, refine_iters);
    return z;
}

MaximizerSet ucb_batch_set_box(const Surrogate& s, const BoxMesh& mesh, int K, int refine_iters) {
    if (K < 1) throw std::invalid_argument("ucb batch set needs K >= 1");
    MaximizerSet z;
    z.tag = MaximizerMethod::ucb_batch;
    z.beta_schedule = beta_linspace(K);
    z.points = ucb_batch_argmax(s, mesh, z.beta_schedule, refine_iters);
    return z;
}

VisitationUtility::VisitationUtility(const FiniteMdp& mdp, Eigen::MatrixXd Phi_states,
                                     Eigen::VectorXd pair_noise_var, UtilityConfig cfg)
    : mdp_(&mdp), Phi_states_(std::move(Phi_states)), pair_noise_(std::move(pair_noise_var)), cfg_(cfg) {
    if (Phi_states_.cols() != mdp.num_states()) throw std::invalid_argument("feature matrix shape mismatch");
    if (pair_noise_.size() != mdp.total_pairs) throw std::invalid_argument("pair noise size mismatch");
    if (pair_noise_.minCoeff() <= 0.0) throw std::invalid_argument("pair noise must be positive");
}

void VisitationUtility::set_maximizer_set(const MaximizerSet& z) {
    if (!z.discrete()) throw std::invalid_argument("visitation utility needs a discrete maximizer set");
    z_ = z.indices;
}

Eigen::LLT<Eigen::MatrixXd> VisitationUtility::factor(const Eigen::VectorXd& d_agg) const {
    const int X = mdp_->num_states();
    Eigen::VectorXd state_weight = Eigen::VectorXd::Zero(X);
    for (int p = 0; p < mdp_->total_pairs; ++p)
        if (d_agg(p) != 0.0) state_weight(mdp_->pair_state[p]) += d_agg(p) / pair_noise_(p);
    const int m = static_cast<int>(Phi_states_.rows());
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(m, m) * cfg_.regularizer();
    // signed weights are allowed so that finite-difference probes of the
    // utility stay smooth around zero-mass pairs
    V.noalias() += Phi_states_ * state_weight.asDiagonal() * Phi_states_.transpose();
    V = (0.5 * (V + V.transpose())).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) throw std::runtime_error("utility information matrix not positive definite");
    return llt;
}

UtilityEval VisitationUtility::value(const Eigen::VectorXd& d_agg) const {
    const int K = static_cast<int>(z_.size());
    UtilityEval eval;
    if (cfg_.allocation == Allocation::xy && K < 2) {
        eval.termination = true;
        if (K == 1) {
            // single candidate left: fall back to its g-allocation value so a
            // caller that keeps planning still has a well-defined objective
            eval.zi = 0;
        }
    }

    const Eigen::LLT<Eigen::MatrixXd> llt = factor(d_agg);
    Eigen::MatrixXd PhiZ(Phi_states_.rows(), K);
    for (int k = 0; k < K; ++k) PhiZ.col(k) = Phi_states_.col(z_[static_cast<size_t>(k)]);
    const Eigen::MatrixXd solved = llt.solve(PhiZ);
    const Eigen::MatrixXd G = PhiZ.transpose() * solved;

    if (cfg_.allocation == Allocation::g || eval.termination) {
        double best = -1.0;
        for (int k = 0; k < K; ++k)
            if (G(k, k) > best + 1e-12) {
                best = G(k, k);
                eval.zi = k;
            }
        eval.value = best < 0.0 ? 0.0 : best;
        eval.zj = -1;
    } else {
        double best = -1.0;
        for (int i = 0; i < K; ++i)
            for (int j = i + 1; j < K; ++j) {
                const double v = G(i, i) + G(j, j) - 2.0 * G(i, j);
                if (v > best + 1e-12) {
                    best = v;
                    eval.zi = i;
                    eval.zj = j;
                }
            }
        eval.value = best;
    }
    return eval;
}

UtilityEval VisitationUtility::value_with_gradient(const Eigen::VectorXd& d_agg,
                                                   Eigen::VectorXd& grad) const {
    const UtilityEval eval = value(d_agg);
    if (eval.zi >= 0) grad = gradient(d_agg, eval.zi, eval.zj);
    return eval;
}

Eigen::VectorXd VisitationUtility::gradient(const Eigen::VectorXd& d_agg, int zi, int zj) const {
    if (zi < 0) throw std::invalid_argument("gradient needs the achieving candidate pair");
    const Eigen::LLT<Eigen::MatrixXd> llt = factor(d_agg);
    Eigen::VectorXd delta = Phi_states_.col(z_[static_cast<size_t>(zi)]);
    if (zj >= 0) delta -= Phi_states_.col(z_[static_cast<size_t>(zj)]);
    const Eigen::VectorXd w = llt.solve(delta);
    const Eigen::VectorXd proj = Phi_states_.transpose() * w;  // per state
    Eigen::VectorXd grad(mdp_->total_pairs);
    for (int p = 0; p < mdp_->total_pairs; ++p) {
        const double c = proj(mdp_->pair_state[p]);
        grad(p) = -c * c / pair_noise_(p);
    }
    return grad;
}

Eigen::VectorXd adaptive_blend(const Eigen::VectorXd& d_agg, const Eigen::VectorXd& dhat_agg,
                               int t, int h, int H) {
    const double wd = static_cast<double>(H - h) / (1.0 + t) / H;
    const double we = (static_cast<double>(t) * H + h) / (1.0 + t) / H;
    return wd * d_agg + we * dhat_agg;
}

}  // namespace tcbo
