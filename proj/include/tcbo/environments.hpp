#ifndef TCBO_ENVIRONMENTS_HPP
#define TCBO_ENVIRONMENTS_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tcbo/continuous.hpp"
#include "tcbo/kernels.hpp"
#include "tcbo/mdp.hpp"
#include "tcbo/surrogate.hpp"

namespace tcbo {

// Black-box environment: noisy queries plus noiseless access for metrics.
class Environment {
public:
    virtual ~Environment() = default;
    virtual std::string name() const = 0;
    virtual double truth(const Eigen::VectorXd& x) const = 0;
    virtual const NoiseModel& noise() const = 0;
    virtual Eigen::VectorXd optimum_location() const = 0;
    virtual double optimum_value() const = 0;

    // y = f(x) + eps with Var[eps] = sigma^2(x, a)
    virtual double query(const Eigen::VectorXd& x, const Eigen::VectorXd& a, Rng& rng);
};

// Tabulated function on the states of a finite MDP.
class DiscreteTableEnvironment : public Environment {
public:
    DiscreteTableEnvironment(std::string name, Eigen::MatrixXd embeddings, Eigen::VectorXd values,
                             NoiseModel noise);

    std::string name() const override { return name_; }
    double truth(const Eigen::VectorXd& x) const override;
    const NoiseModel& noise() const override { return noise_; }
    Eigen::VectorXd optimum_location() const override;
    double optimum_value() const override { return values_.maxCoeff(); }

    const Eigen::VectorXd& values() const { return values_; }
    int optimum_index() const;
    double value_at(int state) const { return values_(state); }

private:
    std::string name_;
    Eigen::MatrixXd embeddings_;
    Eigen::VectorXd values_;
    NoiseModel noise_;
};

// Closed-form test function environment on the unit box, negated where needed
// so the task is always maximization. The optimum is computed to high
// precision at construction (exactly where a closed form exists, otherwise by
// deterministic local refinement of the published optimizer).
class SyntheticEnvironment : public Environment {
public:
    SyntheticEnvironment(std::string name, int dim,
                         std::function<double(const Eigen::VectorXd&)> f, NoiseModel noise,
                         Eigen::VectorXd opt_location, double opt_value);

    std::string name() const override { return name_; }
    double truth(const Eigen::VectorXd& x) const override { return f_(x); }
    const NoiseModel& noise() const override { return noise_; }
    Eigen::VectorXd optimum_location() const override { return opt_location_; }
    double optimum_value() const override { return opt_value_; }
    int dim() const { return dim_; }

private:
    std::string name_;
    int dim_;
    std::function<double(const Eigen::VectorXd&)> f_;
    NoiseModel noise_;
    Eigen::VectorXd opt_location_;
    double opt_value_;
};

// External black-box over a line protocol: one query per line
// "x_1 ... x_d a_1 ... a_d", one response line "y".
class SubprocessEnvironment : public Environment {
public:
    SubprocessEnvironment(std::string command, NoiseModel declared_noise);
    ~SubprocessEnvironment() override;

    std::string name() const override { return "subprocess"; }
    double truth(const Eigen::VectorXd&) const override;
    const NoiseModel& noise() const override { return noise_; }
    Eigen::VectorXd optimum_location() const override;
    double optimum_value() const override;
    double query(const Eigen::VectorXd& x, const Eigen::VectorXd& a, Rng& rng) override;

private:
    NoiseModel noise_;
    int to_child_ = -1;
    int from_child_ = -1;
    long pid_ = -1;
    std::string buffer_;
};

// --- benchmark constructors ---------------------------------------------------

struct DiscreteBenchmark {
    std::shared_ptr<DiscreteTableEnvironment> env;
    FiniteMdp mdp;
    Kernel kernel;
    int default_episodes = 1;
};

struct ContinuousBenchmark {
    std::shared_ptr<SyntheticEnvironment> env;
    LinearSystem system;
    Kernel kernel;
    int feature_count = 0;  // min(2^{5+d}, 512)
};

// branin2d, hartmann3d, hartmann6d, michalewicz2d, michalewicz3d, levy4d with
// the per-benchmark step bound, kernel and noise level
ContinuousBenchmark synthetic_env(const std::string& name, double noise_var = 1e-3);

struct KnorrOptions {
    int grid = 10;
    double tau_max = 1.0;
    double k1 = 10.0, k2 = 874.0, k3 = 19200.0;
    double alpha_sig = 5.0, alpha_ode = 0.6, alpha_rbf = 0.001;
    double rbf_lengthscale = 0.1;
    double noise_var = 1e-4;
    double ode_step = 5e-5;
    int horizon = 10;
    int episodes = 10;
};

// Transient flow reactor on a (tau, B) grid with non-decreasing residence
// time: actions combine dtau in {0,+1} and dB in {-1,0,+1} grid steps.
// Observations integrate the nonlinear kinetics.
DiscreteBenchmark knorr_env(const KnorrOptions& opt = {});

// y' for the reactor kinetics, y = (product, reactants..., intermediates)
void knorr_rhs(double k1, double k2, double k3, const Eigen::VectorXd& y, Eigen::VectorXd& dy);
// classical fixed-step RK4
Eigen::VectorXd rk4_integrate(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& rhs,
                              Eigen::VectorXd y0, double t_end, double step);

struct GridMask {
    std::vector<std::string> rows;  // '.' free, '#' obstacle, 'P' port
    int port_row = -1, port_col = -1;
};

GridMask load_mask_file(const std::string& path);
GridMask parse_mask_text(const std::string& text);

struct FieldFile {
    int rows = 0, cols = 0;
    unsigned long long seed = 0;
    double lengthscale = 0.0;
    std::vector<double> values;  // row-major over the full grid
};

FieldFile load_field_file(const std::string& path);
void save_field_file(const std::string& path, const FieldFile& field);

// seeded draw from a GP with rbf kernel on the full grid (row-major)
FieldFile gp_sample_field(int rows, int cols, double lengthscale, unsigned long long seed,
                          double lo0 = 0.0, double hi0 = 1.0, double lo1 = 0.0, double hi1 = 1.0);

struct YpacaraiOptions {
    int horizon = 50;
    int episodes = 5;
    double noise_var = 1e-3;
    double kernel_sigma2 = 1.0;
    double kernel_lengthscale = 0.2;
};

// Obstacle lake grid, 8-neighborhood moves plus stay, trips start and end at
// the port (stage-wise reachability pruning applied).
DiscreteBenchmark ypacarai_env(const GridMask& mask, const FieldFile& field,
                               const YpacaraiOptions& opt = {});

struct LaserOptions {
    int grid = 10;
    double s = 0.01;
    double w = 20.0;
    int horizon = 100;
    unsigned long long field_seed = 0;  // 0 = default shipped seed
    double kernel_sigma2 = 1.0;
    double kernel_lengthscale = 0.4;
};

// Free-electron laser surrogate on [-0.5, 0.5]^2: any grid point can be the
// next target, observation noise grows with the move.
DiscreteBenchmark laser_env(const FieldFile& field, const LaserOptions& opt = {});

// worst-case constant noise level used by the noise-agnostic baseline
double laser_worst_case_variance(const DiscreteBenchmark& bench);

// inference regret / identification series from a trace of recommendations
struct MetricSeries {
    std::vector<double> regret;
    std::vector<char> identified;
};
MetricSeries metrics(const std::vector<int>& recommended_states, const DiscreteTableEnvironment& env);

}  // namespace tcbo

#endif
