#include "tcbo/environments.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include "tcbo/mdp_io.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace tcbo {

double Environment::query(const Eigen::VectorXd& x, const Eigen::VectorXd& a, Rng& rng) {
    const double var = noise().variance(x, a);
    return truth(x) + std::sqrt(var) * rng.normal();
}

DiscreteTableEnvironment::DiscreteTableEnvironment(std::string name, Eigen::MatrixXd embeddings,
                                                   Eigen::VectorXd values, NoiseModel noise)
    : name_(std::move(name)), embeddings_(std::move(embeddings)), values_(std::move(values)),
      noise_(noise) {
    if (embeddings_.rows() != values_.size()) throw std::invalid_argument("table size mismatch");
}

double DiscreteTableEnvironment::truth(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < embeddings_.rows(); ++i)
        if ((embeddings_.row(i).transpose() - x).lpNorm<Eigen::Infinity>() < 1e-12) return values_(i);
    throw std::invalid_argument("query point is not a state of the discrete environment");
}

int DiscreteTableEnvironment::optimum_index() const {
    Eigen::Index best;
    values_.maxCoeff(&best);
    return static_cast<int>(best);
}

Eigen::VectorXd DiscreteTableEnvironment::optimum_location() const {
    return embeddings_.row(optimum_index()).transpose();
}

SyntheticEnvironment::SyntheticEnvironment(std::string name, int dim,
                                           std::function<double(const Eigen::VectorXd&)> f,
                                           NoiseModel noise, Eigen::VectorXd opt_location,
                                           double opt_value)
    : name_(std::move(name)), dim_(dim), f_(std::move(f)), noise_(noise),
      opt_location_(std::move(opt_location)), opt_value_(opt_value) {}

// --- closed-form test functions on the unit box (maximization sign) ----------

namespace {

double branin_max(const Eigen::VectorXd& u) {
    const double x = 15.0 * u(0) - 5.0;
    const double y = 15.0 * u(1);
    const double b = 5.1 / (4.0 * M_PI * M_PI);
    const double c = 5.0 / M_PI;
    const double t = 1.0 / (8.0 * M_PI);
    const double term = y - b * x * x + c * x - 6.0;
    return -(term * term + 10.0 * (1.0 - t) * std::cos(x) + 10.0);
}

double hartmann_max(const Eigen::VectorXd& x, const Eigen::MatrixXd& A, const Eigen::MatrixXd& P) {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    double f = 0.0;
    for (int i = 0; i < 4; ++i) {
        double e = 0.0;
        for (int j = 0; j < A.cols(); ++j) {
            const double d = x(j) - P(i, j);
            e += A(i, j) * d * d;
        }
        f += alpha[i] * std::exp(-e);
    }
    return f;
}

Eigen::MatrixXd hartmann3_A() {
    Eigen::MatrixXd A(4, 3);
    A << 3, 10, 30, 0.1, 10, 35, 3, 10, 30, 0.1, 10, 35;
    return A;
}
Eigen::MatrixXd hartmann3_P() {
    Eigen::MatrixXd P(4, 3);
    P << 3689, 1170, 2673, 4699, 4387, 7470, 1091, 8732, 5547, 381, 5743, 8828;
    return P * 1e-4;
}
Eigen::MatrixXd hartmann6_A() {
    Eigen::MatrixXd A(4, 6);
    A << 10, 3, 17, 3.5, 1.7, 8,
         0.05, 10, 17, 0.1, 8, 14,
         3, 3.5, 1.7, 10, 17, 8,
         17, 8, 0.05, 10, 0.1, 14;
    return A;
}
Eigen::MatrixXd hartmann6_P() {
    Eigen::MatrixXd P(4, 6);
    P << 1312, 1696, 5569, 124, 8283, 5886,
         2329, 4135, 8307, 3736, 1004, 9991,
         2348, 1451, 3522, 2883, 3047, 6650,
         4047, 8828, 8732, 5743, 1091, 381;
    return P * 1e-4;
}

double michalewicz_term(int i, double v) {  // v in [0, pi]
    const double s = std::sin(static_cast<double>(i + 1) * v * v / M_PI);
    return std::sin(v) * std::pow(s, 20);
}

double michalewicz_max(const Eigen::VectorXd& u) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) f += michalewicz_term(static_cast<int>(i), M_PI * u(i));
    return f;
}

double levy_max(const Eigen::VectorXd& u) {
    const Eigen::Index d = u.size();
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double x = 20.0 * u(i) - 10.0;
        w(i) = 1.0 + (x - 1.0) / 4.0;
    }
    const double s1 = std::sin(M_PI * w(0));
    double f = s1 * s1;
    for (Eigen::Index i = 0; i < d - 1; ++i) {
        const double sw = std::sin(M_PI * w(i) + 1.0);
        f += (w(i) - 1.0) * (w(i) - 1.0) * (1.0 + 10.0 * sw * sw);
    }
    const double sd = std::sin(2.0 * M_PI * w(d - 1));
    f += (w(d - 1) - 1.0) * (w(d - 1) - 1.0) * (1.0 + sd * sd);
    return -f;
}

// deterministic local refinement of a starting point (compass search)
Eigen::VectorXd refine_max(const std::function<double(const Eigen::VectorXd&)>& f,
                           Eigen::VectorXd x, double step0, int iters) {
    double fx = f(x);
    double step = step0;
    const Eigen::Index d = x.size();
    for (int it = 0; it < iters; ++it) {
        bool moved = false;
        for (Eigen::Index j = 0; j < d; ++j) {
            for (double sign : {+1.0, -1.0}) {
                Eigen::VectorXd cand = x;
                cand(j) = std::clamp(cand(j) + sign * step, 0.0, 1.0);
                const double fc = f(cand);
                if (fc > fx) {
                    fx = fc;
                    x = cand;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
        if (step < 1e-15) break;
    }
    return x;
}

// per-dimension optimum of the separable michalewicz sum
double michalewicz_dim_argmax(int i) {
    double best_v = 0.0, best = -1.0;
    for (int k = 0; k <= 20000; ++k) {
        const double v = M_PI * k / 20000.0;
        const double f = michalewicz_term(i, v);
        if (f > best) {
            best = f;
            best_v = v;
        }
    }
    double step = M_PI / 20000.0;
    for (int it = 0; it < 200; ++it) {
        bool moved = false;
        for (double sign : {+1.0, -1.0}) {
            const double v = std::clamp(best_v + sign * step, 0.0, M_PI);
            const double f = michalewicz_term(i, v);
            if (f > best) {
                best = f;
                best_v = v;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return best_v;
}

struct SyntheticSpec {
    int dim;
    double delta_max;
    double kernel_sigma2;
    double kernel_lengthscale;
    std::function<double(const Eigen::VectorXd&)> f;
};

SyntheticSpec synthetic_spec(const std::string& name) {
    if (name == "branin2d") return {2, 0.05, 0.6, 0.15, branin_max};
    if (name == "hartmann3d")
        return {3, 0.1, 2.0, 0.13849,
                [A = hartmann3_A(), P = hartmann3_P()](const Eigen::VectorXd& x) {
                    return hartmann_max(x, A, P);
                }};
    if (name == "hartmann6d")
        return {6, 0.2, 1.7, 0.22,
                [A = hartmann6_A(), P = hartmann6_P()](const Eigen::VectorXd& x) {
                    return hartmann_max(x, A, P);
                }};
    if (name == "michalewicz2d") return {2, 0.05, 0.35, 0.179485, michalewicz_max};
    if (name == "michalewicz3d") return {3, 0.1, 0.85, 0.179485, michalewicz_max};
    if (name == "levy4d") return {4, 0.1, 0.6, 0.14175, levy_max};
    throw std::invalid_argument("unknown synthetic benchmark: " + name);
}

}  // namespace

ContinuousBenchmark synthetic_env(const std::string& name, double noise_var) {
    SyntheticSpec spec = synthetic_spec(name);

    Eigen::VectorXd opt(spec.dim);
    double opt_value;
    if (name == "branin2d") {
        opt << (M_PI + 5.0) / 15.0, 2.275 / 15.0;
        opt_value = -10.0 / (8.0 * M_PI);
    } else if (name == "levy4d") {
        opt.setConstant((1.0 + 10.0) / 20.0);
        opt_value = 0.0;
    } else if (name.rfind("michalewicz", 0) == 0) {
        for (int i = 0; i < spec.dim; ++i) opt(i) = michalewicz_dim_argmax(i) / M_PI;
        opt_value = spec.f(opt);
    } else {
        // hartmann: refine the published optimizer
        if (spec.dim == 3) opt << 0.114614, 0.555649, 0.852547;
        else opt << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
        opt = refine_max(spec.f, opt, 0.01, 300);
        opt_value = spec.f(opt);
    }

    ContinuousBenchmark bench;
    bench.env = std::make_shared<SyntheticEnvironment>(name, spec.dim, spec.f,
                                                       NoiseModel::homoscedastic(noise_var), opt,
                                                       opt_value);
    bench.system = LinearSystem::additive(spec.dim, spec.delta_max,
                                          Eigen::VectorXd::Zero(spec.dim),
                                          Eigen::VectorXd::Ones(spec.dim));
    bench.kernel = Kernel::rbf(spec.kernel_sigma2, spec.kernel_lengthscale);
    bench.feature_count = std::min(1 << (5 + spec.dim), 512);
    return bench;
}

// --- knorr reactor -------------------------------------------------------------

void knorr_rhs(double k1, double k2, double k3, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double r1 = k1 * y(1) * y(2) - k2 * y(3) * y(4);
    const double r2 = k3 * y(3);
    dy(0) = r2;
    dy(1) = -r1;
    dy(2) = -r1;
    dy(3) = r1 - r2;
    dy(4) = r1 + r2;
}

Eigen::VectorXd rk4_integrate(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& rhs,
                              Eigen::VectorXd y, double t_end, double step) {
    if (step <= 0.0) throw std::invalid_argument("integrator step must be positive");
    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = 0.0;
    while (t < t_end - 1e-15) {
        const double h = std::min(step, t_end - t);
        rhs(y, k1);
        tmp = y + 0.5 * h * k1;
        rhs(tmp, k2);
        tmp = y + 0.5 * h * k2;
        rhs(tmp, k3);
        tmp = y + h * k3;
        rhs(tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return y;
}

DiscreteBenchmark knorr_env(const KnorrOptions& opt) {
    const int G = opt.grid;
    const int X = G * G;

    FiniteMdp mdp;
    mdp.embeddings.resize(X, 2);
    mdp.actions.resize(X);
    Eigen::VectorXd values(X);

    auto idx = [G](int i, int j) { return i * G + j; };
    auto rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        knorr_rhs(opt.k1, opt.k2, opt.k3, y, dy);
    };

    for (int j = 0; j < G; ++j) {
        const double B = static_cast<double>(j) / (G - 1);
        Eigen::VectorXd y(5);
        y << 0.0, 1.0 - B, B, 0.0, 0.0;
        double tau = 0.0;
        for (int i = 0; i < G; ++i) {
            const double tau_i = opt.tau_max * i / (G - 1);
            if (tau_i > tau) {
                Eigen::VectorXd advanced = rk4_integrate(rhs, y, tau_i - tau, opt.ode_step);
                y = advanced;
                tau = tau_i;
            }
            values(idx(i, j)) = y(0);
        }
    }

    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            const int s = idx(i, j);
            mdp.state_names.push_back("t" + std::to_string(i) + "b" + std::to_string(j));
            mdp.embeddings(s, 0) = opt.tau_max * i / (G - 1);
            mdp.embeddings(s, 1) = static_cast<double>(j) / (G - 1);
            // residence time never decreases
            for (int dt = 0; dt <= 1; ++dt)
                for (int db = -1; db <= 1; ++db) {
                    const int ni = i + dt, nj = j + db;
                    if (ni >= G || nj < 0 || nj >= G) continue;
                    const std::string name = "t" + std::to_string(dt) + "b" + std::to_string(db + 1);
                    mdp.actions[s].push_back({name, {{idx(ni, nj), 1.0}}});
                }
        }
    }

    mdp.horizon = opt.horizon;
    mdp.initial_law = Eigen::VectorXd::Zero(X);
    mdp.initial_law(idx(0, 0)) = 1.0;
    mdp.finalize();

    OdeCompositeParams kp;
    kp.k1 = opt.k1;
    kp.k2 = opt.k2;
    kp.k3 = opt.k3;
    kp.alpha_sig = opt.alpha_sig;
    kp.alpha_ode = opt.alpha_ode;
    kp.alpha_rbf = opt.alpha_rbf;

    DiscreteBenchmark bench;
    bench.env = std::make_shared<DiscreteTableEnvironment>(
        "knorr", mdp.embeddings, values, NoiseModel::homoscedastic(opt.noise_var));
    bench.mdp = std::move(mdp);
    bench.kernel = Kernel::ode_composite(kp, 1.0, opt.rbf_lengthscale);
    bench.default_episodes = opt.episodes;
    return bench;
}

// --- grid masks and sampled fields ---------------------------------------------

GridMask parse_mask_text(const std::string& text) {
    GridMask mask;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        for (size_t c = 0; c < line.size(); ++c) {
            const char ch = line[c];
            if (ch == 'P') {
                if (mask.port_row >= 0) throw std::runtime_error("mask has multiple ports");
                mask.port_row = static_cast<int>(mask.rows.size());
                mask.port_col = static_cast<int>(c);
            } else if (ch != '.' && ch != '#') {
                throw std::runtime_error("mask may contain only '.', '#', 'P'");
            }
        }
        mask.rows.push_back(line);
    }
    if (mask.rows.empty()) throw std::runtime_error("empty mask");
    for (const auto& row : mask.rows)
        if (row.size() != mask.rows[0].size()) throw std::runtime_error("ragged mask");
    if (mask.port_row < 0) throw std::runtime_error("mask has no port cell 'P'");
    return mask;
}

GridMask load_mask_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mask file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mask_text(ss.str());
}

FieldFile load_field_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file: " + path);
    FieldFile f;
    in >> f.rows >> f.cols >> f.seed >> f.lengthscale;
    if (!in || f.rows <= 0 || f.cols <= 0) throw std::runtime_error("bad field file header: " + path);
    f.values.resize(static_cast<size_t>(f.rows) * f.cols);
    for (double& v : f.values)
        if (!(in >> v)) throw std::runtime_error("field file truncated: " + path);
    return f;
}

void save_field_file(const std::string& path, const FieldFile& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write field file: " + path);
    out.precision(17);
    out << field.rows << " " << field.cols << " " << field.seed << " " << field.lengthscale << "\n";
    for (int r = 0; r < field.rows; ++r) {
        for (int c = 0; c < field.cols; ++c) {
            out << field.values[static_cast<size_t>(r) * field.cols + c];
            out << (c + 1 == field.cols ? '\n' : ' ');
        }
    }
}

FieldFile gp_sample_field(int rows, int cols, double lengthscale, unsigned long long seed,
                          double lo0, double hi0, double lo1, double hi1) {
    const int n = rows * cols;
    Eigen::MatrixXd pts(n, 2);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            pts(r * cols + c, 0) = lo0 + (hi0 - lo0) * c / (cols - 1);
            pts(r * cols + c, 1) = lo1 + (hi1 - lo1) * r / (rows - 1);
        }
    const Kernel k = Kernel::rbf(1.0, lengthscale);
    Eigen::MatrixXd K = k.gram(pts);
    K.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) throw std::runtime_error("field covariance factorization failed");
    Rng rng(seed);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd sample = llt.matrixL() * z;

    FieldFile f;
    f.rows = rows;
    f.cols = cols;
    f.seed = seed;
    f.lengthscale = lengthscale;
    f.values.assign(sample.data(), sample.data() + n);
    return f;
}

DiscreteBenchmark ypacarai_env(const GridMask& mask, const FieldFile& field,
                               const YpacaraiOptions& opt) {
    const int R = static_cast<int>(mask.rows.size());
    const int C = static_cast<int>(mask.rows[0].size());
    if (field.rows != R || field.cols != C) throw std::invalid_argument("field/mask shape mismatch");

    // connectivity of the free region (8-neighborhood from the port)
    std::vector<std::vector<char>> seen(R, std::vector<char>(C, 0));
    std::queue<std::pair<int, int>> frontier;
    frontier.push({mask.port_row, mask.port_col});
    seen[mask.port_row][mask.port_col] = 1;
    int visited = 0, free_cells = 0;
    auto is_free = [&](int r, int c) {
        return r >= 0 && r < R && c >= 0 && c < C && mask.rows[r][static_cast<size_t>(c)] != '#';
    };
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (is_free(r, c)) ++free_cells;
    while (!frontier.empty()) {
        auto [r, c] = frontier.front();
        frontier.pop();
        ++visited;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                if (is_free(r + dr, c + dc) && !seen[r + dr][c + dc]) {
                    seen[r + dr][c + dc] = 1;
                    frontier.push({r + dr, c + dc});
                }
            }
    }
    if (visited != free_cells) throw std::invalid_argument("mask free region is disconnected");

    GridSpec spec;
    spec.moves = 8;
    spec.stay = true;
    for (const auto& row : mask.rows) {
        std::string bits;
        for (char ch : row) bits.push_back(ch == '#' ? '0' : '1');
        spec.mask_rows.push_back(bits);
    }
    FiniteMdp mdp = grid_mdp(spec, opt.horizon, {mask.port_row, mask.port_col},
                             {{mask.port_row, mask.port_col}});

    // table over free cells in the grid_mdp state order (row-major)
    Eigen::VectorXd values(mdp.num_states());
    int s = 0;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (is_free(r, c)) values(s++) = field.values[static_cast<size_t>(r) * C + c];

    DiscreteBenchmark bench;
    bench.env = std::make_shared<DiscreteTableEnvironment>(
        "ypacarai", mdp.embeddings, values, NoiseModel::homoscedastic(opt.noise_var));
    bench.mdp = std::move(mdp);
    bench.kernel = Kernel::rbf(opt.kernel_sigma2, opt.kernel_lengthscale);
    bench.default_episodes = opt.episodes;
    return bench;
}

DiscreteBenchmark laser_env(const FieldFile& field, const LaserOptions& opt) {
    const int G = opt.grid;
    if (field.rows != G || field.cols != G) throw std::invalid_argument("field/grid shape mismatch");
    const int X = G * G;

    FiniteMdp mdp;
    mdp.embeddings.resize(X, 2);
    mdp.actions.resize(X);
    for (int r = 0; r < G; ++r)
        for (int c = 0; c < G; ++c) {
            const int s = r * G + c;
            mdp.state_names.push_back("c" + std::to_string(r) + "_" + std::to_string(c));
            mdp.embeddings(s, 0) = -0.5 + static_cast<double>(c) / (G - 1);
            mdp.embeddings(s, 1) = -0.5 + static_cast<double>(r) / (G - 1);
        }
    for (int s = 0; s < X; ++s)
        for (int target = 0; target < X; ++target)
            mdp.actions[s].push_back({"g" + std::to_string(target), {{target, 1.0}}});

    mdp.horizon = opt.horizon;
    mdp.initial_law = Eigen::VectorXd::Zero(X);
    mdp.initial_law((G / 2) * G + G / 2) = 1.0;
    mdp.finalize();

    Eigen::VectorXd values =
        Eigen::Map<const Eigen::VectorXd>(field.values.data(), static_cast<Eigen::Index>(field.values.size()));

    DiscreteBenchmark bench;
    bench.env = std::make_shared<DiscreteTableEnvironment>(
        "laser", mdp.embeddings, values, NoiseModel::transition(opt.s, opt.w));
    bench.mdp = std::move(mdp);
    bench.kernel = Kernel::rbf(opt.kernel_sigma2, opt.kernel_lengthscale);
    bench.default_episodes = 1;
    return bench;
}

double laser_worst_case_variance(const DiscreteBenchmark& bench) {
    const Eigen::MatrixXd& E = bench.mdp.embeddings;
    double max_sq = 0.0;
    for (Eigen::Index i = 0; i < E.rows(); ++i)
        for (Eigen::Index j = i + 1; j < E.rows(); ++j)
            max_sq = std::max(max_sq, (E.row(i) - E.row(j)).squaredNorm());
    return bench.env->noise().worst_case(max_sq);
}

MetricSeries metrics(const std::vector<int>& recommended_states, const DiscreteTableEnvironment& env) {
    MetricSeries out;
    const int best = env.optimum_index();
    const double opt = env.optimum_value();
    for (int rec : recommended_states) {
        out.regret.push_back(opt - env.value_at(rec));
        out.identified.push_back(rec == best ? 1 : 0);
    }
    return out;
}

// --- subprocess line protocol ----------------------------------------------------

SubprocessEnvironment::SubprocessEnvironment(std::string command, NoiseModel declared_noise)
    : noise_(declared_noise) {
    int to_pipe[2], from_pipe[2];
    if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
        throw std::runtime_error("cannot create pipes for subprocess environment");
    const long pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        dup2(to_pipe[0], 0);
        dup2(from_pipe[1], 1);
        close(to_pipe[0]);
        close(to_pipe[1]);
        close(from_pipe[0]);
        close(from_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_pipe[0]);
    close(from_pipe[1]);
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
    pid_ = pid;
}

SubprocessEnvironment::~SubprocessEnvironment() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
    }
}

double SubprocessEnvironment::truth(const Eigen::VectorXd&) const {
    throw std::logic_error("external environment does not expose ground truth");
}

Eigen::VectorXd SubprocessEnvironment::optimum_location() const {
    throw std::logic_error("external environment does not expose its optimum");
}

double SubprocessEnvironment::optimum_value() const {
    throw std::logic_error("external environment does not expose its optimum");
}

double SubprocessEnvironment::query(const Eigen::VectorXd& x, const Eigen::VectorXd& a, Rng&) {
    std::ostringstream line;
    line.precision(17);
    for (Eigen::Index i = 0; i < x.size(); ++i) line << x(i) << " ";
    for (Eigen::Index i = 0; i < a.size(); ++i) line << a(i) << (i + 1 == a.size() ? "" : " ");
    line << "\n";
    const std::string msg = line.str();
    if (write(to_child_, msg.data(), msg.size()) != static_cast<ssize_t>(msg.size()))
        throw std::runtime_error("subprocess environment write failed");

    while (buffer_.find('\n') == std::string::npos) {
        char chunk[256];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) throw std::runtime_error("subprocess environment closed the stream");
        buffer_.append(chunk, static_cast<size_t>(n));
    }
    const auto pos = buffer_.find('\n');
    const std::string resp = buffer_.substr(0, pos);
    buffer_.erase(0, pos + 1);
    return std::stod(resp);
}

}  // namespace tcbo
