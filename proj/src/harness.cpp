#include "tcbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "tcbo/environments.hpp"

namespace tcbo {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

Algorithm parse_algorithm(const std::string& s) {
    if (s == "mdp-bo") return Algorithm::mdp_bo;
    if (s == "greedy-ucb") return Algorithm::greedy_ucb;
    if (s == "mdp-ei") return Algorithm::mdp_ei;
    throw std::runtime_error("unknown algorithm: " + s);
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::mdp_bo: return "mdp-bo";
        case Algorithm::greedy_ucb: return "greedy-ucb";
        case Algorithm::mdp_ei: return "mdp-ei";
    }
    return "?";
}

Feedback parse_feedback(const std::string& s) {
    if (s == "episodic") return Feedback::episodic;
    if (s == "instant") return Feedback::instant;
    if (s == "asynchronous") return Feedback::asynchronous;
    throw std::runtime_error("unknown feedback mode: " + s);
}

MaximizerMethod parse_zmethod(const std::string& s) {
    if (s == "credible") return MaximizerMethod::credible;
    if (s == "thompson") return MaximizerMethod::thompson;
    if (s == "ucb-batch") return MaximizerMethod::ucb_batch;
    throw std::runtime_error("unknown maximizer_set method: " + s);
}

struct ResolvedRun {
    CampaignConfig campaign;
    bool discrete = true;
    DiscreteBenchmark dbench;
    ContinuousBenchmark cbench;
};

ResolvedRun resolve(const RunConfig& cfg) {
    ResolvedRun run;
    run.discrete = benchmark_is_discrete(cfg.benchmark);

    CampaignConfig& c = run.campaign;
    c.algorithm = cfg.algorithm;
    c.delay = cfg.delay;
    c.allocation = cfg.allocation;
    c.zsize = cfg.zsize;
    c.beta = cfg.beta;
    c.fw.components = cfg.fw_components;
    c.fw.tolerance = cfg.fw_tolerance;

    if (run.discrete) {
        if (cfg.benchmark == "knorr") {
            KnorrOptions opt;
            if (cfg.noise_var > 0.0) opt.noise_var = cfg.noise_var;
            run.dbench = knorr_env(opt);
            c.feedback = Feedback::episodic;
        } else if (cfg.benchmark == "ypacarai") {
            YpacaraiOptions opt;
            if (cfg.noise_var > 0.0) opt.noise_var = cfg.noise_var;
            const GridMask mask = load_mask_file(cfg.data_dir + "/ypacarai_mask.txt");
            const FieldFile field = load_field_file(cfg.data_dir + "/ypacarai_field.txt");
            run.dbench = ypacarai_env(mask, field, opt);
            c.feedback = Feedback::episodic;
        } else if (cfg.benchmark == "laser") {
            LaserOptions opt;
            const FieldFile field = load_field_file(cfg.data_dir + "/laser_field.txt");
            run.dbench = laser_env(field, opt);
            c.feedback = Feedback::instant;
            if (cfg.laser_worst_case)
                c.model_noise = NoiseModel::homoscedastic(laser_worst_case_variance(run.dbench));
        } else {
            throw std::runtime_error("unknown benchmark: " + cfg.benchmark);
        }
        c.zmethod = MaximizerMethod::credible;
        c.episodes = cfg.episodes > 0 ? cfg.episodes : run.dbench.default_episodes;
        c.horizon = cfg.horizon > 0 ? cfg.horizon : run.dbench.mdp.horizon;
    } else {
        if (cfg.feedback_set) c.feedback = cfg.feedback;
        else c.feedback = Feedback::instant;
        double noise = cfg.noise_var;
        if (noise <= 0.0) noise = c.feedback == Feedback::asynchronous ? 1e-4 : 1e-3;
        run.cbench = synthetic_env(cfg.benchmark, noise);
        c.zmethod = c.feedback == Feedback::asynchronous ? MaximizerMethod::thompson
                                                         : MaximizerMethod::ucb_batch;
        c.episodes = cfg.episodes > 0 ? cfg.episodes : 1;
        c.horizon = cfg.horizon > 0 ? cfg.horizon : 100;
    }
    if (cfg.feedback_set) c.feedback = cfg.feedback;
    if (cfg.zmethod_set) c.zmethod = cfg.zmethod;
    return run;
}

}  // namespace

const std::vector<std::string>& benchmark_registry() {
    static const std::vector<std::string> names = {
        "knorr",         "ypacarai",      "laser",  "branin2d", "hartmann3d",
        "hartmann6d",    "michalewicz2d", "michalewicz3d",      "levy4d"};
    return names;
}

bool benchmark_is_discrete(const std::string& name) {
    if (name == "knorr" || name == "ypacarai" || name == "laser") return true;
    const auto& reg = benchmark_registry();
    if (std::find(reg.begin(), reg.end(), name) == reg.end())
        throw std::runtime_error("unknown benchmark: " + name);
    return false;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

RunConfig RunConfig::from_config(const ConfigFile& cfg) {
    RunConfig rc;
    rc.benchmark = cfg.require("run.benchmark");
    rc.algorithm = parse_algorithm(cfg.get("run.algorithm", "mdp-bo"));
    if (cfg.has("run.feedback")) {
        rc.feedback = parse_feedback(cfg.require("run.feedback"));
        rc.feedback_set = true;
    }
    rc.delay = cfg.get_int("run.delay", 25);
    rc.episodes = cfg.get_int("run.episodes", 0);
    rc.horizon = cfg.get_int("run.horizon", 0);
    rc.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 0));
    rc.replicates = cfg.get_int("run.replicates", 1);
    rc.workers = cfg.get_int("run.workers", 0);
    rc.noise_var = cfg.get_double("run.noise_var", 0.0);
    rc.laser_worst_case = cfg.get_bool("run.laser_worst_case", false);
    rc.record_timing = cfg.get_bool("run.record_timing", true);
    rc.output_dir = cfg.get("run.output", "runs");
    rc.data_dir = cfg.get("run.data_dir", "data");

    const std::string alloc = cfg.get("objective.allocation", "xy");
    if (alloc == "xy") rc.allocation = Allocation::xy;
    else if (alloc == "g") rc.allocation = Allocation::g;
    else throw std::runtime_error("unknown allocation: " + alloc);
    if (cfg.has("objective.maximizer_set")) {
        rc.zmethod = parse_zmethod(cfg.require("objective.maximizer_set"));
        rc.zmethod_set = true;
    }
    rc.zsize = cfg.get_int("objective.K", 50);
    rc.beta = cfg.get_double("objective.beta", 2.0);

    rc.fw_components = cfg.get_int("planner.fw_components", 1);
    rc.fw_tolerance = cfg.get_double("planner.fw_tolerance", 1e-9);

    if (const char* env_out = std::getenv("TCBO_OUTPUT")) rc.output_dir = env_out;

    // continuous-domain keys; the named benchmarks pin dimension and box
    if (cfg.has("continuous.dimension") || cfg.has("continuous.box") ||
        cfg.has("continuous.delta_max")) {
        if (benchmark_is_discrete(rc.benchmark))
            throw std::runtime_error("[continuous] keys apply only to continuous benchmarks");
    }
    return rc;
}

CampaignResult run_replicate(const RunConfig& cfg, std::uint64_t seed,
                             const std::function<void(const StepRecord&)>& sink) {
    ResolvedRun run = resolve(cfg);
    run.campaign.seed = seed;
    run.campaign.record_sink = sink;
    if (run.discrete)
        return run_campaign(*run.dbench.env, run.dbench.mdp, run.dbench.kernel, run.campaign);
    return run_campaign(*run.cbench.env, run.cbench.system, run.cbench.kernel,
                        run.cbench.feature_count, run.campaign);
}

std::string record_to_json(const StepRecord& rec, const std::string& run_id, std::uint64_t seed,
                           bool record_timing) {
    ordered_json j;
    j["run"] = run_id;
    j["seed"] = seed;
    j["t"] = rec.t;
    j["h"] = rec.h;
    if (!rec.state.empty()) {
        j["state"] = rec.state;
        j["action"] = rec.action;
    } else {
        j["state"] = std::vector<double>(rec.state_coords.data(),
                                         rec.state_coords.data() + rec.state_coords.size());
        j["action"] = std::vector<double>(rec.action_coords.data(),
                                          rec.action_coords.data() + rec.action_coords.size());
    }
    if (rec.observed) j["y"] = rec.y;
    else j["y"] = nullptr;
    j["z_size"] = rec.z_size;
    j["utility"] = rec.utility;
    j["solve_ms"] = record_timing ? rec.solve_ms : 0.0;
    j["regret"] = rec.regret;
    j["identified"] = rec.identified;
    return j.dump();
}

void write_jsonl(const std::string& path, const std::string& run_id, std::uint64_t seed,
                 const std::vector<StepRecord>& records, bool record_timing) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write log file: " + path);
    for (const StepRecord& rec : records)
        out << record_to_json(rec, run_id, seed, record_timing) << "\n";
}

std::vector<StepRecord> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open log file: " + path);
    std::vector<StepRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const ordered_json j = ordered_json::parse(line);
        StepRecord rec;
        rec.t = j.at("t").get<int>();
        rec.h = j.at("h").get<int>();
        if (j.at("state").is_string()) {
            rec.state = j.at("state").get<std::string>();
            rec.action = j.at("action").get<std::string>();
        } else {
            const auto sv = j.at("state").get<std::vector<double>>();
            const auto av = j.at("action").get<std::vector<double>>();
            rec.state_coords = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
            rec.action_coords = Eigen::Map<const Eigen::VectorXd>(av.data(), static_cast<Eigen::Index>(av.size()));
        }
        rec.observed = !j.at("y").is_null();
        if (rec.observed) rec.y = j.at("y").get<double>();
        rec.z_size = j.at("z_size").get<int>();
        rec.utility = j.at("utility").get<double>();
        rec.solve_ms = j.at("solve_ms").get<double>();
        rec.regret = j.at("regret").get<double>();
        rec.identified = j.at("identified").get<bool>();
        records.push_back(std::move(rec));
    }
    return records;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * (static_cast<double>(values.size()) - 1.0);
    const size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

void summarize_directory(const std::string& input_dir, const std::string& output_csv) {
    std::vector<std::vector<StepRecord>> runs;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(input_dir))
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) runs.push_back(read_jsonl(f));

    std::ofstream out(output_csv);
    if (!out) throw std::runtime_error("cannot write summary file: " + output_csv);
    out << "step,regret_median,regret_q10,regret_q90,identified_rate,mean_solve_ms\n";
    if (runs.empty()) return;

    size_t steps = runs[0].size();
    for (const auto& r : runs) steps = std::min(steps, r.size());
    out.precision(17);
    for (size_t s = 0; s < steps; ++s) {
        std::vector<double> regrets;
        double identified = 0.0, solve = 0.0;
        for (const auto& r : runs) {
            regrets.push_back(r[s].regret);
            identified += r[s].identified ? 1.0 : 0.0;
            solve += r[s].solve_ms;
        }
        out << s << "," << quantile(regrets, 0.5) << "," << quantile(regrets, 0.1) << ","
            << quantile(regrets, 0.9) << "," << identified / static_cast<double>(runs.size())
            << "," << solve / static_cast<double>(runs.size()) << "\n";
    }
}

RunOutput run_benchmark(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    RunOutput output;
    output.replicate_files.resize(static_cast<size_t>(cfg.replicates));

    const std::string tag = cfg.benchmark + "-" + algorithm_name(cfg.algorithm) +
                            (cfg.laser_worst_case ? "-wc" : "");

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= cfg.replicates || failed.load()) return;
            const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "run_%03d.jsonl", r);
            const std::string path = (fs::path(cfg.output_dir) / suffix).string();
            const std::string run_id = tag + "-r" + std::to_string(r);

            // stream records so an aborted campaign still leaves a partial log
            std::vector<StepRecord> buffered;
            try {
                CampaignResult res = run_replicate(cfg, seed, [&](const StepRecord& rec) {
                    buffered.push_back(rec);
                });
                write_jsonl(path, run_id, seed, res.records, cfg.record_timing);
                output.replicate_files[static_cast<size_t>(r)] = path;
            } catch (const std::exception& e) {
                write_jsonl(path, run_id, seed, buffered, cfg.record_timing);
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                failure = std::string(e.what()) + " (partial log: " + path + ")";
                return;
            }
        }
    };

    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, cfg.replicates);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("replicate failed: " + failure);

    output.summary_file = (fs::path(cfg.output_dir) / "summary.csv").string();
    summarize_directory(cfg.output_dir, output.summary_file);
    return output;
}

}  // namespace tcbo
