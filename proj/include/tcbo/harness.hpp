#ifndef TCBO_HARNESS_HPP
#define TCBO_HARNESS_HPP

#include <string>
#include <vector>

#include "tcbo/config.hpp"
#include "tcbo/planner.hpp"

namespace tcbo {

struct RunConfig {
    std::string benchmark;
    Algorithm algorithm = Algorithm::mdp_bo;
    Feedback feedback = Feedback::episodic;
    bool feedback_set = false;  // false = benchmark default
    int delay = 25;
    int episodes = 0;  // 0 = benchmark default
    int horizon = 0;
    std::uint64_t seed = 0;
    int replicates = 1;
    int workers = 0;  // 0 = hardware concurrency
    Allocation allocation = Allocation::xy;
    MaximizerMethod zmethod = MaximizerMethod::credible;
    bool zmethod_set = false;
    int zsize = 50;
    double beta = 2.0;
    int fw_components = 1;
    double fw_tolerance = 1e-9;
    double noise_var = 0.0;  // 0 = benchmark default
    bool laser_worst_case = false;
    bool record_timing = true;
    std::string output_dir = "runs";
    std::string data_dir = "data";

    static RunConfig from_file(const std::string& path);
    static RunConfig from_config(const ConfigFile& cfg);
};

const std::vector<std::string>& benchmark_registry();
bool benchmark_is_discrete(const std::string& name);

// one replicate, in memory
CampaignResult run_replicate(const RunConfig& cfg, std::uint64_t seed,
                             const std::function<void(const StepRecord&)>& sink = {});

struct RunOutput {
    std::vector<std::string> replicate_files;
    std::string summary_file;
};

// replicates fanned out across workers, one JSONL per replicate plus a
// summary CSV
RunOutput run_benchmark(const RunConfig& cfg);

std::string record_to_json(const StepRecord& rec, const std::string& run_id, std::uint64_t seed,
                           bool record_timing);
std::vector<StepRecord> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::string& run_id, std::uint64_t seed,
                 const std::vector<StepRecord>& records, bool record_timing);

// step, regret_median, regret_q10, regret_q90, identified_rate, mean_solve_ms
void summarize_directory(const std::string& input_dir, const std::string& output_csv);

double quantile(std::vector<double> values, double q);  // linear interpolation

}  // namespace tcbo

#endif
