#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedcaus/federation.hpp"
#include "fedcaus/ges.hpp"
#include "fedcaus/records.hpp"
#include "fedcaus/scm.hpp"

namespace fedcaus {

enum class SweepAxis { Samples, Variables, Clients };
const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The swept axis walks its whole grid; the other two use the first entry
/// of theirs.
struct ExperimentConfig {
    SweepAxis axis = SweepAxis::Samples;
    std::vector<int> d_grid{10};
    std::vector<int> n_grid{500, 1000, 2000, 5000};
    std::vector<int> k_grid{5};
    int seeds = 10;
    /// Per-client sample sizes drawn from {1000, 2000, 5000}; n is ignored.
    bool heterogeneous = false;
    std::string method = "ges";
    double dp_epsilon = 0.0;  // 0: noiseless
    double dp_sensitivity = 1.0;
    double structural_fraction = 0.2;
    bool prioritize_shielded = true;
    std::uint64_t root_seed = 0;
    int jobs = 1;
    std::filesystem::path out = "fedcaus-out";
    FederationConfig federation;
    GesConfig ges;

    void validate() const;
};

/// Keys: axis, d, n, k (number or array), seeds, heterogeneous, method,
/// dp_epsilon, dp_sensitivity, structural_fraction, prioritize_shielded,
/// root_seed, jobs, out, tolerance, max_parents. Missing keys keep `base`.
ExperimentConfig parse_config_json(std::string_view text, ExperimentConfig base = {});

struct Cell {
    int d = 0;
    int k = 0;
    int n = 0;  // 0: heterogeneous
    bool operator==(const Cell&) const = default;
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg);
/// Directory name, e.g. "d10_k5_n1000" or "d10_k5_nhet".
std::string cell_key(const Cell& cell);
/// "d=10 k=5 n=het" style assignments, as taken by the replay flag.
Cell parse_cell(const std::vector<std::string>& assignments);

std::uint64_t run_seed(std::uint64_t root, const Cell& cell, std::uint64_t seed_index);
Scenario make_scenario(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed_index);

struct RunOutput {
    RunRecord record;
    std::vector<MoveRecord> log;
    Pdag cpdag;
    Pdag phi;
};

/// Samples the clients, discovers locally, federates and scores both
/// outputs. Failures come back as a record with ok = false.
RunOutput run_one(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed_index);

/// Writes <out>/<cell>/seed_<i>/{scenario.json, client_<k>.csv}.
void cmd_generate(const ExperimentConfig& cfg);

/// Writes <out>/results.csv and a move log per run. Rows land in
/// (cell, seed) order whatever the completion order. Returns 0 if every run
/// succeeded and 1 otherwise.
int cmd_run(const ExperimentConfig& cfg);

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // population
};
Stat mean_std(const std::vector<double>& values);

struct CellSummary {
    std::string axis;
    int d = 0;
    int k = 0;
    int n = 0;
    std::string method;
    double dp_epsilon = 0.0;
    int runs = 0;
    int failed = 0;
    Stat shd_cpdag, f1_cpdag, shd_phi, f1_phi;
};

/// Groups ok rows by cell; failed rows only bump the failure count.
std::vector<CellSummary> summarize(const std::vector<RunRecord>& records);

/// Reads a results file and writes summary.txt plus, per axis present,
/// plot_<axis>_shd.csv and plot_<axis>_f1.csv into out_dir.
void cmd_report(const std::filesystem::path& results, const std::filesystem::path& out_dir);

/// Worked examples as ready-made scenarios: "triangle" or "five-node".
/// Edge weights are positive and at least 0.5.
Scenario fixture_scenario(std::string_view name, int samples_per_client = 1000, std::uint64_t seed = 1);

}  // namespace fedcaus
