#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedcaus/ges.hpp"
#include "fedcaus/harness.hpp"
#include "fedcaus/io.hpp"
#include "fedcaus/scoring.hpp"

using namespace fedcaus;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfig = 2;

// Options shared by generate and run. Unset optionals leave the config
// file (or the built-in default) alone.
struct Common {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> seeds;
    std::optional<std::string> axis;
    std::optional<std::string> method;
    std::optional<double> dp_epsilon;
    std::optional<double> dp_sensitivity;
    std::optional<int> jobs;
    std::optional<std::uint64_t> root_seed;
    std::vector<int> d, n, k;
    bool heterogeneous = false;

    void attach(CLI::App* app, bool run_flags) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--out", out, "output directory");
        app->add_option("--seeds", seeds, "seeds per cell");
        app->add_option("--axis", axis, "samples | variables | clients");
        app->add_option("--jobs", jobs, "worker threads");
        app->add_option("--root-seed", root_seed, "root seed (default: $FEDCAUS_SEED or 0)");
        app->add_option("--d", d, "variable grid");
        app->add_option("--n", n, "sample-size grid");
        app->add_option("--k", k, "client-count grid");
        app->add_flag("--heterogeneous", heterogeneous, "per-client n drawn from {1000, 2000, 5000}");
        if (run_flags) {
            app->add_option("--method", method, "ges | oracle");
            app->add_option("--dp-epsilon", dp_epsilon, "Laplace privacy budget per query (0: off)");
            app->add_option("--dp-sensitivity", dp_sensitivity, "regret sensitivity bound");
        }
    }

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (const char* env = std::getenv("FEDCAUS_SEED")) {
            try {
                cfg.root_seed = std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError("FEDCAUS_SEED is not an unsigned integer");
            }
        }
        if (!config.empty()) cfg = parse_config_json(read_file(config), cfg);
        if (out) cfg.out = *out;
        if (seeds) cfg.seeds = *seeds;
        if (axis) cfg.axis = parse_axis(*axis);
        if (method) cfg.method = *method;
        if (dp_epsilon) cfg.dp_epsilon = *dp_epsilon;
        if (dp_sensitivity) cfg.dp_sensitivity = *dp_sensitivity;
        if (jobs) cfg.jobs = *jobs;
        if (root_seed) cfg.root_seed = *root_seed;
        if (!d.empty()) cfg.d_grid = d;
        if (!n.empty()) cfg.n_grid = n;
        if (!k.empty()) cfg.k_grid = k;
        if (heterogeneous) cfg.heterogeneous = true;
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated causal discovery under heterogeneous interventions"};
    app.require_subcommand(1);

    Common gen_opts, run_opts;
    auto* gen = app.add_subcommand("generate", "write scenarios and client datasets");
    gen_opts.attach(gen, false);

    auto* run = app.add_subcommand("run", "federate every cell and seed, write results.csv");
    run_opts.attach(run, true);
    std::vector<std::string> cell;
    std::optional<std::uint64_t> replay_seed;
    run->add_option("--cell", cell, "replay one cell: d=.. k=.. n=..|het");
    run->add_option("--seed", replay_seed, "seed index to replay (with --cell)");

    auto* report = app.add_subcommand("report", "summarise a results file");
    std::string results;
    std::optional<std::string> report_out;
    report->add_option("results", results, "results.csv")->required();
    report->add_option("--out", report_out, "output directory (default: next to results)");

    auto* discover = app.add_subcommand("discover-local", "run GES on one client dataset");
    std::string data_path;
    int max_parents = -1;
    discover->add_option("--data", data_path, "client CSV")->required();
    discover->add_option("--max-parents", max_parents, "parent bound (-1: none)");

    auto* fixture = app.add_subcommand("fixture", "write a worked-example scenario");
    std::string fixture_name;
    std::string fixture_out = ".";
    int fixture_n = 1000;
    std::uint64_t fixture_seed = 1;
    fixture->add_option("name", fixture_name, "triangle | five-node")->required();
    fixture->add_option("--out", fixture_out, "output directory");
    fixture->add_option("--samples", fixture_n, "samples per client");
    fixture->add_option("--seed", fixture_seed, "weight and sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*gen) {
            cmd_generate(gen_opts.build());
            return kOk;
        }
        if (*run) {
            const ExperimentConfig cfg = run_opts.build();
            if (!cell.empty() || replay_seed) {
                if (cell.empty() || !replay_seed) throw ConfigError("--cell and --seed go together");
                RunOutput r = run_one(cfg, parse_cell(cell), *replay_seed);
                std::cout << results_csv_header() << format_run_record(r.record);
                return r.record.ok ? kOk : kPartial;
            }
            return cmd_run(cfg);
        }
        if (*report) {
            const std::filesystem::path in(results);
            cmd_report(in, report_out ? std::filesystem::path(*report_out) : in.parent_path());
            return kOk;
        }
        if (*discover) {
            const Dataset data = parse_dataset_csv(read_file(data_path));
            const BicScorer scorer(data);
            GesConfig g;
            g.max_parents = max_parents;
            Pdag out = ges_fit(scorer, g).pdag();
            out.set_labels(data.labels);
            std::cout << format_graph(out);
            return kOk;
        }
        if (*fixture) {
            const Scenario sc = fixture_scenario(fixture_name, fixture_n, fixture_seed);
            const std::filesystem::path dir(fixture_out);
            write_file(dir / "scenario.json", format_scenario_json(sc));
            for (const auto& c : sc.clients)
                write_file(dir / ("client_" + std::to_string(c.client_id) + ".csv"),
                           format_dataset_csv(sample_client(sc.sem, c)));
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPartial;
    }
    return kOk;
}
