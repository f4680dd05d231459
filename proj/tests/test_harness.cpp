#include <doctest.h>

#include <filesystem>
#include <set>

#include "fedcaus/harness.hpp"
#include "fedcaus/io.hpp"
#include "fedcaus/pdag.hpp"
#include "helpers.hpp"

using namespace fedcaus;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fedcaus_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig small(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.axis = SweepAxis::Samples;
    cfg.d_grid = {5};
    cfg.k_grid = {3};
    cfg.n_grid = {300};
    cfg.seeds = 3;
    cfg.root_seed = 11;
    cfg.out = out;
    return cfg;
}

std::vector<RunRecord> without_timing(std::vector<RunRecord> rows) {
    for (auto& r : rows) r.wall_ms = 0.0;
    return rows;
}

RunRecord row(int shd) {
    RunRecord r;
    r.axis = "samples";
    r.d = 5;
    r.k = 3;
    r.n = 100;
    r.method = "ges";
    r.shd_cpdag = shd;
    r.shd_phi = shd;
    return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing and validation") {
    const auto cfg = parse_config_json(R"({"axis": "clients", "k": [2, 4], "d": 7, "seeds": 2, "dp_epsilon": 0.5})");
    CHECK(cfg.axis == SweepAxis::Clients);
    CHECK(cfg.k_grid == std::vector<int>{2, 4});
    CHECK(cfg.d_grid == std::vector<int>{7});
    CHECK(cfg.dp_epsilon == 0.5);
    CHECK_THROWS_AS(parse_config_json(R"({"colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_axis("depth"), ConfigError);
    ExperimentConfig het;
    het.heterogeneous = true;
    CHECK_THROWS_AS(het.validate(), ConfigError);
    het.axis = SweepAxis::Variables;
    CHECK_NOTHROW(het.validate());
}

TEST_CASE("cells") {
    ExperimentConfig cfg;
    cfg.axis = SweepAxis::Variables;
    cfg.d_grid = {4, 6};
    const auto cells = expand_cells(cfg);
    CHECK(cells == std::vector<Cell>{{4, 5, 500}, {6, 5, 500}});
    cfg.heterogeneous = true;
    CHECK(cell_key(expand_cells(cfg)[0]) == "d4_k5_nhet");
    CHECK(parse_cell({"d=4", "k=5", "n=het"}) == Cell{4, 5, 0});
    CHECK(parse_cell({"d=8", "k=2", "n=100"}) == Cell{8, 2, 100});
    CHECK_THROWS_AS(parse_cell({"d=8"}), ConfigError);
}

TEST_CASE("heterogeneous sample sizes") {
    ExperimentConfig cfg;
    cfg.axis = SweepAxis::Clients;
    cfg.heterogeneous = true;
    std::set<int> seen;
    for (std::uint64_t s = 0; s < 20; ++s)
        for (const auto& c : make_scenario(cfg, {10, 5, 0}, s).clients) seen.insert(c.sample_count);
    CHECK(seen == std::set<int>{1000, 2000, 5000});
}

TEST_CASE("generate is byte-reproducible") {
    const fs::path a = scratch("gen_a"), b = scratch("gen_b");
    ExperimentConfig cfg = small(a);
    cmd_generate(cfg);
    cfg.out = b;
    cmd_generate(cfg);
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        CHECK(read_file(e.path()) == read_file(b / fs::relative(e.path(), a)));
    }
    CHECK(files == 3 * 4);
    const Scenario sc = parse_scenario_json(read_file(a / "d5_k3_n300" / "seed_0" / "scenario.json"));
    CHECK(sc.clients.size() == 3);
}

TEST_CASE("run is deterministic and replayable") {
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    ExperimentConfig cfg = small(a);
    CHECK(cmd_run(cfg) == 0);
    cfg.out = b;
    cfg.jobs = 3;
    CHECK(cmd_run(cfg) == 0);
    const auto ra = parse_results_csv(read_file(a / "results.csv"));
    const auto rb = parse_results_csv(read_file(b / "results.csv"));
    REQUIRE(ra.size() == 3);
    CHECK(without_timing(ra) == without_timing(rb));
    CHECK(read_file(a / "d5_k3_n300" / "seed_2" / "moves.jsonl") == read_file(b / "d5_k3_n300" / "seed_2" / "moves.jsonl"));
    CHECK(parse_graph(read_file(a / "d5_k3_n300" / "seed_1" / "phi_cpdag.txt")).node_count() == 5);

    const RunOutput replay = run_one(cfg, {5, 3, 300}, 1);
    CHECK(without_timing({replay.record}) == without_timing({ra[1]}));

    cfg.seeds = 0;
    cfg.out = scratch("run_empty");
    CHECK(cmd_run(cfg) == 0);
    CHECK(read_file(cfg.out / "results.csv") == results_csv_header());
}

TEST_CASE("report statistics and plot files") {
    const auto s = summarize({row(2), row(4)});
    REQUIRE(s.size() == 1);
    CHECK(s[0].shd_cpdag.mean == 3.0);
    CHECK(s[0].shd_cpdag.std == 1.0);
    CHECK(summarize({row(7)})[0].shd_phi.std == 0.0);
    RunRecord failed = row(0);
    failed.ok = false;
    const auto f = summarize({row(2), failed});
    CHECK(f[0].runs == 2);
    CHECK(f[0].failed == 1);
    CHECK(f[0].shd_cpdag.mean == 2.0);

    const fs::path dir = scratch("report");
    std::string text = results_csv_header();
    for (int shd : {1, 3}) {
        RunRecord r = row(shd);
        text += format_run_record(r);
        r.axis = "clients";
        r.k = 2 + shd;
        text += format_run_record(r);
    }
    write_file(dir / "results.csv", text);
    cmd_report(dir / "results.csv", dir);
    CHECK(fs::exists(dir / "summary.txt"));
    const std::string columns = ",method,dp_epsilon,cpdag_mean,cpdag_std,phi_cpdag_mean,phi_cpdag_std\n";
    for (const std::string axis : {"samples", "clients"})
        for (const std::string metric : {"shd", "f1"}) {
            const fs::path file = dir / ("plot_" + axis + "_" + metric + ".csv");
            REQUIRE(fs::exists(file));
            CHECK(read_file(file).rfind((axis == "samples" ? "n" : "k") + columns, 0) == 0);
        }
    CHECK(read_file(dir / "plot_samples_shd.csv").find("100,ges,0.0000,2.0000,1.0000,2.0000,1.0000") != std::string::npos);
}

TEST_CASE("fixtures") {
    const Scenario t = fixture_scenario("triangle");
    CHECK(t.sem.dag == th::dag(3, "A -> B, B -> C, A -> C"));
    CHECK(t.family() == InterventionFamily{{{}, {{{1, {0}}}, {}}}});
    CHECK_THROWS_AS(fixture_scenario("square"), ConfigError);
}

TEST_CASE("refinement never hurts with oracle local graphs") {
    ExperimentConfig cfg;
    cfg.method = "oracle";
    cfg.root_seed = 3;
    int better_or_equal = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const RunOutput out = run_one(cfg, {6, 3, 5000}, s);
        REQUIRE(out.record.ok);
        better_or_equal += out.record.shd_phi <= out.record.shd_cpdag;
    }
    CHECK(better_or_equal == 20);
}

}  // TEST_SUITE
