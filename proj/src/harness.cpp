#include "fedcaus/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "fedcaus/io.hpp"
#include "fedcaus/metrics.hpp"
#include "fedcaus/pdag.hpp"

namespace fedcaus {

using nlohmann::json;

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Samples: return "samples";
        case SweepAxis::Variables: return "variables";
        case SweepAxis::Clients: return "clients";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view name) {
    if (name == "samples") return SweepAxis::Samples;
    if (name == "variables") return SweepAxis::Variables;
    if (name == "clients") return SweepAxis::Clients;
    throw ConfigError("unknown axis '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    auto grid = [](const std::vector<int>& g, const char* name, int lo) {
        if (g.empty()) throw ConfigError(std::string(name) + " grid is empty");
        for (int v : g)
            if (v < lo) throw ConfigError(std::string(name) + " values must be at least " + std::to_string(lo));
    };
    grid(d_grid, "d", 2);
    grid(k_grid, "k", 2);
    if (!heterogeneous) grid(n_grid, "n", 3);
    if (heterogeneous && axis == SweepAxis::Samples) throw ConfigError("the samples axis needs homogeneous n");
    if (seeds < 0) throw ConfigError("seeds must be non-negative");
    if (method != "ges" && method != "oracle") throw ConfigError("method must be ges or oracle");
    if (dp_epsilon < 0.0 || !std::isfinite(dp_epsilon)) throw ConfigError("dp epsilon must be non-negative");
    if (!(dp_sensitivity > 0.0) || !std::isfinite(dp_sensitivity)) throw ConfigError("dp sensitivity must be positive");
    if (!(structural_fraction >= 0.0 && structural_fraction <= 1.0))
        throw ConfigError("structural fraction must lie in [0, 1]");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (!(federation.tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
}

ExperimentConfig parse_config_json(std::string_view text, ExperimentConfig cfg) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* known[] = {"axis",  "d",      "n",           "k",
                                  "seeds", "heterogeneous", "method", "dp_epsilon",
                                  "dp_sensitivity", "structural_fraction", "prioritize_shielded", "root_seed",
                                  "jobs",  "out",    "tolerance",   "max_parents"};
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ConfigError("unknown config key '" + key + "'");
    try {
        auto ints = [&](const char* key, std::vector<int>& dst) {
            if (!j.contains(key)) return;
            const auto& v = j.at(key);
            dst = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
        };
        if (j.contains("axis")) cfg.axis = parse_axis(j.at("axis").get<std::string>());
        ints("d", cfg.d_grid);
        ints("n", cfg.n_grid);
        ints("k", cfg.k_grid);
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<int>();
        if (j.contains("heterogeneous")) cfg.heterogeneous = j.at("heterogeneous").get<bool>();
        if (j.contains("method")) cfg.method = j.at("method").get<std::string>();
        if (j.contains("dp_epsilon")) cfg.dp_epsilon = j.at("dp_epsilon").get<double>();
        if (j.contains("dp_sensitivity")) cfg.dp_sensitivity = j.at("dp_sensitivity").get<double>();
        if (j.contains("structural_fraction")) cfg.structural_fraction = j.at("structural_fraction").get<double>();
        if (j.contains("prioritize_shielded")) cfg.prioritize_shielded = j.at("prioritize_shielded").get<bool>();
        if (j.contains("root_seed")) cfg.root_seed = j.at("root_seed").get<std::uint64_t>();
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("tolerance")) cfg.federation.tolerance = j.at("tolerance").get<double>();
        if (j.contains("max_parents")) {
            cfg.ges.max_parents = j.at("max_parents").get<int>();
            cfg.federation.max_parents = cfg.ges.max_parents;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
    const int n0 = cfg.heterogeneous ? 0 : cfg.n_grid.front();
    std::vector<Cell> out;
    switch (cfg.axis) {
        case SweepAxis::Samples:
            for (int n : cfg.n_grid) out.push_back({cfg.d_grid.front(), cfg.k_grid.front(), n});
            break;
        case SweepAxis::Variables:
            for (int d : cfg.d_grid) out.push_back({d, cfg.k_grid.front(), n0});
            break;
        case SweepAxis::Clients:
            for (int k : cfg.k_grid) out.push_back({cfg.d_grid.front(), k, n0});
            break;
    }
    return out;
}

std::string cell_key(const Cell& c) {
    return "d" + std::to_string(c.d) + "_k" + std::to_string(c.k) + "_n" + (c.n ? std::to_string(c.n) : "het");
}

Cell parse_cell(const std::vector<std::string>& assignments) {
    Cell c;
    bool seen_d = false, seen_k = false, seen_n = false;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("cell assignment '" + a + "' lacks '='");
        const std::string key = a.substr(0, eq), val = a.substr(eq + 1);
        auto number = [&]() {
            try {
                std::size_t used = 0;
                const int v = std::stoi(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                return v;
            } catch (const std::exception&) {
                throw ConfigError("cell value '" + val + "' is not an integer");
            }
        };
        if (key == "d") c.d = number(), seen_d = true;
        else if (key == "k") c.k = number(), seen_k = true;
        else if (key == "n") c.n = val == "het" ? 0 : number(), seen_n = true;
        else throw ConfigError("unknown cell key '" + key + "'");
    }
    if (!seen_d || !seen_k || !seen_n) throw ConfigError("a cell needs d, k and n");
    if (c.d < 2 || c.k < 2 || (c.n != 0 && c.n < 3)) throw ConfigError("cell values out of range");
    return c;
}

std::uint64_t run_seed(std::uint64_t root, const Cell& cell, std::uint64_t seed_index) {
    std::uint64_t s = derive_seed(root, static_cast<std::uint64_t>(cell.d));
    s = derive_seed(s, static_cast<std::uint64_t>(cell.k));
    s = derive_seed(s, static_cast<std::uint64_t>(cell.n));
    return derive_seed(s, seed_index);
}

Scenario make_scenario(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed_index) {
    const std::uint64_t s = run_seed(cfg.root_seed, cell, seed_index);
    const Dag g = erdos_renyi_dag(cell.d, cell.d, derive_seed(s, 0));
    Scenario out;
    out.sem = sample_weights(g, derive_seed(s, 1));
    const auto family = plan_interventions(g, cell.k, cfg.structural_fraction, derive_seed(s, 2), cfg.prioritize_shielded);
    std::mt19937_64 size_rng(derive_seed(s, 3));
    std::uniform_int_distribution<int> pick(0, 2);
    static constexpr int kSizes[] = {1000, 2000, 5000};
    for (int k = 0; k < cell.k; ++k) {
        ClientScenario c;
        c.client_id = k;
        c.sample_count = cell.n ? cell.n : kSizes[pick(size_rng)];
        c.targets = family.clients[static_cast<std::size_t>(k)];
        c.rng_seed = derive_seed(s, 10 + static_cast<std::uint64_t>(k));
        out.clients.push_back(std::move(c));
    }
    return out;
}

RunOutput run_one(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed_index) {
    RunOutput out;
    RunRecord& r = out.record;
    r.axis = axis_name(cfg.axis);
    r.d = cell.d;
    r.k = cell.k;
    r.n = cell.n;
    r.method = cfg.method;
    r.dp_epsilon = cfg.dp_epsilon;
    r.seed = seed_index;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Scenario sc = make_scenario(cfg, cell, seed_index);
        const Dag& truth = sc.sem.dag;
        const std::uint64_t s = run_seed(cfg.root_seed, cell, seed_index);
        std::vector<std::unique_ptr<ClientState>> clients;
        std::vector<RegretEndpoint*> endpoints;
        for (const auto& c : sc.clients) {
            auto scorer = std::make_shared<const BicScorer>(sample_client(sc.sem, c));
            const Cpdag oracle = cpdag_of(mutilate(truth, c.targets));
            Cpdag local = local_discovery(*scorer, cfg.method, &oracle, cfg.ges);
            std::optional<DpConfig> dp;
            if (cfg.dp_epsilon > 0.0)
                dp = DpConfig{cfg.dp_epsilon, cfg.dp_sensitivity, derive_seed(s, 100 + static_cast<std::uint64_t>(c.client_id))};
            clients.push_back(std::make_unique<ClientState>(c.client_id, std::move(scorer), std::move(local), dp));
            endpoints.push_back(clients.back().get());
        }
        IperiResult res = run_iperi(endpoints, cell.d, cfg.federation);
        const EvalResult ec = evaluate(res.cpdag.pdag(), truth);
        const EvalResult ep = evaluate(res.phi, truth);
        r.shd_cpdag = ec.shd;
        r.f1_cpdag = ec.f1;
        r.shd_phi = ep.shd;
        r.f1_phi = ep.f1;
        r.rounds = res.rounds;
        r.queries = res.queries;
        out.log = std::move(res.log);
        out.cpdag = res.cpdag.pdag();
        out.phi = std::move(res.phi);
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

std::filesystem::path run_dir(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed_index) {
    return cfg.out / cell_key(cell) / ("seed_" + std::to_string(seed_index));
}

struct Job {
    Cell cell;
    std::uint64_t seed;
};

std::vector<Job> all_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (const Cell& c : expand_cells(cfg))
        for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({c, static_cast<std::uint64_t>(s)});
    return jobs;
}

// Runs body(i) for i in [0, count) on `width` threads.
template <class F>
void parallel_for(std::size_t count, int width, F body) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < count; i = next++) body(i);
    };
    const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(width), count));
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// Writes rows in index order as soon as every earlier row has arrived.
class OrderedAppender {
public:
    explicit OrderedAppender(std::ofstream& out) : out_(out) {}
    void put(std::size_t index, std::string row) {
        std::lock_guard lock(mu_);
        pending_.emplace(index, std::move(row));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            out_ << pending_.begin()->second;
            out_.flush();
            pending_.erase(pending_.begin());
            ++next_;
        }
    }

private:
    std::ofstream& out_;
    std::mutex mu_;
    std::map<std::size_t, std::string> pending_;
    std::size_t next_ = 0;
};

}  // namespace

void cmd_generate(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto jobs = all_jobs(cfg);
    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
        const Scenario sc = make_scenario(cfg, jobs[i].cell, jobs[i].seed);
        const auto dir = run_dir(cfg, jobs[i].cell, jobs[i].seed);
        write_file(dir / "scenario.json", format_scenario_json(sc));
        for (const auto& c : sc.clients)
            write_file(dir / ("client_" + std::to_string(c.client_id) + ".csv"),
                       format_dataset_csv(sample_client(sc.sem, c)));
    });
}

int cmd_run(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out);
    const auto path = cfg.out / "results.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << results_csv_header();
    out.flush();
    OrderedAppender appender(out);
    const auto jobs = all_jobs(cfg);
    std::atomic<int> failures{0};
    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
        RunOutput r = run_one(cfg, jobs[i].cell, jobs[i].seed);
        if (!r.record.ok) ++failures;
        std::string log;
        for (const auto& m : r.log) log += format_move_jsonl(m);
        const auto dir = run_dir(cfg, jobs[i].cell, jobs[i].seed);
        try {
            write_file(dir / "moves.jsonl", log);
            if (r.record.ok) {
                write_file(dir / "cpdag.txt", format_graph(r.cpdag));
                write_file(dir / "phi_cpdag.txt", format_graph(r.phi));
            }
        } catch (const std::exception& e) {
            if (r.record.ok) ++failures;
            r.record.ok = false;
            r.record.error = e.what();
        }
        appender.put(i, format_run_record(r.record));
    });
    return failures > 0 ? 1 : 0;
}

Stat mean_std(const std::vector<double>& v) {
    Stat s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

std::vector<CellSummary> summarize(const std::vector<RunRecord>& records) {
    using Key = std::tuple<std::string, int, int, int, std::string, double>;
    std::map<Key, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) groups[{r.axis, r.d, r.k, r.n, r.method, r.dp_epsilon}].push_back(&r);
    std::vector<CellSummary> out;
    for (const auto& [key, rows] : groups) {
        CellSummary c;
        std::tie(c.axis, c.d, c.k, c.n, c.method, c.dp_epsilon) = key;
        std::vector<double> sc, fc, sp, fp;
        for (const RunRecord* r : rows) {
            ++c.runs;
            if (!r->ok) {
                ++c.failed;
                continue;
            }
            sc.push_back(r->shd_cpdag);
            fc.push_back(r->f1_cpdag);
            sp.push_back(r->shd_phi);
            fp.push_back(r->f1_phi);
        }
        c.shd_cpdag = mean_std(sc);
        c.f1_cpdag = mean_std(fc);
        c.shd_phi = mean_std(sp);
        c.f1_phi = mean_std(fp);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string x_value(const CellSummary& c) {
    if (c.axis == "samples") return c.n ? std::to_string(c.n) : "het";
    if (c.axis == "variables") return std::to_string(c.d);
    if (c.axis == "clients") return std::to_string(c.k);
    return "?";
}

}  // namespace

void cmd_report(const std::filesystem::path& results, const std::filesystem::path& out_dir) {
    const auto summary = summarize(parse_results_csv(read_file(results)));

    std::ostringstream table;
    table << "axis       d    k    n      method  eps       runs failed  shd_cpdag        shd_phi          "
             "f1_cpdag         f1_phi\n";
    for (const auto& c : summary) {
        char line[512];
        std::snprintf(line, sizeof line,
                      "%-10s %-4d %-4d %-6s %-7s %-9g %-4d %-6d  %7.3f +- %-6.3f %7.3f +- %-6.3f %6.3f +- %-6.3f "
                      "%6.3f +- %-6.3f\n",
                      c.axis.c_str(), c.d, c.k, c.n ? std::to_string(c.n).c_str() : "het", c.method.c_str(),
                      c.dp_epsilon, c.runs, c.failed, c.shd_cpdag.mean, c.shd_cpdag.std, c.shd_phi.mean,
                      c.shd_phi.std, c.f1_cpdag.mean, c.f1_cpdag.std, c.f1_phi.mean, c.f1_phi.std);
        table << line;
    }
    table << "(mean +- population std over successful runs)\n";
    write_file(out_dir / "summary.txt", table.str());

    std::map<std::string, std::vector<const CellSummary*>> by_axis;
    for (const auto& c : summary) by_axis[c.axis].push_back(&c);
    for (const auto& [axis, cells] : by_axis) {
        const std::string x_name = axis == "samples" ? "n" : axis == "variables" ? "d" : "k";
        std::string shd = x_name + ",method,dp_epsilon,cpdag_mean,cpdag_std,phi_cpdag_mean,phi_cpdag_std\n";
        std::string f1 = shd;
        for (const CellSummary* c : cells) {
            const std::string head = x_value(*c) + "," + c->method + "," + num(c->dp_epsilon) + ",";
            shd += head + num(c->shd_cpdag.mean) + "," + num(c->shd_cpdag.std) + "," + num(c->shd_phi.mean) + "," +
                   num(c->shd_phi.std) + "\n";
            f1 += head + num(c->f1_cpdag.mean) + "," + num(c->f1_cpdag.std) + "," + num(c->f1_phi.mean) + "," +
                  num(c->f1_phi.std) + "\n";
        }
        write_file(out_dir / ("plot_" + axis + "_shd.csv"), shd);
        write_file(out_dir / ("plot_" + axis + "_f1.csv"), f1);
    }
}

Scenario fixture_scenario(std::string_view name, int samples_per_client, std::uint64_t seed) {
    Pdag g;
    std::vector<ClientTargets> targets;
    if (name == "triangle") {
        g = Pdag(3, {"A", "B", "C"});
        g.add_directed(0, 1);
        g.add_directed(1, 2);
        g.add_directed(0, 2);
        targets = {{}, {{{1, {0}}}, {}}};
    } else if (name == "five-node") {
        g = Pdag(5, {"A", "B", "C", "D", "E"});
        g.add_directed(0, 1);
        g.add_directed(0, 2);
        g.add_directed(1, 2);
        g.add_directed(1, 3);
        g.add_directed(1, 4);
        g.add_directed(3, 4);
        targets = {{}, {{{1, {0}}}, {}}, {{{3, {1}}}, {}}};
    } else {
        throw ConfigError("unknown fixture '" + std::string(name) + "'");
    }
    Scenario sc;
    // Same-sign weights: no two paths can cancel, so the examples stay
    // faithful whatever the seed.
    sc.sem = sample_weights(Dag(std::move(g)), seed);
    sc.sem.weights = sc.sem.weights.unaryExpr([](double w) { return w == 0.0 ? 0.0 : std::max(std::abs(w), 0.5); });
    for (std::size_t k = 0; k < targets.size(); ++k) {
        ClientScenario c;
        c.client_id = static_cast<int>(k);
        c.sample_count = samples_per_client;
        c.targets = targets[k];
        c.rng_seed = derive_seed(seed, 10 + k);
        sc.clients.push_back(std::move(c));
    }
    return sc;
}

}  // namespace fedcaus
