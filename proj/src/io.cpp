#include "fedcaus/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fedcaus {

using nlohmann::json;

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
    std::string_view text;
    int column;  // 1-based
};

std::vector<Token> split_ws(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

std::vector<std::string_view> split_char(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t end = s.find(sep, start);
        if (end == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

bool parse_int(std::string_view s, long long& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool valid_label(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char ch) {
        return std::isgraph(static_cast<unsigned char>(ch)) && ch != ',' && ch != '"';
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// Graph edge list

Pdag parse_graph(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t li = 0;
    auto skip = [](std::string_view l) {
        auto toks = split_ws(l);
        return toks.empty() || toks.front().text.front() == '#';
    };
    while (li < lines.size() && skip(lines[li])) ++li;
    if (li >= lines.size()) throw ParseError(1, 1, "missing 'pdag d=<n>' header");

    const int header_line = static_cast<int>(li) + 1;
    const auto head = split_ws(lines[li]);
    if (head[0].text != "pdag") throw ParseError(header_line, head[0].column, "expected 'pdag'");
    if (head.size() < 2 || head[1].text.substr(0, 2) != "d=")
        throw ParseError(header_line, head.size() < 2 ? static_cast<int>(lines[li].size()) + 1 : head[1].column,
                         "expected 'd=<n>'");
    long long d = 0;
    if (!parse_int(head[1].text.substr(2), d) || d <= 0 || d > 100000)
        throw ParseError(header_line, head[1].column, "invalid node count");
    std::vector<std::string> labels;
    for (std::size_t t = 2; t < head.size(); ++t) {
        if (head[t].text.substr(0, 7) != "labels=" || !labels.empty())
            throw ParseError(header_line, head[t].column, "unknown header token '" + std::string(head[t].text) + "'");
        for (auto part : split_char(head[t].text.substr(7), ',')) {
            if (!valid_label(part)) throw ParseError(header_line, head[t].column, "invalid label");
            labels.emplace_back(part);
        }
        if (static_cast<long long>(labels.size()) != d)
            throw ParseError(header_line, head[t].column, "label count differs from node count");
        if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
            throw ParseError(header_line, head[t].column, "duplicate label");
    }

    Pdag g(static_cast<int>(d));
    if (!labels.empty()) g.set_labels(labels);
    const auto names = g.labels();

    auto resolve = [&](const Token& tok, int line) -> int {
        for (int i = 0; i < static_cast<int>(d); ++i)
            if (names[i] == tok.text) return i;
        long long idx = 0;
        if (parse_int(tok.text, idx)) {
            if (idx < 0 || idx >= d) throw ParseError(line, tok.column, "node index out of range");
            return static_cast<int>(idx);
        }
        if (tok.text.size() == 1 && tok.text[0] >= 'A' && tok.text[0] <= 'Z' && labels.empty()) {
            const int idx2 = tok.text[0] - 'A';
            if (idx2 >= d) throw ParseError(line, tok.column, "node letter out of range");
            return idx2;
        }
        throw ParseError(line, tok.column, "unknown node '" + std::string(tok.text) + "'");
    };

    for (++li; li < lines.size(); ++li) {
        const int line = static_cast<int>(li) + 1;
        if (skip(lines[li])) continue;
        const auto toks = split_ws(lines[li]);
        if (toks.size() != 3) throw ParseError(line, toks.front().column, "expected '<node> -> <node>' or '<node> -- <node>'");
        const int i = resolve(toks[0], line);
        const int j = resolve(toks[2], line);
        if (toks[1].text != "->" && toks[1].text != "--")
            throw ParseError(line, toks[1].column, "unknown edge token '" + std::string(toks[1].text) + "'");
        if (i == j) throw ParseError(line, toks[2].column, "self-loop");
        if (g.adjacent(i, j)) throw ParseError(line, toks[0].column, "duplicate pair");
        if (toks[1].text == "->")
            g.add_directed(i, j);
        else
            g.add_undirected(i, j);
    }
    return g;
}

std::string format_graph(const Pdag& g) {
    std::ostringstream os;
    const int d = g.node_count();
    os << "pdag d=" << d;
    const bool named = g.has_custom_labels();
    if (named) {
        os << " labels=";
        for (int i = 0; i < d; ++i) os << (i ? "," : "") << g.label(i);
    }
    os << '\n';
    auto name = [&](int i) { return named ? g.label(i) : std::to_string(i); };
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            switch (g.mark(i, j)) {
                case EdgeMark::Absent: break;
                case EdgeMark::Undirected: os << name(i) << " -- " << name(j) << '\n'; break;
                case EdgeMark::Forward: os << name(i) << " -> " << name(j) << '\n'; break;
                case EdgeMark::Backward: os << name(j) << " -> " << name(i) << '\n'; break;
            }
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Dataset CSV

Dataset parse_dataset_csv(std::string_view text) {
    auto lines = split_lines(text);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(1, 1, "missing header row");
    Dataset out;
    for (auto part : split_char(lines[0], ',')) {
        if (!valid_label(part)) throw ParseError(1, 1, "invalid column label");
        out.labels.emplace_back(part);
    }
    const auto d = static_cast<Eigen::Index>(out.labels.size());
    const auto n = static_cast<Eigen::Index>(lines.size() - 1);
    out.values.resize(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const int line = static_cast<int>(r) + 2;
        const auto cells = split_char(lines[r + 1], ',');
        if (static_cast<Eigen::Index>(cells.size()) != d)
            throw ParseError(line, 1, "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                          " fields, expected " + std::to_string(d));
        int column = 1;
        for (Eigen::Index c = 0; c < d; ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v) || !std::isfinite(v))
                throw ParseError(line, column, "row " + std::to_string(r) + ": invalid number");
            out.values(r, c) = v;
            column += static_cast<int>(cells[c].size()) + 1;
        }
    }
    return out;
}

std::string format_dataset_csv(const Dataset& data) {
    std::string out;
    for (int c = 0; c < data.cols(); ++c) {
        if (c) out += ',';
        out += c < static_cast<int>(data.labels.size()) ? data.labels[c] : "V" + std::to_string(c + 1);
    }
    out += '\n';
    for (int r = 0; r < data.rows(); ++r) {
        for (int c = 0; c < data.cols(); ++c) {
            if (c) out += ',';
            out += fmt17(data.values(r, c));
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario JSON

std::string format_scenario_json(const Scenario& s) {
    json j;
    j["format"] = "fedcaus-scenario";
    j["version"] = 1;
    j["dag"] = format_graph(s.sem.dag);
    json weights = json::array();
    const int d = s.sem.node_count();
    for (int from = 0; from < d; ++from)
        for (int to = 0; to < d; ++to)
            if (s.sem.weights(from, to) != 0.0) weights.push_back({from, to, s.sem.weights(from, to)});
    j["weights"] = weights;
    j["noise_std"] = std::vector<double>(s.sem.noise_std.data(), s.sem.noise_std.data() + d);
    json clients = json::array();
    for (const auto& c : s.clients) {
        json cj;
        cj["id"] = c.client_id;
        cj["n"] = c.sample_count;
        cj["seed"] = c.rng_seed;
        json st = json::array();
        for (const auto& t : c.targets.structural) st.push_back({{"node", t.node}, {"removed", t.removed_parents}});
        json pt = json::array();
        for (const auto& t : c.targets.parametric)
            pt.push_back({{"node", t.node}, {"mean_shift", t.mean_shift}, {"noise_std", t.noise_std}});
        cj["structural"] = st;
        cj["parametric"] = pt;
        clients.push_back(cj);
    }
    j["clients"] = clients;
    return j.dump(2) + "\n";
}

Scenario parse_scenario_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, static_cast<int>(e.byte), e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "fedcaus-scenario") throw ParseError(0, 0, "not a scenario file");
        if (j.at("version").get<int>() != 1) throw ParseError(0, 0, "unsupported scenario version");
        Pdag g = parse_graph(j.at("dag").get<std::string>());
        if (!g.is_dag()) throw ParseError(0, 0, "scenario graph is not a DAG");
        Scenario s;
        const int d = g.node_count();
        s.sem.dag = Dag(std::move(g));
        s.sem.weights = Eigen::MatrixXd::Zero(d, d);
        for (const auto& w : j.at("weights")) {
            const int from = w.at(0).get<int>(), to = w.at(1).get<int>();
            if (from < 0 || to < 0 || from >= d || to >= d) throw ParseError(0, 0, "weight index out of range");
            s.sem.weights(from, to) = w.at(2).get<double>();
        }
        const auto noise = j.at("noise_std").get<std::vector<double>>();
        if (static_cast<int>(noise.size()) != d) throw ParseError(0, 0, "noise_std length differs from node count");
        s.sem.noise_std = Eigen::Map<const Eigen::VectorXd>(noise.data(), d);
        validate_sem(s.sem);
        for (const auto& cj : j.at("clients")) {
            ClientScenario c;
            c.client_id = cj.at("id").get<int>();
            c.sample_count = cj.at("n").get<int>();
            c.rng_seed = cj.at("seed").get<std::uint64_t>();
            for (const auto& t : cj.at("structural"))
                c.targets.structural.push_back({t.at("node").get<int>(), t.at("removed").get<std::vector<int>>()});
            for (const auto& t : cj.at("parametric"))
                c.targets.parametric.push_back(
                    {t.at("node").get<int>(), t.at("mean_shift").get<double>(), t.at("noise_std").get<double>()});
            if (c.sample_count < 1) throw ParseError(0, 0, "client sample count must be positive");
            s.clients.push_back(std::move(c));
        }
        validate_family(s.sem.dag, s.family(), /*allow_no_observational=*/true);
        return s;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(0, 0, std::string("invalid scenario: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Results CSV

namespace {
constexpr std::string_view kResultsColumns =
    "axis,d,k,n,method,dp_epsilon,seed,status,shd_cpdag,f1_cpdag,shd_phi,f1_phi,rounds,queries,wall_ms,error";

std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}
}  // namespace

std::string results_csv_header() { return std::string(kResultsSchema) + "\n" + std::string(kResultsColumns) + "\n"; }

std::string format_run_record(const RunRecord& r) {
    std::ostringstream os;
    os << r.axis << ',' << r.d << ',' << r.k << ',' << r.n << ',' << r.method << ',' << fmt17(r.dp_epsilon) << ','
       << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << r.shd_cpdag << ',' << fmt17(r.f1_cpdag) << ','
       << r.shd_phi << ',' << fmt17(r.f1_phi) << ',' << r.rounds << ',' << r.queries << ',' << fmt17(r.wall_ms)
       << ',' << sanitize(r.error) << '\n';
    return os.str();
}

std::vector<RunRecord> parse_results_csv(std::string_view text) {
    auto lines = split_lines(text);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines[0] != kResultsSchema) throw ParseError(1, 1, "missing or unknown results schema line");
    if (lines.size() < 2 || lines[1] != kResultsColumns) throw ParseError(2, 1, "unexpected results header");
    std::vector<RunRecord> out;
    for (std::size_t li = 2; li < lines.size(); ++li) {
        const int line = static_cast<int>(li) + 1;
        const auto f = split_char(lines[li], ',');
        if (f.size() != 16) throw ParseError(line, 1, "expected 16 fields, got " + std::to_string(f.size()));
        RunRecord r;
        long long iv = 0;
        auto fail = [line](int field) { throw ParseError(line, field + 1, "malformed field " + std::to_string(field + 1)); };
        r.axis = std::string(f[0]);
        if (!parse_int(f[1], iv)) fail(1);
        r.d = static_cast<int>(iv);
        if (!parse_int(f[2], iv)) fail(2);
        r.k = static_cast<int>(iv);
        if (!parse_int(f[3], iv)) fail(3);
        r.n = static_cast<int>(iv);
        r.method = std::string(f[4]);
        if (!parse_double(f[5], r.dp_epsilon)) fail(5);
        if (!parse_u64(f[6], r.seed)) fail(6);
        if (f[7] != "ok" && f[7] != "failed") fail(7);
        r.ok = f[7] == "ok";
        if (!parse_int(f[8], iv)) fail(8);
        r.shd_cpdag = static_cast<int>(iv);
        if (!parse_double(f[9], r.f1_cpdag)) fail(9);
        if (!parse_int(f[10], iv)) fail(10);
        r.shd_phi = static_cast<int>(iv);
        if (!parse_double(f[11], r.f1_phi)) fail(11);
        if (!parse_u64(f[12], r.rounds)) fail(12);
        if (!parse_u64(f[13], r.queries)) fail(13);
        if (!parse_double(f[14], r.wall_ms)) fail(14);
        r.error = std::string(f[15]);
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Round log

std::string format_move_jsonl(const MoveRecord& m) {
    json j{{"round", m.round}, {"phase", m.phase}, {"operator", m.op}, {"worst_regret", m.worst_regret},
           {"accepted", m.accepted}};
    if (!std::isfinite(m.worst_regret)) j["worst_regret"] = nullptr;
    return j.dump() + "\n";
}

MoveRecord parse_move_jsonl(std::string_view line) {
    try {
        const json j = json::parse(line);
        MoveRecord m;
        m.round = j.at("round").get<std::uint64_t>();
        m.phase = j.at("phase").get<std::string>();
        m.op = j.at("operator").get<std::string>();
        m.worst_regret = j.at("worst_regret").is_null() ? std::nan("") : j.at("worst_regret").get<double>();
        m.accepted = j.at("accepted").get<bool>();
        return m;
    } catch (const std::exception& e) {
        throw ParseError(1, 1, std::string("invalid round log record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace fedcaus
