#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedcaus/graph.hpp"
#include "fedcaus/records.hpp"
#include "fedcaus/scm.hpp"

namespace fedcaus {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Edge-list text:
///
///     pdag d=3 [labels=A,B,C]
///     0 -> 2
///     1 -- 2
///
/// Endpoints are labels, 0-based indices, or single letters A..Z.
/// Blank lines and '#' comments are skipped.
Pdag parse_graph(std::string_view text);
std::string format_graph(const Pdag& g);

/// Header row of labels, then one sample per row with 17 significant digits.
Dataset parse_dataset_csv(std::string_view text);
std::string format_dataset_csv(const Dataset& data);

std::string format_scenario_json(const Scenario& scenario);
Scenario parse_scenario_json(std::string_view text);

inline constexpr std::string_view kResultsSchema = "# fedcaus-results v1";
std::string results_csv_header();
std::string format_run_record(const RunRecord& r);
/// Parses a full results file (schema line, header, rows).
std::vector<RunRecord> parse_results_csv(std::string_view text);

std::string format_move_jsonl(const MoveRecord& m);
MoveRecord parse_move_jsonl(std::string_view line);

std::string read_file(const std::filesystem::path& path);
/// Throws std::runtime_error with the path on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace fedcaus
