#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cylstokes/config.hpp"

namespace cylstokes {

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF; quotes doubled.
std::string csv_field(std::string_view text);
/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CsvTable> tables;
  std::vector<Check> checks;

  void check(std::string check_name, bool pass, std::string detail);
  bool pass() const;
};

/// Writes <root>/<name>/summary.json and one CSV per table. Every file carries the config
/// hash and the seed; nothing time-dependent is written.
void write_report(const ExperimentReport& report, const std::string& root, const ExperimentConfig& cfg);
/// Writes <root>/plot_reports.py, a matplotlib script over the CSVs of the given reports.
void write_plot_script(const std::vector<ExperimentReport>& reports, const std::string& root,
                       const ExperimentConfig& cfg);
/// The CSV text of a table with the provenance columns appended.
std::string csv_text(const CsvTable& table, const ExperimentConfig& cfg);

}  // namespace cylstokes
