#include "cylstokes/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

namespace cylstokes {

namespace fs = std::filesystem;

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("csv row width does not match the header of " + name);
  rows.push_back(std::move(row));
}

void ExperimentReport::check(std::string check_name, bool pass, std::string detail) {
  checks.push_back({std::move(check_name), pass, std::move(detail)});
}

bool ExperimentReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string csv_text(const CsvTable& table, const ExperimentConfig& cfg) {
  const std::string hash = cfg.hash(), seed = std::to_string(cfg.seed());
  std::string out;
  auto line = [&](const std::vector<std::string>& cells, const std::string& a, const std::string& b) {
    for (const auto& c : cells) out += csv_field(c) + ",";
    out += csv_field(a) + "," + csv_field(b) + "\r\n";
  };
  line(table.header, "config_hash", "seed");
  for (const auto& row : table.rows) line(row, hash, seed);
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::json sanitized(const nlohmann::json& j) {
  // Non-finite numbers have no JSON form; they are written as strings.
  if (j.is_number_float() && !std::isfinite(j.get<double>())) return format_number(j.get<double>());
  if (j.is_object() || j.is_array()) {
    nlohmann::json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = sanitized(*it);
    return out;
  }
  return j;
}

struct PlotSpec {
  std::string x, y, group;
  bool logx, logy;
};

const std::map<std::string, PlotSpec>& plot_specs() {
  static const std::map<std::string, PlotSpec> specs = {
      {"thresholds", {"h", "rel_error_alpha0", "", true, true}},
      {"ar_depth", {"depth", "ar_value", "weight", false, true}},
      {"mms", {"h", "error", "", true, true}},
      {"mode_sweep", {"radius", "ratio", "weight_id", true, true}},
      {"deriv_check", {"forcing", "rel_deviation", "point", false, true}},
      {"resolvent_sweep", {"radius", "product_estimate", "ray_angle", true, false}},
      {"rbound", {"xi_count", "estimate", "family", false, false}},
      {"decay_series", {"t", "norm", "beta", false, true}},
      {"maxreg", {"forcing", "ratio", "level", false, false}},
  };
  return specs;
}

}  // namespace

void write_report(const ExperimentReport& report, const std::string& root, const ExperimentConfig& cfg) {
  const fs::path dir = fs::path(root) / report.name;
  fs::create_directories(dir);
  nlohmann::json j;
  j["experiment"] = report.name;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed();
  j["pass"] = report.pass();
  j["summary"] = sanitized(report.summary);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  write_file(dir / "summary.json", j.dump(2) + "\n");
  for (const auto& t : report.tables) write_file(dir / (t.name + ".csv"), csv_text(t, cfg));
}

void write_plot_script(const std::vector<ExperimentReport>& reports, const std::string& root,
                       const ExperimentConfig& cfg) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# config_hash " + cfg.hash() + " seed " + std::to_string(cfg.seed()) + "\n";
  s += "# Plots the experiment CSVs next to this script: python3 plot_reports.py\n";
  s += "import os\nimport pandas as pd\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n";
  s += "HERE = os.path.dirname(os.path.abspath(__file__))\nPLOTS = [\n";
  for (const auto& r : reports)
    for (const auto& t : r.tables) {
      const auto it = plot_specs().find(t.name);
      if (it == plot_specs().end()) continue;
      const PlotSpec& p = it->second;
      s += "    ('" + r.name + "', '" + t.name + "', '" + p.x + "', '" + p.y + "', '" + p.group + "', " +
           (p.logx ? "True" : "False") + ", " + (p.logy ? "True" : "False") + "),\n";
    }
  s += "]\n\n";
  s += "for exp, table, x, y, group, logx, logy in PLOTS:\n";
  s += "    df = pd.read_csv(os.path.join(HERE, exp, table + '.csv'))\n";
  s += "    fig, ax = plt.subplots(figsize=(6, 4))\n";
  s += "    groups = df.groupby(group) if group else [('', df)]\n";
  s += "    for key, part in groups:\n";
  s += "        ax.plot(part[x], part[y], 'o-', ms=3, label=str(key) if group else None)\n";
  s += "    if logx:\n        ax.set_xscale('log')\n";
  s += "    if logy:\n        ax.set_yscale('log')\n";
  s += "    ax.set_xlabel(x)\n    ax.set_ylabel(y)\n    ax.set_title(exp + ': ' + table)\n";
  s += "    if group:\n        ax.legend(fontsize=7)\n";
  s += "    fig.tight_layout()\n";
  s += "    fig.savefig(os.path.join(HERE, exp, table + '.png'), dpi=120)\n";
  s += "    plt.close(fig)\n";
  fs::create_directories(root);
  write_file(fs::path(root) / "plot_reports.py", s);
}

}  // namespace cylstokes
