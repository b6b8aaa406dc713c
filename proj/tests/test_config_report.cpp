#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "cylstokes/common.hpp"
#include "cylstokes/config.hpp"
#include "cylstokes/experiments.hpp"
#include "cylstokes/report.hpp"

using namespace cylstokes;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("cylstokes_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("csv fields follow RFC 4180 quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("") == "");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_field("cr\r") == "\"cr\r\"");
}

TEST_CASE("numbers round-trip and non-finite values have fixed spellings") {
  for (double x : {0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("csv rows must match the header width") {
  CsvTable t{"t", {"a", "b"}, {}};
  t.add_row({"1", "2"});
  CHECK_THROWS(t.add_row({"1"}));
}

TEST_CASE("config flags override values with kind checking") {
  ExperimentConfig cfg;
  cfg.set_flag("grid.nx=64");
  CHECK(cfg.integer("grid.nx") == 64);
  cfg.set_flag("weight.spec=unit");
  CHECK(cfg.str("weight.spec") == "unit");
  cfg.set_flag("eig.sizes=[16,32]");
  CHECK(cfg.list("eig.sizes") == std::vector<double>{16, 32});
  CHECK_THROWS_AS(cfg.set_flag("grid.bogus=1"), ConfigError);
  CHECK_THROWS_AS(cfg.set_flag("nosection.nx=1"), ConfigError);
  CHECK_THROWS_AS(cfg.set_flag("grid.nx"), ConfigError);
  CHECK_THROWS_AS(cfg.set_flag("grid.nx=abc"), ConfigError);
  CHECK_THROWS_AS(cfg.set_flag("eig.sizes=3"), ConfigError);
  CHECK_THROWS_AS(cfg.integer("grid.lx"), ConfigError);
}

TEST_CASE("config errors name the field path") {
  ExperimentConfig cfg;
  cfg.set_flag("grid.nx=30");
  try {
    validate(cfg);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("grid.", 0) == 0);
  }
  ExperimentConfig bad_rate;
  bad_rate.set_flag("sector.fraction=1.5");
  CHECK_THROWS_WITH_AS(validate(bad_rate), doctest::Contains("sector.fraction"), ConfigError);
  CHECK_NOTHROW(validate(ExperimentConfig{}));
}

TEST_CASE("config files accept sections and dotted keys; flags override files") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  const fs::path file = dir / "c.json";
  std::ofstream(file) << R"({"grid": {"nx": 16, "ny": 16}, "run.seed": 7})";
  ExperimentConfig cfg;
  cfg.merge_file(file.string());
  CHECK(cfg.integer("grid.nx") == 16);
  CHECK(cfg.seed() == 7);
  cfg.set_flag("run.seed=9");
  CHECK(cfg.seed() == 9);
  std::ofstream(file) << "{not json";
  CHECK_THROWS_AS(cfg.merge_file(file.string()), ConfigError);
  CHECK_THROWS_AS(cfg.merge_file((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config hash tracks results-relevant settings only") {
  ExperimentConfig a, b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.set_flag("run.output_dir=/elsewhere");
  b.set_flag("run.threads=3");
  CHECK(a.hash() == b.hash());
  b.set_flag("run.seed=2");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("output directory: config, then environment, then default") {
  ::unsetenv(kOutputDirEnv);
  ExperimentConfig cfg;
  CHECK(cfg.output_dir() == "reports");
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  CHECK(cfg.output_dir() == "/tmp/from_env");
  cfg.set_flag("run.output_dir=/tmp/from_cfg");
  CHECK(cfg.output_dir() == "/tmp/from_cfg");
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("reports embed the config hash and seed in every file") {
  const fs::path dir = scratch("rep");
  ExperimentConfig cfg;
  ExperimentReport rep;
  rep.name = "demo";
  rep.summary["value"] = 1.5;
  rep.summary["bad"] = INFINITY;
  CsvTable t{"tab", {"x", "label"}, {}};
  t.add_row({"1", "a,b"});
  rep.tables = {t};
  rep.check("ok", true, "fine");
  write_report(rep, dir.string(), cfg);
  write_plot_script({rep}, dir.string(), cfg);

  const std::string csv = slurp(dir / "demo" / "tab.csv");
  CHECK(csv == "x,label,config_hash,seed\r\n1,\"a,b\"," + cfg.hash() + ",1\r\n");
  const auto j = nlohmann::json::parse(slurp(dir / "demo" / "summary.json"));
  CHECK(j["config_hash"] == cfg.hash());
  CHECK(j["seed"] == 1);
  CHECK(j["pass"] == true);
  CHECK(j["summary"]["bad"] == "inf");
  CHECK(slurp(dir / "plot_reports.py").find(cfg.hash()) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("report pass requires every check") {
  ExperimentReport rep;
  CHECK(rep.pass());
  rep.check("a", true, "");
  rep.check("b", false, "");
  CHECK_FALSE(rep.pass());
}

TEST_CASE("mode-solve refuses eta = 0 before solving") {
  ExperimentConfig cfg;
  cfg.set_flag("rates.beta=0");
  cfg.set_flag("mode.xi=0");
  CHECK_THROWS_WITH_AS(run_mode_solve(cfg), doctest::Contains("eta"), InvalidArgument);
}

TEST_CASE("eig experiment is deterministic and passes on the defaults") {
  ExperimentConfig cfg;
  const fs::path a = scratch("eig_a"), b = scratch("eig_b");
  std::ostringstream log;
  const auto ra = run_suite(cfg, {"eig"}, a.string(), log);
  const auto rb = run_suite(cfg, {"eig"}, b.string(), log);
  CHECK(ra.pass());
  CHECK(slurp(a / "eig" / "summary.json") == slurp(b / "eig" / "summary.json"));
  CHECK(slurp(a / "eig" / "thresholds.csv") == slurp(b / "eig" / "thresholds.csv"));
  CHECK_THROWS_AS(run_suite(cfg, {"nope"}, a.string(), log), ConfigError);
  fs::remove_all(a);
  fs::remove_all(b);
}
