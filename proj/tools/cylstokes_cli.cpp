#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cylstokes/common.hpp"
#include "cylstokes/config.hpp"
#include "cylstokes/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

/// Applies leftover "--section.key=value" (or "--section.key value") arguments in order.
void apply_overrides(cylstokes::ExperimentConfig& cfg, const std::vector<std::string>& extras) {
  for (std::size_t k = 0; k < extras.size(); ++k) {
    const std::string& a = extras[k];
    if (a.rfind("--", 0) != 0 || a.find('.') == std::string::npos)
      throw cylstokes::ConfigError(a + ": unrecognized argument (expected --section.key=value)");
    std::string assignment = a.substr(2);
    if (assignment.find('=') == std::string::npos) {
      if (k + 1 == extras.size()) throw cylstokes::ConfigError(assignment + ": missing value");
      assignment += "=" + extras[++k];
    }
    cfg.set_flag(assignment);
  }
}

void print_summary(const cylstokes::SuiteResult& res) {
  std::cout << "\n" << std::left;
  std::cout << "experiment        checks  passed  result\n";
  for (const auto& r : res.reports) {
    int passed = 0;
    for (const auto& c : r.checks) passed += c.pass;
    std::string name = r.name;
    name.resize(18, ' ');
    std::string checks = std::to_string(r.checks.size()), ok = std::to_string(passed);
    checks.resize(8, ' ');
    ok.resize(8, ' ');
    std::cout << name << checks << ok << (r.pass() ? "pass" : "FAIL") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Stokes resolvent and semigroup experiments on a straight cylinder"};
  app.require_subcommand(1, 1);
  app.footer("Override any setting with --section.key=value, e.g. --grid.nx=64 --rates.beta=0.3.\n"
             "Reports go to run.output_dir, else $" + std::string(cylstokes::kOutputDirEnv) + ", else ./reports.\n"
             "Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.");
  std::string config_file;
  bool print_config = false;

  std::vector<std::pair<std::string, std::string>> commands;
  for (const auto& e : cylstokes::experiment_registry()) commands.emplace_back(e.name, e.help);
  commands.emplace_back("all", "every experiment, a suite summary and the plot script");
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", config_file, "JSON file of settings (flags override it)")->check(CLI::ExistingFile);
    sub->add_flag("--print-config", print_config, "print the effective configuration and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    cylstokes::ExperimentConfig cfg;
    if (!config_file.empty()) cfg.merge_file(config_file);
    apply_overrides(cfg, sub->remaining());
    cylstokes::validate(cfg);
    if (print_config) {
      std::cout << cfg.values().dump(2) << "\nconfig_hash " << cfg.hash() << "\n";
      return kExitPass;
    }
    const std::string out = cfg.output_dir();
    std::cout << "config_hash " << cfg.hash() << "  seed " << cfg.seed() << "  output " << out << "\n";
    const auto res = command == "all" ? cylstokes::run_all(cfg, out, std::cout)
                                      : cylstokes::run_suite(cfg, {command}, out, std::cout);
    print_summary(res);
    return res.pass() ? kExitPass : kExitViolation;
  } catch (const cylstokes::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cylstokes::InvalidArgument& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
}
