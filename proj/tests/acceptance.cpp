// Exit gate: runs the full suite twice with one seed and judges each acceptance criterion
// from the in-memory reports of the first run, with tolerances pinned here.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cylstokes/common.hpp"
#include "cylstokes/config.hpp"
#include "cylstokes/experiments.hpp"

namespace fs = std::filesystem;
using cylstokes::ExperimentReport;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

double as_number(const json& v) {
  // Non-finite values are stored as strings.
  if (v.is_string()) return std::stod(v.get<std::string>());
  return v.get<double>();
}

bool check_passed(const ExperimentReport& r, const std::string& prefix) {
  bool found = false;
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) {
      found = true;
      if (!c.pass) return false;
    }
  return found;
}

/// Pins every setting an acceptance criterion names, so drifting defaults cannot weaken the gate.
cylstokes::ExperimentConfig acceptance_config() {
  cylstokes::ExperimentConfig cfg;
  const double pi = cylstokes::kPi;
  cfg.merge_json({{"grid", {{"lx", pi}, {"ly", pi}}},
                  {"weight", {{"spec", "power:a=0.5,cx=1.5707963267948966,cy=1.5707963267948966"}}},
                  {"rates", {{"beta", 0.5}, {"alpha", 0.5}}},
                  {"sector", {{"fraction", 0.5}}},
                  {"norm", {{"q", 2.0}, {"r", 2.0}}},
                  {"eig", {{"sizes", {32, 64, 128}}}},
                  {"mode", {{"lambda_re", 1.0}, {"lambda_im", 2.0}, {"xi", 1.3}, {"mms_sizes", {16, 32, 64}}}},
                  {"sweep",
                   {{"radius_min", 1e-2},
                    {"radius_max", 1e4},
                    {"xi_min", 1e-2},
                    {"xi_max", 1e2},
                    {"ray_fractions", {-0.9, -0.45, 0.0, 0.45, 0.9}},
                    {"exponents", {2.0, 3.0}}}},
                  {"deriv", {{"forcings", 10}, {"delta", 1e-3}}},
                  {"rbound", {{"sanity_coefficients", {0.3, -1.7, 0.9, 2.4, -0.2, 1.1, 0.5, -2.0}}}},
                  {"decay", {{"initial_data", 10}, {"beta_fractions", {0.2, 0.5, 0.8}}, {"fit_from", 1.0}}},
                  {"maxreg", {{"forcings", 20}, {"p", {2.0, 4.0}}, {"alpha_t_fraction", 0.5}}},
                  {"run", {{"seed", 1}}}});
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative paths of all regular files under root, sorted.
std::vector<std::string> file_list(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main() {
  const auto cfg = acceptance_config();
  cylstokes::validate(cfg);
  const fs::path base = fs::temp_directory_path() / ("cylstokes_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  const fs::path dir_a = base / "a", dir_b = base / "b";

  std::ostringstream log_a, log_b;
  const auto run_a = cylstokes::run_all(cfg, dir_a.string(), log_a);
  const auto run_b = cylstokes::run_all(cfg, dir_b.string(), log_b);

  auto report = [&](const std::string& name) -> const ExperimentReport& {
    for (const auto& r : run_a.reports)
      if (r.name == name) return r;
    throw std::runtime_error("missing report " + name);
  };
  auto seconds = [&](const std::string& name) {
    for (std::size_t k = 0; k < run_a.reports.size(); ++k)
      if (run_a.reports[k].name == name) return run_a.seconds[k];
    return 1e300;
  };

  std::vector<std::pair<std::string, Verdict>> results;

  {
    const auto& s = report("eig").summary;
    Verdict v;
    const double a0 = s["alpha0"], a1 = s["alpha1"];
    const double o0 = s["alpha0_order"], o1 = s["alpha1_order"];
    const double e0 = s["alpha0_rel_error"], e1 = s["alpha1_rel_error"];
    v.require(std::abs(a0 - 2.0) / 2.0 <= 3e-3 && std::abs(a1 - 1.0) <= 3e-3,
              "alpha0 " + fmt(a0) + " -> 2, alpha1 " + fmt(a1) + " -> 1");
    v.require(o0 >= 1.8 && o1 >= 1.8, "orders " + fmt(o0) + ", " + fmt(o1) + " >= 1.8");
    v.require(e0 <= 3e-3 && e1 <= 3e-3, "rel errors at 128^2 " + fmt(e0) + ", " + fmt(e1) + " <= 0.003");
    v.require(seconds("eig") <= 10.0, "runtime " + fmt(seconds("eig")) + " s <= 10 s");
    results.emplace_back("1 eigenvalue thresholds", v);
  }
  {
    Verdict v;
    const double eps = report("eig").summary["eps_star_reference"];
    v.require(std::abs(eps - cylstokes::kPi / 4) <= 1e-12, "eps* = " + fmt(eps) + ", |eps* - pi/4| <= 1e-12");
    results.emplace_back("2 sector formula", v);
  }
  {
    Verdict v;
    const auto& r = report("mode-solve");
    const double order = r.summary["mms_order"];
    v.require(order >= 1.8, "order " + fmt(order) + " >= 1.8");
    v.require(check_passed(r, "block residuals"), "solve residuals within tolerance");
    v.require(seconds("mode-solve") <= 30.0, "runtime " + fmt(seconds("mode-solve")) + " s <= 30 s");
    results.emplace_back("3 manufactured-solution convergence", v);
  }
  {
    Verdict v;
    const auto& s = report("deriv-check").summary;
    const double dev = s["max_rel_deviation"];
    v.require(s["points"] == 5 && s["forcings"] == 10, "5 parameter points x 10 forcings");
    v.require(dev <= 1e-4, "max rel deviation " + fmt(dev) + " <= 1e-4");
    results.emplace_back("4 derivative system", v);
  }
  {
    Verdict v;
    const auto& verdicts = report("mode-sweep").summary["verdicts"];
    v.require(verdicts.size() == 4, std::to_string(verdicts.size()) + " (weight, r) combinations");
    double worst = 0.0;
    bool blowup = false;
    for (const auto& x : verdicts) {
      worst = std::max(worst, as_number(x["max_over_median"]));
      blowup = blowup || x["outer_decade_blowup"].get<bool>() || x["violation"].get<bool>();
    }
    v.require(worst <= 50.0, "worst max/median " + fmt(worst) + " <= 50");
    v.require(!blowup, "no monotone growth on the outermost decades");
    v.require(seconds("mode-sweep") <= 300.0, "runtime " + fmt(seconds("mode-sweep")) + " s <= 300 s");
    results.emplace_back("5 uniform parametrized estimate", v);
  }
  {
    Verdict v;
    const auto& s = report("resolvent-sweep").summary;
    const double ratio = as_number(s["max_over_median"]), dev = s["oracle_max_rel_deviation"];
    v.require(ratio <= 50.0, "max/median " + fmt(ratio) + " <= 50");
    v.require(dev <= 0.05, "dense oracle deviation " + fmt(dev) + " <= 0.05");
    results.emplace_back("6 resolvent bound", v);
  }
  {
    Verdict v;
    const auto& per_beta = report("decay").summary["per_beta"];
    v.require(per_beta.size() == 3, "three beta values");
    double previous = -1e300;
    bool monotone = true;
    for (const auto& b : per_beta) {
      const double worst = b["worst_rate"], threshold = b["threshold"], mean = b["mean_rate"];
      v.require(worst <= -threshold + 0.05,
                "beta " + fmt(b["beta"]) + ": rate " + fmt(worst) + " <= " + fmt(-threshold + 0.05));
      monotone = monotone && mean > previous;
      previous = mean;
    }
    v.require(monotone, "decay weakens as beta grows");
    results.emplace_back("7 semigroup decay", v);
  }
  {
    Verdict v;
    const auto& per_p = report("maxreg").summary["per_p"];
    v.require(per_p.size() == 4, "p in {2, 4}, plain and time-weighted");
    for (const auto& x : per_p) {
      const double change = x["rel_change"];
      v.require(change <= 0.2 && std::isfinite(as_number(x["refined_max"])),
                "p=" + fmt(x["p"]) + " " + x["variant"].get<std::string>() + " change " + fmt(change) + " <= 0.2");
    }
    results.emplace_back("8 maximal regularity", v);
  }
  {
    Verdict v;
    const auto& s = report("rbound").summary;
    const double est = s["sanity_estimate"], oracle = s["sanity_oracle"];
    v.require(std::abs(oracle - 2.4) <= 1e-12, "exhaustive oracle " + fmt(oracle) + " = sup|c_j| = 2.4");
    v.require(std::abs(est - oracle) / oracle <= 0.1, "sanity estimate " + fmt(est) + " within 10%");
    double worst = 0.0;
    for (const auto& f : s["multiplier_families"]) worst = std::max(worst, f["rel_change"].get<double>());
    v.require(s["multiplier_families"].size() >= 2, "multiplier families estimated");
    v.require(worst <= 0.25, "worst refinement change " + fmt(worst) + " <= 0.25");
    results.emplace_back("9 R-bound", v);
  }
  {
    Verdict v;
    const auto& r = report("ar");
    v.require(check_passed(r, "A_r(1) = 1"), "A_r(1) = 1 exactly");
    double worst = 0.0;
    int in_range = 0, out_range = 0;
    bool trends = true;
    for (const auto& st : r.summary["studies"]) {
      const std::string trend = st["trend"];
      if (st["in_range"].get<bool>()) {
        ++in_range;
        worst = std::max(worst, st["duality_rel_deviation"].get<double>());
        trends = trends && trend == "stable";
      } else {
        ++out_range;
        trends = trends && (trend == "diverging" || trend == "divergent");
      }
    }
    v.require(in_range > 0 && out_range > 0, std::to_string(in_range) + " in-range, " + std::to_string(out_range) +
                                                 " out-of-range studies");
    v.require(worst <= 1e-10, "duality deviation " + fmt(worst) + " <= 1e-10");
    v.require(trends, "in-range stable, out-of-range diverging");
    results.emplace_back("10 Muckenhoupt toolkit", v);
  }
  {
    Verdict v;
    const auto fa = file_list(dir_a), fb = file_list(dir_b);
    v.require(fa == fb && !fa.empty(), std::to_string(fa.size()) + " files in both runs");
    int differing = 0;
    for (const auto& f : fa)
      if (std::find(fb.begin(), fb.end(), f) != fb.end() && read_file(dir_a / f) != read_file(dir_b / f)) {
        ++differing;
        std::cerr << "differs: " << f << "\n";
      }
    v.require(differing == 0, std::to_string(differing) + " files differ");
    results.emplace_back("11 determinism", v);
  }

  bool all = true;
  for (const auto& [name, v] : results) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    all = all && v.pass;
  }
  if (!all) std::cout << "\nsuite log of the first run:\n" << log_a.str();
  fs::remove_all(base);
  return all ? 0 : 1;
}
