#include "cylstokes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cylstokes/common.hpp"

namespace cylstokes {

SweepStats sweep_stats(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x) && x > 0.0) v.push_back(x);
  SweepStats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  s.max_over_median = s.max / s.median;
  return s;
}

std::vector<std::pair<double, double>> envelope(const std::vector<std::pair<double, double>>& samples) {
  std::map<double, double> best;
  for (const auto& [x, y] : samples) {
    auto it = best.find(x);
    if (it == best.end()) best.emplace(x, y);
    else it->second = std::max(it->second, y);
  }
  return {best.begin(), best.end()};
}

GrowthCheck outer_decade_growth(const std::vector<std::pair<double, double>>& env, bool high_end, double threshold) {
  GrowthCheck g;
  if (env.size() < 2) return g;
  // Points of the outer decade, ordered from its inner edge toward the extreme.
  std::vector<std::pair<double, double>> decade;
  if (high_end) {
    const double cut = env.back().first / 10.0;
    for (const auto& p : env)
      if (p.first >= cut * (1 - 1e-12)) decade.push_back(p);
  } else {
    const double cut = env.front().first * 10.0;
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first <= cut * (1 + 1e-12)) decade.push_back(*it);
  }
  if (decade.size() < 2) return g;
  bool increasing = true;
  for (std::size_t k = 1; k < decade.size(); ++k)
    if (!(decade[k].second > decade[k - 1].second)) increasing = false;
  g.growth = decade.back().second / decade.front().second;
  g.blowup = increasing && g.growth > threshold;
  return g;
}

std::vector<double> log_space(double lo, double hi, int n) {
  require(lo > 0 && hi >= lo && n >= 1, "log_space needs 0 < lo <= hi and n >= 1");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < n; ++k) out[k] = std::pow(10.0, a + (b - a) * k / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < size; ++k) {
    h ^= p[k];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cylstokes
