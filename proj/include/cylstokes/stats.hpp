#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cylstokes {

struct SweepStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double max_over_median = 0.0;
  int count = 0;
};

/// Statistics over the finite, positive entries.
SweepStats sweep_stats(const std::vector<double>& values);

/// Upper envelope of (x, y) samples: for every distinct x the largest y, sorted by x.
std::vector<std::pair<double, double>> envelope(const std::vector<std::pair<double, double>>& samples);

struct GrowthCheck {
  bool blowup = false;  // strictly increasing toward the end and growth above the threshold
  double growth = 1.0;  // y(end) / y(start of the outer decade)
};

/// Trend of an envelope over its outermost decade in x (high end or low end).
GrowthCheck outer_decade_growth(const std::vector<std::pair<double, double>>& env, bool high_end,
                                double threshold = 1.1);

/// n points from lo to hi, equally spaced in log.
std::vector<double> log_space(double lo, double hi, int n);

/// Deterministic 64-bit FNV-1a hash.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 14695981039346656037ull);

}  // namespace cylstokes
