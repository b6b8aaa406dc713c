#pragma once

#include <cmath>
#include <random>

#include "cylstokes/common.hpp"

namespace testutil {

using cylstokes::CVec;
using cylstokes::RVec;
using cylstokes::cplx;

inline CVec random_cvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVec v(n);
  for (int k = 0; k < n; ++k) v[k] = cplx(nd(rng), nd(rng));
  return v;
}

inline RVec random_rvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RVec v(n);
  for (int k = 0; k < n; ++k) v[k] = nd(rng);
  return v;
}

inline double rel_diff(const CVec& a, const CVec& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

/// Least-squares slope of log(err) against log(h).
inline double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double x = std::log(h[k]), y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testutil
