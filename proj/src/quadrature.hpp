#pragma once

#include <cmath>
#include <vector>

#include "cylstokes/common.hpp"

namespace cylstokes::detail {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline GaussRule make_gauss_legendre(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

inline const GaussRule& gauss16() {
  static const GaussRule r = make_gauss_legendre(16);
  return r;
}

inline const GaussRule& gauss8() {
  static const GaussRule r = make_gauss_legendre(8);
  return r;
}

/// Composite rule on [a, b] with `panels` equal panels.
template <class F>
double integrate(F&& f, double a, double b, int panels, const GaussRule& rule) {
  double sum = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double mid = lo + 0.5 * w;
    double s = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) s += rule.w[k] * f(mid + 0.5 * w * rule.x[k]);
    sum += 0.5 * w * s;
  }
  return sum;
}

}  // namespace cylstokes::detail
