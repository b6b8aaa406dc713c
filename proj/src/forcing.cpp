#include "cylstokes/forcing.hpp"

#include <cmath>

namespace cylstokes {

namespace {

cplx draw(Rng& rng, bool complex_coefficients) {
  std::normal_distribution<double> nd;
  const double re = nd(rng);
  const double im = complex_coefficients ? nd(rng) : 0.0;
  return {re, im};
}

}  // namespace

CVec random_complex(int n, Rng& rng) {
  std::normal_distribution<double> nd;
  CVec v(n);
  for (int k = 0; k < n; ++k) {
    const double re = nd(rng);
    v[k] = cplx(re, nd(rng));
  }
  return v;
}

RVec random_real(int n, Rng& rng) {
  std::normal_distribution<double> nd;
  RVec v(n);
  for (int k = 0; k < n; ++k) v[k] = nd(rng);
  return v;
}

CVec smooth_velocity(const CrossSectionGrid& g, Rng& rng, int modes, bool complex_coefficients) {
  require(modes >= 1, "need at least one mode");
  const double h = g.h(), kx = kPi / g.lx(), ky = kPi / g.ly();
  CVec v = CVec::Zero(g.num_velocity());
  for (int comp = 0; comp < 3; ++comp) {
    for (int k = 1; k <= modes; ++k) {
      for (int l = 1; l <= modes; ++l) {
        const cplx c = draw(rng, complex_coefficients) / double(k * l);
        if (comp == 0) {
          for (int j = 0; j < g.ny(); ++j)
            for (int i = 1; i < g.nx(); ++i)
              v[g.u1(i, j)] += c * std::sin(k * kx * i * h) * std::sin(l * ky * (j + 0.5) * h);
        } else if (comp == 1) {
          for (int j = 1; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
              v[g.offset_u2() + g.u2(i, j)] += c * std::sin(k * kx * (i + 0.5) * h) * std::sin(l * ky * j * h);
        } else {
          for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
              v[g.offset_un() + g.cell(i, j)] +=
                  c * std::sin(k * kx * (i + 0.5) * h) * std::sin(l * ky * (j + 0.5) * h);
        }
      }
    }
  }
  return v;
}

CVec smooth_cell_field(const CrossSectionGrid& g, Rng& rng, int modes, bool complex_coefficients) {
  require(modes >= 1, "need at least one mode");
  const double h = g.h(), kx = kPi / g.lx(), ky = kPi / g.ly();
  CVec v = CVec::Zero(g.num_cells());
  for (int k = 0; k < modes; ++k)
    for (int l = 0; l < modes; ++l) {
      const cplx c = draw(rng, complex_coefficients) / double((k + 1) * (l + 1));
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
          v[g.cell(i, j)] += c * std::cos(k * kx * (i + 0.5) * h) * std::cos(l * ky * (j + 0.5) * h);
    }
  return v;
}

}  // namespace cylstokes
