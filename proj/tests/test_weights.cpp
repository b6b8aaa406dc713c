#include <doctest.h>

#include <cmath>
#include <random>

#include "cylstokes/weights.hpp"
#include "test_util.hpp"

using namespace cylstokes;

namespace {

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Integral of |x|^a over [0,1]^2 with the singularity at the corner, in polar coordinates.
double corner_square_oracle(double a) {
  return 2.0 / (a + 2.0) * simpson([a](double t) { return std::pow(std::cos(t), -(a + 2.0)); }, 0.0, kPi / 4);
}

// Cube averages computed directly per cube from the finest cell averages.
double brute_force_ar(const DyadicWeight& w, double r) {
  const int n = 1 << w.depth;
  double best = 0.0;
  for (int level = 0; level <= w.depth; ++level) {
    const int cells = 1 << (w.depth - level);
    for (int qj = 0; qj < (1 << level); ++qj)
      for (int qi = 0; qi < (1 << level); ++qi) {
        double sw = 0.0, sd = 0.0;
        for (int j = qj * cells; j < (qj + 1) * cells; ++j)
          for (int i = qi * cells; i < (qi + 1) * cells; ++i) {
            const double v = w.cell_average[static_cast<std::size_t>(j) * n + i];
            sw += v;
            sd += std::pow(v, -1.0 / (r - 1.0));
          }
        const double m = static_cast<double>(cells) * cells;
        best = std::max(best, (sw / m) * std::pow(sd / m, r - 1.0));
      }
  }
  return best;
}

}  // namespace

TEST_CASE("weight spec parsing") {
  CHECK(PowerWeight::parse("unit").is_unit());
  const auto w = PowerWeight::parse("power:a=0.5,cx=1.5,cy=2");
  CHECK(w.a == 0.5);
  CHECK(w.cx == 1.5);
  CHECK(w.cy == 2.0);
  CHECK(PowerWeight::parse(w.id()).a == 0.5);
  CHECK_THROWS_AS(PowerWeight::parse("power:cx=1"), InvalidArgument);
  CHECK_THROWS_AS(PowerWeight::parse("gauss:a=1"), InvalidArgument);
  CHECK_THROWS_AS(PowerWeight::parse("power:a=abc"), InvalidArgument);
}

TEST_CASE("A_r range and dual weight") {
  CHECK(in_ar_range(PowerWeight{1.0, 0, 0}, 2.0));
  CHECK_FALSE(in_ar_range(PowerWeight{2.0, 0, 0}, 2.0));
  CHECK_FALSE(in_ar_range(PowerWeight{-2.0, 0, 0}, 3.0));
  auto d = dual_weight(PowerWeight{1.0, 0, 0}, 2.0);
  CHECK(d.weight.a == doctest::Approx(-1.0));
  CHECK(d.r == doctest::Approx(2.0));
  d = dual_weight(PowerWeight::unit(), 3.0);
  CHECK(d.weight.a == 0.0);
  CHECK(d.r == doctest::Approx(1.5));
}

TEST_CASE("rectangle integrals") {
  CHECK(rect_integral(PowerWeight::unit(), 0.0, 2.0, 1.0, 4.0) == doctest::Approx(6.0).epsilon(1e-15));
  for (double a : {-1.5, -0.5, 0.5, 1.0, 3.0}) {
    const PowerWeight w{a, 0.0, 0.0};
    CHECK(rect_integral(w, 0.0, 1.0, 0.0, 1.0) == doctest::Approx(corner_square_oracle(a)).epsilon(1e-10));
    // Singularity inside: four corner squares.
    const PowerWeight c{a, 0.5, 0.5};
    CHECK(rect_integral(c, 0.0, 1.0, 0.0, 1.0) ==
          doctest::Approx(4.0 * std::pow(0.5, a + 2.0) * corner_square_oracle(a)).epsilon(1e-10));
  }
  // Far from the singularity: compare with a fine midpoint rule.
  const PowerWeight w{0.7, -3.0, 0.2};
  const int n = 800;
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s += w.value(1.0 + (i + 0.5) * 2.0 / n, 0.5 + (j + 0.5) * 1.0 / n);
  s *= 2.0 / n * 1.0 / n;
  CHECK(rect_integral(w, 1.0, 3.0, 0.5, 1.5) == doctest::Approx(s).epsilon(1e-6));
  CHECK(std::isinf(rect_integral(PowerWeight{-2.5, 0.5, 0.5}, 0.0, 1.0, 0.0, 1.0)));
}

TEST_CASE("A_r constant of the unit weight is one") {
  const BoundingCube cube{0.0, 0.0, kPi};
  for (double r : {1.5, 2.0, 3.0})
    for (int d : {1, 4, 7}) CHECK(ar_constant(PowerWeight::unit(), r, d, cube).value == 1.0);
}

TEST_CASE("A_r constant matches a per-cube brute force") {
  const BoundingCube cube{0.0, 0.0, kPi};
  for (double r : {2.0, 3.0}) {
    const auto dw = DyadicWeight::discretize(PowerWeight{1.0, kPi / 2, kPi / 2}, cube, 5);
    CHECK(ar_constant(dw, r).value == doctest::Approx(brute_force_ar(dw, r)).epsilon(1e-12));
  }
}

TEST_CASE("duality identity on a shared cube family") {
  const BoundingCube cube{0.0, 0.0, kPi};
  for (double r : {1.5, 2.0, 3.0})
    for (double a : {-1.0, 0.5, 1.0}) {
      const auto dw = DyadicWeight::discretize(PowerWeight{a, 1.1, 0.7}, cube, 6);
      const double rp = r / (r - 1.0);
      const double lhs = ar_constant(dw.dual(r), rp).value;
      const double rhs = std::pow(ar_constant(dw, r).value, rp / r);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
    }
}

TEST_CASE("A_r estimates are monotone in depth and follow the admissible range") {
  const BoundingCube cube{0.0, 0.0, kPi};
  const PowerWeight inside{1.0, kPi / 2, kPi / 2};
  const auto st = ar_depth_study(inside, 2.0, 9, cube);
  for (std::size_t k = 1; k < st.estimates.size(); ++k)
    CHECK(st.estimates[k].value >= st.estimates[k - 1].value);
  CHECK(st.trend == ArTrend::stable);

  CHECK(ar_depth_study(PowerWeight{0.5, kPi / 2, kPi / 2}, 2.0, 9, cube).trend == ArTrend::stable);
  CHECK(ar_depth_study(PowerWeight{4.0, kPi / 2, kPi / 2}, 2.0, 9, cube).trend == ArTrend::diverging);
  CHECK(ar_depth_study(PowerWeight{6.0, kPi / 2, kPi / 2}, 3.0, 9, cube).trend == ArTrend::diverging);
  CHECK(ar_depth_study(PowerWeight{-3.0, kPi / 2, kPi / 2}, 2.0, 6, cube).trend == ArTrend::divergent);
}

TEST_CASE("weighted norms") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  const WeightTables unit(g, PowerWeight::unit());
  const CVec c = CVec::Constant(g.num_cells(), cplx(3.0, -4.0));
  CHECK(weighted_norm(c, Location::cell, unit, 2.0) == doctest::Approx(5.0 * kPi).epsilon(1e-12));
  CHECK(weighted_norm(CVec::Zero(g.num_cells()), Location::cell, unit, 3.0) == 0.0);

  const WeightTables pw(g, PowerWeight{0.5, kPi / 2, kPi / 2});
  std::mt19937_64 rng(11);
  const CVec u = testutil::random_cvec(g.num_cells(), rng);
  const CVec v = testutil::random_cvec(g.num_cells(), rng);
  const cplx s(-1.7, 0.4);
  for (double r : {2.0, 3.0}) {
    const double nu = weighted_norm(u, Location::cell, pw, r);
    CHECK(weighted_norm(CVec(s * u), Location::cell, pw, r) == doctest::Approx(std::abs(s) * nu).epsilon(1e-12));
    CHECK(weighted_norm(CVec(u + v), Location::cell, pw, r) <= nu + weighted_norm(v, Location::cell, pw, r));
  }
  // Unit weight, r = 2: plain L2 quadrature.
  double l2 = 0.0;
  for (int k = 0; k < u.size(); ++k) l2 += std::norm(u[k]) * g.cell_area();
  CHECK(weighted_norm(u, Location::cell, unit, 2.0) == doctest::Approx(std::sqrt(l2)).epsilon(1e-12));
  CHECK_THROWS_AS(WeightTables(g, PowerWeight{-2.5, kPi / 2, kPi / 2}), InvalidArgument);
}
