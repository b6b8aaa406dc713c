#include <doctest.h>

#include <cmath>
#include <random>

#include "cylstokes/cross_section.hpp"
#include "test_util.hpp"

using namespace cylstokes;

namespace {

double dirichlet_exact(double lx, double ly) { return kPi * kPi * (1.0 / (lx * lx) + 1.0 / (ly * ly)); }

// Closed-form smallest eigenvalue of the discrete five-point Dirichlet operator.
double dirichlet_discrete(double lx, double ly, double h) {
  return 4.0 / (h * h) * (std::pow(std::sin(kPi * h / (2 * lx)), 2) + std::pow(std::sin(kPi * h / (2 * ly)), 2));
}

double neumann_discrete(double l, double h) { return 4.0 / (h * h) * std::pow(std::sin(kPi * h / (2 * l)), 2); }

}  // namespace

TEST_CASE("Dirichlet eigenvalue") {
  struct Case { double lx, ly; int nx, ny; };
  for (const Case c : {Case{kPi, kPi, 16, 16}, Case{1.0, 1.0, 16, 16}, Case{kPi, 2 * kPi, 16, 32}}) {
    const auto g = CrossSectionGrid::build(c.lx, c.ly, c.nx, c.ny);
    const double a0 = dirichlet_smallest(g);
    CHECK(a0 == doctest::Approx(dirichlet_discrete(c.lx, c.ly, g.h())).epsilon(1e-10));
    CHECK(a0 == doctest::Approx(dirichlet_exact(c.lx, c.ly)).epsilon(0.01));
  }
}

TEST_CASE("Neumann eigenvalue") {
  struct Case { double lx, ly; int nx, ny; double longest; };
  for (const Case c : {Case{kPi, kPi, 16, 16, kPi}, Case{1.0, 1.0, 16, 16, 1.0}, Case{2 * kPi, kPi, 32, 16, 2 * kPi}}) {
    const auto g = CrossSectionGrid::build(c.lx, c.ly, c.nx, c.ny);
    const double a1 = neumann_smallest_positive(g);
    CHECK(a1 == doctest::Approx(neumann_discrete(c.longest, g.h())).epsilon(1e-10));
    CHECK(a1 == doctest::Approx(kPi * kPi / (c.longest * c.longest)).epsilon(0.01));
  }
}

TEST_CASE("eigenvalue convergence is second order") {
  std::vector<double> hs, e0, e1;
  for (int n : {16, 32, 64}) {
    const auto g = CrossSectionGrid::build(kPi, kPi, n, n);
    const auto t = spectral_thresholds(g);
    hs.push_back(g.h());
    e0.push_back(std::abs(t.alpha0 - 2.0));
    e1.push_back(std::abs(t.alpha1 - 1.0));
    CHECK(t.alpha_bar == std::min(t.alpha0, t.alpha1));
  }
  CHECK(testutil::observed_order(hs, e0) >= 1.8);
  CHECK(testutil::observed_order(hs, e1) >= 1.8);
}

TEST_CASE("sector aperture") {
  CHECK(sector_params(1.0, 0.5, 0.5).eps_star == doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(std::abs(sector_params(1.0, 0.5, 0.5).eps_star - kPi / 4) <= 1e-12);
  CHECK(sector_params(2.0, 1.0, 1e-14).eps_star == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(sector_params(1.0, 1.0 - 1e-9, 1e-12).eps_star < 1e-3);
  CHECK_FALSE(sector_params(1.0, 1.2, 0.1).valid);
  CHECK_FALSE(sector_params(1.0, 0.5, 0.9).valid);
  CHECK_FALSE(sector_params(1.0, 0.0, 0.5).valid);
}

TEST_CASE("Poincare constants") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 32, 32);
  const auto t = spectral_thresholds(g);
  const auto pd = poincare_constant(g, PoincareBc::dirichlet, 2.0, PowerWeight::unit());
  CHECK(pd.refined);
  CHECK(pd.constant == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
  CHECK(pd.constant <= 1.0 / std::sqrt(t.alpha0) * (1 + 1e-9));
  const auto pn = poincare_constant(g, PoincareBc::mean_zero, 2.0, PowerWeight::unit());
  CHECK(pn.constant == doctest::Approx(1.0).epsilon(0.02));

  // Dilation by s scales the constant by s.
  const auto g2 = CrossSectionGrid::build(2 * kPi, 2 * kPi, 32, 32);
  const auto pd2 = poincare_constant(g2, PoincareBc::dirichlet, 2.0, PowerWeight::unit());
  CHECK(pd2.constant == doctest::Approx(2.0 * pd.constant).epsilon(1e-6));

  const auto pw = poincare_constant(g, PoincareBc::dirichlet, 3.0, PowerWeight{0.5, kPi / 2, kPi / 2}, 32);
  CHECK(pw.ensemble_size == 32);
  CHECK(std::isfinite(pw.constant));
  CHECK(pw.constant > 0.0);
  CHECK_THROWS_AS(poincare_constant(g, PoincareBc::dirichlet, 2.0, PowerWeight::unit(), 0), InvalidArgument);
}

TEST_CASE("divergence solve") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  const DivergenceSolver ds(g);
  const cplx eta(1.3, 0.5);
  CHECK(ds.bump().sum() * g.cell_area() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(ds.solve(CVec::Zero(g.num_cells()), eta).norm() == 0.0);

  std::mt19937_64 rng(5);
  CVec g0 = testutil::random_cvec(g.num_cells(), rng);
  g0.array() -= g0.mean();
  const CVec u0 = ds.solve(g0, eta);
  CHECK(u0.tail(g.num_cells()).norm() <= 1e-14 * u0.norm());
  CHECK((div_eta(g, u0, eta) - g0).norm() <= 1e-10 * g0.norm());

  const CVec one = CVec::Ones(g.num_cells());
  const CVec u1 = ds.solve(one, eta);
  const double gbar = kPi * kPi;  // integral of 1 over the square
  const CVec expected_un = (gbar / (cplx(0, 1) * eta)) * ds.bump().cast<cplx>();
  CHECK((u1.tail(g.num_cells()) - expected_un).norm() <= 1e-12 * expected_un.norm());
  CHECK((div_eta(g, u1, eta) - one).norm() <= 1e-10 * one.norm());

  const CVec ga = testutil::random_cvec(g.num_cells(), rng);
  const CVec gb = testutil::random_cvec(g.num_cells(), rng);
  CHECK(testutil::rel_diff(ds.solve(ga + gb, eta), ds.solve(ga, eta) + ds.solve(gb, eta)) <= 1e-12);
  CHECK_THROWS_AS(ds.solve(ga, cplx(0.0)), InvalidArgument);
}
