#include <doctest.h>

#include <random>

#include "cylstokes/grid.hpp"
#include "test_util.hpp"

using namespace cylstokes;

TEST_CASE("grid construction") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 8, 8);
  CHECK(g.h() == doctest::Approx(kPi / 8).epsilon(1e-15));
  CHECK(g.num_u1() == 7 * 8);
  CHECK(g.num_u2() == 8 * 7);
  CHECK(g.num_unknowns() == 56 + 56 + 64 + 64);

  const auto g2 = CrossSectionGrid::build(1.0, 2.0, 16, 32);
  CHECK(g2.h() == doctest::Approx(1.0 / 16).epsilon(1e-15));

  CHECK_THROWS_AS(CrossSectionGrid::build(kPi, kPi, 8, 9), InvalidArgument);
  CHECK_THROWS_AS(CrossSectionGrid::build(kPi, kPi, 3, 3), InvalidArgument);
  CHECK_THROWS_AS(CrossSectionGrid::build(-1.0, 1.0, 8, 8), InvalidArgument);
}

TEST_CASE("location shapes and control volumes tile the rectangle") {
  const auto g = CrossSectionGrid::build(1.0, 2.0, 8, 16);
  for (Location loc : {Location::cell, Location::xface, Location::yface, Location::node}) {
    const auto s = g.location_shape(loc);
    CHECK(g.location_size(loc) == s[0] * s[1]);
    double area = 0.0;
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        const auto cv = g.control_volume(loc, i, j);
        area += (cv[1] - cv[0]) * (cv[3] - cv[2]);
      }
    CHECK(area == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("divergence and gradient are negative adjoints") {
  const auto g = CrossSectionGrid::build(kPi, 2 * kPi, 12, 24);
  std::mt19937_64 rng(7);
  const CSparse D = g.divergence().cast<cplx>();
  const CSparse G = g.gradient().cast<cplx>();
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const CVec u = testutil::random_cvec(g.num_face_unknowns(), rng);
    const CVec p = testutil::random_cvec(g.num_cells(), rng);
    const cplx a = (D * u).dot(p);
    const cplx b = u.dot(G * p);
    const double scale = (D * u).norm() * p.norm() + u.norm() * (G * p).norm();
    worst = std::max(worst, std::abs(a + b) / scale);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("Laplacians are symmetric with the right definiteness") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 10, 10);
  for (const RSparse* L : {&g.laplacian_dirichlet(), &g.laplacian_neumann(), &g.laplacian_u1(),
                           &g.laplacian_u2()}) {
    const RSparse T = L->transpose();
    CHECK((RSparse(*L - T)).norm() == doctest::Approx(0.0));
  }
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const RVec x = testutil::random_rvec(g.num_cells(), rng);
    CHECK(x.dot(g.laplacian_dirichlet() * x) < 0.0);
    CHECK(x.dot(g.laplacian_neumann() * x) <= 1e-12 * x.squaredNorm());
  }
  const RVec one = RVec::Ones(g.num_cells());
  CHECK((g.laplacian_neumann() * one).norm() <= 1e-10);
  // Neumann Laplacian = div grad.
  const RSparse DG = g.divergence() * g.gradient();
  CHECK((RSparse(DG - g.laplacian_neumann())).norm() <= 1e-10 * g.laplacian_neumann().norm());
}

TEST_CASE("sampled sines are exact discrete Dirichlet eigenvectors") {
  const double lx = kPi, ly = 2 * kPi;
  const auto g = CrossSectionGrid::build(lx, ly, 8, 16);
  const double h = g.h();
  RVec v(g.num_cells());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v[g.cell(i, j)] = std::sin((i + 0.5) * h * kPi / lx) * std::sin((j + 0.5) * h * kPi / ly);
  const double expected = 4.0 / (h * h) *
                          (std::pow(std::sin(kPi * h / (2 * lx)), 2) + std::pow(std::sin(kPi * h / (2 * ly)), 2));
  const RVec Lv = -(g.laplacian_dirichlet() * v);
  CHECK((Lv - expected * v).norm() <= 1e-12 * expected * v.norm());

  // u1 lives on x-faces: sin(pi x / lx) sampled at face positions, sin(pi y / ly) at cell rows.
  RVec w(g.num_u1());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) w[g.u1(i, j)] = std::sin(i * h * kPi / lx) * std::sin((j + 0.5) * h * kPi / ly);
  const RVec Lw = -(g.laplacian_u1() * w);
  CHECK((Lw - expected * w).norm() <= 1e-12 * expected * w.norm());
}
