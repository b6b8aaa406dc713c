#include <doctest.h>

#include <cmath>
#include <random>

#include "cylstokes/cross_section.hpp"
#include "cylstokes/mode_estimates.hpp"
#include "cylstokes/mode_solver.hpp"
#include "test_util.hpp"

using namespace cylstokes;
using testutil::random_cvec;
using testutil::rel_diff;

namespace {

const cplx I1(0, 1);

// Smooth solution on (0,pi)^2 vanishing on the boundary:
//   u1 = sin x sin 2y, u2 = sin 2x sin y, un = sin x sin y, p = cos x cos 2y + x.
struct Manufactured {
  CVec exact, f, g;
};

Manufactured manufactured(const CrossSectionGrid& gr, const SpectralParams& sp) {
  const cplx eta = sp.eta();
  const cplx s = sp.lambda + eta * eta;
  const double h = gr.h();
  Manufactured m{CVec::Zero(gr.num_unknowns()), CVec::Zero(gr.num_velocity()), CVec::Zero(gr.num_cells())};
  for (int j = 0; j < gr.ny(); ++j)
    for (int i = 1; i < gr.nx(); ++i) {
      const double x = i * h, y = (j + 0.5) * h;
      const int k = gr.u1(i, j);
      m.exact[k] = std::sin(x) * std::sin(2 * y);
      m.f[k] = (s + 5.0) * m.exact[k] - std::sin(x) * std::cos(2 * y) + 1.0;
    }
  for (int j = 1; j < gr.ny(); ++j)
    for (int i = 0; i < gr.nx(); ++i) {
      const double x = (i + 0.5) * h, y = j * h;
      const int k = gr.offset_u2() + gr.u2(i, j);
      m.exact[k] = std::sin(2 * x) * std::sin(y);
      m.f[k] = (s + 5.0) * m.exact[k] - 2.0 * std::cos(x) * std::sin(2 * y);
    }
  for (int j = 0; j < gr.ny(); ++j)
    for (int i = 0; i < gr.nx(); ++i) {
      const double x = (i + 0.5) * h, y = (j + 0.5) * h;
      const int c = gr.cell(i, j);
      const double un = std::sin(x) * std::sin(y);
      const double p = std::cos(x) * std::cos(2 * y) + x;
      m.exact[gr.offset_un() + c] = un;
      m.exact[gr.offset_p() + c] = p;
      m.f[gr.offset_un() + c] = (s + 2.0) * un + I1 * eta * p;
      m.g[c] = std::cos(x) * std::sin(2 * y) + std::sin(2 * x) * std::cos(y) + I1 * eta * un;
    }
  return m;
}

SpectralParams params(cplx lambda, double xi, double beta, double alpha = 0.5) {
  SpectralParams p;
  p.lambda = lambda;
  p.xi = xi;
  p.beta = beta;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("assembly refuses eta = 0 and accepts the zero mode with beta > 0") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 8, 8);
  CHECK_THROWS_AS(ModeSystem(g, params(1.0, 0.0, 0.0)), InvalidArgument);
  const ModeSystem sys(g, params(1.0, 0.0, 0.5));
  CHECK(std::isfinite(sys.condition_estimate()));
  CHECK(sys.apply(CVec::Zero(g.num_unknowns())).norm() == 0.0);
  const auto sol = sys.solve(CVec::Zero(g.num_velocity()), CVec::Zero(g.num_cells()));
  CHECK(sol.data.norm() == 0.0);
}

TEST_CASE("condition estimate against the dense 1-norm condition number") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 8, 8);
  const ModeSystem sys(g, params(cplx(1, 2), 1.3, 0.5));
  const Eigen::MatrixXcd A = Eigen::MatrixXcd(sys.matrix());
  const Eigen::MatrixXcd Ainv = A.inverse();
  auto norm1 = [](const Eigen::MatrixXcd& M) { return M.cwiseAbs().colwise().sum().maxCoeff(); };
  const double exact = norm1(A) * norm1(Ainv);
  CHECK(sys.condition_estimate() <= exact * (1 + 1e-8));
  CHECK(sys.condition_estimate() >= 0.1 * exact);
}

TEST_CASE("sparse solve matches dense LU on 8x8") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 8, 8);
  std::mt19937_64 rng(21);
  for (const auto& sp : {params(cplx(1, 2), 1.3, 0.5), params(cplx(-0.3, 0.1), 0.0, 0.5), params(10.0, -4.0, 0.0)}) {
    const ModeSystem sys(g, sp);
    const Eigen::MatrixXcd A = Eigen::MatrixXcd(sys.matrix());
    const CVec b = random_cvec(g.num_unknowns(), rng);
    const CVec dense = A.fullPivLu().solve(b);
    CHECK(rel_diff(sys.solve_packed(b), dense) <= 1e-10);
    CHECK(rel_diff(sys.solve_adjoint_packed(b), CVec(A.adjoint().fullPivLu().solve(b))) <= 1e-10);
  }
}

TEST_CASE("direct and iterative paths agree") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 24, 24);
  std::mt19937_64 rng(4);
  for (const auto& sp : {params(cplx(1, 2), 1.3, 0.5), params(cplx(0.2, -3), -0.7, 0.5)}) {
    const ModeSystem sys(g, sp);
    const CVec b = random_cvec(g.num_unknowns(), rng);
    CHECK(rel_diff(sys.solve_packed(b), sys.solve_iterative(b, 1e-13)) <= 1e-9);
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const auto sp = params(cplx(1, 2), 1.3, 0.5);
  std::vector<double> hs, errs;
  for (int n : {16, 32, 64}) {
    const auto g = CrossSectionGrid::build(kPi, kPi, n, n);
    const ModeSystem sys(g, sp);
    const auto m = manufactured(g, sp);
    const auto sol = sys.solve(m.f, m.g);
    const auto res = sys.residuals(sol, m.f, m.g);
    CHECK(res.max() <= 1e-10);
    hs.push_back(g.h());
    errs.push_back(g.h() * (sol.data - m.exact).norm());
  }
  CHECK(testutil::observed_order(hs, errs) >= 1.8);
}

TEST_CASE("solution operators: linearity and conjugate symmetry") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  std::mt19937_64 rng(8);
  const CVec f1 = random_cvec(g.num_velocity(), rng), f2 = random_cvec(g.num_velocity(), rng);
  const cplx c(0.3, -2.0);
  const ModeSystem sys(g, params(cplx(1, 2), 1.3, 0.5));
  CHECK(solution_operators(sys, CVec::Zero(g.num_velocity())).data.norm() == 0.0);
  const CVec lhs = solution_operators(sys, f1 + c * f2).data;
  const CVec rhs = solution_operators(sys, f1).data + c * solution_operators(sys, f2).data;
  CHECK(rel_diff(lhs, rhs) <= 1e-12);

  for (double lam : {1.0, -0.2}) {
    const ModeSystem plus(g, params(lam, 1.3, 0.5));
    const ModeSystem minus(g, params(lam, -1.3, 0.5));
    const CVec a = solution_operators(plus, f1).data;
    const CVec b = solution_operators(minus, f1.conjugate()).data;
    CHECK(rel_diff(b, a.conjugate()) <= 1e-12);
  }
}

TEST_CASE("derivative system matches central differences") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  std::mt19937_64 rng(13);
  const double delta = 1e-3;
  double worst = 0.0;
  for (const auto& sp : {params(cplx(1, 2), 1.3, 0.5), params(cplx(-0.2, 0.5), 0.4, 0.5), params(5.0, -2.0, 0.5),
                         params(cplx(0, 10), 3.0, 0.5), params(cplx(0.5, -1), -0.05, 0.5)}) {
    const ModeSystem sys(g, sp);
    auto shifted = sp;
    shifted.xi = sp.xi + delta;
    const ModeSystem up(g, shifted);
    shifted.xi = sp.xi - delta;
    const ModeSystem dn(g, shifted);
    for (int t = 0; t < 10; ++t) {
      const CVec f = random_cvec(g.num_velocity(), rng);
      const auto base = solution_operators(sys, f);
      const CVec d = derivative_solve(sys, base).data;
      const CVec fd = (solution_operators(up, f).data - solution_operators(dn, f).data) / (2 * delta);
      worst = std::max(worst, rel_diff(d, fd));
    }
  }
  CHECK(worst <= 1e-4);
  const ModeSystem sys(g, params(1.0, 1.0, 0.5));
  CHECK(derivative_solve(sys, ModeField(g)).data.norm() == 0.0);
}

TEST_CASE("mode projector") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  std::mt19937_64 rng(17);
  for (const cplx eta : {cplx(1.3, 0.5), cplx(0.0, 0.5), cplx(-4.0, 0.0)}) {
    const ModeProjector P(g, eta);
    const CVec v = random_cvec(g.num_velocity(), rng);
    const CVec pv = P.project(v);
    CHECK(div_eta(g, pv, eta).norm() <= 1e-10 * v.norm() / g.h());
    CHECK(rel_diff(P.project(pv), pv) <= 1e-10);
    const CVec grad = P.gradient_field(random_cvec(g.num_cells(), rng));
    CHECK(P.project(grad).norm() <= 1e-10 * grad.norm());
  }
  CHECK_THROWS_AS(ModeProjector(g, cplx(0.0)), InvalidArgument);
}

TEST_CASE("coercivity of the sesquilinear form") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  const double a0 = dirichlet_smallest(g);
  std::mt19937_64 rng(23);
  CHECK(coercivity_check(g, params(1.0, 2.0, 0.5), CVec::Zero(g.num_velocity()), a0).pass);

  struct Case { cplx lambda; double xi; const char* label; };
  const double beta = 0.5;
  const Case cases[] = {
      {1.0, 2.0, "shifted-real-part-nonnegative"},
      {cplx(0.5, 1.0), 0.3, "shifted-real-part-nonnegative"},
      // resonance line Im(lambda) + 2 xi beta = 0 with Re(lambda) + xi^2 - beta^2 < 0
      {cplx(-1.85, 0.6), -0.6, "resonance-line"},
      {cplx(-1.85, 0.6), 0.2, "off-resonance"},
  };
  for (const auto& c : cases) {
    const auto sp = params(c.lambda, c.xi, beta);
    const ModeProjector P(g, sp.eta());
    for (int t = 0; t < 100; ++t) {
      const CVec u = P.project(random_cvec(g.num_velocity(), rng));
      const auto res = coercivity_check(g, sp, u, a0);
      CHECK(res.case_label == c.label);
      CHECK(res.pass);
      CHECK(res.lower_bound > 0.0);
    }
  }
  // Outside the window.
  CHECK_THROWS_AS(coercivity_check(g, params(-3.0, 0.0, 0.5), CVec::Zero(g.num_velocity()), a0), InvalidArgument);
  // Not divergence free.
  CHECK_THROWS_AS(coercivity_check(g, params(1.0, 1.0, 0.5), random_cvec(g.num_velocity(), rng), a0),
                  InvalidArgument);
}

TEST_CASE("per-mode estimate ratio") {
  const auto g = CrossSectionGrid::build(kPi, kPi, 16, 16);
  std::mt19937_64 rng(29);
  const WeightTables unit(g, PowerWeight::unit());
  const WeightTables pw(g, PowerWeight{0.5, kPi / 2, kPi / 2});
  const auto sp = params(cplx(1, 2), 1.3, 0.5);
  const ModeSystem sys(g, sp);
  const CVec f = random_cvec(g.num_velocity(), rng);
  const CVec zero = CVec::Zero(g.num_cells());
  const auto sol = sys.solve(f, zero);
  for (double r : {2.0, 3.0}) {
    const auto e = mode_estimate_ratio(sol, sp, f, zero, pw, r);
    CHECK(std::isfinite(e.ratio));
    CHECK(e.rhs == doctest::Approx(norm_sum(velocity_components(g, f), pw, r)).epsilon(1e-14));
    const cplx c(3.0, -1.0);
    const auto sol2 = sys.solve(c * f, zero);
    CHECK(mode_estimate_ratio(sol2, sp, c * f, zero, pw, r).ratio == doctest::Approx(e.ratio).epsilon(1e-12));
  }
  const CVec gg = random_cvec(g.num_cells(), rng);
  const auto sol3 = sys.solve(f, gg);
  const auto e3 = mode_estimate_ratio(sol3, sp, f, gg, unit, 2.0);
  CHECK(std::isfinite(e3.ratio));
  CHECK(e3.ratio > 0.0);
  const auto e0 = mode_estimate_ratio(ModeField(g), sp, CVec::Zero(g.num_velocity()), zero, unit, 2.0);
  CHECK(e0.ratio == 0.0);
  CHECK_FALSE(e0.violation);
}

TEST_CASE("staggered derivatives of a smooth field") {
  // Hessian entries of un = sin x sin y at cells converge to the analytic values.
  std::vector<double> hs, errs;
  for (int n : {16, 32, 64}) {
    const auto g = CrossSectionGrid::build(kPi, kPi, n, n);
    CVec v = CVec::Zero(g.num_velocity());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        v[g.offset_un() + g.cell(i, j)] = std::sin((i + 0.5) * g.h()) * std::sin((j + 0.5) * g.h());
    const auto hess = velocity_hessian(g, v);
    REQUIRE(hess.size() == 9);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double exact = -std::sin((i + 0.5) * g.h()) * std::sin((j + 0.5) * g.h());
        err = std::max(err, std::abs(hess[6].values[g.cell(i, j)] - exact));
      }
    hs.push_back(g.h());
    errs.push_back(err);
    const auto grad = velocity_gradient(g, v);
    REQUIRE(grad.size() == 6);
    const WeightTables unit(g, PowerWeight::unit());
    // ||grad un||^2 = pi^2/2 for sin x sin y on the square.
    const double gn = std::pow(weighted_norm(grad[4].values, grad[4].loc, unit, 2.0), 2) +
                      std::pow(weighted_norm(grad[5].values, grad[5].loc, unit, 2.0), 2);
    CHECK(gn == doctest::Approx(kPi * kPi / 2).epsilon(0.01));
  }
  CHECK(testutil::observed_order(hs, errs) >= 1.8);
}
