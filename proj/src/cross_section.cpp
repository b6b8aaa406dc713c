#include "cylstokes/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>

namespace cylstokes {

namespace {

RVec seeded_start(int n) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  RVec x(n);
  for (int k = 0; k < n; ++k) x[k] = U(rng);
  return x;
}

// Inverse iteration on K (SPD up to a shift), optionally restricted to mean-zero vectors.
double inverse_iteration(const RSparse& K, double shift, bool mean_zero, const EigenOptions& opts,
                         const char* what) {
  const int n = static_cast<int>(K.rows());
  RSparse Ks = K;
  if (shift != 0.0) {
    RSparse I(n, n);
    I.setIdentity();
    Ks = K + shift * I;
  }
  Eigen::SimplicialLDLT<RSparse> ldlt(Ks);
  if (ldlt.info() != Eigen::Success) throw SolverError(std::string(what) + ": factorization failed");
  RVec x = seeded_start(n);
  if (mean_zero) x.array() -= x.mean();
  x.normalize();
  double rq = x.dot(K * x);
  for (int it = 0; it < opts.max_iterations; ++it) {
    RVec y = ldlt.solve(x);
    if (mean_zero) y.array() -= y.mean();
    y.normalize();
    const double next = y.dot(K * y);
    x = std::move(y);
    if (std::abs(next - rq) <= opts.tolerance * std::abs(next) && it > 2) {
      return next;
    }
    rq = next;
  }
  throw SolverError(std::string(what) + ": inverse iteration did not converge");
}

// Cell field -> full face arrays of its gradient (xface block then yface block).
RSparse cell_gradient_full(const CrossSectionGrid& g, PoincareBc bc) {
  const int nx = g.nx(), ny = g.ny();
  const double ih = 1.0 / g.h();
  const int nxf = (nx + 1) * ny;
  std::vector<Eigen::Triplet<double>> t;
  const bool dir = bc == PoincareBc::dirichlet;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int r = i + (nx + 1) * j;
      if (i > 0 && i < nx) {
        t.emplace_back(r, g.cell(i, j), ih);
        t.emplace_back(r, g.cell(i - 1, j), -ih);
      } else if (dir) {
        if (i == 0) t.emplace_back(r, g.cell(0, j), 2 * ih);
        else t.emplace_back(r, g.cell(nx - 1, j), -2 * ih);
      }
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int r = nxf + i + nx * j;
      if (j > 0 && j < ny) {
        t.emplace_back(r, g.cell(i, j), ih);
        t.emplace_back(r, g.cell(i, j - 1), -ih);
      } else if (dir) {
        if (j == 0) t.emplace_back(r, g.cell(i, 0), 2 * ih);
        else t.emplace_back(r, g.cell(i, ny - 1), -2 * ih);
      }
    }
  }
  RSparse G(nxf + nx * (ny + 1), g.num_cells());
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

}  // namespace

double dirichlet_smallest(const CrossSectionGrid& grid, const EigenOptions& opts) {
  const RSparse K = -grid.laplacian_dirichlet();
  return inverse_iteration(K, 0.0, false, opts, "dirichlet_smallest");
}

double neumann_smallest_positive(const CrossSectionGrid& grid, const EigenOptions& opts) {
  const RSparse K = -grid.laplacian_neumann();
  // The shift only makes K invertible; the mean-zero restriction removes the constant kernel.
  const double shift = 1.0 / grid.area();
  const double mu = inverse_iteration(K, shift, true, opts, "neumann_smallest_positive");
  return mu;
}

SpectralThresholds spectral_thresholds(const CrossSectionGrid& grid, const EigenOptions& opts) {
  SpectralThresholds t;
  t.alpha0 = dirichlet_smallest(grid, opts);
  t.alpha1 = neumann_smallest_positive(grid, opts);
  t.alpha_bar = std::min(t.alpha0, t.alpha1);
  return t;
}

SectorParams sector_params(double alpha_bar, double beta, double alpha) {
  SectorParams s;
  if (!(alpha_bar > 0)) {
    s.reason = "alpha_bar must be positive";
  } else if (!(beta > 0 && beta * beta < alpha_bar)) {
    s.reason = "beta must lie in (0, sqrt(alpha_bar))";
  } else if (!(alpha > 0 && alpha < alpha_bar - beta * beta)) {
    s.reason = "alpha must lie in (0, alpha_bar - beta^2)";
  } else {
    s.valid = true;
  }
  const double rad = alpha_bar - beta * beta - alpha;
  if (beta > 0 && rad >= 0) s.eps_star = std::atan(std::sqrt(rad) / beta);
  return s;
}

PoincareEstimate poincare_constant(const CrossSectionGrid& grid, PoincareBc bc, double r,
                                   const PowerWeight& weight, int ensemble_size, std::uint64_t seed) {
  require(r > 1.0, "poincare_constant needs r in (1, inf)");
  require(ensemble_size >= 1, "poincare_constant needs a non-empty ensemble");
  require(in_ar_range(weight, r), "degenerate weight: " + weight.id() + " is not in A_r");

  const WeightTables tables(grid, weight);
  const RSparse G = cell_gradient_full(grid, bc);
  const int nc = grid.num_cells();
  const int nxf = grid.location_size(Location::xface);
  const auto wc = tables.at(Location::cell);
  const auto wx = tables.at(Location::xface);
  const auto wy = tables.at(Location::yface);

  auto ratio = [&](const RVec& u) {
    const RVec du = G * u;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < nc; ++k) num += std::pow(std::abs(u[k]), r) * wc[k];
    for (int k = 0; k < nxf; ++k) den += std::pow(std::abs(du[k]), r) * wx[k];
    for (int k = nxf; k < du.size(); ++k) den += std::pow(std::abs(du[k]), r) * wy[k - nxf];
    if (den <= 0.0) return 0.0;
    return std::pow(num / den, 1.0 / r);
  };
  auto constrain = [&](RVec& u) {
    if (bc == PoincareBc::mean_zero) u.array() -= u.mean();
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;
  std::uniform_int_distribution<int> modes(1, 4);
  PoincareEstimate est;
  est.ensemble_size = ensemble_size;
  double best = 0.0;
  for (int e = 0; e < ensemble_size; ++e) {
    RVec u = RVec::Zero(nc);
    const int kx = modes(rng), ky = modes(rng);
    const double noise = 0.05 * std::abs(N01(rng));
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        const auto p = grid.location_point(Location::cell, i, j);
        const double sx = bc == PoincareBc::dirichlet ? std::sin(kx * kPi * p[0] / grid.lx())
                                                      : std::cos((kx - 1) * kPi * p[0] / grid.lx());
        const double sy = bc == PoincareBc::dirichlet ? std::sin(ky * kPi * p[1] / grid.ly())
                                                      : std::cos((ky - 1) * kPi * p[1] / grid.ly());
        u[grid.cell(i, j)] = sx * sy + noise * N01(rng);
      }
    }
    constrain(u);
    best = std::max(best, ratio(u));
  }

  if (r == 2.0) {
    // Generalized power iteration for max u^T M u / u^T K u.
    RVec wf(G.rows());
    for (int k = 0; k < nxf; ++k) wf[k] = wx[k];
    for (int k = nxf; k < wf.size(); ++k) wf[k] = wy[k - nxf];
    RSparse K = G.transpose() * wf.asDiagonal() * G;
    RVec m(nc);
    for (int k = 0; k < nc; ++k) m[k] = wc[k];
    if (bc == PoincareBc::mean_zero) {
      RSparse S(nc, nc);
      S.setIdentity();
      K += (1e-6 * K.diagonal().mean()) * S;
    }
    Eigen::SimplicialLDLT<RSparse> ldlt(K);
    if (ldlt.info() == Eigen::Success) {
      RVec u = seeded_start(nc);
      constrain(u);
      for (int it = 0; it < 500; ++it) {
        RVec v = ldlt.solve(RVec(m.asDiagonal() * u));
        constrain(v);
        v.normalize();
        const double before = ratio(u);
        u = std::move(v);
        const double now = ratio(u);
        if (it > 5 && std::abs(now - before) <= 1e-14 * now) break;
      }
      best = std::max(best, ratio(u));
      est.refined = true;
    }
  }
  est.constant = best;
  return est;
}

DivergenceSolver::DivergenceSolver(const CrossSectionGrid& grid) : grid_(grid) {
  const int nc = grid.num_cells();
  const int nu1 = grid.num_u1();
  const int nf = grid.num_face_unknowns();

  bump_.resize(nc);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const auto p = grid.location_point(Location::cell, i, j);
      const double sx = std::sin(kPi * p[0] / grid.lx());
      const double sy = std::sin(kPi * p[1] / grid.ly());
      bump_[grid.cell(i, j)] = sx * sx * sy * sy;
    }
  }
  bump_ /= bump_.sum() * grid.cell_area();

  // [ -L'  G  0 ] [u']   [0]
  // [  D   0  1 ] [phi] = [rhs]
  // [  0  1^T 0 ] [c ]   [0]
  std::vector<Eigen::Triplet<double>> t;
  auto add = [&](const RSparse& m, int r0, int c0, double s) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (RSparse::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
  };
  add(grid.laplacian_u1(), 0, 0, -1.0);
  add(grid.laplacian_u2(), nu1, nu1, -1.0);
  add(grid.gradient(), 0, nf, 1.0);
  add(grid.divergence(), nf, 0, 1.0);
  for (int k = 0; k < nc; ++k) {
    t.emplace_back(nf + k, nf + nc, 1.0);
    t.emplace_back(nf + nc, nf + k, 1.0);
  }
  RSparse A(nf + nc + 1, nf + nc + 1);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  lu_.analyzePattern(A);
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success) throw SolverError("DivergenceSolver: singular auxiliary Stokes system");
}

CVec DivergenceSolver::solve(const CVec& g, cplx eta) const {
  require(eta != cplx(0.0), "div_solve: eta must be nonzero");
  const int nc = grid_.num_cells();
  const int nf = grid_.num_face_unknowns();
  require(g.size() == nc, "div_solve: g must live at cell centers");
  const cplx gbar = g.sum() * grid_.cell_area();
  const CVec rest = g - gbar * bump_.cast<cplx>();

  CVec u(grid_.num_velocity());
  RVec rhs = RVec::Zero(nf + nc + 1);
  for (int part = 0; part < 2; ++part) {
    rhs.segment(nf, nc) = part == 0 ? RVec(rest.real()) : RVec(rest.imag());
    const RVec x = lu_.solve(rhs);
    if (part == 0) u.head(nf) = x.head(nf).cast<cplx>();
    else u.head(nf) += cplx(0, 1) * x.head(nf).cast<cplx>();
  }
  u.tail(nc) = (gbar / (cplx(0, 1) * eta)) * bump_.cast<cplx>();
  return u;
}

CVec div_eta(const CrossSectionGrid& grid, const CVec& velocity, cplx eta) {
  const int nf = grid.num_face_unknowns();
  const int nc = grid.num_cells();
  require(velocity.size() == grid.num_velocity(), "div_eta: packed velocity expected");
  CVec r = grid.divergence().cast<cplx>() * velocity.head(nf);
  r += cplx(0, 1) * eta * velocity.segment(nf, nc);
  return r;
}

}  // namespace cylstokes
