#include "cylstokes/evolution.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "cylstokes/cross_section.hpp"
#include "cylstokes/parallel.hpp"

namespace cylstokes {

namespace {

const cplx I1(0.0, 1.0);

bool mode_retained(const AxialGrid& axial, double beta, int k) {
  if (axial.is_nyquist(k)) return false;
  return !(beta == 0.0 && axial.wavenumber(k) == 0);
}

double trapezoid_power(const std::vector<double>& values, double dt, double p, double rate) {
  const int K = static_cast<int>(values.size()) - 1;
  double total = 0.0;
  for (int n = 0; n <= K; ++n) {
    const double w = (n == 0 || n == K) ? 0.5 : 1.0;
    total += w * std::pow(std::exp(rate * n * dt) * values[n], p);
  }
  return std::pow(total * dt, 1.0 / p);
}

}  // namespace

TimeGrid TimeGrid::build(double horizon, int steps, double p) {
  require(horizon > 0.0, "time horizon must be positive");
  require(steps >= 8, "time grid needs at least 8 steps");
  require(p > 1.0, "time exponent p must exceed 1");
  TimeGrid t;
  t.horizon = horizon;
  t.steps = steps;
  t.p = p;
  return t;
}

struct StokesEvolution::Mode {
  cplx eta;
  ModeProjector projector;
  CSparse stiffness;  // -Lap' + eta^2
  Eigen::MatrixXcd basis, restricted;

  Mode(const CrossSectionGrid& g, cplx e) : eta(e), projector(g, e) {
    stiffness = (-g.velocity_laplacian()).cast<cplx>();
    for (int k = 0; k < g.num_velocity(); ++k) stiffness.coeffRef(k, k) += eta * eta;
    stiffness.makeCompressed();
  }

  CVec apply(const CVec& u) const { return projector.project(stiffness * u); }

  void build_dense(const CrossSectionGrid& g) {
    const int nv = g.num_velocity(), nf = g.num_face_unknowns(), nc = g.num_cells();
    Eigen::MatrixXcd Bh = Eigen::MatrixXcd::Zero(nv, nc);
    Bh.topRows(nf) = Eigen::MatrixXd(g.divergence()).transpose().cast<cplx>();
    Bh.bottomRows(nc) = std::conj(I1 * eta) * Eigen::MatrixXcd::Identity(nc, nc);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Bh);
    const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(nv, nv);
    basis = Q.rightCols(nv - nc);
    Eigen::MatrixXcd AZ(nv, nv - nc);
    for (int c = 0; c < nv - nc; ++c) AZ.col(c) = apply(basis.col(c));
    restricted = basis.adjoint() * AZ;
  }
};

StokesEvolution::StokesEvolution(const CrossSectionGrid& grid, const AxialGrid& axial, double beta,
                                 EvolutionOptions opts)
    : grid_(grid), axial_(axial), beta_(beta), opts_(opts), modes_(axial.points()) {
  require(beta >= 0.0, "beta must be nonnegative");
  parallel_for(
      axial.points(),
      [&](int k) {
        if (!mode_retained(axial_, beta_, k)) return;
        auto m = std::make_unique<Mode>(grid_, cplx(axial_.xi(k), beta_));
        if (opts_.dense) m->build_dense(grid_);
        modes_[k] = std::move(m);
      },
      opts.threads);
}

StokesEvolution::~StokesEvolution() = default;

bool StokesEvolution::retained(int index) const { return static_cast<bool>(modes_.at(index)); }

const StokesEvolution::Mode& StokesEvolution::mode(int index) const {
  require(retained(index), "axial mode is not retained");
  return *modes_[index];
}

CMat StokesEvolution::to_modes(const CMat& velocity) const {
  require(velocity.rows() == grid_.num_velocity() && velocity.cols() == axial_.points(), "field shape mismatch");
  return axial_forward(axial_exponential(velocity, axial_, beta_));
}

CMat StokesEvolution::weighted_planes(const CMat& modes) const { return axial_inverse(modes); }

CMat StokesEvolution::from_modes(const CMat& modes) const {
  return axial_exponential(axial_inverse(modes), axial_, -beta_);
}

CMat StokesEvolution::project_modes(const CMat& modes) const {
  const int M = axial_.points();
  if (beta_ == 0.0) {
    const double scale = modes.norm();
    if (modes.col(0).norm() > 1e-12 * scale)
      throw InvalidArgument("projection refused: the axial mean has eta = 0 when beta = 0; remove it first");
  }
  CMat out = CMat::Zero(modes.rows(), M);
  parallel_for(
      M,
      [&](int k) {
        if (retained(k)) out.col(k) = mode(k).projector.project(modes.col(k));
      },
      opts_.threads);
  return out;
}

CMat StokesEvolution::apply_operator(const CMat& modes) const {
  const int M = axial_.points();
  CMat out = CMat::Zero(modes.rows(), M);
  parallel_for(
      M,
      [&](int k) {
        if (retained(k)) out.col(k) = mode(k).apply(modes.col(k));
      },
      opts_.threads);
  return out;
}

CMat StokesEvolution::semigroup_modes(const CMat& modes, double t, Propagator method, int substeps) const {
  require(t >= 0.0, "semigroup time must be nonnegative");
  const int M = axial_.points();
  CMat out = CMat::Zero(modes.rows(), M);
  if (t == 0.0) {
    for (int k = 0; k < M; ++k)
      if (retained(k)) out.col(k) = modes.col(k);
    return out;
  }
  if (method == Propagator::dense_exponential) {
    require(opts_.dense, "dense propagator needs EvolutionOptions::dense");
    parallel_for(
        M,
        [&](int k) {
          if (!retained(k)) return;
          const Mode& m = mode(k);
          const Eigen::MatrixXcd E = (-t * m.restricted).exp();
          out.col(k) = m.basis * (E * (m.basis.adjoint() * modes.col(k)));
        },
        opts_.threads);
    return out;
  }
  require(substeps >= 1, "Crank-Nicolson needs at least one substep");
  const double s = 2.0 * substeps / t;
  parallel_for(
      M,
      [&](int k) {
        if (!retained(k)) return;
        SpectralParams sp;
        sp.lambda = s;
        sp.xi = axial_.xi(k);
        sp.beta = beta_;
        const ModeSystem sys(grid_, sp);
        CVec u = modes.col(k);
        for (int n = 0; n < substeps; ++n) {
          const CVec v = solution_operators(sys, CVec(s * u)).velocity();
          u = 2.0 * v - u;
        }
        out.col(k) = u;
      },
      opts_.threads);
  return out;
}

CylinderField StokesEvolution::semigroup(const CylinderField& U0, double t, Propagator method, int substeps) const {
  CylinderField out = CylinderField::zeros(grid_, axial_);
  out.velocity = from_modes(semigroup_modes(to_modes(U0.velocity), t, method, substeps));
  return out;
}

std::vector<cplx> StokesEvolution::mode_spectrum(int index) const {
  require(opts_.dense, "spectrum needs EvolutionOptions::dense");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mode(index).restricted, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

const Eigen::MatrixXcd& StokesEvolution::kernel_basis(int index) const {
  require(opts_.dense, "kernel basis needs EvolutionOptions::dense");
  return mode(index).basis;
}

const Eigen::MatrixXcd& StokesEvolution::restricted_operator(int index) const {
  require(opts_.dense, "restricted operator needs EvolutionOptions::dense");
  return mode(index).restricted;
}

CylinderField leray_project(const CylinderField& U, double beta, int threads) {
  EvolutionOptions opts;
  opts.threads = threads;
  const StokesEvolution evo(U.grid, U.axial, beta, opts);
  CylinderField out = CylinderField::zeros(U.grid, U.axial);
  out.velocity = evo.from_modes(evo.project_modes(evo.to_modes(U.velocity)));
  return out;
}

double solenoidal_defect(const CylinderField& U, double beta) {
  const CMat modes = axial_forward(axial_exponential(U.velocity, U.axial, beta));
  double worst = 0.0;
  for (int k = 0; k < U.axial.points(); ++k) {
    if (!mode_retained(U.axial, beta, k)) continue;
    const double n = modes.col(k).norm();
    if (n == 0.0) continue;
    const CVec d = div_eta(U.grid, modes.col(k), cplx(U.axial.xi(k), beta));
    worst = std::max(worst, U.grid.h() * d.norm() / n);
  }
  return worst;
}

CylinderField remove_weighted_mean(const CylinderField& U, double beta) {
  CMat modes = axial_forward(axial_exponential(U.velocity, U.axial, beta));
  modes.col(0).setZero();
  CylinderField out = U;
  out.velocity = axial_exponential(axial_inverse(modes), U.axial, -beta);
  return out;
}

DecaySeries decay_series(const StokesEvolution& evo, const CylinderField& U0, double t_end, int samples,
                         double fit_from) {
  require(evo.has_dense(), "decay series uses the dense propagator");
  require(samples >= 2 && t_end > 0.0, "decay series needs a positive horizon and at least two samples");
  const int M = evo.axial().points();
  const double dt = t_end / samples;
  const WeightTables unit(evo.grid(), PowerWeight::unit());
  MixedNormSpec l2;

  // Per-mode coefficients on the kernel basis and one-step propagators.
  std::vector<CVec> coeff(M);
  std::vector<Eigen::MatrixXcd> step(M);
  const CMat modes = evo.to_modes(U0.velocity);
  parallel_for(
      M,
      [&](int k) {
        if (!evo.retained(k)) return;
        coeff[k] = evo.kernel_basis(k).adjoint() * modes.col(k);
        step[k] = (-dt * evo.restricted_operator(k)).exp();
      },
      evo.threads());

  DecaySeries out;
  for (int n = 0; n <= samples; ++n) {
    CMat cur = CMat::Zero(evo.grid().num_velocity(), M);
    for (int k = 0; k < M; ++k)
      if (evo.retained(k)) cur.col(k) = evo.kernel_basis(k) * coeff[k];
    out.t.push_back(n * dt);
    out.norm.push_back(mixed_norm(evo.weighted_planes(cur), evo.axial(), l2, unit));
    for (int k = 0; k < M; ++k)
      if (evo.retained(k)) coeff[k] = step[k] * coeff[k];
  }

  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < out.t.size(); ++j) {
    if (out.t[j] < fit_from || !(out.norm[j] > 0.0)) continue;
    const double x = out.t[j], y = std::log(out.norm[j]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  require(n >= 2, "decay fit window holds fewer than two positive samples");
  out.fitted_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

void solve_cauchy_modes(const StokesEvolution& evo, const ModeForcing& F, const TimeGrid& time,
                        const TrajectoryObserver& observe) {
  const int M = evo.axial().points(), nv = evo.grid().num_velocity();
  const double s = 2.0 / time.dt();
  std::vector<std::unique_ptr<ModeSystem>> sys(M);
  parallel_for(
      M,
      [&](int k) {
        if (!evo.retained(k)) return;
        SpectralParams sp;
        sp.lambda = s;
        sp.xi = evo.axial().xi(k);
        sp.beta = evo.beta();
        sys[k] = std::make_unique<ModeSystem>(evo.grid(), sp);
      },
      evo.threads());

  CMat u = CMat::Zero(nv, M);
  CMat f0 = F(0.0);
  require(f0.rows() == nv && f0.cols() == M, "forcing shape mismatch");
  if (observe) observe(0, u, f0);
  for (int n = 0; n < time.steps; ++n) {
    const CMat f1 = F(time.t(n + 1));
    CMat next = CMat::Zero(nv, M);
    parallel_for(
        M,
        [&](int k) {
          if (!sys[k]) return;
          const CVec rhs = s * u.col(k) + 0.5 * (f0.col(k) + f1.col(k));
          next.col(k) = 2.0 * solution_operators(*sys[k], rhs).velocity() - u.col(k);
        },
        evo.threads());
    u = std::move(next);
    f0 = f1;
    if (observe) observe(n + 1, u, f0);
  }
}

std::vector<CMat> solve_cauchy(const StokesEvolution& evo, const std::function<CMat(double)>& F,
                               const TimeGrid& time) {
  std::vector<CMat> out(time.steps + 1);
  solve_cauchy_modes(
      evo, [&](double t) { return evo.to_modes(F(t)); }, time,
      [&](int n, const CMat& u, const CMat&) { out[n] = evo.from_modes(u); });
  return out;
}

double SeparableForcing::profile(double t) const {
  const double s = t / tau;
  return s * s * std::exp(-s);
}

SeparableForcing random_separable_forcing(const StokesEvolution& evo, Rng& rng, const ForcingShape& shape) {
  const CrossSectionGrid& g = evo.grid();
  const AxialGrid& ax = evo.axial();
  const CVec spatial = smooth_velocity(g, rng, shape.sine_modes, false);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = shape.width_min + (shape.width_max - shape.width_min) * unit(rng);
  const double center = ax.half_length() * (unit(rng) - 0.5) / 4.0;
  SeparableForcing f;
  f.tau = shape.tau_min + (shape.tau_max - shape.tau_min) * unit(rng);
  CMat planes(g.num_velocity(), ax.points());
  for (int m = 0; m < ax.points(); ++m) {
    const double d = (ax.z(m) - center) / width;
    planes.col(m) = std::exp(-0.5 * d * d) * spatial;
  }
  CMat modes = evo.to_modes(planes);
  if (evo.beta() == 0.0) modes.col(0).setZero();
  f.spatial_modes = evo.project_modes(modes);
  return f;
}

std::vector<MaxRegRatio> maxreg_ratio(const StokesEvolution& evo, const SeparableForcing& F, const TimeGrid& time,
                                      const MaxRegSpec& spec, const WeightTables& tables) {
  require(!spec.p_values.empty(), "maxreg needs at least one time exponent");
  MixedNormSpec plane = spec.norm;
  plane.beta = 0.0;  // the planes below are already weighted
  const AxialGrid& ax = evo.axial();
  std::vector<double> nu(time.steps + 1), nut(time.steps + 1), nau(time.steps + 1), nf(time.steps + 1);
  // F(t) = profile(t) F0, so its planes and norm are computed once.
  const CMat f_planes = evo.weighted_planes(F.spatial_modes);
  const double f_norm = mixed_norm(f_planes, ax, plane, tables);
  solve_cauchy_modes(
      evo, [&](double t) { return CMat(F.profile(t) * F.spatial_modes); }, time,
      [&](int n, const CMat& u, const CMat&) {
        const double theta = F.profile(time.t(n));
        const CMat au = evo.weighted_planes(evo.apply_operator(u));
        nu[n] = mixed_norm(evo.weighted_planes(u), ax, plane, tables);
        nau[n] = mixed_norm(au, ax, plane, tables);
        nut[n] = mixed_norm(CMat(theta * f_planes - au), ax, plane, tables);
        nf[n] = std::abs(theta) * f_norm;
      });
  std::vector<MaxRegRatio> out;
  for (double p : spec.p_values) {
    require(p > 1.0, "time exponent p must exceed 1");
    MaxRegRatio r;
    r.p = p;
    const double dt = time.dt();
    r.norm_f = trapezoid_power(nf, dt, p, 0.0);
    if (!(r.norm_f > 0.0)) throw InvalidArgument("maxreg ratio refused: zero-norm forcing");
    r.norm_u = trapezoid_power(nu, dt, p, 0.0);
    r.norm_ut = trapezoid_power(nut, dt, p, 0.0);
    r.norm_au = trapezoid_power(nau, dt, p, 0.0);
    r.ratio = (r.norm_u + r.norm_ut + r.norm_au) / r.norm_f;
    const double a = spec.alpha_t;
    r.ratio_weighted = (trapezoid_power(nu, dt, p, a) + trapezoid_power(nut, dt, p, a) +
                        trapezoid_power(nau, dt, p, a)) /
                       trapezoid_power(nf, dt, p, a);
    out.push_back(r);
  }
  return out;
}

double decay_horizon(double alpha_bar_h, double beta, double tail) {
  const double gap = alpha_bar_h - beta * beta;
  require(gap > 0.0, "decay horizon needs beta^2 < alpha_bar");
  require(tail > 0.0 && tail < 1.0, "tail must lie in (0, 1)");
  return std::log(1.0 / tail) / gap;
}

}  // namespace cylstokes
