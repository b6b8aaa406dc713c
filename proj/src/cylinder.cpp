#include "cylstokes/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/FFT>

#include "cylstokes/forcing.hpp"
#include "cylstokes/parallel.hpp"

namespace cylstokes {

namespace {

const cplx I1(0.0, 1.0);

/// Control-volume weight integrals of the packed velocity entries.
RVec velocity_mass(const CrossSectionGrid& g, const WeightTables& tables) {
  RVec m(g.num_velocity());
  const auto wx = tables.at(Location::xface), wy = tables.at(Location::yface), wc = tables.at(Location::cell);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) m[g.u1(i, j)] = wx[i + (g.nx() + 1) * j];
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) m[g.offset_u2() + g.u2(i, j)] = wy[i + g.nx() * j];
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) m[g.offset_un() + g.cell(i, j)] = wc[g.cell(i, j)];
  return m;
}

/// Projection onto ker(div_eta) that is orthogonal in the inner product diag(mass).
class WeightedSolenoidalProjector {
 public:
  WeightedSolenoidalProjector(const CrossSectionGrid& g, cplx eta, const RVec& mass) : g_(g), eta_(eta), mass_(mass) {
    require(eta != cplx(0.0), "solenoidal projection needs eta != 0");
    const int nf = g.num_face_unknowns();
    const RVec inv_f = mass.head(nf).cwiseInverse();
    const RSparse& D = g.divergence();
    RSparse S = D * inv_f.asDiagonal() * RSparse(D.transpose());
    const RVec inv_c = mass.tail(g.num_cells()).cwiseInverse();
    for (int k = 0; k < g.num_cells(); ++k) S.coeffRef(k, k) += std::norm(eta) * inv_c[k];
    S.makeCompressed();
    ldlt_.compute(S);
    if (ldlt_.info() != Eigen::Success) throw SolverError("solenoidal projector: factorization failed");
  }

  CVec project(const CVec& v) const {
    const int nf = g_.num_face_unknowns(), nc = g_.num_cells();
    const CVec b = g_.divergence().cast<cplx>() * v.head(nf) + I1 * eta_ * v.tail(nc);
    const RVec yr = ldlt_.solve(RVec(b.real()));
    const RVec yi = ldlt_.solve(RVec(b.imag()));
    CVec y(nc);
    for (int k = 0; k < nc; ++k) y[k] = cplx(yr[k], yi[k]);
    CVec bh(g_.num_velocity());
    bh.head(nf) = RSparse(g_.divergence().transpose()).cast<cplx>() * y;
    bh.tail(nc) = -I1 * std::conj(eta_) * y;
    return v - (bh.array() / mass_.array().cast<cplx>()).matrix();
  }

 private:
  CrossSectionGrid g_;
  cplx eta_;
  RVec mass_;
  Eigen::SimplicialLDLT<RSparse> ldlt_;
};

double mass_norm(const CVec& v, const RVec& mass) {
  return std::sqrt((v.array().abs2() * mass.array()).sum());
}

FieldList combine(const FieldList& a, cplx sa, const FieldList& b, cplx sb) {
  FieldList out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k].values = sa * a[k].values + sb * b[k].values;
  return out;
}

CVec flatten(const MultiplierSample& s) {
  Eigen::Index n = 0;
  for (const auto& c : s.components)
    for (const auto& f : c) n += f.values.size();
  CVec out(n);
  Eigen::Index pos = 0;
  for (const auto& c : s.components)
    for (const auto& f : c) {
      out.segment(pos, f.values.size()) = f.values;
      pos += f.values.size();
    }
  return out;
}

}  // namespace

AxialGrid AxialGrid::build(double half_length, int points) {
  require(half_length > 0.0, "axial half-length must be positive");
  require(points >= 4 && (points & (points - 1)) == 0, "axial point count must be a power of two >= 4");
  AxialGrid a;
  a.half_length_ = half_length;
  a.points_ = points;
  return a;
}

CylinderField CylinderField::zeros(const CrossSectionGrid& grid, const AxialGrid& axial) {
  return {grid, axial, CMat::Zero(grid.num_velocity(), axial.points()), CMat::Zero(grid.num_cells(), axial.points())};
}

CMat axial_forward(const CMat& physical) {
  Eigen::FFT<double> fft;
  const Eigen::Index m = physical.cols();
  CMat out(physical.rows(), m);
  std::vector<cplx> in(m), res;
  for (Eigen::Index r = 0; r < physical.rows(); ++r) {
    for (Eigen::Index c = 0; c < m; ++c) in[c] = physical(r, c);
    fft.fwd(res, in);
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = res[c];
  }
  return out;
}

CMat axial_inverse(const CMat& modes) {
  Eigen::FFT<double> fft;
  const Eigen::Index m = modes.cols();
  CMat out(modes.rows(), m);
  std::vector<cplx> in(m), res;
  for (Eigen::Index r = 0; r < modes.rows(); ++r) {
    for (Eigen::Index c = 0; c < m; ++c) in[c] = modes(r, c);
    fft.inv(res, in);
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = res[c];
  }
  return out;
}

CMat axial_exponential(const CMat& planes, const AxialGrid& axial, double rate) {
  require(planes.cols() == axial.points(), "plane count does not match the axial grid");
  CMat out = planes;
  if (rate == 0.0) return out;
  for (int m = 0; m < axial.points(); ++m) out.col(m) *= std::exp(rate * axial.z(m));
  return out;
}

double mixed_norm(const CMat& velocity, const AxialGrid& axial, const MixedNormSpec& spec, const WeightTables& tables) {
  require(spec.q >= 1.0 && spec.r >= 1.0, "norm exponents must be >= 1");
  const CrossSectionGrid& g = tables.grid();
  require(velocity.rows() == g.num_velocity() && velocity.cols() == axial.points(), "field shape mismatch");
  double total = 0.0;
  for (int m = 0; m < axial.points(); ++m) {
    const CVec col = velocity.col(m) * std::exp(spec.beta * axial.z(m));
    const double plane = norm_lr(velocity_components(g, col), tables, spec.r);
    total += axial.dz() * std::pow(plane, spec.q);
  }
  return std::pow(total, 1.0 / spec.q);
}

CylinderResolvent::CylinderResolvent(const CrossSectionGrid& grid, const AxialGrid& axial, cplx lambda, double beta,
                                     double alpha, int threads)
    : grid_(grid), axial_(axial), lambda_(lambda), beta_(beta), alpha_(alpha), threads_(threads),
      modes_(axial.points()) {
  require(beta >= 0.0, "beta must be nonnegative");
  parallel_for(
      axial.points(),
      [&](int k) {
        if (axial.is_nyquist(k)) return;
        if (beta == 0.0 && axial.wavenumber(k) == 0) return;
        SpectralParams sp;
        sp.lambda = lambda;
        sp.xi = axial.xi(k);
        sp.beta = beta;
        sp.alpha = alpha;
        modes_[k] = std::make_shared<const ModeSystem>(grid, sp);
      },
      threads);
}

const ModeSystem& CylinderResolvent::mode(int index) const {
  require(retained(index), "axial mode is not retained");
  return *modes_[index];
}

ResolventResult resolvent_apply(const CylinderField& F, const CylinderResolvent& res, double support_tolerance) {
  const CrossSectionGrid& g = res.grid();
  const AxialGrid& ax = res.axial();
  require(F.grid.same_layout(g) && F.axial.points() == ax.points(), "forcing lives on a different cylinder grid");
  const int M = ax.points(), nv = g.num_velocity(), nc = g.num_cells();

  const CMat f = axial_exponential(F.velocity, ax, res.beta());
  const double fmax = f.cwiseAbs().maxCoeff();
  double outside = 0.0;
  for (int m = 0; m < M; ++m)
    if (std::abs(ax.z(m)) > 0.5 * ax.half_length()) outside = std::max(outside, f.col(m).cwiseAbs().maxCoeff());
  if (outside > support_tolerance * fmax)
    throw InvalidArgument("forcing support violation: weighted forcing reaches " + std::to_string(outside / fmax) +
                          " of its maximum outside |z| <= L/2");

  const CMat fh = axial_forward(f);
  CMat uh = CMat::Zero(nv, M), ph = CMat::Zero(nc, M);
  parallel_for(
      M,
      [&](int k) {
        if (!res.retained(k)) return;
        const ModeField sol = solution_operators(res.mode(k), fh.col(k));
        uh.col(k) = sol.velocity();
        ph.col(k) = sol.p();
      },
      res.threads());

  ResolventResult out{CylinderField::zeros(g, ax)};
  const CMat u = axial_inverse(uh);
  out.solution.velocity = axial_exponential(u, ax, -res.beta());
  out.solution.pressure = axial_exponential(axial_inverse(ph), ax, -res.beta());

  // Residual of the discrete cylinder system, recomputed from the synthesized fields.
  const CMat uh2 = axial_forward(axial_exponential(out.solution.velocity, ax, res.beta()));
  const CMat ph2 = axial_forward(axial_exponential(out.solution.pressure, ax, res.beta()));
  double rnum = 0.0, rden = 0.0;
  for (int k = 0; k < M; ++k) {
    if (!res.retained(k)) continue;
    CVec x(g.num_unknowns());
    x.head(nv) = uh2.col(k);
    x.tail(nc) = ph2.col(k);
    const CVec rhs = ModeSystem::pack_rhs(g, fh.col(k), CVec::Zero(nc));
    rnum += (res.mode(k).apply(x) - rhs).squaredNorm();
    rden += rhs.squaredNorm();
  }
  out.residual = rden > 0.0 ? std::sqrt(rnum / rden) : std::sqrt(rnum);

  const double umax = u.cwiseAbs().maxCoeff();
  if (umax > 0.0) {
    const double seam = std::max(u.col(0).cwiseAbs().maxCoeff(), u.col(M - 1).cwiseAbs().maxCoeff());
    out.seam_ratio = seam / umax;
    out.max_imag_ratio =
        out.solution.velocity.imag().cwiseAbs().maxCoeff() / out.solution.velocity.cwiseAbs().maxCoeff();
  }
  return out;
}

ResolventNormEstimate resolvent_norm_estimate(const CylinderResolvent& res, const MixedNormSpec& spec,
                                              int ensemble_size, std::uint64_t seed) {
  if (ensemble_size < 8) throw InvalidArgument("resolvent norm estimate needs an ensemble of at least 8");
  const CrossSectionGrid& g = res.grid();
  const AxialGrid& ax = res.axial();
  const int M = ax.points(), nv = g.num_velocity();
  const WeightTables tables(g, spec.weight);
  ResolventNormEstimate est;
  est.ensemble_size = ensemble_size;

  std::vector<int> retained;
  for (int k = 0; k < M; ++k)
    if (res.retained(k)) retained.push_back(k);

  if (spec.q == 2.0 && spec.r == 2.0) {
    est.power_iteration = true;
    const RVec mass = velocity_mass(g, tables);
    std::vector<double> norms(retained.size(), 0.0);
    parallel_for(
        static_cast<int>(retained.size()),
        [&](int t) {
          const int k = retained[t];
          const ModeSystem& sys = res.mode(k);
          const WeightedSolenoidalProjector Q(g, sys.params().eta(), mass);
          Rng rng(seed + 7919ull * static_cast<std::uint64_t>(k));
          const int nc = g.num_cells();
          auto apply = [&](const CVec& x) { return CVec(sys.solve_packed(ModeSystem::pack_rhs(g, x, CVec::Zero(nc))).head(nv)); };
          auto apply_adjoint = [&](const CVec& y) {
            CVec rhs = CVec::Zero(g.num_unknowns());
            rhs.head(nv) = (y.array() * mass.array().cast<cplx>()).matrix();
            const CVec z = sys.solve_adjoint_packed(rhs).head(nv);
            return Q.project(CVec((z.array() / mass.array().cast<cplx>()).matrix()));
          };
          double best = 0.0;
          for (int start = 0; start < std::max(1, ensemble_size / 8); ++start) {
            CVec x = Q.project(random_complex(nv, rng));
            x /= mass_norm(x, mass);
            double sigma = 0.0;
            for (int it = 0; it < 500; ++it) {
              const CVec y = apply(x);
              const double s = mass_norm(y, mass);
              CVec z = apply_adjoint(y);
              const double zn = mass_norm(z, mass);
              if (zn == 0.0) break;
              x = z / zn;
              const bool done = std::abs(s - sigma) <= 1e-12 * s;
              sigma = s;
              if (done) break;
            }
            best = std::max(best, sigma);
          }
          norms[t] = best;
        },
        res.threads());
    for (double n : norms) est.norm = std::max(est.norm, n);
  } else {
    Rng rng(seed);
    std::vector<std::unique_ptr<WeightedSolenoidalProjector>> projectors;
    const RVec mass = velocity_mass(g, WeightTables(g, PowerWeight::unit()));
    for (int k : retained) projectors.push_back(std::make_unique<WeightedSolenoidalProjector>(g, res.mode(k).params().eta(), mass));
    for (int e = 0; e < ensemble_size; ++e) {
      CMat fh = CMat::Zero(nv, M), uh = CMat::Zero(nv, M);
      for (std::size_t t = 0; t < retained.size(); ++t) {
        const int k = retained[t];
        const double amp = 1.0 / (1.0 + std::abs(ax.wavenumber(k)));
        fh.col(k) = projectors[t]->project(amp * smooth_velocity(g, rng, 4));
        uh.col(k) = solution_operators(res.mode(k), fh.col(k)).velocity();
      }
      MixedNormSpec plain = spec;
      plain.beta = 0.0;  // the fields below are already the weighted ones
      const double fn = mixed_norm(axial_inverse(fh), ax, plain, tables);
      const double un = mixed_norm(axial_inverse(uh), ax, plain, tables);
      if (fn > 0.0) est.norm = std::max(est.norm, un / fn);
    }
  }
  est.product = std::abs(res.lambda() + res.alpha()) * est.norm;
  return est;
}

double MultiplierSample::norm(const WeightTables& tables, double r) const {
  double s = 0.0;
  for (const auto& c : components) s += norm_sum(c, tables, r);
  return s;
}

MultiplierSample multiplier_eval(const ModeSystem& sys, const CVec& f) {
  const CrossSectionGrid& g = sys.grid();
  const SpectralParams& sp = sys.params();
  const ModeField sol = solution_operators(sys, f);
  const CVec u = sol.velocity(), p = sol.p();
  const double xi = sp.xi;
  MultiplierSample s;
  s.components[0] = scaled(velocity_components(g, u), sp.lambda + sp.alpha);
  s.components[1] = scaled(velocity_gradient(g, u), xi);
  s.components[2] = velocity_hessian(g, u);
  s.components[3] = scaled(velocity_components(g, u), xi * xi);
  s.components[4] = cell_gradient(g, p);
  s.components[5] = {cell_field(sp.eta() * p)};
  return s;
}

MultiplierSample multiplier_derivative_eval(const ModeSystem& sys, const CVec& f) {
  const CrossSectionGrid& g = sys.grid();
  const SpectralParams& sp = sys.params();
  const ModeField sol = solution_operators(sys, f);
  const ModeField der = derivative_solve(sys, sol);
  const CVec u = sol.velocity(), p = sol.p(), w = der.velocity(), q = der.p();
  const double xi = sp.xi;
  MultiplierSample s;
  s.components[0] = scaled(velocity_components(g, w), xi * (sp.lambda + sp.alpha));
  s.components[1] = combine(velocity_gradient(g, u), xi, velocity_gradient(g, w), xi * xi);
  s.components[2] = scaled(velocity_hessian(g, w), xi);
  s.components[3] = combine(velocity_components(g, u), 2 * xi * xi, velocity_components(g, w), xi * xi * xi);
  s.components[4] = scaled(cell_gradient(g, q), xi);
  s.components[5] = {cell_field(CVec(xi * p + xi * sp.eta() * q))};
  return s;
}

RBoundEstimate rademacher_rbound(const OperatorFamily& family, const RBoundOptions& opts) {
  require(!family.maps.empty(), "R-bound needs a nonempty family");
  require(opts.trials >= 64, "R-bound estimation needs at least 64 trials");
  require(opts.terms >= 1 && opts.q >= 1.0, "invalid R-bound options");
  Rng rng(opts.seed);
  std::uniform_int_distribution<int> pick_terms(1, opts.terms);
  std::uniform_int_distribution<int> pick_map(0, static_cast<int>(family.maps.size()) - 1);
  std::uniform_real_distribution<double> log_scale(-3.0, 0.0);
  std::bernoulli_distribution coin(0.5);

  RBoundEstimate est;
  est.trials = opts.trials;
  for (int t = 0; t < opts.trials; ++t) {
    const int n = pick_terms(rng);
    std::vector<CVec> xs, ys;
    for (int j = 0; j < n; ++j) {
      const int idx = pick_map(rng);
      CVec x = random_complex(family.input_dim, rng) * std::pow(10.0, log_scale(rng));
      ys.push_back(family.maps[idx](x));
      xs.push_back(std::move(x));
    }
    std::vector<std::vector<int>> signs;
    if (n <= opts.exhaustive_limit) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> s(n);
        for (int j = 0; j < n; ++j) s[j] = (mask >> j) & 1u ? -1 : 1;
        signs.push_back(std::move(s));
      }
    } else {
      for (int d = 0; d < opts.sign_samples; ++d) {
        std::vector<int> s(n);
        for (int j = 0; j < n; ++j) s[j] = coin(rng) ? -1 : 1;
        signs.push_back(std::move(s));
      }
    }
    double num = 0.0, den = 0.0;
    for (const auto& s : signs) {
      CVec sx = CVec::Zero(xs[0].size()), sy = CVec::Zero(ys[0].size());
      for (int j = 0; j < n; ++j) {
        sx += double(s[j]) * xs[j];
        sy += double(s[j]) * ys[j];
      }
      num += std::pow(family.norm_out(sy), opts.q);
      den += std::pow(family.norm_in(sx), opts.q);
    }
    if (den == 0.0) throw InvalidArgument("R-bound: degenerate denominator");
    const double ratio = std::pow(num / den, 1.0 / opts.q);
    if (ratio > est.value) {
      est.value = ratio;
      est.best_terms = n;
    }
  }
  return est;
}

OperatorFamily multiplier_family(const CrossSectionGrid& grid, cplx lambda, double beta, double alpha,
                                 const std::vector<double>& xis, std::shared_ptr<const WeightTables> tables, double r,
                                 int threads) {
  require(!xis.empty(), "multiplier family needs at least one frequency");
  std::vector<std::shared_ptr<const ModeSystem>> systems(xis.size());
  parallel_for(
      static_cast<int>(xis.size()),
      [&](int k) {
        SpectralParams sp;
        sp.lambda = lambda;
        sp.xi = xis[k];
        sp.beta = beta;
        sp.alpha = alpha;
        systems[k] = std::make_shared<const ModeSystem>(grid, sp);
      },
      threads);

  // Output layout: locations and sizes of the flattened sample fields.
  auto layout = std::make_shared<std::vector<std::pair<Location, Eigen::Index>>>();
  for (const auto& c : multiplier_eval(*systems[0], CVec::Zero(grid.num_velocity())).components)
    for (const auto& f : c) layout->emplace_back(f.loc, f.values.size());

  OperatorFamily fam;
  fam.input_dim = grid.num_velocity();
  for (const auto& sys : systems) {
    fam.maps.push_back([sys](const CVec& f) { return flatten(multiplier_eval(*sys, f)); });
    fam.maps.push_back([sys](const CVec& f) { return flatten(multiplier_derivative_eval(*sys, f)); });
  }
  fam.norm_in = [grid, tables, r](const CVec& f) { return norm_sum(velocity_components(grid, f), *tables, r); };
  fam.norm_out = [layout, tables, r](const CVec& v) {
    double s = 0.0;
    Eigen::Index pos = 0;
    for (const auto& [loc, n] : *layout) {
      s += weighted_norm(CVec(v.segment(pos, n)), loc, *tables, r);
      pos += n;
    }
    return s;
  };
  return fam;
}

}  // namespace cylstokes
