#include "cylstokes/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>

#include "cylstokes/cross_section.hpp"
#include "cylstokes/cylinder.hpp"
#include "cylstokes/evolution.hpp"
#include "cylstokes/forcing.hpp"
#include "cylstokes/mode_estimates.hpp"
#include "cylstokes/mode_solver.hpp"
#include "cylstokes/stats.hpp"
#include "cylstokes/weights.hpp"

namespace cylstokes {

using nlohmann::json;

namespace {

const cplx I1(0.0, 1.0);

std::string num(double x) { return format_number(x); }

/// Least-squares slope of log(y) against log(x).
double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Cross-section with nx cells across and square cells; ny follows from the aspect ratio.
CrossSectionGrid section_grid(const ExperimentConfig& cfg, int nx, const std::string& path) {
  const double lx = cfg.num("grid.lx"), ly = cfg.num("grid.ly");
  const double ny_real = nx * ly / lx;
  const int ny = static_cast<int>(std::lround(ny_real));
  if (nx < 4 || std::abs(ny_real - ny) > 1e-9 * ny_real || ny < 4)
    throw ConfigError(path + ": " + std::to_string(nx) + " cells across do not give square cells of at least 4 rows");
  return CrossSectionGrid::build(lx, ly, nx, ny);
}

PowerWeight config_weight(const ExperimentConfig& cfg) {
  try {
    return PowerWeight::parse(cfg.str("weight.spec"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("weight.spec: ") + e.what());
  }
}

/// Sector half-aperture used by the sweeps: fraction * eps* for the given threshold.
double sweep_eps(const ExperimentConfig& cfg, double alpha_bar) {
  const auto sp = sector_params(alpha_bar, cfg.num("rates.beta"), cfg.num("rates.alpha"));
  if (!sp.valid) throw ConfigError("rates.beta: sector parameters invalid (" + sp.reason + ")");
  return cfg.num("sector.fraction") * sp.eps_star;
}

std::vector<double> signed_xis(double lo, double hi, int n) {
  std::vector<double> out;
  for (double x : log_space(lo, hi, n)) {
    out.push_back(-x);
    out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CVec smooth_forcing(const CrossSectionGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  return smooth_velocity(g, rng, 3, true);
}

// Manufactured mode solution on (0,Lx)x(0,Ly) with wavenumbers kx = pi/Lx, ky = pi/Ly.
struct Manufactured {
  CVec exact, f, g;
};

Manufactured manufactured(const CrossSectionGrid& gr, const SpectralParams& sp) {
  const cplx eta = sp.eta();
  const cplx s = sp.lambda + eta * eta;
  const double h = gr.h(), kx = kPi / gr.lx(), ky = kPi / gr.ly();
  Manufactured m{CVec::Zero(gr.num_unknowns()), CVec::Zero(gr.num_velocity()), CVec::Zero(gr.num_cells())};
  for (int j = 0; j < gr.ny(); ++j)
    for (int i = 1; i < gr.nx(); ++i) {
      const double x = i * h, y = (j + 0.5) * h;
      const int k = gr.u1(i, j);
      m.exact[k] = std::sin(kx * x) * std::sin(2 * ky * y);
      m.f[k] = (s + kx * kx + 4 * ky * ky) * m.exact[k] - kx * std::sin(kx * x) * std::cos(2 * ky * y) + 1.0;
    }
  for (int j = 1; j < gr.ny(); ++j)
    for (int i = 0; i < gr.nx(); ++i) {
      const double x = (i + 0.5) * h, y = j * h;
      const int k = gr.offset_u2() + gr.u2(i, j);
      m.exact[k] = std::sin(2 * kx * x) * std::sin(ky * y);
      m.f[k] = (s + 4 * kx * kx + ky * ky) * m.exact[k] - 2 * ky * std::cos(kx * x) * std::sin(2 * ky * y);
    }
  for (int j = 0; j < gr.ny(); ++j)
    for (int i = 0; i < gr.nx(); ++i) {
      const double x = (i + 0.5) * h, y = (j + 0.5) * h;
      const int c = gr.cell(i, j);
      const double un = std::sin(kx * x) * std::sin(ky * y);
      const double p = std::cos(kx * x) * std::cos(2 * ky * y) + x;
      m.exact[gr.offset_un() + c] = un;
      m.exact[gr.offset_p() + c] = p;
      m.f[gr.offset_un() + c] = (s + kx * kx + ky * ky) * un + I1 * eta * p;
      m.g[c] = kx * std::cos(kx * x) * std::sin(2 * ky * y) + ky * std::sin(2 * kx * x) * std::cos(ky * y) +
               I1 * eta * un;
    }
  return m;
}

/// Dense spectral value of ||(lambda + A)^{-1}|| for beta = 0 and the unit weight: the
/// restriction of -Lap' + xi^2 to ker(div_xi) is Hermitian, so the norm is the largest
/// 1/|lambda + mu| over its eigenvalues and the retained axial modes.
double dense_resolvent_oracle(const CrossSectionGrid& g, const AxialGrid& ax, cplx lambda) {
  const int nv = g.num_velocity(), nf = g.num_face_unknowns(), nc = g.num_cells();
  const Eigen::MatrixXd Lv = Eigen::MatrixXd(g.velocity_laplacian());
  const Eigen::MatrixXd D = Eigen::MatrixXd(g.divergence());
  double best = 0.0;
  for (int k = 0; k < ax.points(); ++k) {
    if (ax.is_nyquist(k) || ax.wavenumber(k) == 0) continue;
    const double xi = ax.xi(k);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nc, nv);
    B.leftCols(nf) = D.cast<cplx>();
    B.rightCols(nc) = I1 * xi * Eigen::MatrixXcd::Identity(nc, nc);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeFullV);
    const Eigen::MatrixXcd Z = svd.matrixV().rightCols(nv - static_cast<int>(svd.rank()));
    const Eigen::MatrixXcd K = (-Lv + xi * xi * Eigen::MatrixXd::Identity(nv, nv)).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Z.adjoint() * K * Z, Eigen::EigenvaluesOnly);
    for (int j = 0; j < es.eigenvalues().size(); ++j)
      best = std::max(best, 1.0 / std::abs(lambda + es.eigenvalues()[j]));
  }
  return best;
}

/// Closed form of int_0^t e^{-mu(t-s)} (s/tau)^2 e^{-s/tau} ds.
cplx pulse_response(cplx mu, double tau, double t) {
  const cplx a = mu - 1.0 / tau;
  const cplx poly = t * t / a - 2.0 * t / (a * a) + 2.0 / (a * a * a);
  return (std::exp(-t / tau) * poly - 2.0 * std::exp(-mu * t) / (a * a * a)) / (tau * tau);
}

/// Maximal-regularity ratio for p = 2 from the eigen-expansion of the Hermitian mode operators
/// (beta = 0, unit weight), with Simpson quadrature in time over [0, T].
double duhamel_maxreg_oracle(const StokesEvolution& evo, const SeparableForcing& f, double T) {
  std::vector<double> mus, weights;
  for (int k = 0; k < evo.axial().points(); ++k) {
    if (!evo.retained(k)) continue;
    const Eigen::MatrixXcd& H = evo.restricted_operator(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    const CVec c = es.eigenvectors().adjoint() * (evo.kernel_basis(k).adjoint() * f.spatial_modes.col(k));
    for (int j = 0; j < c.size(); ++j) {
      mus.push_back(es.eigenvalues()[j]);
      weights.push_back(std::norm(c[j]));
    }
  }
  const int Q = 4000;
  const double dt = T / Q;
  double iu = 0, iut = 0, iau = 0, iff = 0;
  for (int n = 0; n <= Q; ++n) {
    const double t = n * dt, w = (n == 0 || n == Q) ? 1.0 : (n % 2 ? 4.0 : 2.0);
    const double th = f.profile(t);
    double su = 0, sut = 0, sau = 0, sf = 0;
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const cplx y = pulse_response(mus[j], f.tau, t);
      su += weights[j] * std::norm(y);
      sau += weights[j] * std::norm(mus[j] * y);
      sut += weights[j] * std::norm(th - mus[j] * y);
      sf += weights[j] * th * th;
    }
    iu += w * su;
    iut += w * sut;
    iau += w * sau;
    iff += w * sf;
  }
  // Common factors (Parseval scale, Simpson weight) cancel in the ratio.
  return (std::sqrt(iu) + std::sqrt(iut) + std::sqrt(iau)) / std::sqrt(iff);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  auto positive = [&](const std::string& p) {
    if (!(cfg.num(p) > 0.0)) throw ConfigError(p + ": must be positive");
  };
  auto at_least = [&](const std::string& p, int lo) {
    if (cfg.integer(p) < lo) throw ConfigError(p + ": must be at least " + std::to_string(lo));
  };
  auto power_of_two = [&](const std::string& p) {
    const int m = cfg.integer(p);
    if (m < 4 || (m & (m - 1)) != 0) throw ConfigError(p + ": must be a power of two >= 4");
  };
  auto nonempty = [&](const std::string& p) {
    if (cfg.list(p).empty()) throw ConfigError(p + ": must not be empty");
  };
  auto increasing_range = [&](const std::string& lo, const std::string& hi) {
    positive(lo);
    if (!(cfg.num(hi) > cfg.num(lo))) throw ConfigError(hi + ": must exceed " + lo);
  };

  positive("grid.lx");
  positive("grid.ly");
  section_grid(cfg, cfg.integer("grid.nx"), "grid.nx");
  if (cfg.integer("grid.ny") != static_cast<int>(std::lround(cfg.integer("grid.nx") * cfg.num("grid.ly") / cfg.num("grid.lx"))))
    throw ConfigError("grid.ny: must equal grid.nx * ly / lx (square cells)");
  config_weight(cfg);
  if (cfg.num("rates.beta") < 0.0) throw ConfigError("rates.beta: must be nonnegative");
  positive("rates.alpha");
  const double f = cfg.num("sector.fraction");
  if (!(f > 0.0 && f < 1.0)) throw ConfigError("sector.fraction: must lie in (0, 1)");
  for (const char* p : {"norm.p", "norm.q", "norm.r"})
    if (!(cfg.num(p) > 1.0)) throw ConfigError(std::string(p) + ": must exceed 1");
  if (cfg.integer("run.seed") < 0) throw ConfigError("run.seed: must be nonnegative");
  if (cfg.integer("run.threads") < 0) throw ConfigError("run.threads: must be nonnegative");

  nonempty("eig.sizes");
  for (double n : cfg.list("eig.sizes")) section_grid(cfg, static_cast<int>(n), "eig.sizes");
  if (cfg.list("eig.sizes").size() < 2) throw ConfigError("eig.sizes: need at least two sizes for an order");
  nonempty("ar.exponents");
  nonempty("ar.r");
  for (double r : cfg.list("ar.r"))
    if (!(r > 1.0)) throw ConfigError("ar.r: exponents must exceed 1");
  at_least("ar.max_depth", 4);
  if (cfg.list("mode.mms_sizes").size() < 2) throw ConfigError("mode.mms_sizes: need at least two sizes");
  for (double n : cfg.list("mode.mms_sizes")) section_grid(cfg, static_cast<int>(n), "mode.mms_sizes");
  increasing_range("sweep.radius_min", "sweep.radius_max");
  increasing_range("sweep.xi_min", "sweep.xi_max");
  at_least("sweep.radius_count", 2);
  at_least("sweep.xi_count", 2);
  nonempty("sweep.ray_fractions");
  for (double r : cfg.list("sweep.ray_fractions"))
    if (!(std::abs(r) < 1.0)) throw ConfigError("sweep.ray_fractions: entries must lie in (-1, 1)");
  nonempty("sweep.exponents");
  const auto n_deriv = cfg.list("deriv.xi").size();
  if (n_deriv == 0 || cfg.list("deriv.lambda_re").size() != n_deriv || cfg.list("deriv.lambda_im").size() != n_deriv)
    throw ConfigError("deriv.xi: lambda_re, lambda_im and xi must have the same nonzero length");
  at_least("deriv.forcings", 1);
  positive("deriv.delta");
  section_grid(cfg, cfg.integer("resolvent.nx"), "resolvent.nx");
  positive("resolvent.axial_half_length");
  power_of_two("resolvent.axial_points");
  increasing_range("resolvent.radius_min", "resolvent.radius_max");
  at_least("resolvent.radius_count", 2);
  at_least("resolvent.ensemble", 8);
  section_grid(cfg, cfg.integer("rbound.nx"), "rbound.nx");
  if (cfg.list("rbound.lambda_re").size() != cfg.list("rbound.lambda_im").size() || cfg.list("rbound.lambda_re").empty())
    throw ConfigError("rbound.lambda_re: lambda_re and lambda_im must have the same nonzero length");
  at_least("rbound.xi_count", 2);
  at_least("rbound.trials", 64);
  at_least("rbound.terms", 1);
  if (cfg.list("rbound.sanity_coefficients").size() > 10)
    throw ConfigError("rbound.sanity_coefficients: at most 10 entries (exhaustive sign oracle)");
  nonempty("rbound.sanity_coefficients");
  section_grid(cfg, cfg.integer("decay.nx"), "decay.nx");
  positive("decay.axial_half_length");
  power_of_two("decay.axial_points");
  at_least("decay.samples", 8);
  at_least("decay.initial_data", 1);
  nonempty("decay.beta_fractions");
  for (double b : cfg.list("decay.beta_fractions"))
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("decay.beta_fractions: entries must lie in (0, 1)");
  section_grid(cfg, cfg.integer("maxreg.nx"), "maxreg.nx");
  positive("maxreg.axial_half_length");
  power_of_two("maxreg.axial_points");
  at_least("maxreg.steps", 8);
  at_least("maxreg.forcings", 1);
  nonempty("maxreg.p");
  for (double p : cfg.list("maxreg.p"))
    if (!(p > 1.0)) throw ConfigError("maxreg.p: entries must exceed 1");
  const double at = cfg.num("maxreg.alpha_t_fraction");
  if (!(at >= 0.0 && at < 1.0)) throw ConfigError("maxreg.alpha_t_fraction: must lie in [0, 1)");
}

ExperimentReport run_eig(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "eig";
  const double lx = cfg.num("grid.lx"), ly = cfg.num("grid.ly");
  const double exact0 = kPi * kPi * (1 / (lx * lx) + 1 / (ly * ly));
  const double exact1 = kPi * kPi / std::pow(std::max(lx, ly), 2);
  CsvTable t{"thresholds", {"n", "h", "alpha0", "alpha1", "alpha_bar", "rel_error_alpha0", "rel_error_alpha1"}, {}};
  std::vector<double> hs, e0, e1;
  SpectralThresholds last;
  json sizes = json::array();
  for (double nd : cfg.list("eig.sizes")) {
    const auto g = section_grid(cfg, static_cast<int>(nd), "eig.sizes");
    last = spectral_thresholds(g);
    hs.push_back(g.h());
    e0.push_back(std::abs(last.alpha0 - exact0) / exact0);
    e1.push_back(std::abs(last.alpha1 - exact1) / exact1);
    t.add_row({std::to_string(g.nx()), num(g.h()), num(last.alpha0), num(last.alpha1), num(last.alpha_bar),
               num(e0.back()), num(e1.back())});
    sizes.push_back({{"n", g.nx()}, {"alpha0", last.alpha0}, {"alpha1", last.alpha1}, {"alpha_bar", last.alpha_bar}});
  }
  const double order0 = log_slope(hs, e0), order1 = log_slope(hs, e1);
  const double min_order = cfg.num("eig.min_order"), max_err = cfg.num("eig.max_rel_error");
  rep.summary["sizes"] = sizes;
  rep.summary["alpha0_exact"] = exact0;
  rep.summary["alpha1_exact"] = exact1;
  rep.summary["alpha0"] = last.alpha0;
  rep.summary["alpha1"] = last.alpha1;
  rep.summary["alpha_bar"] = last.alpha_bar;
  rep.summary["alpha0_order"] = order0;
  rep.summary["alpha1_order"] = order1;
  rep.summary["alpha0_rel_error"] = e0.back();
  rep.summary["alpha1_rel_error"] = e1.back();
  rep.check("alpha0 convergence order", order0 >= min_order, num(order0) + " >= " + num(min_order));
  rep.check("alpha1 convergence order", order1 >= min_order, num(order1) + " >= " + num(min_order));
  rep.check("alpha0 error at finest grid", e0.back() <= max_err, num(e0.back()) + " <= " + num(max_err));
  rep.check("alpha1 error at finest grid", e1.back() <= max_err, num(e1.back()) + " <= " + num(max_err));

  // Sector half-aperture: the closed form at (1, 1/2, 1/2) and a table over the admissible window.
  const double reference = sector_params(1.0, 0.5, 0.5).eps_star;
  rep.summary["eps_star_reference"] = reference;
  rep.check("eps* at (alpha_bar, beta, alpha) = (1, 0.5, 0.5) is pi/4", std::abs(reference - kPi / 4) <= 1e-12,
            num(reference));
  const double beta = cfg.num("rates.beta"), alpha = cfg.num("rates.alpha");
  const auto sp = sector_params(last.alpha_bar, beta, alpha);
  rep.summary["eps_star"] = sp.valid ? json(sp.eps_star) : json(nullptr);
  rep.summary["eps_star_valid"] = sp.valid;
  CsvTable s{"sector", {"alpha_bar", "beta", "alpha", "eps_star", "valid"}, {}};
  for (double bf : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double af : {0.25, 0.5, 0.75}) {
      const double b = bf * std::sqrt(last.alpha_bar), a = af * (last.alpha_bar - b * b);
      const auto e = sector_params(last.alpha_bar, b, a);
      s.add_row({num(last.alpha_bar), num(b), num(a), num(e.eps_star), e.valid ? "true" : "false"});
    }
  rep.tables = {t, s};
  return rep;
}

ExperimentReport run_ar(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "ar";
  const double lx = cfg.num("grid.lx"), ly = cfg.num("grid.ly");
  const BoundingCube cube{0.0, 0.0, std::max(lx, ly)};
  const double cx = 0.5 * lx, cy = 0.5 * ly;
  const int max_depth = cfg.integer("ar.max_depth");
  CsvTable t{"ar_depth", {"weight", "r", "in_range", "depth", "ar_value", "divergent"}, {}};
  json studies = json::array();
  for (double r : cfg.list("ar.r")) {
    const ArEstimate unit = ar_constant(PowerWeight::unit(), r, max_depth, cube);
    rep.check("A_r(1) = 1 at r = " + num(r), unit.value == 1.0, num(unit.value));
    for (double a : cfg.list("ar.exponents")) {
      const PowerWeight w{a, cx, cy};
      const bool in_range = in_ar_range(w, r);
      const auto st = ar_depth_study(w, r, max_depth, cube);
      for (const auto& e : st.estimates)
        t.add_row({w.id(), num(r), in_range ? "true" : "false", std::to_string(e.depth), num(e.value),
                   e.divergent ? "true" : "false"});
      const bool expected = in_range ? st.trend == ArTrend::stable
                                     : (st.trend == ArTrend::diverging || st.trend == ArTrend::divergent);
      rep.check("depth trend of " + w.id() + " at r = " + num(r), expected,
                to_string(st.trend) + (in_range ? " (in range)" : " (out of range)"));
      json js = {{"weight", w.id()}, {"r", r}, {"in_range", in_range}, {"trend", to_string(st.trend)},
                 {"final", st.estimates.empty() ? 0.0 : st.estimates.back().value}};
      if (in_range) {
        // Duality on the shared cube family of the discretized weight.
        const auto dw = DyadicWeight::discretize(w, cube, std::min(max_depth, 7));
        const double rp = r / (r - 1.0);
        const double lhs = ar_constant(dw.dual(r), rp).value;
        const double rhs = std::pow(ar_constant(dw, r).value, rp / r);
        const double dev = std::abs(lhs - rhs) / rhs;
        js["duality_rel_deviation"] = dev;
        rep.check("duality identity for " + w.id() + " at r = " + num(r), dev <= 1e-10, num(dev));
      }
      studies.push_back(js);
    }
  }
  rep.summary["studies"] = studies;
  rep.tables = {t};
  return rep;
}

ExperimentReport run_mode_solve(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "mode-solve";
  SpectralParams sp;
  sp.lambda = cplx(cfg.num("mode.lambda_re"), cfg.num("mode.lambda_im"));
  sp.xi = cfg.num("mode.xi");
  sp.beta = cfg.num("rates.beta");
  sp.alpha = cfg.num("rates.alpha");
  if (sp.eta() == cplx(0.0))
    throw InvalidArgument("mode-solve: eta = xi + i beta = 0 is degenerate (the pressure constant is undetermined); "
                          "choose mode.xi != 0 or rates.beta > 0");
  const auto g = section_grid(cfg, cfg.integer("grid.nx"), "grid.nx");
  SolverOptions so;
  so.residual_tolerance = cfg.num("mode.residual_tolerance");
  const ModeSystem sys(g, sp, so);
  const CVec f = smooth_forcing(g, cfg.seed());
  Rng rng(cfg.seed() + 1);
  const CVec gdata = smooth_cell_field(g, rng, 3, true);
  const ModeField sol = sys.solve(f, gdata);
  const BlockResiduals res = sys.residuals(sol, f, gdata);
  const double cond = sys.condition_estimate();
  rep.summary["lambda"] = {sp.lambda.real(), sp.lambda.imag()};
  rep.summary["xi"] = sp.xi;
  rep.summary["beta"] = sp.beta;
  rep.summary["residual_momentum_plane"] = res.momentum_plane;
  rep.summary["residual_momentum_axial"] = res.momentum_axial;
  rep.summary["residual_divergence"] = res.divergence;
  rep.summary["condition_estimate"] = cond;
  rep.check("block residuals", res.max() <= so.residual_tolerance, num(res.max()));
  rep.check("condition estimate finite", std::isfinite(cond), num(cond));

  CsvTable t{"mms", {"n", "h", "error", "residual"}, {}};
  std::vector<double> hs, errs;
  for (double nd : cfg.list("mode.mms_sizes")) {
    const auto gm = section_grid(cfg, static_cast<int>(nd), "mode.mms_sizes");
    const ModeSystem s(gm, sp, so);
    const auto m = manufactured(gm, sp);
    const auto x = s.solve(m.f, m.g);
    const double err = gm.h() * (x.data - m.exact).norm();
    hs.push_back(gm.h());
    errs.push_back(err);
    t.add_row({std::to_string(gm.nx()), num(gm.h()), num(err), num(s.residuals(x, m.f, m.g).max())});
  }
  const double order = log_slope(hs, errs);
  rep.summary["mms_order"] = order;
  rep.summary["mms_errors"] = errs;
  rep.check("manufactured solution order", order >= cfg.num("mode.min_order"),
            num(order) + " >= " + num(cfg.num("mode.min_order")));
  rep.tables = {t};
  return rep;
}

ExperimentReport run_mode_sweep(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "mode-sweep";
  const auto g = section_grid(cfg, cfg.integer("grid.nx"), "grid.nx");
  const double abar = spectral_thresholds(g).alpha_bar;
  EstimateSweepSpec spec;
  spec.beta = cfg.num("rates.beta");
  spec.alpha = cfg.num("rates.alpha");
  spec.eps = sweep_eps(cfg, abar);
  spec.radii = log_space(cfg.num("sweep.radius_min"), cfg.num("sweep.radius_max"), cfg.integer("sweep.radius_count"));
  spec.ray_fractions = cfg.list("sweep.ray_fractions");
  spec.xis = signed_xis(cfg.num("sweep.xi_min"), cfg.num("sweep.xi_max"), cfg.integer("sweep.xi_count"));
  spec.weights = {PowerWeight::unit(), config_weight(cfg)};
  spec.exponents = cfg.list("sweep.exponents");
  spec.seed = cfg.seed();
  spec.threads = cfg.threads();
  const auto rows = estimate_sweep(g, spec);

  CsvTable t{"mode_sweep", {"re_lambda", "im_lambda", "radius", "ray_angle", "xi", "beta", "r", "weight_id", "lhs",
                            "rhs", "ratio"}, {}};
  for (const auto& r : rows)
    t.add_row({num(r.lambda.real()), num(r.lambda.imag()), num(r.radius), num(r.angle), num(r.xi), num(r.beta),
               num(r.r), r.weight_id, num(r.value.lhs), num(r.value.rhs), num(r.value.ratio)});
  const double limit = cfg.num("sweep.max_over_median");
  json verdicts = json::array();
  for (const auto& w : spec.weights)
    for (double r : spec.exponents) {
      const auto v = judge_sweep(rows, w.id(), r, limit);
      verdicts.push_back({{"weight", w.id()},
                          {"r", r},
                          {"max", v.stats.max},
                          {"median", v.stats.median},
                          {"min", v.stats.min},
                          {"max_over_median", v.stats.max_over_median},
                          {"count", v.stats.count},
                          {"radius_low_growth", v.radius_low.growth},
                          {"radius_high_growth", v.radius_high.growth},
                          {"xi_low_growth", v.xi_low.growth},
                          {"xi_high_growth", v.xi_high.growth},
                          {"outer_decade_blowup", v.radius_low.blowup || v.radius_high.blowup || v.xi_low.blowup ||
                                                      v.xi_high.blowup},
                          {"violation", v.any_violation},
                          {"pass", v.pass}});
      rep.check("estimate ratio bounded for " + w.id() + ", r = " + num(r), v.pass,
                "max/median " + num(v.stats.max_over_median));
    }
  rep.summary["alpha_bar_h"] = abar;
  rep.summary["eps"] = spec.eps;
  rep.summary["points"] = rows.size();
  rep.summary["verdicts"] = verdicts;
  rep.tables = {t};
  return rep;
}

ExperimentReport run_deriv_check(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "deriv-check";
  const auto g = section_grid(cfg, cfg.integer("grid.nx"), "grid.nx");
  const auto re = cfg.list("deriv.lambda_re"), im = cfg.list("deriv.lambda_im"), xs = cfg.list("deriv.xi");
  const double delta = cfg.num("deriv.delta");
  const int nf = cfg.integer("deriv.forcings");
  CsvTable t{"deriv_check", {"point", "re_lambda", "im_lambda", "xi", "forcing", "rel_deviation"}, {}};
  Rng rng(cfg.seed());
  double worst = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    SpectralParams sp;
    sp.lambda = cplx(re[k], im[k]);
    sp.xi = xs[k];
    sp.beta = cfg.num("rates.beta");
    sp.alpha = cfg.num("rates.alpha");
    const ModeSystem sys(g, sp);
    SpectralParams up = sp, dn = sp;
    up.xi += delta;
    dn.xi -= delta;
    const ModeSystem sys_up(g, up), sys_dn(g, dn);
    for (int j = 0; j < nf; ++j) {
      const CVec f = random_complex(g.num_velocity(), rng);
      const ModeField base = solution_operators(sys, f);
      const CVec d = derivative_solve(sys, base).data;
      const CVec fd = (solution_operators(sys_up, f).data - solution_operators(sys_dn, f).data) / (2 * delta);
      const double dev = (d - fd).norm() / std::max(d.norm(), fd.norm());
      worst = std::max(worst, dev);
      t.add_row({std::to_string(k), num(re[k]), num(im[k]), num(xs[k]), std::to_string(j), num(dev)});
    }
  }
  const double tol = cfg.num("deriv.tolerance");
  rep.summary["max_rel_deviation"] = worst;
  rep.summary["delta"] = delta;
  rep.summary["points"] = xs.size();
  rep.summary["forcings"] = nf;
  rep.check("derivative system vs central differences", worst <= tol, num(worst) + " <= " + num(tol));
  rep.tables = {t};
  return rep;
}

ExperimentReport run_resolvent_sweep(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "resolvent-sweep";
  const auto g = section_grid(cfg, cfg.integer("resolvent.nx"), "resolvent.nx");
  const auto ax = AxialGrid::build(cfg.num("resolvent.axial_half_length"), cfg.integer("resolvent.axial_points"));
  const double beta = cfg.num("rates.beta"), alpha = cfg.num("rates.alpha");
  const double abar = spectral_thresholds(g).alpha_bar;
  const double eps = sweep_eps(cfg, abar);
  const int ensemble = cfg.integer("resolvent.ensemble");
  const auto angles = sector_ray_angles(eps, cfg.list("sweep.ray_fractions"));
  const auto radii = log_space(cfg.num("resolvent.radius_min"), cfg.num("resolvent.radius_max"),
                               cfg.integer("resolvent.radius_count"));
  MixedNormSpec spec;  // q = r = 2, unit weight
  CsvTable t{"resolvent_sweep", {"re_lambda", "im_lambda", "radius", "ray_angle", "product_estimate", "ensemble_size",
                                 "estimate_seed"}, {}};
  std::vector<double> products;
  std::uint64_t point = 0;
  for (double angle : angles)
    for (double radius : radii) {
      const cplx lambda = -alpha + std::polar(radius, angle);
      const CylinderResolvent res(g, ax, lambda, beta, alpha, cfg.threads());
      const std::uint64_t seed = cfg.seed() + point++;
      const auto est = resolvent_norm_estimate(res, spec, ensemble, seed);
      products.push_back(est.product);
      t.add_row({num(lambda.real()), num(lambda.imag()), num(radius), num(angle), num(est.product),
                 std::to_string(est.ensemble_size), std::to_string(seed)});
    }
  const auto st = sweep_stats(products);
  const double limit = cfg.num("sweep.max_over_median");
  rep.summary["alpha_bar_h"] = abar;
  rep.summary["eps"] = eps;
  rep.summary["max"] = st.max;
  rep.summary["median"] = st.median;
  rep.summary["min"] = st.min;
  rep.summary["max_over_median"] = st.max_over_median;
  rep.check("resolvent product bounded", st.count == static_cast<int>(products.size()) && st.max_over_median <= limit,
            "max/median " + num(st.max_over_median) + " <= " + num(limit));

  // beta = 0 check case against the dense spectral oracle.
  CsvTable o{"resolvent_oracle", {"re_lambda", "im_lambda", "estimate", "oracle", "rel_deviation"}, {}};
  double worst = 0.0;
  for (const auto& [radius, frac] : std::vector<std::pair<double, double>>{{1.0, 0.0}, {1.0, 0.45}, {0.1, -0.45},
                                                                         {10.0, 0.9}}) {
    const cplx lambda = -alpha + std::polar(radius, frac * (kPi / 2 + eps));
    const CylinderResolvent res(g, ax, lambda, 0.0, alpha, cfg.threads());
    const double est = resolvent_norm_estimate(res, spec, ensemble, cfg.seed()).norm;
    const double oracle = dense_resolvent_oracle(g, ax, lambda);
    const double dev = std::abs(est - oracle) / oracle;
    worst = std::max(worst, dev);
    o.add_row({num(lambda.real()), num(lambda.imag()), num(est), num(oracle), num(dev)});
  }
  const double tol = cfg.num("resolvent.oracle_tolerance");
  rep.summary["oracle_max_rel_deviation"] = worst;
  rep.check("dense spectral oracle (beta = 0)", worst <= tol, num(worst) + " <= " + num(tol));
  rep.tables = {t, o};
  return rep;
}

ExperimentReport run_rbound(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "rbound";
  RBoundOptions opts;
  opts.q = cfg.num("norm.q");
  opts.trials = cfg.integer("rbound.trials");
  opts.seed = cfg.seed();

  // {c_j I} on C^4 with the Euclidean norm; the oracle averages over all 2^N sign patterns
  // with every vector concentrated on the largest |c_j|.
  const auto cs = cfg.list("rbound.sanity_coefficients");
  const int N = static_cast<int>(cs.size());
  OperatorFamily scalar;
  scalar.input_dim = 4;
  for (double c : cs) scalar.maps.push_back([c](const CVec& x) { return CVec(c * x); });
  scalar.norm_in = scalar.norm_out = [](const CVec& x) { return x.norm(); };
  std::size_t jmax = 0;
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (std::abs(cs[j]) > std::abs(cs[jmax])) jmax = j;
  double num_q = 0.0, den_q = 0.0;
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    CVec sx = CVec::Zero(4), sy = CVec::Zero(4);
    for (int j = 0; j < N; ++j) {
      if (static_cast<std::size_t>(j) != jmax) continue;
      const double e = (mask >> j) & 1u ? -1.0 : 1.0;
      sx += e * CVec::Ones(4);
      sy += e * cs[j] * CVec::Ones(4);
    }
    num_q += std::pow(sy.norm(), opts.q);
    den_q += std::pow(sx.norm(), opts.q);
  }
  const double oracle = std::pow(num_q / den_q, 1.0 / opts.q);
  RBoundOptions so = opts;
  so.terms = N;
  const auto sanity = rademacher_rbound(scalar, so);
  const double sanity_dev = std::abs(sanity.value - oracle) / oracle;
  rep.summary["sanity_estimate"] = sanity.value;
  rep.summary["sanity_oracle"] = oracle;
  rep.summary["sanity_rel_deviation"] = sanity_dev;
  rep.check("{c_j I} estimate vs exhaustive sign oracle", sanity_dev <= cfg.num("rbound.sanity_tolerance"),
            num(sanity.value) + " vs " + num(oracle));

  CsvTable t{"rbound", {"family", "re_lambda", "im_lambda", "weight", "xi_count", "estimate", "best_terms"}, {}};
  t.add_row({"scalar", "0", "0", "euclidean", "0", num(sanity.value), std::to_string(sanity.best_terms)});

  const auto g = section_grid(cfg, cfg.integer("rbound.nx"), "rbound.nx");
  const double beta = cfg.num("rates.beta"), alpha = cfg.num("rates.alpha"), r = cfg.num("norm.r");
  const int n = cfg.integer("rbound.xi_count");
  const double lo = cfg.num("sweep.xi_min"), hi = cfg.num("sweep.xi_max");
  opts.terms = cfg.integer("rbound.terms");
  const auto re = cfg.list("rbound.lambda_re"), im = cfg.list("rbound.lambda_im");
  json fams = json::array();
  for (std::size_t k = 0; k < re.size(); ++k)
    for (const PowerWeight& w : {PowerWeight::unit(), config_weight(cfg)}) {
      const cplx lambda(re[k], im[k]);
      auto tables = std::make_shared<const WeightTables>(g, w);
      double values[2];
      for (int level = 0; level < 2; ++level) {
        const int count = level == 0 ? n : 2 * n - 1;
        const auto fam =
            multiplier_family(g, lambda, beta, alpha, signed_xis(lo, hi, count), tables, r, cfg.threads());
        const auto est = rademacher_rbound(fam, opts);
        values[level] = est.value;
        t.add_row({"multiplier", num(lambda.real()), num(lambda.imag()), w.id(), std::to_string(2 * count),
                   num(est.value), std::to_string(est.best_terms)});
      }
      const double change = std::abs(values[1] / values[0] - 1.0);
      fams.push_back({{"lambda", {lambda.real(), lambda.imag()}},
                      {"weight", w.id()},
                      {"coarse", values[0]},
                      {"refined", values[1]},
                      {"rel_change", change}});
      rep.check("multiplier R-bound stable under refinement at lambda = " + num(lambda.real()) + "+" +
                    num(lambda.imag()) + "i, " + w.id(),
                change <= cfg.num("rbound.stability") && std::isfinite(values[0]), num(change));
    }
  rep.summary["multiplier_families"] = fams;
  rep.tables = {t};
  return rep;
}

ExperimentReport run_decay(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "decay";
  const auto g = section_grid(cfg, cfg.integer("decay.nx"), "decay.nx");
  const auto ax = AxialGrid::build(cfg.num("decay.axial_half_length"), cfg.integer("decay.axial_points"));
  const double abar = spectral_thresholds(g).alpha_bar;
  const double margin = cfg.num("decay.margin");
  CsvTable series{"decay_series", {"beta", "t", "norm"}, {}};
  CsvTable rates{"decay_rates", {"beta", "sample", "fitted_rate", "threshold"}, {}};
  json per_beta = json::array();
  double previous = -std::numeric_limits<double>::infinity();
  bool monotone = true, all_ok = true;
  EvolutionOptions opts;
  opts.dense = true;
  opts.threads = cfg.threads();
  for (double bf : cfg.list("decay.beta_fractions")) {
    const double beta = bf * std::sqrt(abar);
    const StokesEvolution evo(g, ax, beta, opts);
    const double threshold = abar - beta * beta;
    const double T = decay_horizon(abar, beta);
    double worst = -std::numeric_limits<double>::infinity(), sum = 0.0;
    const int count = cfg.integer("decay.initial_data");
    for (int s = 0; s < count; ++s) {
      Rng rng(cfg.seed() + 1000 * s + 17);
      CylinderField U = CylinderField::zeros(g, ax);
      for (int m = 0; m < ax.points(); ++m) U.velocity.col(m) = random_complex(g.num_velocity(), rng);
      U = leray_project(U, beta, cfg.threads());
      const auto d = decay_series(evo, U, T, cfg.integer("decay.samples"), cfg.num("decay.fit_from"));
      worst = std::max(worst, d.fitted_rate);
      sum += d.fitted_rate;
      rates.add_row({num(beta), std::to_string(s), num(d.fitted_rate), num(threshold)});
      if (s == 0)
        for (std::size_t j = 0; j < d.t.size(); ++j) series.add_row({num(beta), num(d.t[j]), num(d.norm[j])});
    }
    const double mean = sum / count;
    const bool ok = worst <= -threshold + margin;
    all_ok = all_ok && ok;
    monotone = monotone && mean > previous;
    previous = mean;
    per_beta.push_back({{"beta", beta}, {"threshold", threshold}, {"horizon", T}, {"worst_rate", worst},
                        {"mean_rate", mean}, {"pass", ok}});
    rep.check("decay rate at beta = " + num(beta), ok, num(worst) + " <= " + num(-threshold + margin));
  }
  rep.check("decay rate weakens as beta grows", monotone, "mean fitted rates increase with beta");
  rep.summary["alpha_bar_h"] = abar;
  rep.summary["per_beta"] = per_beta;
  rep.tables = {series, rates};
  return rep;
}

ExperimentReport run_maxreg(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "maxreg";
  const double beta = cfg.num("rates.beta");
  const int nx = cfg.integer("maxreg.nx"), M = cfg.integer("maxreg.axial_points"), K = cfg.integer("maxreg.steps");
  const int count = cfg.integer("maxreg.forcings");
  const auto ps = cfg.list("maxreg.p");
  const double L = cfg.num("maxreg.axial_half_length");
  const auto coarse = section_grid(cfg, nx, "maxreg.nx");
  const double abar = spectral_thresholds(coarse).alpha_bar;
  if (!(beta * beta < abar)) throw ConfigError("rates.beta: maxreg needs beta^2 < alpha_bar");
  const double T = decay_horizon(abar, beta);
  const double alpha_t = cfg.num("maxreg.alpha_t_fraction") * (abar - beta * beta);

  MaxRegSpec spec;
  spec.p_values = ps;
  spec.norm.q = cfg.num("norm.q");
  spec.norm.r = cfg.num("norm.r");
  spec.alpha_t = alpha_t;

  CsvTable t{"maxreg", {"level", "forcing", "p", "ratio", "ratio_weighted", "norm_f"}, {}};
  // maxima[level][p index][plain, weighted]
  std::vector<std::vector<std::array<std::vector<double>, 2>>> values(2, std::vector<std::array<std::vector<double>, 2>>(ps.size()));
  for (int level = 0; level < 2; ++level) {
    const int scale = 1 << level;
    const auto g = section_grid(cfg, nx * scale, "maxreg.nx");
    const auto ax = AxialGrid::build(L, M * scale);
    EvolutionOptions opts;
    opts.threads = cfg.threads();
    const StokesEvolution evo(g, ax, beta, opts);
    const WeightTables unit(g, PowerWeight::unit());
    const TimeGrid time = TimeGrid::build(T, K * scale);
    for (int f = 0; f < count; ++f) {
      Rng rng(cfg.seed() * 7919 + f);
      const auto forcing = random_separable_forcing(evo, rng);
      const auto ratios = maxreg_ratio(evo, forcing, time, spec, unit);
      for (std::size_t k = 0; k < ps.size(); ++k) {
        values[level][k][0].push_back(ratios[k].ratio);
        values[level][k][1].push_back(ratios[k].ratio_weighted);
        t.add_row({std::to_string(level), std::to_string(f), num(ps[k]), num(ratios[k].ratio),
                   num(ratios[k].ratio_weighted), num(ratios[k].norm_f)});
      }
    }
  }
  const double stability = cfg.num("maxreg.stability");
  json per_p = json::array();
  for (std::size_t k = 0; k < ps.size(); ++k)
    for (int v = 0; v < 2; ++v) {
      const auto& a = values[0][k][v];
      const auto& b = values[1][k][v];
      const double ma = *std::max_element(a.begin(), a.end()), mb = *std::max_element(b.begin(), b.end());
      const double change = std::abs(mb / ma - 1.0);
      const std::string variant = v == 0 ? "plain" : "time-weighted";
      per_p.push_back({{"p", ps[k]},
                       {"variant", variant},
                       {"coarse_max", ma},
                       {"coarse_median", median_of(a)},
                       {"coarse_min", *std::min_element(a.begin(), a.end())},
                       {"refined_max", mb},
                       {"refined_median", median_of(b)},
                       {"refined_min", *std::min_element(b.begin(), b.end())},
                       {"rel_change", change}});
      rep.check("maxreg ratio stable under refinement, p = " + num(ps[k]) + ", " + variant,
                std::isfinite(ma) && std::isfinite(mb) && change <= stability, num(change) + " <= " + num(stability));
    }

  // beta = 0, p = 2 cross-check against the eigen-expansion oracle on the coarse grids.
  {
    const auto ax = AxialGrid::build(L, M);
    EvolutionOptions opts;
    opts.dense = true;
    opts.threads = cfg.threads();
    const StokesEvolution evo(coarse, ax, 0.0, opts);
    const WeightTables unit(coarse, PowerWeight::unit());
    const double T0 = decay_horizon(abar, 0.0);
    MaxRegSpec s2;
    s2.p_values = {2.0};
    double worst = 0.0;
    CsvTable o{"maxreg_oracle", {"forcing", "ratio", "oracle", "rel_deviation"}, {}};
    for (int f = 0; f < 2; ++f) {
      Rng rng(cfg.seed() * 7919 + 100 + f);
      const auto forcing = random_separable_forcing(evo, rng);
      const double measured = maxreg_ratio(evo, forcing, TimeGrid::build(T0, 4 * K), s2, unit)[0].ratio;
      const double oracle = duhamel_maxreg_oracle(evo, forcing, T0);
      const double dev = std::abs(measured - oracle) / oracle;
      worst = std::max(worst, dev);
      o.add_row({std::to_string(f), num(measured), num(oracle), num(dev)});
    }
    rep.summary["oracle_max_rel_deviation"] = worst;
    rep.check("p = 2, beta = 0 ratio vs eigen-expansion oracle", worst <= cfg.num("maxreg.oracle_tolerance"),
              num(worst));
    rep.tables.push_back(o);
  }
  rep.summary["alpha_bar_h"] = abar;
  rep.summary["horizon"] = T;
  rep.summary["alpha_t"] = alpha_t;
  rep.summary["per_p"] = per_p;
  rep.tables.insert(rep.tables.begin(), t);
  return rep;
}

const std::vector<ExperimentEntry>& experiment_registry() {
  static const std::vector<ExperimentEntry> reg = {
      {"eig", "spectral thresholds and the sector half-aperture table", run_eig},
      {"ar", "Muckenhoupt constants of power weights against dyadic depth", run_ar},
      {"mode-solve", "single mode solve with residuals, plus manufactured-solution convergence", run_mode_solve},
      {"mode-sweep", "uniform per-mode estimate ratio over the (lambda, xi) sweep", run_mode_sweep},
      {"deriv-check", "derivative system against central differences", run_deriv_check},
      {"resolvent-sweep", "|lambda + alpha| times the resolvent norm over the sector sweep", run_resolvent_sweep},
      {"rbound", "Rademacher R-bound estimates of the multiplier family", run_rbound},
      {"decay", "semigroup decay rates against the spectral threshold", run_decay},
      {"maxreg", "maximal-regularity ratios under refinement", run_maxreg},
  };
  return reg;
}

bool SuiteResult::pass() const {
  for (const auto& r : reports)
    if (!r.pass()) return false;
  return true;
}

SuiteResult run_suite(const ExperimentConfig& cfg, const std::vector<std::string>& names, const std::string& out_dir,
                      std::ostream& log) {
  SuiteResult out;
  for (const auto& name : names) {
    const auto& reg = experiment_registry();
    const auto it = std::find_if(reg.begin(), reg.end(), [&](const ExperimentEntry& e) { return e.name == name; });
    if (it == reg.end()) throw ConfigError("subcommand: unknown experiment '" + name + "'");
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = it->run(cfg);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(rep, out_dir, cfg);
    log << (rep.pass() ? "PASS " : "FAIL ") << rep.name << " (" << format_number(std::round(sec * 10) / 10)
        << " s)\n";
    for (const auto& c : rep.checks)
      if (!c.pass) log << "     failed: " << c.name << ": " << c.detail << "\n";
    out.reports.push_back(std::move(rep));
    out.seconds.push_back(sec);
  }
  return out;
}

SuiteResult run_all(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  std::vector<std::string> names;
  for (const auto& e : experiment_registry()) names.push_back(e.name);
  SuiteResult res = run_suite(cfg, names, out_dir, log);
  json suite;
  suite["config_hash"] = cfg.hash();
  suite["seed"] = cfg.seed();
  suite["config"] = cfg.values();
  suite["config"]["run"].erase("output_dir");
  suite["config"]["run"].erase("threads");
  json rows = json::array();
  for (const auto& r : res.reports) {
    int passed = 0;
    for (const auto& c : r.checks) passed += c.pass;
    rows.push_back({{"experiment", r.name}, {"pass", r.pass()}, {"checks", r.checks.size()}, {"passed", passed}});
  }
  suite["experiments"] = rows;
  suite["pass"] = res.pass();
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "suite.json", std::ios::binary) << suite.dump(2) << "\n";
  write_plot_script(res.reports, out_dir, cfg);
  log << "\n" << (res.pass() ? "all experiments passed" : "some experiments failed") << "\n";
  return res;
}

}  // namespace cylstokes
