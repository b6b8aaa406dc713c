#include "cylstokes/mode_estimates.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "cylstokes/cross_section.hpp"
#include "cylstokes/forcing.hpp"
#include "cylstokes/parallel.hpp"

namespace cylstokes {

EstimateRatio mode_estimate_ratio(const ModeField& sol, const SpectralParams& params, const CVec& f,
                                  const CVec& g, const WeightTables& tables, double r,
                                  const NeumannPoisson* neumann) {
  const CrossSectionGrid& grid = sol.grid;
  require(grid.same_layout(tables.grid()), "weight tables belong to a different grid");
  require(f.size() == grid.num_velocity() && g.size() == grid.num_cells(), "forcing size mismatch");
  const CVec u = sol.velocity();
  const CVec p = sol.p();
  const double mu = params.mu_plus();
  const cplx eta = params.eta();

  EstimateRatio out;
  out.lhs = mu * mu * norm_sum(velocity_components(grid, u), tables, r) +
            mu * norm_sum(velocity_gradient(grid, u), tables, r) +
            norm_sum(velocity_hessian(grid, u), tables, r) + norm_sum(cell_gradient(grid, p), tables, r) +
            std::abs(eta) * weighted_norm(p, Location::cell, tables, r);

  const double gnorm = weighted_norm(g, Location::cell, tables, r);
  double rhs = norm_sum(velocity_components(grid, f), tables, r) + norm_sum(cell_gradient(grid, g), tables, r) +
               gnorm + std::abs(params.xi) * gnorm;

  // Canonical split g = (g - mean) + mean: the mean-zero part in the negative norm
  // through a Neumann potential, the mean part scaled by 1/|eta|.
  const cplx mean = g.mean();
  if (g.size() > 0 && !g.isZero(0.0)) {
    std::optional<NeumannPoisson> local;
    if (neumann == nullptr) neumann = &local.emplace(grid);
    const CVec psi = neumann->solve(CVec(g.array() - mean));
    double split = norm_sum(cell_gradient(grid, psi), tables, r);
    if (mean != cplx(0.0)) {
      const CVec one = CVec::Ones(grid.num_cells());
      split += std::abs(mean) / std::abs(eta) * weighted_norm(one, Location::cell, tables, r);
    }
    rhs += (std::abs(params.lambda) + 1.0) * split;
  }
  out.rhs = rhs;
  if (rhs > 0.0) {
    out.ratio = out.lhs / rhs;
  } else if (out.lhs > 0.0) {
    out.ratio = std::numeric_limits<double>::infinity();
    out.violation = true;
  }
  return out;
}

bool coercivity_window(cplx lambda, double beta, double alpha0) {
  const cplx shifted = lambda + alpha0 - beta * beta;
  if (shifted == cplx(0.0)) return false;
  if (shifted.imag() == 0.0 && shifted.real() < 0.0) return false;
  if (beta == 0.0) return true;
  return lambda.real() > -lambda.imag() * lambda.imag() / (4 * beta * beta) - alpha0 + beta * beta;
}

CoercivityResult coercivity_check(const CrossSectionGrid& grid, const SpectralParams& params,
                                  const CVec& velocity, double alpha0, double tol) {
  const cplx lambda = params.lambda;
  const double beta = params.beta, xi = params.xi;
  if (!coercivity_window(lambda, beta, alpha0))
    throw InvalidArgument("coercivity check: lambda outside the coercivity window");
  require(velocity.size() == grid.num_velocity(), "coercivity check expects packed velocity");

  const double area = grid.cell_area();
  const double x = area * velocity.squaredNorm();
  const double G = -area * std::real(velocity.dot(grid.velocity_laplacian().cast<cplx>() * velocity));
  const double scale = std::sqrt(x) / grid.h() + std::abs(params.eta()) * std::sqrt(x);
  if (scale > 0.0) {
    const double res = std::sqrt(area) * div_eta(grid, velocity, params.eta()).norm();
    if (res > 1e-8 * scale) throw InvalidArgument("coercivity check: velocity is not div_eta-free");
  }

  CoercivityResult out;
  const double re_coef = lambda.real() + xi * xi - beta * beta;
  const double im_coef = lambda.imag() + 2 * xi * beta;
  out.abs_b = std::abs(cplx(re_coef * x + G, im_coef * x));

  if (lambda.real() + alpha0 - beta * beta >= 0.0) {
    out.case_label = "shifted-real-part-nonnegative";
    out.lower_bound = xi * xi >= alpha0 ? G : (xi * xi / alpha0) * G;
  } else if (im_coef == 0.0 || std::abs(im_coef) <= 1e-14 * (std::abs(lambda) + xi * xi + 1.0)) {
    out.case_label = "resonance-line";
    if (re_coef >= 0.0) {
      out.lower_bound = G;
    } else {
      const double c = lambda.real() + lambda.imag() * lambda.imag() / (4 * beta * beta) - beta * beta + alpha0;
      out.lower_bound = (c / alpha0) * G;
    }
  } else {
    // min of |re_coef * s + G + i im_coef * s| over s = ||u||^2 in [0, G/alpha0]
    out.case_label = "off-resonance";
    const double smax = G / alpha0;
    const double denom = re_coef * re_coef + im_coef * im_coef;
    double s = denom > 0.0 ? -re_coef * G / denom : 0.0;
    s = std::clamp(s, 0.0, smax);
    out.lower_bound = std::abs(cplx(re_coef * s + G, im_coef * s));
  }
  out.pass = out.abs_b >= out.lower_bound * (1.0 - tol);
  return out;
}

}  // namespace cylstokes

namespace cylstokes {

std::vector<double> sector_ray_angles(double eps, const std::vector<double>& fractions) {
  std::vector<double> out;
  for (double f : fractions) {
    require(std::abs(f) < 1.0, "ray fractions must lie in (-1, 1)");
    out.push_back(f * (0.5 * kPi + eps));
  }
  return out;
}

std::vector<EstimateSweepRow> estimate_sweep(const CrossSectionGrid& grid, const EstimateSweepSpec& spec) {
  require(!spec.radii.empty() && !spec.xis.empty(), "empty sweep");
  Rng rng(spec.seed);
  const CVec f = smooth_velocity(grid, rng);
  const CVec g = spec.with_divergence_data ? smooth_cell_field(grid, rng) : CVec::Zero(grid.num_cells());
  const NeumannPoisson neumann(grid);
  std::vector<WeightTables> tables;
  for (const auto& w : spec.weights) tables.emplace_back(grid, w);

  const auto angles = sector_ray_angles(spec.eps, spec.ray_fractions);
  struct Point { double radius, angle, xi; };
  std::vector<Point> points;
  for (double a : angles)
    for (double rho : spec.radii)
      for (double xi : spec.xis) points.push_back({rho, a, xi});

  const std::size_t per_point = spec.weights.size() * spec.exponents.size();
  std::vector<EstimateSweepRow> rows(points.size() * per_point);
  parallel_for(
      static_cast<int>(points.size()),
      [&](int k) {
        const Point& pt = points[k];
        SpectralParams sp;
        sp.lambda = -spec.alpha + pt.radius * std::polar(1.0, pt.angle);
        sp.xi = pt.xi;
        sp.beta = spec.beta;
        sp.alpha = spec.alpha;
        const ModeSystem sys(grid, sp);
        const ModeField sol = sys.solve(f, g);
        std::size_t slot = k * per_point;
        for (std::size_t w = 0; w < spec.weights.size(); ++w)
          for (double r : spec.exponents) {
            EstimateSweepRow& row = rows[slot++];
            row.lambda = sp.lambda;
            row.radius = pt.radius;
            row.angle = pt.angle;
            row.xi = pt.xi;
            row.beta = spec.beta;
            row.r = r;
            row.weight_id = spec.weights[w].id();
            row.value = mode_estimate_ratio(sol, sp, f, g, tables[w], r, &neumann);
          }
      },
      spec.threads);
  return rows;
}

SweepVerdict judge_sweep(const std::vector<EstimateSweepRow>& rows, const std::string& weight_id, double r,
                         double max_over_median_limit) {
  SweepVerdict v;
  v.weight_id = weight_id;
  v.r = r;
  std::vector<double> ratios;
  std::vector<std::pair<double, double>> by_radius, by_xi;
  for (const auto& row : rows) {
    if (row.weight_id != weight_id || row.r != r) continue;
    if (row.value.violation) v.any_violation = true;
    ratios.push_back(row.value.ratio);
    by_radius.emplace_back(row.radius, row.value.ratio);
    by_xi.emplace_back(std::abs(row.xi), row.value.ratio);
  }
  v.stats = sweep_stats(ratios);
  const auto er = envelope(by_radius), ex = envelope(by_xi);
  v.radius_low = outer_decade_growth(er, false);
  v.radius_high = outer_decade_growth(er, true);
  v.xi_low = outer_decade_growth(ex, false);
  v.xi_high = outer_decade_growth(ex, true);
  v.pass = v.stats.count > 0 && !v.any_violation && v.stats.max_over_median <= max_over_median_limit &&
           !v.radius_low.blowup && !v.radius_high.blowup && !v.xi_low.blowup && !v.xi_high.blowup;
  return v;
}

}  // namespace cylstokes
