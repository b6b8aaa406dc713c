#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cylstokes/mode_solver.hpp"
#include "cylstokes/staggered.hpp"
#include "cylstokes/stats.hpp"

namespace cylstokes {

struct EstimateRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool violation = false;  // rhs == 0 with lhs > 0
};

/// LHS/RHS of the uniform per-mode estimate
///   ||mu+^2 u, mu+ grad'u, grad'^2 u, grad'p, eta p||
///     <= c (||f, grad'g, g, xi g|| + (|lambda|+1) ||g; L_0 + L_{1/eta}||),
/// with the split norm evaluated on the canonical split g = (g - mean) + mean.
EstimateRatio mode_estimate_ratio(const ModeField& sol, const SpectralParams& params, const CVec& f,
                                  const CVec& g, const WeightTables& tables, double r,
                                  const NeumannPoisson* neumann = nullptr);

struct CoercivityResult {
  double abs_b = 0.0;
  double lower_bound = 0.0;
  bool pass = false;
  std::string case_label;
};

/// Condition on lambda under which the sesquilinear form is coercive on V_eta.
bool coercivity_window(cplx lambda, double beta, double alpha0);

/// Evaluates b(u,u) = (lambda+eta^2)||u||^2 + ||grad'u||^2 for a div_eta-free Dirichlet
/// velocity and compares it against the case-dependent lower bound.
CoercivityResult coercivity_check(const CrossSectionGrid& grid, const SpectralParams& params,
                                  const CVec& velocity, double alpha0, double tol = 1e-10);

/// Ray angles fraction * (pi/2 + eps) for the given fractions of the half-aperture.
std::vector<double> sector_ray_angles(double eps, const std::vector<double>& fractions);

struct EstimateSweepSpec {
  double beta = 0.5;
  double alpha = 0.5;
  double eps = 0.0;                  // half-aperture beyond pi/2 of the sweep sector
  std::vector<double> radii;         // |lambda + alpha|
  std::vector<double> ray_fractions = {-0.9, -0.45, 0.0, 0.45, 0.9};
  std::vector<double> xis;           // signed axial frequencies
  std::vector<PowerWeight> weights = {PowerWeight::unit()};
  std::vector<double> exponents = {2.0};
  bool with_divergence_data = true;  // nonzero g in the forcing
  std::uint64_t seed = 1;
  int threads = 0;
};

struct EstimateSweepRow {
  cplx lambda;
  double radius = 0.0;
  double angle = 0.0;
  double xi = 0.0;
  double beta = 0.0;
  double r = 2.0;
  std::string weight_id;
  EstimateRatio value;
};

/// Solves every (lambda, xi) of the sweep once with one seeded smooth forcing and evaluates
/// the estimate ratio for every (weight, r). Row order is deterministic.
std::vector<EstimateSweepRow> estimate_sweep(const CrossSectionGrid& grid, const EstimateSweepSpec& spec);

struct SweepVerdict {
  std::string weight_id;
  double r = 2.0;
  SweepStats stats;
  GrowthCheck radius_low, radius_high, xi_low, xi_high;
  bool any_violation = false;
  bool pass = false;
};

/// Boundedness verdict over the rows of one (weight, r): max/median within the limit and no
/// monotone growth on the outermost decade of |lambda + alpha| or |xi|.
SweepVerdict judge_sweep(const std::vector<EstimateSweepRow>& rows, const std::string& weight_id, double r,
                         double max_over_median_limit = 50.0);

}  // namespace cylstokes
