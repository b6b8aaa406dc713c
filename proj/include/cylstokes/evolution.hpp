#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cylstokes/cylinder.hpp"
#include "cylstokes/forcing.hpp"

namespace cylstokes {

/// Uniform grid on [0, T] with K steps; p is the exponent of the L^p-in-time norms.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 8;
  double p = 2.0;

  static TimeGrid build(double horizon, int steps, double p = 2.0);
  double dt() const { return horizon / steps; }
  double t(int n) const { return n * dt(); }
};

/// Solenoidal projection of the weighted field e^{beta z}U, mode by mode, along the gradient
/// space {(grad'phi, i eta phi)}. The Nyquist plane is dropped; with beta = 0 the axial mean
/// (xi = 0, eta = 0) has no projection and must be absent. Pressure is zeroed.
CylinderField leray_project(const CylinderField& U, double beta, int threads = 0);
/// max over retained modes of ||div_eta u_k|| / ||u_k|| for the weighted mode coefficients.
double solenoidal_defect(const CylinderField& U, double beta);
/// Removes the axial mean of e^{beta z}U (the xi = 0 mode of the weighted field).
CylinderField remove_weighted_mean(const CylinderField& U, double beta);

enum class Propagator { dense_exponential, crank_nicolson };

struct EvolutionOptions {
  bool dense = false;  // build the dense mode operators (coarse grids only)
  int threads = 0;
};

/// The projected Stokes operator A = P(-Lap' + eta^2) per axial mode in weighted variables.
/// Mode coefficients are FFT(e^{beta z}U) column by column.
class StokesEvolution {
 public:
  StokesEvolution(const CrossSectionGrid& grid, const AxialGrid& axial, double beta, EvolutionOptions opts = {});
  ~StokesEvolution();

  const CrossSectionGrid& grid() const { return grid_; }
  const AxialGrid& axial() const { return axial_; }
  double beta() const { return beta_; }
  int threads() const { return opts_.threads; }
  bool retained(int index) const;
  bool has_dense() const { return opts_.dense; }

  CMat to_modes(const CMat& velocity) const;
  CMat from_modes(const CMat& modes) const;
  /// Same as from_modes without the e^{-beta z} factor (the weighted physical field).
  CMat weighted_planes(const CMat& modes) const;

  CMat project_modes(const CMat& modes) const;
  /// A u per retained mode; other columns are zero.
  CMat apply_operator(const CMat& modes) const;

  /// e^{-tA} U0 for solenoidal U0; substeps only matter for Crank-Nicolson.
  CylinderField semigroup(const CylinderField& U0, double t, Propagator method, int substeps = 0) const;
  CMat semigroup_modes(const CMat& modes, double t, Propagator method, int substeps = 0) const;

  /// Eigenvalues of A restricted to ker(div_eta) for one retained mode (dense only).
  std::vector<cplx> mode_spectrum(int index) const;
  /// Orthonormal basis of ker(div_eta) and the restricted operator Z^H A Z (dense only).
  const Eigen::MatrixXcd& kernel_basis(int index) const;
  const Eigen::MatrixXcd& restricted_operator(int index) const;

 private:
  struct Mode;
  CrossSectionGrid grid_;
  AxialGrid axial_;
  double beta_;
  EvolutionOptions opts_;
  std::vector<std::unique_ptr<Mode>> modes_;
  const Mode& mode(int index) const;
};

struct DecaySeries {
  std::vector<double> t;
  std::vector<double> norm;
  double fitted_rate = 0.0;  // least-squares slope of log norm over [fit_from, T]
};

/// ||e^{-tA}U0|| at `samples` + 1 equispaced times on [0, t_end] (dense exponential steps)
/// in the weighted L^2 norm; the slope is fitted on t >= fit_from.
DecaySeries decay_series(const StokesEvolution& evo, const CylinderField& U0, double t_end, int samples,
                         double fit_from = 1.0);

/// Weighted mode coefficients of F at time t (must be solenoidal).
using ModeForcing = std::function<CMat(double t)>;
/// Called with the step index, and the mode coefficients of U(t_n) and F(t_n).
using TrajectoryObserver = std::function<void(int n, const CMat& u_modes, const CMat& f_modes)>;

/// Crank-Nicolson for U_t + AU = F, U(0) = 0, with the forcing averaged over each step.
void solve_cauchy_modes(const StokesEvolution& evo, const ModeForcing& F, const TimeGrid& time,
                        const TrajectoryObserver& observe);
/// Physical trajectory U(t_n), n = 0..K, for a physical forcing sampler.
std::vector<CMat> solve_cauchy(const StokesEvolution& evo, const std::function<CMat(double)>& F,
                               const TimeGrid& time);

/// F(x', z, t) = profile(t) * spatial(x', z) with a projected spatial factor.
struct SeparableForcing {
  CMat spatial_modes;  // weighted mode coefficients, solenoidal
  double tau = 1.0;    // profile (t/tau)^2 e^{-t/tau}
  double profile(double t) const;
};

struct ForcingShape {
  int sine_modes = 3;
  double width_min = 1.0, width_max = 1.5;  // Gaussian width in z
  double tau_min = 0.5, tau_max = 1.5;
};

/// Seeded smooth forcing: low sine modes in x' (grid independent coefficients), a Gaussian in z
/// centered in the middle quarter, and the pulse profile; projected on the evolution's grids.
SeparableForcing random_separable_forcing(const StokesEvolution& evo, Rng& rng, const ForcingShape& shape = {});

struct MaxRegSpec {
  std::vector<double> p_values{2.0, 4.0};
  MixedNormSpec norm;    // q, r, weight; the rate is taken from the evolution
  double alpha_t = 0.0;  // exponent of the e^{alpha_t t} time weight
};

struct MaxRegRatio {
  double p = 2.0;
  double norm_u = 0.0, norm_ut = 0.0, norm_au = 0.0, norm_f = 0.0;
  double ratio = 0.0;           // (||U|| + ||U_t|| + ||AU||) / ||F||
  double ratio_weighted = 0.0;  // same with every field multiplied by e^{alpha_t t}
};

/// Ratios for one forcing, one entry per p. U_t is evaluated as F - AU at the samples and the
/// time integrals use the composite trapezoid rule. Throws on a zero forcing.
std::vector<MaxRegRatio> maxreg_ratio(const StokesEvolution& evo, const SeparableForcing& F, const TimeGrid& time,
                                      const MaxRegSpec& spec, const WeightTables& tables);

/// Horizon with e^{-(alpha_bar_h - beta^2) T} = tail.
double decay_horizon(double alpha_bar_h, double beta, double tail = 1e-6);

}  // namespace cylstokes
