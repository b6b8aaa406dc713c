#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"
#include "cylstokes/mode_solver.hpp"
#include "cylstokes/staggered.hpp"
#include "cylstokes/weights.hpp"

namespace cylstokes {

using CMat = Eigen::MatrixXcd;

/// Axial torus [-L, L) with M equispaced points; frequencies xi_k = pi k / L.
class AxialGrid {
 public:
  static AxialGrid build(double half_length, int points);

  double half_length() const { return half_length_; }
  int points() const { return points_; }
  double dz() const { return 2.0 * half_length_ / points_; }
  double z(int m) const { return -half_length_ + m * dz(); }
  /// Signed wavenumber k in [-M/2, M/2) of an FFT column index.
  int wavenumber(int index) const { return index < points_ / 2 ? index : index - points_; }
  double xi(int index) const { return kPi * wavenumber(index) / half_length_; }
  bool is_nyquist(int index) const { return index == points_ / 2; }

 private:
  double half_length_ = 0.0;
  int points_ = 0;
};

/// Velocity [u1; u2; un] and pressure planes on the cylinder, one column per axial point.
struct CylinderField {
  CrossSectionGrid grid;
  AxialGrid axial;
  CMat velocity;  // num_velocity x M
  CMat pressure;  // num_cells x M

  static CylinderField zeros(const CrossSectionGrid& grid, const AxialGrid& axial);
};

/// Row-wise FFT along the axis (unnormalized forward, 1/M inverse).
CMat axial_forward(const CMat& physical);
CMat axial_inverse(const CMat& modes);
/// Multiplies column m by exp(rate * z_m).
CMat axial_exponential(const CMat& planes, const AxialGrid& axial, double rate);

struct MixedNormSpec {
  double q = 2.0;
  double r = 2.0;
  double beta = 0.0;
  PowerWeight weight;
};

/// (integral over z of ||e^{beta z} u(z)||_{r,w}^q dz)^{1/q}; the plane norm combines the
/// three velocity components pointwise in l^r, so q = r = 2 is a Hilbert norm.
double mixed_norm(const CMat& velocity, const AxialGrid& axial, const MixedNormSpec& spec, const WeightTables& tables);

/// Per-mode solvers of the conjugated problem at every retained axial frequency.
/// Nyquist is dropped; with beta = 0 the xi = 0 mode is dropped as well.
class CylinderResolvent {
 public:
  CylinderResolvent(const CrossSectionGrid& grid, const AxialGrid& axial, cplx lambda, double beta, double alpha,
                    int threads = 0);

  const CrossSectionGrid& grid() const { return grid_; }
  const AxialGrid& axial() const { return axial_; }
  cplx lambda() const { return lambda_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  int threads() const { return threads_; }
  bool retained(int index) const { return static_cast<bool>(modes_[index]); }
  const ModeSystem& mode(int index) const;

 private:
  CrossSectionGrid grid_;
  AxialGrid axial_;
  cplx lambda_;
  double beta_, alpha_;
  int threads_;
  std::vector<std::shared_ptr<const ModeSystem>> modes_;
};

struct ResolventResult {
  CylinderField solution;
  double residual = 0.0;    // relative residual of the discrete cylinder system
  double seam_ratio = 0.0;  // max |e^{beta z} U| on the seam planes / max over all planes
  double max_imag_ratio = 0.0;
};

/// (U, P) for forcing F (pressure part ignored). The weighted forcing e^{beta z}F must vanish
/// outside |z| <= L/2 up to support_tolerance relative to its maximum.
ResolventResult resolvent_apply(const CylinderField& F, const CylinderResolvent& res, double support_tolerance = 1e-12);

struct ResolventNormEstimate {
  double norm = 0.0;
  double product = 0.0;  // |lambda + alpha| * norm
  int ensemble_size = 0;
  bool power_iteration = false;
};

/// Norm of (lambda + A)^{-1} on discretely solenoidal fields in the mixed norm. q = r = 2 uses
/// per-mode power iteration; otherwise the max over a seeded ensemble of random solenoidal fields.
ResolventNormEstimate resolvent_norm_estimate(const CylinderResolvent& res, const MixedNormSpec& spec,
                                              int ensemble_size, std::uint64_t seed);

/// The six components ((lambda+alpha)a f, xi grad'a f, grad'^2 a f, xi^2 a f, grad'b f, eta b f).
struct MultiplierSample {
  std::array<FieldList, 6> components;
  double norm(const WeightTables& tables, double r) const;
};

MultiplierSample multiplier_eval(const ModeSystem& sys, const CVec& f);
/// xi d/dxi of the multiplier at the same point, from the derivative system.
MultiplierSample multiplier_derivative_eval(const ModeSystem& sys, const CVec& f);

/// A finite family of linear maps between normed coordinate spaces.
struct OperatorFamily {
  int input_dim = 0;
  std::vector<std::function<CVec(const CVec&)>> maps;
  std::function<double(const CVec&)> norm_in;
  std::function<double(const CVec&)> norm_out;
};

struct RBoundOptions {
  double q = 2.0;
  int trials = 256;
  int terms = 8;                 // N
  int exhaustive_limit = 10;     // enumerate all signs up to this many terms
  int sign_samples = 512;        // shared sign draws above the limit
  std::uint64_t seed = 1;
};

struct RBoundEstimate {
  double value = 0.0;
  int trials = 0;
  int best_terms = 0;
};

/// Empirical lower bound of the R-bound: max over trials of
/// (E||sum e_j T_j x_j||^q)^{1/q} / (E||sum e_j x_j||^q)^{1/q}.
RBoundEstimate rademacher_rbound(const OperatorFamily& family, const RBoundOptions& opts);

/// {m_lambda(xi), xi m'_lambda(xi) : xi in xis} acting on packed velocity, norms in L^r_w
/// summed over components.
OperatorFamily multiplier_family(const CrossSectionGrid& grid, cplx lambda, double beta, double alpha,
                                 const std::vector<double>& xis, std::shared_ptr<const WeightTables> tables,
                                 double r, int threads = 0);

}  // namespace cylstokes
