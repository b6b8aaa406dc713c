#pragma once

#include <cstdint>
#include <string>

#include <Eigen/SparseLU>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"
#include "cylstokes/weights.hpp"

namespace cylstokes {

struct SpectralThresholds {
  double alpha0 = 0.0;     // smallest Dirichlet eigenvalue
  double alpha1 = 0.0;     // smallest positive Neumann eigenvalue
  double alpha_bar = 0.0;  // min(alpha0, alpha1)
};

struct EigenOptions {
  int max_iterations = 2000;
  double tolerance = 1e-13;  // relative change of the Rayleigh quotient
};

/// Smallest eigenvalue of the discrete Dirichlet Laplacian (inverse iteration).
double dirichlet_smallest(const CrossSectionGrid& grid, const EigenOptions& opts = {});
/// Smallest positive eigenvalue of the discrete Neumann Laplacian, iterating on mean-zero fields.
double neumann_smallest_positive(const CrossSectionGrid& grid, const EigenOptions& opts = {});
SpectralThresholds spectral_thresholds(const CrossSectionGrid& grid, const EigenOptions& opts = {});

struct SectorParams {
  double eps_star = 0.0;
  bool valid = false;
  std::string reason;
};

/// eps* = arctan(sqrt(alpha_bar - beta^2 - alpha) / beta); valid only when
/// beta in (0, sqrt(alpha_bar)) and alpha in (0, alpha_bar - beta^2).
SectorParams sector_params(double alpha_bar, double beta, double alpha);

enum class PoincareBc { dirichlet, mean_zero };

struct PoincareEstimate {
  double constant = 0.0;  // lower bound of the best constant
  int ensemble_size = 0;
  bool refined = false;   // power-iteration refinement applied (r = 2)
};

/// max ||u||_{r,w} / ||grad' u||_{r,w} over a seeded random ensemble of cell fields,
/// plus generalized power iteration when r = 2.
PoincareEstimate poincare_constant(const CrossSectionGrid& grid, PoincareBc bc, double r,
                                   const PowerWeight& weight, int ensemble_size = 64,
                                   std::uint64_t seed = 1);

/// Solves div'u' + i eta u_n = g with u' = 0 on the boundary: the mean part of g goes into
/// u_n = gbar w / (i eta) through a fixed interior bump w of unit integral, the rest into u'
/// through an auxiliary discrete Stokes problem.
class DivergenceSolver {
 public:
  explicit DivergenceSolver(const CrossSectionGrid& grid);

  /// Returns packed velocity [u1; u2; un].
  CVec solve(const CVec& g, cplx eta) const;
  const RVec& bump() const { return bump_; }
  const CrossSectionGrid& grid() const { return grid_; }

 private:
  CrossSectionGrid grid_;
  RVec bump_;
  Eigen::SparseLU<RSparse> lu_;
};

/// Discrete div'u' + i eta u_n for packed velocity.
CVec div_eta(const CrossSectionGrid& grid, const CVec& velocity, cplx eta);

}  // namespace cylstokes
