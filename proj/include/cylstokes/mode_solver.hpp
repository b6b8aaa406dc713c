#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"
#include "cylstokes/weights.hpp"

namespace cylstokes {

namespace detail {
class ComplexLU;
}

/// Resolvent parameter, axial frequency, exponential rate and decay shift of one mode.
struct SpectralParams {
  cplx lambda{1.0, 0.0};
  double xi = 0.0;
  double beta = 0.0;
  double alpha = 0.0;

  /// Complex phase eta = xi + i beta.
  cplx eta() const { return {xi, beta}; }
  /// |lambda + alpha + xi^2|^{1/2}
  double mu_plus() const { return std::sqrt(std::abs(lambda + alpha + xi * xi)); }
};

struct Admissibility {
  bool ok = false;
  std::string reason;
};

/// lambda in -alpha + S_eps: lambda != -alpha and |arg(lambda + alpha)| < pi/2 + eps.
bool in_shifted_sector(cplx lambda, double alpha, double eps);
/// Full admissibility: beta in [0, sqrt(alpha_bar)), alpha in (0, alpha_bar - beta^2),
/// eps < eps*, lambda in -alpha + S_eps. beta = 0 only needs the sector condition.
Admissibility check_admissible(const SpectralParams& p, double alpha_bar, double eps);

/// Packed mode unknowns [u1; u2; un; p] on a cross-section grid.
struct ModeField {
  CrossSectionGrid grid;
  CVec data;

  explicit ModeField(const CrossSectionGrid& g) : grid(g), data(CVec::Zero(g.num_unknowns())) {}
  ModeField(const CrossSectionGrid& g, CVec d);

  auto velocity() { return data.head(grid.num_velocity()); }
  auto velocity() const { return data.head(grid.num_velocity()); }
  auto u1() const { return data.segment(0, grid.num_u1()); }
  auto u2() const { return data.segment(grid.offset_u2(), grid.num_u2()); }
  auto un() const { return data.segment(grid.offset_un(), grid.num_cells()); }
  auto p() { return data.segment(grid.offset_p(), grid.num_cells()); }
  auto p() const { return data.segment(grid.offset_p(), grid.num_cells()); }
};

struct SolverOptions {
  double residual_tolerance = 1e-10;
};

struct BlockResiduals {
  double momentum_plane = 0.0;  // (lambda+eta^2-Lap')u' + grad'p - f'
  double momentum_axial = 0.0;  // (lambda+eta^2-Lap')u_n + i eta p - f_n
  double divergence = 0.0;      // div'u' + i eta u_n - g
  double max() const { return std::max({momentum_plane, momentum_axial, divergence}); }
};

/// The parametrized Stokes system on the cross-section, assembled and factorized:
///   (lambda + eta^2 - Lap')u' + grad'p   = f'
///   (lambda + eta^2 - Lap')u_n + i eta p = f_n
///   div'u' + i eta u_n                   = g
/// Immutable after construction; solves are const and safe to call concurrently.
class ModeSystem {
 public:
  ModeSystem(const CrossSectionGrid& grid, const SpectralParams& params, SolverOptions opts = {});
  ~ModeSystem();
  ModeSystem(ModeSystem&&) noexcept;
  ModeSystem& operator=(ModeSystem&&) noexcept;

  const CrossSectionGrid& grid() const { return grid_; }
  const SpectralParams& params() const { return params_; }
  const CSparse& matrix() const { return *matrix_; }

  CVec apply(const CVec& packed) const;
  /// Direct solve with one step of iterative refinement; throws SolverError when the
  /// relative residual stays above the tolerance.
  CVec solve_packed(const CVec& rhs) const;
  CVec solve_adjoint_packed(const CVec& rhs) const;
  /// GMRES with an incomplete-LU preconditioner, used as an independent cross-check.
  CVec solve_iterative(const CVec& rhs, double tol = 1e-12, int max_iterations = 2000) const;

  /// Solve with velocity forcing f = [f1; f2; fn] and divergence data g.
  ModeField solve(const CVec& f, const CVec& g) const;
  BlockResiduals residuals(const ModeField& x, const CVec& f, const CVec& g) const;
  /// 1-norm condition estimate (Hager-Higham).
  double condition_estimate() const;

  static CVec pack_rhs(const CrossSectionGrid& grid, const CVec& f, const CVec& g);

 private:
  CrossSectionGrid grid_;
  SpectralParams params_;
  SolverOptions opts_;
  std::unique_ptr<CSparse> matrix_;  // heap-held so the factorization's reference survives moves
  std::unique_ptr<detail::ComplexLU> lu_;
};

/// a(xi)f, b(xi)f: the solution for forcing f with zero divergence data.
ModeField solution_operators(const ModeSystem& sys, const CVec& f);
/// (w, q) = d/dxi (a(xi)f, b(xi)f) given (u, p) = solution_operators(sys, f).
ModeField derivative_solve(const ModeSystem& sys, const ModeField& up);

/// Projection onto ker(div_eta) along the gradient space {(grad'phi, i eta phi)}.
class ModeProjector {
 public:
  ModeProjector(const CrossSectionGrid& grid, cplx eta);

  CVec project(const CVec& velocity) const;
  /// (grad'phi, i eta phi) for a cell field phi.
  CVec gradient_field(const CVec& phi) const;
  cplx eta() const { return eta_; }
  const CrossSectionGrid& grid() const { return grid_; }

 private:
  CrossSectionGrid grid_;
  cplx eta_;
  std::unique_ptr<Eigen::SparseLU<CSparse>> lu_;
};

/// Mean-zero solution of -Lap'_N psi = g0 (g0 must have zero mean).
class NeumannPoisson {
 public:
  explicit NeumannPoisson(const CrossSectionGrid& grid);
  CVec solve(const CVec& g0) const;

 private:
  CrossSectionGrid grid_;
  std::unique_ptr<Eigen::SparseLU<RSparse>> lu_;
};

}  // namespace cylstokes
