#include "cylstokes/mode_solver.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/IterativeSolvers>

#include "complex_lu.hpp"

namespace cylstokes {

namespace {

const cplx I1(0.0, 1.0);

std::string describe(const SpectralParams& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(lambda=" << p.lambda.real() << (p.lambda.imag() < 0 ? "" : "+") << p.lambda.imag()
     << "i, xi=" << p.xi << ", beta=" << p.beta << ")";
  return os.str();
}

void add_block(std::vector<Eigen::Triplet<cplx>>& t, const RSparse& m, int r0, int c0, cplx s) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (RSparse::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
}

double rel_residual(const CSparse& A, const CVec& x, const CVec& b) {
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  if (nb == 0.0) return nr;
  return nr / nb;
}

}  // namespace

bool in_shifted_sector(cplx lambda, double alpha, double eps) {
  const cplx z = lambda + alpha;
  if (z == cplx(0.0)) return false;
  return std::abs(std::arg(z)) < 0.5 * kPi + eps;
}

Admissibility check_admissible(const SpectralParams& p, double alpha_bar, double eps) {
  Admissibility a;
  const double b2 = p.beta * p.beta;
  if (p.beta < 0 || b2 >= alpha_bar) {
    a.reason = "beta must lie in [0, sqrt(alpha_bar))";
  } else if (p.beta > 0 && !(p.alpha > 0 && p.alpha < alpha_bar - b2)) {
    a.reason = "alpha must lie in (0, alpha_bar - beta^2)";
  } else if (p.beta > 0 && !(eps > 0 && eps < std::atan(std::sqrt(alpha_bar - b2 - p.alpha) / p.beta))) {
    a.reason = "eps must lie in (0, eps*)";
  } else if (!in_shifted_sector(p.lambda, p.alpha, eps)) {
    a.reason = "lambda outside -alpha + S_eps";
  } else if (p.beta == 0.0 && p.xi == 0.0) {
    a.reason = "eta = 0 (xi = 0 and beta = 0): the pressure has a constant nullspace";
  } else {
    a.ok = true;
  }
  return a;
}

ModeField::ModeField(const CrossSectionGrid& g, CVec d) : grid(g), data(std::move(d)) {
  require(data.size() == g.num_unknowns(), "ModeField: packed size mismatch");
}

ModeSystem::ModeSystem(const CrossSectionGrid& grid, const SpectralParams& params, SolverOptions opts)
    : grid_(grid), params_(params), opts_(opts) {
  const cplx eta = params.eta();
  if (eta == cplx(0.0))
    throw InvalidArgument("mode system refused: eta = 0 (xi = 0, beta = 0) leaves the pressure constant "
                          "undetermined");
  const int nv = grid.num_velocity();
  const int nf = grid.num_face_unknowns();
  const int nc = grid.num_cells();
  const int n = grid.num_unknowns();
  const cplx shift = params.lambda + eta * eta;

  std::vector<Eigen::Triplet<cplx>> t;
  add_block(t, grid.velocity_laplacian(), 0, 0, -1.0);
  for (int k = 0; k < nv; ++k) t.emplace_back(k, k, shift);
  add_block(t, grid.gradient(), 0, nv, 1.0);
  for (int k = 0; k < nc; ++k) t.emplace_back(nf + k, nv + k, I1 * eta);
  add_block(t, grid.divergence(), nv, 0, 1.0);
  for (int k = 0; k < nc; ++k) t.emplace_back(nv + k, nf + k, I1 * eta);
  matrix_ = std::make_unique<CSparse>(n, n);
  matrix_->setFromTriplets(t.begin(), t.end());
  matrix_->makeCompressed();

  lu_ = std::make_unique<detail::ComplexLU>(*matrix_);
  if (!lu_->ok()) throw SolverError("mode system factorization failed at " + describe(params) + ": " + lu_->error());
}

ModeSystem::~ModeSystem() = default;
ModeSystem::ModeSystem(ModeSystem&&) noexcept = default;
ModeSystem& ModeSystem::operator=(ModeSystem&&) noexcept = default;

CVec ModeSystem::apply(const CVec& packed) const { return *matrix_ * packed; }

CVec ModeSystem::pack_rhs(const CrossSectionGrid& grid, const CVec& f, const CVec& g) {
  require(f.size() == grid.num_velocity(), "forcing must be packed velocity [f1; f2; fn]");
  require(g.size() == grid.num_cells(), "divergence data must live at cell centers");
  CVec rhs(grid.num_unknowns());
  rhs.head(grid.num_velocity()) = f;
  rhs.tail(grid.num_cells()) = g;
  return rhs;
}

CVec ModeSystem::solve_packed(const CVec& rhs) const {
  const CSparse& A = *matrix_;
  require(rhs.size() == A.rows(), "rhs size mismatch");
  if (rhs.isZero(0.0)) return CVec::Zero(rhs.size());
  CVec x = lu_->solve(rhs);
  double res = rel_residual(A, x, rhs);
  if (res > 1e-3 * opts_.residual_tolerance) {
    x += lu_->solve(CVec(rhs - A * x));
    res = rel_residual(A, x, rhs);
  }
  if (!(res <= opts_.residual_tolerance))
    throw SolverError("mode solve residual " + std::to_string(res) + " above tolerance at " + describe(params_));
  return x;
}

CVec ModeSystem::solve_adjoint_packed(const CVec& rhs) const {
  require(rhs.size() == matrix_->rows(), "rhs size mismatch");
  if (rhs.isZero(0.0)) return CVec::Zero(rhs.size());
  return lu_->solve_adjoint(rhs);
}

CVec ModeSystem::solve_iterative(const CVec& rhs, double tol, int max_iterations) const {
  // Reorder unknowns to [u'; p; u_n] so that no diagonal entry vanishes.
  const int nf = grid_.num_face_unknowns();
  const int nc = grid_.num_cells();
  const int n = grid_.num_unknowns();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  for (int k = 0; k < nf; ++k) perm.indices()[k] = k;
  for (int k = 0; k < nc; ++k) {
    perm.indices()[nf + k] = nf + nc + k;  // u_n -> last block
    perm.indices()[nf + nc + k] = nf + k;  // p -> third block
  }
  const CSparse A = *matrix_ * perm.inverse();
  Eigen::GMRES<CSparse, Eigen::IncompleteLUT<cplx>> gmres;
  gmres.preconditioner().setDroptol(1e-6);
  gmres.preconditioner().setFillfactor(20);
  gmres.set_restart(200);
  gmres.setTolerance(tol);
  gmres.setMaxIterations(max_iterations);
  gmres.compute(A);
  if (gmres.info() != Eigen::Success) throw SolverError("iterative path: preconditioner setup failed");
  const CVec y = gmres.solve(rhs);
  if (gmres.info() != Eigen::Success) throw SolverError("iterative path: GMRES did not converge");
  return perm.inverse() * y;
}

ModeField ModeSystem::solve(const CVec& f, const CVec& g) const {
  return ModeField(grid_, solve_packed(pack_rhs(grid_, f, g)));
}

BlockResiduals ModeSystem::residuals(const ModeField& x, const CVec& f, const CVec& g) const {
  const CVec rhs = pack_rhs(grid_, f, g);
  const CVec r = *matrix_ * x.data - rhs;
  const int nf = grid_.num_face_unknowns();
  const int nc = grid_.num_cells();
  const int nv = grid_.num_velocity();
  auto rel = [](const auto& a, const auto& b) {
    const double nb = b.norm();
    return nb == 0.0 ? a.norm() : a.norm() / nb;
  };
  const double scale = std::max(rhs.norm(), 1e-300);
  BlockResiduals br;
  br.momentum_plane = r.head(nf).norm() / scale;
  br.momentum_axial = r.segment(nf, nc).norm() / scale;
  br.divergence = rel(r.tail(nc), rhs.tail(nc));
  if (rhs.tail(nc).norm() == 0.0) br.divergence = r.tail(nc).norm() / scale;
  (void)nv;
  return br;
}

double ModeSystem::condition_estimate() const {
  const CSparse& A = *matrix_;
  const int n = static_cast<int>(A.rows());
  double norm1 = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double s = 0.0;
    for (CSparse::InnerIterator it(A, k); it; ++it) s += std::abs(it.value());
    norm1 = std::max(norm1, s);
  }
  CVec x = CVec::Constant(n, 1.0 / n);
  double est = 0.0;
  for (int it = 0; it < 5; ++it) {
    const CVec y = lu_->solve(x);
    est = y.cwiseAbs().sum();
    CVec sgn(n);
    for (int k = 0; k < n; ++k) sgn[k] = std::abs(y[k]) > 0 ? y[k] / std::abs(y[k]) : cplx(1.0);
    const CVec z = lu_->solve_adjoint(sgn);
    int j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= std::real(z.dot(x))) break;
    x.setZero();
    x[j] = 1.0;
  }
  return norm1 * est;
}

ModeField solution_operators(const ModeSystem& sys, const CVec& f) {
  return sys.solve(f, CVec::Zero(sys.grid().num_cells()));
}

ModeField derivative_solve(const ModeSystem& sys, const ModeField& up) {
  const auto& g = sys.grid();
  const cplx eta = sys.params().eta();
  const int nf = g.num_face_unknowns();
  const int nc = g.num_cells();
  CVec rhs(g.num_unknowns());
  rhs.head(nf) = -2.0 * eta * up.data.head(nf);
  rhs.segment(nf, nc) = -2.0 * eta * up.un() - I1 * up.p();
  rhs.tail(nc) = -I1 * up.un();
  return ModeField(g, sys.solve_packed(rhs));
}

ModeProjector::ModeProjector(const CrossSectionGrid& grid, cplx eta) : grid_(grid), eta_(eta) {
  if (eta == cplx(0.0)) throw InvalidArgument("projection refused: eta = 0 leaves constants undetermined");
  const int nc = grid.num_cells();
  CSparse A = grid.laplacian_neumann().cast<cplx>();
  CSparse S(nc, nc);
  S.setIdentity();
  A -= (eta * eta) * S;
  A.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<CSparse>>();
  lu_->analyzePattern(A);
  lu_->factorize(A);
  if (lu_->info() != Eigen::Success)
    throw InvalidArgument("projection refused: Lap'_N - eta^2 is singular (eta^2 hits the Neumann spectrum)");
}

CVec ModeProjector::gradient_field(const CVec& phi) const {
  const int nf = grid_.num_face_unknowns();
  CVec v(grid_.num_velocity());
  v.head(nf) = grid_.gradient().cast<cplx>() * phi;
  v.tail(grid_.num_cells()) = I1 * eta_ * phi;
  return v;
}

CVec ModeProjector::project(const CVec& velocity) const {
  require(velocity.size() == grid_.num_velocity(), "projection needs packed velocity");
  const int nf = grid_.num_face_unknowns();
  const CVec b = grid_.divergence().cast<cplx>() * velocity.head(nf) + I1 * eta_ * velocity.tail(grid_.num_cells());
  const CVec phi = lu_->solve(b);
  return velocity - gradient_field(phi);
}

NeumannPoisson::NeumannPoisson(const CrossSectionGrid& grid) : grid_(grid) {
  const int nc = grid.num_cells();
  std::vector<Eigen::Triplet<double>> t;
  const RSparse& L = grid.laplacian_neumann();
  for (int k = 0; k < L.outerSize(); ++k)
    for (RSparse::InnerIterator it(L, k); it; ++it) t.emplace_back(it.row(), it.col(), -it.value());
  for (int k = 0; k < nc; ++k) {
    t.emplace_back(k, nc, 1.0);
    t.emplace_back(nc, k, 1.0);
  }
  RSparse A(nc + 1, nc + 1);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<RSparse>>();
  lu_->analyzePattern(A);
  lu_->factorize(A);
  if (lu_->info() != Eigen::Success) throw SolverError("NeumannPoisson: factorization failed");
}

CVec NeumannPoisson::solve(const CVec& g0) const {
  const int nc = grid_.num_cells();
  RVec rhs = RVec::Zero(nc + 1);
  CVec out(nc);
  rhs.head(nc) = g0.real();
  const RVec xr = lu_->solve(rhs);
  rhs.head(nc) = g0.imag();
  const RVec xi = lu_->solve(rhs);
  for (int k = 0; k < nc; ++k) out[k] = cplx(xr[k], xi[k]);
  return out;
}

}  // namespace cylstokes
