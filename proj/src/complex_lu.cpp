#include "complex_lu.hpp"

#include <umfpack.h>

namespace cylstokes::detail {

namespace {

const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }
double* raw(cplx* p) { return reinterpret_cast<double*>(p); }

}  // namespace

ComplexLU::ComplexLU(const CSparse& a) : a_(a) {
  require(a.isCompressed() && a.rows() == a.cols(), "ComplexLU needs a compressed square matrix");
  double control[UMFPACK_CONTROL];
  umfpack_zi_defaults(control);
  void* symbolic = nullptr;
  const int n = static_cast<int>(a.rows());
  int status = umfpack_zi_symbolic(n, n, a.outerIndexPtr(), a.innerIndexPtr(), raw(a.valuePtr()), nullptr,
                                   &symbolic, control, nullptr);
  if (status != UMFPACK_OK) {
    error_ = "symbolic analysis failed (" + std::to_string(status) + ")";
    return;
  }
  status = umfpack_zi_numeric(a.outerIndexPtr(), a.innerIndexPtr(), raw(a.valuePtr()), nullptr, symbolic,
                              &numeric_, control, nullptr);
  umfpack_zi_free_symbolic(&symbolic);
  if (status != UMFPACK_OK) {
    if (numeric_) umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
    error_ = status == UMFPACK_WARNING_singular_matrix ? "matrix is singular"
                                                       : "numeric factorization failed (" + std::to_string(status) + ")";
  }
}

ComplexLU::~ComplexLU() {
  if (numeric_) umfpack_zi_free_numeric(&numeric_);
}

CVec ComplexLU::run(int sys, const CVec& b) const {
  require(ok(), "ComplexLU: no factorization");
  require(b.size() == a_.rows(), "ComplexLU: rhs size mismatch");
  CVec x(b.size());
  double control[UMFPACK_CONTROL];
  umfpack_zi_defaults(control);
  control[UMFPACK_IRSTEP] = 0;  // callers refine and check the residual themselves
  const int status = umfpack_zi_solve(sys, a_.outerIndexPtr(), a_.innerIndexPtr(), raw(a_.valuePtr()), nullptr,
                                      raw(x.data()), nullptr, raw(b.data()), nullptr, numeric_, control, nullptr);
  if (status != UMFPACK_OK) throw SolverError("UMFPACK solve failed (" + std::to_string(status) + ")");
  return x;
}

CVec ComplexLU::solve(const CVec& b) const { return run(UMFPACK_A, b); }
CVec ComplexLU::solve_adjoint(const CVec& b) const { return run(UMFPACK_At, b); }

}  // namespace cylstokes::detail
