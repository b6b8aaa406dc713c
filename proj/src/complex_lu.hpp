#pragma once

#include "cylstokes/common.hpp"

namespace cylstokes::detail {

/// Sparse complex LU (UMFPACK) with solves against A and A^H.
class ComplexLU {
 public:
  /// Keeps a reference to `a`; the matrix must outlive the factorization and stay unchanged.
  explicit ComplexLU(const CSparse& a);
  ~ComplexLU();
  ComplexLU(const ComplexLU&) = delete;
  ComplexLU& operator=(const ComplexLU&) = delete;

  bool ok() const { return numeric_ != nullptr; }
  const std::string& error() const { return error_; }
  CVec solve(const CVec& b) const;
  CVec solve_adjoint(const CVec& b) const;

 private:
  CVec run(int sys, const CVec& b) const;
  const CSparse& a_;
  void* numeric_ = nullptr;
  std::string error_;
};

}  // namespace cylstokes::detail
