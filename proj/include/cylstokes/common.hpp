#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cylstokes {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RSparse = Eigen::SparseMatrix<double>;
using CSparse = Eigen::SparseMatrix<cplx>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Raised when an operation's preconditions are not met.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization or iteration fails to deliver a solution.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace cylstokes
