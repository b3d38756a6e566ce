#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tbcs {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. The CLI maps these onto exit codes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shapes or patch settings that do not fit together.
struct ConfigError : Error {
  using Error::Error;
};

/// A scalar argument outside its documented domain.
struct ArgumentError : Error {
  using Error::Error;
};

/// A quantity that must be positive/finite was not (e.g. a BCCB eigenvalue).
struct NumericalError : Error {
  using Error::Error;
};

struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

/// The requested path cannot handle the problem size.
struct CapabilityError : Error {
  using Error::Error;
};

/// A point handed to an objective evaluation violates a constraint.
struct FeasibilityError : Error {
  using Error::Error;
};

/// The solver's descent invariant did not hold.
struct InvariantError : NumericalError {
  using NumericalError::NumericalError;
};

/// Malformed container or config file.
struct DataError : Error {
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

/// Real part of the Frobenius (trace) inner product, Re tr(A^H B).
template <typename A, typename B>
double real_inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

}  // namespace tbcs
