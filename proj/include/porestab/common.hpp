#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace porestab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Complex = std::complex<double>;

inline constexpr const char* kToolVersion = "0.1.0";

/// Base class for all porestab errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad input: configuration, precondition or domain violations. CLI exit code 2.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Solver breakdowns, non-convergence, positivity aborts. CLI exit code 3.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Decay-rate fit rejected: the trajectory never decayed by a full decade.
class InsufficientDecayError : public Error {
public:
  explicit InsufficientDecayError(const std::string& msg) : Error(msg) {}
};

} // namespace porestab
