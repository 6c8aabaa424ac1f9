#pragma once

#include "porestab/common.hpp"
#include "porestab/operators.hpp"

#include <cstdint>
#include <vector>

namespace porestab {

struct Eigenpair {
  Complex lambda{0.0, 0.0};
  CVec vec;            ///< unit 2-norm
  double residual = 0; ///< ||A0 v - lambda v|| / ||v||
};

enum class SpectrumTarget { smallest_real, around_zero };

struct SpectrumOptions {
  int k = 40;
  SpectrumTarget which = SpectrumTarget::smallest_real;
  std::uint64_t seed = 1234; ///< deterministic Arnoldi starts
  /// Dense path below this size; shift-invert Arnoldi above. The dense cap is
  /// 6000 unknowns regardless.
  int dense_threshold = 2048;
  double residual_tol = 1e-8;
  int max_subspace = 400;
};

/// k eigenpairs of A0 nearest the requested end of the spectrum, each with its
/// residual verified against the sparse operator. The returned set is closed
/// under complex conjugation (a straddling partner is pulled in), sorted by
/// ascending real part. Throws NumericalError with iteration diagnostics on
/// non-convergence.
std::vector<Eigenpair> compute_spectrum(const LinearizedOperator& op, const SpectrumOptions& opts);

/// Same as compute_spectrum but on a bare sparse matrix (test oracles use it
/// for operators that are not assembled A0 blocks).
std::vector<Eigenpair> compute_spectrum_matrix(const SpMat& a, const SpectrumOptions& opts);

double eigen_residual(const SpMat& a, const Complex& lambda, const CVec& v);

/// True when every eigenvalue with |Im| > tol has a conjugate partner in the
/// set within tol (spectra of real operators must be conjugate-symmetric).
bool conjugate_symmetric(const std::vector<Eigenpair>& pairs, double tol = 1e-8);

} // namespace porestab
