#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/operators.hpp"
#include "porestab/spectrum.hpp"
#include "porestab/velocity.hpp"

#include <string>
#include <vector>

namespace porestab {

enum class Verdict { stable_by_criterion, criterion_inconclusive, unstable_detected };

const char* verdict_name(Verdict v);

/// Outcome of the criterion evaluation plus the computed low end of the
/// spectrum. Sign convention: the system reads d/dt + A0, so stability means
/// every computed eigenvalue has Re lambda > 0 and spectral_gap = min Re
/// lambda governs the attraction rate. The gap is a statement about the
/// computed subset only (k eigenvalues).
struct StabilityReport {
  double criterion_lhs = 0.0; ///< max over Sigma of |a| |b(cSigma*)|
  double criterion_rhs = 0.0; ///< 1/C_P = sqrt(mu_1)
  double c_p = 0.0;
  double mu_1 = 0.0;
  std::string poincare_subspace;

  std::vector<Eigenpair> eigenpairs; ///< sorted by ascending real part
  double spectral_gap = 0.0;         ///< min Re lambda over the computed subset
  int k_computed = 0;

  bool inflow_active = false;       ///< (A_vel_in)
  bool criterion_satisfied = false; ///< criterion_lhs <= criterion_rhs (non-strict per the paper)
  bool conjugate_symmetry_ok = false;
  bool anomaly = false; ///< criterion held with inflow yet the computed gap was not positive
  std::string anomaly_note;

  Verdict verdict = Verdict::criterion_inconclusive;

  EquilibriumPair equilibrium;
  double max_eigen_residual = 0.0;
};

struct VerdictOptions {
  SpectrumOptions spectrum;
  /// |Re lambda| below this counts as an (numerically) zero real part when
  /// classifying the gap.
  double zero_tol = 1e-7;
  /// Replaces the reaction Jacobian derived from the equilibrium; used to
  /// probe artificially destabilized configurations through the same path.
  const SurfaceLinearization* lin_override = nullptr;
};

/// Evaluates the stability criterion at a constant equilibrium, computes the
/// low end of the spectrum of A0 and classifies. A satisfied criterion with
/// active inflow must come with a positive gap; a violation is reported as a
/// discretization anomaly, never silently passed. op_out, when given, receives
/// the assembled operator (for follow-up energy/probe evaluations).
StabilityReport stability_verdict(std::shared_ptr<const CylinderMesh> mesh,
                                  const SpeciesSystem& sys, const EquilibriumPair& eq,
                                  const VelocityField& vel, const VerdictOptions& opts = {},
                                  LinearizedOperator* op_out = nullptr);

/// Per-eigenpair record of the instability condition: lhs is the surface
/// quadratic form Re(b.cS, a.cS), rhs the modulus of the M-free part
/// |(A (c,cS),(c,cS))|, both in plain volume/area-weighted inner products.
/// lhs > rhs forces Re lambda < 0 for that eigenpair.
struct ProbeRecord {
  Complex lambda{0.0, 0.0};
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  bool skipped = false; ///< degenerate (vanishing surface component)
  bool consistent = true; ///< satisfied implies Re lambda < 0 held
};

std::vector<ProbeRecord> instability_probe(const LinearizedOperator& op,
                                           const std::vector<Eigenpair>& pairs,
                                           const SurfaceLinearization& lin);

/// Worst relative mismatch of Re lambda (weighted norms) vs Re F_Omega + Re
/// F_Sigma over the given eigenpairs.
double energy_identity_check(const LinearizedOperator& op, const std::vector<Eigenpair>& pairs);

/// Relative mismatch of the identity for one state/eigenvalue pair.
double energy_identity_residual(const LinearizedOperator& op, const Complex& lambda,
                                const CVec& state);

} // namespace porestab
