#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/operators.hpp"
#include "porestab/species.hpp"
#include "porestab/velocity.hpp"

#include <Eigen/SparseLU>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace porestab {

/// Bulk and surface concentration fields of all species at one time instant.
struct StateField {
  std::vector<Vec> c;      ///< N bulk fields (amount/length^3), size n_bulk each
  std::vector<Vec> c_surf; ///< N surface fields (amount/length^2), size n_surface each
  double time = 0.0;

  static StateField constant(const CylinderMesh& mesh, const EquilibriumPair& eq);
  double min_value() const;
};

Vec flatten(const StateField& s);
StateField unflatten(const CylinderMesh& mesh, int n_species, const Vec& v, double time);

/// Per-species bulk and surface masses (volume/area quadrature).
Vec bulk_mass(const CylinderMesh& mesh, const StateField& s);
Vec surface_mass(const CylinderMesh& mesh, const StateField& s);

/// Volume/area-weighted 2-norm of the deviation from a constant equilibrium.
double deviation_norm(const CylinderMesh& mesh, const StateField& s, const EquilibriumPair& eq);

/// Boundary/reaction integrals of one IMEX step, for the mass ledger.
/// inflow is the (signed, <= 0 for depositing profiles) integral of g_in over
/// Gamma_in; outflow the advective integral of (u.nu) c over Gamma_out
/// evaluated at the implicit end-of-step state; reaction the surface integral
/// of r_ch at the explicit state.
struct StepFluxes {
  Vec inflow;
  Vec outflow;
  Vec reaction;
};

/// Explicit-reaction stability bound 0.5 / max_Sigma |d r_ch| with the
/// Jacobian norm |a|_2 |b(cSigma)|_2 evaluated pointwise at the current state
/// (negative roundoff clamped to zero for the evaluation only).
double reaction_dt_bound(const SpeciesSystem& sys, const StateField& state);

/// One backward-Euler/IMEX integrator: advection, diffusion, sorption coupling
/// and the inflow data are implicit; the chemical reaction is explicit. The
/// constant-coefficient implicit matrix is factorized once per instance.
class ImexStepper {
public:
  ImexStepper(std::shared_ptr<const CylinderMesh> mesh, const SpeciesSystem& sys,
              const VelocityField& vel, const InflowField& g_in, double dt,
              bool reaction_enabled = true);

  /// Advances one step. Throws ValidationError when dt violates the
  /// explicit-reaction bound at the current state, NumericalError on a
  /// positivity abort (componentwise value below -1e-10) or solver failure.
  StateField step(const StateField& state, StepFluxes* fluxes = nullptr) const;

  double dt() const { return dt_; }
  const LinearizedOperator& transport_operator() const { return lin_part_; }

private:
  std::shared_ptr<const CylinderMesh> mesh_;
  SpeciesSystem sys_;
  VelocityField vel_;
  InflowField g_in_;
  double dt_;
  bool reaction_enabled_;
  LinearizedOperator lin_part_; ///< A with M_tilde = 0
  Vec affine_;                  ///< inflow source, cell-averaged
  Eigen::SparseLU<SpMat> lu_;   ///< I + dt * A
};

/// Convenience single-step form; simulate() reuses one factorization instead.
StateField step_imex(const StateField& state, double dt, const SpeciesSystem& sys,
                     std::shared_ptr<const CylinderMesh> mesh, const VelocityField& vel,
                     const InflowField& g_in);

/// Per-species balance of one step: delta(bulk+surface mass) against
/// dt * (-inflow - outflow + reaction). residual_rel is relative to the
/// species' mass/throughput scale.
struct LedgerRecord {
  double t = 0.0;
  Vec delta;
  Vec expected;
  Vec residual_rel;
  double max_residual = 0.0;
};

LedgerRecord mass_ledger(const CylinderMesh& mesh, const StateField& before,
                         const StateField& after, double dt, const StepFluxes& fluxes);

struct TrajectorySample {
  double t = 0.0;
  Vec mass_bulk;
  Vec mass_surf;
  double deviation = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<StateField> sampled_states;
  std::vector<LedgerRecord> ledger; ///< one record per step
  double max_ledger_residual = 0.0;
  bool completed = false;
  std::string abort_reason;
};

struct SimulateOptions {
  double t_end = 1.0;
  double dt = 1e-2;
  int sample_every = 1;
  bool reaction_enabled = true;
};

/// Time-steps the full system and records per-sample masses and deviation
/// norms relative to the supplied equilibrium. Step errors propagate with the
/// failing time stamp.
Trajectory simulate(const SpeciesSystem& sys, std::shared_ptr<const CylinderMesh> mesh,
                    const VelocityField& vel, const InflowField& g_in, const StateField& state0,
                    const EquilibriumPair& eq, const SimulateOptions& opts);

/// Least-squares exponential decay rate over the tail of the deviation curve.
/// The fit only uses samples after the deviation has dropped a full decade
/// below its initial value, needs at least 10 of them and one decade of decay
/// within the tail; otherwise InsufficientDecayError.
struct DecayFit {
  std::vector<double> times;
  std::vector<double> deviation_norms;
  double fitted_rate = 0.0;
  double rate_stderr = 0.0;
  double predicted_rate = 0.0; ///< spectral gap, when available
  int tail_begin = 0;

  double ratio() const { return predicted_rate != 0.0 ? fitted_rate / predicted_rate : 0.0; }
};

DecayFit decay_rate(const std::vector<double>& times, const std::vector<double>& deviations,
                    double predicted_rate = 0.0);

/// Smooth low-frequency seeded perturbation of a constant equilibrium:
/// low-order polynomial in r times truncated Fourier in (theta, z) in the
/// bulk, truncated Fourier on the surface, each species' field normalized to
/// unit max-abs and scaled by delta.
StateField perturb_equilibrium(const CylinderMesh& mesh, const SpeciesSystem& sys,
                               const EquilibriumPair& eq, double delta, std::uint64_t seed);

} // namespace porestab
