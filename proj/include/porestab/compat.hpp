#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/species.hpp"
#include "porestab/timestep.hpp"
#include "porestab/velocity.hpp"

namespace porestab {

/// Max-norm residuals of the four discrete compatibility conditions on the
/// initial data: inflow flux match on Gamma_in, sorption flux match on Sigma,
/// zero outflow flux on Gamma_out, zero edge flux on the z edges of Sigma.
/// Advisory for p <= 3 (the conditions only bind for p > 3); always returns a
/// report. One-sided first-order normal derivatives and the two-cell trace
/// extrapolation of the discretization are used.
struct CompatibilityReport {
  Vec res_inflow;   ///< per species
  Vec res_sorption;
  Vec res_outflow;
  Vec res_edge;
  double max_residual = 0.0;
  double p = 0.0;
  bool advisory_only = false; ///< true when p <= 3
};

CompatibilityReport check_compatibility(const SpeciesSystem& sys, const CylinderMesh& mesh,
                                        const StateField& state0, const VelocityField& vel,
                                        const InflowField& g_in, double p);

} // namespace porestab
