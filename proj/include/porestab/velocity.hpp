#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/species.hpp"

namespace porestab {

enum class VelocityProfile { poiseuille, plug };

/// Stationary axial flow u = (0, 0, w(r)), divergence-free by construction.
/// u.nu <= 0 on Gamma_in, = 0 on Sigma, >= 0 on Gamma_out.
struct VelocityField {
  VelocityProfile profile = VelocityProfile::poiseuille;
  double w_max = 0.0;
  Vec w; ///< axial speed at radial cell centers, size n_r, >= 0

  /// (A_vel_in): nontrivial inflow certifies the stability path.
  bool nontrivial_inflow() const { return w_max > 0.0; }
};

VelocityField build_velocity(const CylinderMesh& mesh, double w_max, VelocityProfile profile);

/// Max |discrete divergence| over interior cells; zero for z-independent axial
/// flow, evaluated honestly from the face-flux stencil.
double max_divergence_residual(const CylinderMesh& mesh, const VelocityField& vel);

/// Per-species inflow data g_in on Gamma_in faces (index inflow_face_index(i,j)).
struct InflowField {
  Mat values; ///< n_inflow_faces x N, zero-rows when absent

  bool empty() const { return values.size() == 0; }
  static InflowField zero(const CylinderMesh& mesh, int n_species) {
    return InflowField{Mat::Zero(mesh.n_inflow_faces(), n_species)};
  }
};

/// Inflow profile matched to a constant equilibrium:
/// g_in_i = (k_de_i xi_i / k_ad_i) (u.nu) on Gamma_in, so that (psi, xi) is a
/// steady state of the full linear part. g_in_i <= 0 holds by construction.
InflowField matched_inflow(const CylinderMesh& mesh, const SpeciesSystem& sys,
                           const EquilibriumPair& eq, const VelocityField& vel);

} // namespace porestab
