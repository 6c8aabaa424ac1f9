#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/species.hpp"
#include "porestab/velocity.hpp"

#include <iosfwd>
#include <memory>

namespace porestab {

/// Discrete block operator A0 = A - M over the unknown vector
/// (c_1..c_N on bulk cells, cSigma_1..cSigma_N on surface cells), with the
/// flux boundary conditions folded into stencil closures (no extra unknowns):
///
///   bulk rows:    upwind advection + central diffusion with cylindrical
///                 metric factors; Gamma_in carries the homogeneous total-flux
///                 closure (advective and anti-advective parts split between
///                 the advection and diffusion sub-blocks), the wall face the
///                 sorption flux k_ad Tr(c) - k_de cSigma, Gamma_out pure
///                 advective outflow.
///   surface rows: -K_ad Tr(c) + dSigma (-Laplace_Beltrami) + K_de - M_tilde.
///
/// Tr extrapolates the trace onto Sigma from the two wall-adjacent radial
/// cells (1.5 c_{nr-1} - 0.5 c_{nr-2}).
///
/// The congruence weights of the energy identity (powers of k_ad, k_de) are
/// applied when evaluating energy_forms, never baked into the operator, so the
/// spectrum stays that of A0 itself.
struct LinearizedOperator {
  std::shared_ptr<const CylinderMesh> mesh;
  SpeciesSystem sys;
  SurfaceLinearization lin;

  SpMat a0;          ///< full operator
  SpMat adv;         ///< advection rows (with its Gamma_in/Gamma_out closures)
  SpMat diff;        ///< -D_Delta rows with flux closures (couples wall cells to Sigma)
  SpMat surf;        ///< surface rows
  SpMat surf_neglap; ///< -D_DeltaSigma rows alone (for the energy identity)
  SpMat trace_op;    ///< per-species trace extrapolation, surface rows from bulk cols

  int n_bulk_unknowns = 0; ///< N * bulk cells
  int n_surf_unknowns = 0; ///< N * surface cells

  int size() const { return n_bulk_unknowns + n_surf_unknowns; }
  int bulk_offset(int s) const { return s * mesh->n_bulk(); }
  int surf_offset(int s) const { return n_bulk_unknowns + s * mesh->n_surface(); }
};

LinearizedOperator assemble_A0(std::shared_ptr<const CylinderMesh> mesh, const SpeciesSystem& sys,
                               const VelocityField& vel, const SurfaceLinearization& lin);

/// Matrix-vector product A0 * state with a length check.
Vec apply_A0(const LinearizedOperator& op, const Vec& state);
CVec apply_A0(const LinearizedOperator& op, const CVec& state);

/// Real sparse matrix applied to a complex vector.
CVec apply_sparse(const SpMat& m, const CVec& x);

/// Discrete analogues of the sesquilinear forms of the spectral energy
/// identity, with the state read in operator variables and internally rescaled
/// to the paper's (c, cSigma) = K^{1,-1} (state) convention:
///
///   f_omega = (K^{-1,1} U_grad c, c) - (K^{-1,1} D_Delta c, c)
///   f_sigma = -(K^{-1,2} Tr c, cS) - (K^{-2,2} D_DeltaSigma cS, cS)
///             + (K^{-2,3} cS, cS) - (M K^{-1,1} cS, K^{-1,1} cS)
///
/// using volume/area-weighted quadrature. For an eigenpair (lambda, v):
/// Re lambda * (norm_bulk + norm_surf) = Re f_omega + Re f_sigma.
struct EnergyForms {
  Complex f_omega{0.0, 0.0};
  Complex f_sigma{0.0, 0.0};
  double norm_bulk = 0.0; ///< ||K^{-1/2,1/2} c||^2 over Omega
  double norm_surf = 0.0; ///< ||K^{-1,1} cSigma||^2 over Sigma
};

EnergyForms energy_forms(const LinearizedOperator& op, const CVec& state);

/// Coordinate triplet text export: one "row col value" line per entry.
void write_triplets(const LinearizedOperator& op, std::ostream& os);

/// Dense copy of A0 (guarded against sizes above the dense eigensolve cap).
Mat dense_matrix(const LinearizedOperator& op);

/// Pure bulk diffusion block with zero-flux closures on every boundary;
/// symmetric in the volume-weighted inner product. Building block and test
/// oracle for the adjoint-consistency property.
SpMat bulk_diffusion_neumann(const CylinderMesh& mesh, double d);

/// Flat operator-ordered vector of the constant pair (psi, xi).
Vec constant_pair_vector(const LinearizedOperator& op, const Vec& psi, const Vec& xi);

} // namespace porestab
