#pragma once

#include "porestab/common.hpp"

#include <vector>

namespace porestab {

/// Parameters of one reversible surface reaction
///   sum_k alpha_k C_k  <->  sum_k beta_k C_k
/// together with linear sorption and diffusion coefficients for N species.
///
/// Units: kappa_f in 1/(time * concentration^(|alpha|-1)), kappa_b analogous
/// with |beta|, k_ad in length/time, k_de in 1/time, diffusivities in
/// length^2/time.
struct SpeciesSystem {
  int n_species = 0;
  Vec alpha; ///< educt-side stoichiometric coefficients, entries in {0} u [1,inf)
  Vec beta;  ///< product-side stoichiometric coefficients, same constraint
  double kappa_f = 0.0; ///< forward rate constant, > 0
  double kappa_b = 0.0; ///< backward rate constant, > 0
  Vec k_ad;   ///< adsorption coefficients, > 0
  Vec k_de;   ///< desorption coefficients, > 0
  Vec d_bulk; ///< bulk diffusivities, > 0
  Vec d_surf; ///< surface diffusivities, > 0

  bool alpha_equals_beta = false; ///< recorded at validation; gamma closed form needs alpha != beta

  double alpha_sum() const { return alpha.sum(); }
  double beta_sum() const { return beta.sum(); }
};

/// Validates all invariants and returns the system; throws ValidationError
/// naming the offending field otherwise.
SpeciesSystem make_species_system(int n_species, Vec alpha, Vec beta, double kappa_f,
                                  double kappa_b, Vec k_ad, Vec k_de, Vec d_bulk, Vec d_surf);

/// Constant equilibrium pair: psi = bulk values, xi = surface values.
struct EquilibriumPair {
  Vec psi;
  Vec xi;
};

/// First derivative data of the reaction rate at an equilibrium surface state:
/// a_k = alpha_k - beta_k and b_k(c) = kappa_b beta_k c^(beta-e_k) - kappa_f alpha_k c^(alpha-e_k).
/// b is one row for a constant equilibrium, or one row per surface point for a field.
struct SurfaceLinearization {
  Vec a;
  Mat b; ///< n_points x N

  bool constant() const { return b.rows() == 1; }
  int n_points() const { return static_cast<int>(b.rows()); }
  int n_species() const { return static_cast<int>(a.size()); }

  /// Rank-one reaction Jacobian a (x) b at surface point p.
  Mat m_tilde(int p = 0) const;
  /// Symmetric part 1/2 (M + M^T) at surface point p.
  Mat s_sym(int p = 0) const;
  /// max over points of |a|_2 |b|_2, the left-hand side of the stability criterion.
  double criterion_lhs() const;
};

/// Builds a linearization directly from (a, b); used for constructing modified
/// (e.g. artificially destabilized) Jacobians.
SurfaceLinearization make_linearization(Vec a, Vec b);

/// Monomial x^gamma = prod_k x_k^(gamma_k) with the convention 0^0 = 1.
/// Throws ValidationError if a zero base meets a negative exponent.
double monomial(const Vec& x, const Vec& gamma);

/// Mass-action rate r_i = (alpha_i - beta_i)(kappa_b c^beta - kappa_f c^alpha).
/// c_surf must be componentwise nonnegative.
Vec reaction_rate(const SpeciesSystem& sys, const Vec& c_surf);

/// Linear sorption rate r_i = k_ad_i c_bulk_trace_i - k_de_i c_surf_i.
Vec sorption_rate(const SpeciesSystem& sys, const Vec& c_bulk_trace, const Vec& c_surf);

/// Equal-components chemical-balance equilibrium:
/// xi_i = gamma = (kappa_b/kappa_f)^(1/(|alpha|-|beta|)), psi_i = (k_de_i/k_ad_i) xi_i.
/// Requires |alpha| != |beta|; other roots of the balance equation are out of scope.
EquilibriumPair equilibrium_chemical_balance(const SpeciesSystem& sys);

/// Linearization at a constant equilibrium surface state.
SurfaceLinearization linearize_reaction(const SpeciesSystem& sys, const Vec& c_surf_star);

/// Linearization at a per-surface-point equilibrium field (one row per point).
SurfaceLinearization linearize_reaction_field(const SpeciesSystem& sys, const Mat& c_surf_star);

/// Closed-form spectrum of the symmetric part S at point p, sorted descending:
/// {1/2 (a^T b + |a||b|), 1/2 (a^T b - |a||b|), 0 x (N-2)}. In the dependent
/// case one of the two extremes collapses to 0 and the other equals a^T b.
Vec symmetric_part_spectrum(const SurfaceLinearization& lin, int point = 0);

/// Closed-form spectrum of m_tilde itself: {a^T b, 0 x (N-1)}, sorted descending.
Vec m_tilde_spectrum(const SurfaceLinearization& lin, int point = 0);

} // namespace porestab
