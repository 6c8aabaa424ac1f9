#pragma once

#include "porestab/species.hpp"

#include <random>

namespace porestab::test {

/// Random valid species system; when require_unequal_sums is set, redraws
/// until |alpha| != |beta| (the gamma construction's precondition).
inline SpeciesSystem random_system(std::mt19937_64& rng, int n, bool require_unequal_sums) {
  std::uniform_real_distribution<double> coeff(1.0, 3.0);
  std::uniform_real_distribution<double> rate(0.5, 2.0);
  std::bernoulli_distribution zero(0.35);
  for (;;) {
    Vec alpha(n), beta(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = zero(rng) ? 0.0 : coeff(rng);
      beta[i] = zero(rng) ? 0.0 : coeff(rng);
    }
    if (alpha.sum() == 0.0 || beta.sum() == 0.0) continue;
    if (require_unequal_sums && std::abs(alpha.sum() - beta.sum()) < 0.1) continue;
    Vec k_ad(n), k_de(n), d_bulk(n), d_surf(n);
    for (int i = 0; i < n; ++i) {
      k_ad[i] = rate(rng);
      k_de[i] = rate(rng);
      d_bulk[i] = rate(rng);
      d_surf[i] = rate(rng);
    }
    return make_species_system(n, alpha, beta, rate(rng), rate(rng), k_ad, k_de, d_bulk, d_surf);
  }
}

inline Vec random_positive(std::mt19937_64& rng, int n, double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// The A<->B reaction at kappa_f = kappa_b = kappa, chemical balance xi = (1,1).
inline SpeciesSystem ab_system(double kappa, double k_ad, double k_de, double d = 1.0,
                               double d_surf = 1.0) {
  Vec alpha(2), beta(2);
  alpha << 1.0, 0.0;
  beta << 0.0, 1.0;
  return make_species_system(2, alpha, beta, kappa, kappa, Vec::Constant(2, k_ad),
                             Vec::Constant(2, k_de), Vec::Constant(2, d),
                             Vec::Constant(2, d_surf));
}

inline EquilibriumPair ab_equilibrium(const SpeciesSystem& sys) {
  EquilibriumPair eq;
  eq.xi = Vec::Ones(sys.n_species);
  eq.psi = sys.k_de.cwiseQuotient(sys.k_ad);
  return eq;
}

} // namespace porestab::test
