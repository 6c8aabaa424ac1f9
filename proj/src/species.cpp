#include "porestab/species.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace porestab {

namespace {

void require_length(const Vec& v, int n, const char* name) {
  if (v.size() != n) {
    std::ostringstream os;
    os << "field '" << name << "' must have length " << n << ", got " << v.size();
    throw ValidationError(os.str());
  }
}

void require_positive(const Vec& v, const char* name) {
  for (int i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) {
      std::ostringstream os;
      os << "field '" << name << "' must be strictly positive, component " << i << " is " << v[i];
      throw ValidationError(os.str());
    }
  }
}

void require_stoichiometric(const Vec& v, const char* name) {
  bool any_nonzero = false;
  for (int i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (!(x == 0.0 || x >= 1.0) || !std::isfinite(x)) {
      std::ostringstream os;
      os << "field '" << name << "' components must lie in {0} u [1,inf), component " << i
         << " is " << x;
      throw ValidationError(os.str());
    }
    any_nonzero = any_nonzero || x != 0.0;
  }
  if (!any_nonzero) {
    throw ValidationError(std::string("field '") + name + "' must not be the zero vector");
  }
}

} // namespace

SpeciesSystem make_species_system(int n_species, Vec alpha, Vec beta, double kappa_f,
                                  double kappa_b, Vec k_ad, Vec k_de, Vec d_bulk, Vec d_surf) {
  if (n_species < 1) throw ValidationError("field 'n_species' must be a positive integer");
  SpeciesSystem sys;
  sys.n_species = n_species;
  require_length(alpha, n_species, "alpha");
  require_length(beta, n_species, "beta");
  require_stoichiometric(alpha, "alpha");
  require_stoichiometric(beta, "beta");
  if (!(kappa_f > 0.0)) throw ValidationError("field 'kappa_f' must be > 0");
  if (!(kappa_b > 0.0)) throw ValidationError("field 'kappa_b' must be > 0");
  require_length(k_ad, n_species, "k_ad");
  require_length(k_de, n_species, "k_de");
  require_length(d_bulk, n_species, "d_bulk");
  require_length(d_surf, n_species, "d_surf");
  require_positive(k_ad, "k_ad");
  require_positive(k_de, "k_de");
  require_positive(d_bulk, "d_bulk");
  require_positive(d_surf, "d_surf");
  sys.alpha = std::move(alpha);
  sys.beta = std::move(beta);
  sys.kappa_f = kappa_f;
  sys.kappa_b = kappa_b;
  sys.k_ad = std::move(k_ad);
  sys.k_de = std::move(k_de);
  sys.d_bulk = std::move(d_bulk);
  sys.d_surf = std::move(d_surf);
  sys.alpha_equals_beta = sys.alpha == sys.beta;
  return sys;
}

double monomial(const Vec& x, const Vec& gamma) {
  double p = 1.0;
  for (int k = 0; k < x.size(); ++k) {
    const double g = gamma[k];
    if (g == 0.0) continue; // 0^0 := 1, factor drops out
    if (x[k] == 0.0 && g < 0.0) {
      std::ostringstream os;
      os << "singular linearization: zero concentration of species " << k
         << " raised to negative power " << g;
      throw ValidationError(os.str());
    }
    p *= std::pow(x[k], g);
  }
  return p;
}

Vec reaction_rate(const SpeciesSystem& sys, const Vec& c_surf) {
  require_length(c_surf, sys.n_species, "c_surf");
  for (int i = 0; i < c_surf.size(); ++i) {
    if (c_surf[i] < 0.0) {
      std::ostringstream os;
      os << "reaction_rate: negative concentration for species " << i << " (" << c_surf[i] << ")";
      throw ValidationError(os.str());
    }
  }
  const double common = sys.kappa_b * monomial(c_surf, sys.beta) -
                        sys.kappa_f * monomial(c_surf, sys.alpha);
  return (sys.alpha - sys.beta) * common;
}

Vec sorption_rate(const SpeciesSystem& sys, const Vec& c_bulk_trace, const Vec& c_surf) {
  require_length(c_bulk_trace, sys.n_species, "c_bulk_trace");
  require_length(c_surf, sys.n_species, "c_surf");
  return sys.k_ad.cwiseProduct(c_bulk_trace) - sys.k_de.cwiseProduct(c_surf);
}

EquilibriumPair equilibrium_chemical_balance(const SpeciesSystem& sys) {
  const double da = sys.alpha_sum() - sys.beta_sum();
  if (da == 0.0) {
    throw ValidationError("equilibrium_chemical_balance: |alpha| == |beta|, the equal-components "
                          "construction is unavailable (general balance roots are out of scope)");
  }
  const double gamma = std::pow(sys.kappa_b / sys.kappa_f, 1.0 / da);
  EquilibriumPair eq;
  eq.xi = Vec::Constant(sys.n_species, gamma);
  eq.psi = sys.k_de.cwiseQuotient(sys.k_ad) * gamma;
  return eq;
}

namespace {

/// b_k(c) with the stoichiometric prefactor folded in; a zero coefficient kills
/// the whole term before the (possibly singular) monomial is formed.
double b_component(const SpeciesSystem& sys, const Vec& c, int k) {
  double term_b = 0.0;
  if (sys.beta[k] != 0.0) {
    Vec e = sys.beta;
    e[k] -= 1.0;
    term_b = sys.kappa_b * sys.beta[k] * monomial(c, e);
  }
  double term_f = 0.0;
  if (sys.alpha[k] != 0.0) {
    Vec e = sys.alpha;
    e[k] -= 1.0;
    term_f = sys.kappa_f * sys.alpha[k] * monomial(c, e);
  }
  return term_b - term_f;
}

Vec b_vector(const SpeciesSystem& sys, const Vec& c_star) {
  for (int i = 0; i < c_star.size(); ++i) {
    if (c_star[i] < 0.0) {
      std::ostringstream os;
      os << "linearize_reaction: negative concentration for species " << i;
      throw ValidationError(os.str());
    }
  }
  Vec b(sys.n_species);
  for (int k = 0; k < sys.n_species; ++k) b[k] = b_component(sys, c_star, k);
  return b;
}

} // namespace

SurfaceLinearization linearize_reaction(const SpeciesSystem& sys, const Vec& c_surf_star) {
  require_length(c_surf_star, sys.n_species, "c_surf_star");
  SurfaceLinearization lin;
  lin.a = sys.alpha - sys.beta;
  lin.b = b_vector(sys, c_surf_star).transpose();
  return lin;
}

SurfaceLinearization linearize_reaction_field(const SpeciesSystem& sys, const Mat& c_surf_star) {
  if (c_surf_star.cols() != sys.n_species) {
    throw ValidationError("linearize_reaction_field: c_surf_star must have n_species columns");
  }
  SurfaceLinearization lin;
  lin.a = sys.alpha - sys.beta;
  lin.b.resize(c_surf_star.rows(), sys.n_species);
  for (int p = 0; p < c_surf_star.rows(); ++p) {
    lin.b.row(p) = b_vector(sys, c_surf_star.row(p).transpose()).transpose();
  }
  return lin;
}

SurfaceLinearization make_linearization(Vec a, Vec b) {
  if (a.size() != b.size()) throw ValidationError("make_linearization: a and b lengths differ");
  SurfaceLinearization lin;
  lin.a = std::move(a);
  lin.b = b.transpose();
  return lin;
}

Mat SurfaceLinearization::m_tilde(int p) const {
  return a * b.row(p);
}

Mat SurfaceLinearization::s_sym(int p) const {
  Mat m = m_tilde(p);
  return 0.5 * (m + m.transpose());
}

double SurfaceLinearization::criterion_lhs() const {
  const double na = a.norm();
  double worst = 0.0;
  for (int p = 0; p < b.rows(); ++p) worst = std::max(worst, na * b.row(p).norm());
  return worst;
}

Vec symmetric_part_spectrum(const SurfaceLinearization& lin, int point) {
  const int n = lin.n_species();
  const Vec b = lin.b.row(point).transpose();
  const double dot = lin.a.dot(b);
  const double prod = lin.a.norm() * b.norm();
  Vec ev = Vec::Zero(n);
  if (n == 1) {
    ev[0] = dot;
    return ev;
  }
  ev[0] = 0.5 * (dot + prod);
  ev[1] = 0.5 * (dot - prod);
  std::sort(ev.data(), ev.data() + n, std::greater<double>());
  return ev;
}

Vec m_tilde_spectrum(const SurfaceLinearization& lin, int point) {
  const int n = lin.n_species();
  Vec ev = Vec::Zero(n);
  ev[0] = lin.a.dot(lin.b.row(point).transpose());
  std::sort(ev.data(), ev.data() + n, std::greater<double>());
  return ev;
}

} // namespace porestab
