#include "porestab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace porestab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable_by_criterion: return "stable-by-criterion";
    case Verdict::criterion_inconclusive: return "criterion-inconclusive";
    case Verdict::unstable_detected: return "unstable-detected";
  }
  return "?";
}

StabilityReport stability_verdict(std::shared_ptr<const CylinderMesh> mesh,
                                  const SpeciesSystem& sys, const EquilibriumPair& eq,
                                  const VelocityField& vel, const VerdictOptions& opts,
                                  LinearizedOperator* op_out) {
  for (int s = 0; s < sys.n_species; ++s) {
    if (eq.psi[s] < 0.0 || eq.xi[s] < 0.0) {
      std::ostringstream os;
      os << "stability_verdict: equilibrium must be componentwise nonnegative, species " << s
         << " has (psi, xi) = (" << eq.psi[s] << ", " << eq.xi[s] << ")";
      throw ValidationError(os.str());
    }
  }

  StabilityReport rep;
  rep.equilibrium = eq;
  rep.inflow_active = vel.nontrivial_inflow();

  const PoincareResult poincare = poincare_constant_surface(*mesh);
  rep.mu_1 = poincare.mu_1;
  rep.c_p = poincare.c_p;
  rep.poincare_subspace = poincare.subspace;
  rep.criterion_rhs = 1.0 / poincare.c_p;

  const SurfaceLinearization lin =
      opts.lin_override ? *opts.lin_override : linearize_reaction(sys, eq.xi);
  rep.criterion_lhs = lin.criterion_lhs();
  rep.criterion_satisfied = rep.criterion_lhs <= rep.criterion_rhs;

  LinearizedOperator op = assemble_A0(mesh, sys, vel, lin);
  rep.eigenpairs = compute_spectrum(op, opts.spectrum);
  if (op_out) *op_out = std::move(op);
  rep.k_computed = static_cast<int>(rep.eigenpairs.size());
  rep.conjugate_symmetry_ok = conjugate_symmetric(rep.eigenpairs);

  rep.spectral_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.eigenpairs) {
    rep.spectral_gap = std::min(rep.spectral_gap, p.lambda.real());
    rep.max_eigen_residual = std::max(rep.max_eigen_residual, p.residual);
  }

  const bool gap_positive = rep.spectral_gap > opts.zero_tol;
  const bool gap_negative = rep.spectral_gap < -opts.zero_tol;
  if (gap_negative) {
    rep.verdict = Verdict::unstable_detected;
  } else if (rep.criterion_satisfied && rep.inflow_active && gap_positive) {
    rep.verdict = Verdict::stable_by_criterion;
  } else {
    rep.verdict = Verdict::criterion_inconclusive;
  }
  if (rep.criterion_satisfied && rep.inflow_active && !gap_positive) {
    rep.anomaly = true;
    std::ostringstream os;
    os << "criterion satisfied (" << rep.criterion_lhs << " <= " << rep.criterion_rhs
       << ") with active inflow but computed spectral gap " << rep.spectral_gap
       << " is not positive; discretization anomaly";
    rep.anomaly_note = os.str();
  }
  return rep;
}

namespace {

/// (A (c,cS), (c,cS)) with A = A0 + M (the M-free linear part) in the plain
/// volume/area-weighted inner product.
Complex m_free_quadratic_form(const LinearizedOperator& op, const CVec& v) {
  CVec av = apply_sparse(op.a0, v);
  const CylinderMesh& m = *op.mesh;
  const int ns = m.n_surface();
  const int N = op.sys.n_species;
  // add back +M: (M v)_surf,s = sum_t m_tilde[s][t] v_surf,t
  for (int p = 0; p < ns; ++p) {
    const Mat mt = op.lin.m_tilde(op.lin.constant() ? 0 : p);
    for (int s = 0; s < N; ++s) {
      Complex acc{0.0, 0.0};
      for (int t = 0; t < N; ++t) acc += mt(s, t) * v[op.surf_offset(t) + p];
      av[op.surf_offset(s) + p] += acc;
    }
  }
  Complex q{0.0, 0.0};
  for (int s = 0; s < N; ++s) {
    for (int k = 0; k < m.n_z(); ++k)
      for (int j = 0; j < m.n_theta(); ++j)
        for (int i = 0; i < m.n_r(); ++i) {
          const int c = op.bulk_offset(s) + m.bulk_index(i, j, k);
          q += av[c] * std::conj(v[c]) * m.cell_volume(i);
        }
    const int so = op.surf_offset(s);
    for (int p = 0; p < ns; ++p) q += av[so + p] * std::conj(v[so + p]) * m.surface_cell_area();
  }
  return q;
}

} // namespace

std::vector<ProbeRecord> instability_probe(const LinearizedOperator& op,
                                           const std::vector<Eigenpair>& pairs,
                                           const SurfaceLinearization& lin) {
  const CylinderMesh& m = *op.mesh;
  const int ns = m.n_surface();
  const int N = op.sys.n_species;
  const double area = m.surface_cell_area();

  std::vector<ProbeRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    ProbeRecord rec;
    rec.lambda = p.lambda;
    double surf_norm2 = 0.0;
    for (int s = 0; s < N; ++s)
      surf_norm2 += p.vec.segment(op.surf_offset(s), ns).squaredNorm();
    if (p.vec.size() != op.size() || std::sqrt(surf_norm2) < 1e-14 * p.vec.norm()) {
      rec.skipped = true;
      out.push_back(rec);
      continue;
    }
    // lhs = Re (b.cS, a.cS)_Sigma = Re (M_tilde cS, cS)_Sigma
    Complex lhs{0.0, 0.0};
    for (int q = 0; q < ns; ++q) {
      const Vec b = lin.b.row(lin.constant() ? 0 : q).transpose();
      Complex b_dot{0.0, 0.0}, a_dot{0.0, 0.0};
      for (int s = 0; s < N; ++s) {
        const Complex cs = p.vec[op.surf_offset(s) + q];
        b_dot += b[s] * cs;
        a_dot += lin.a[s] * cs;
      }
      lhs += b_dot * std::conj(a_dot) * area;
    }
    rec.lhs = lhs.real();
    rec.rhs = std::abs(m_free_quadratic_form(op, p.vec));
    rec.satisfied = rec.lhs > rec.rhs;
    rec.consistent = !rec.satisfied || p.lambda.real() < 0.0;
    out.push_back(rec);
  }
  return out;
}

double energy_identity_residual(const LinearizedOperator& op, const Complex& lambda,
                                const CVec& state) {
  const EnergyForms ef = energy_forms(op, state);
  const double norms = ef.norm_bulk + ef.norm_surf;
  const double lhs = lambda.real() * norms;
  const double rhs = (ef.f_omega + ef.f_sigma).real();
  const double denom = std::max({std::abs(lambda) * norms,
                                 std::abs(ef.f_omega) + std::abs(ef.f_sigma), 1e-300});
  return std::abs(lhs - rhs) / denom;
}

double energy_identity_check(const LinearizedOperator& op, const std::vector<Eigenpair>& pairs) {
  double worst = 0.0;
  for (const auto& p : pairs) {
    worst = std::max(worst, energy_identity_residual(op, p.lambda, p.vec));
  }
  return worst;
}

} // namespace porestab
