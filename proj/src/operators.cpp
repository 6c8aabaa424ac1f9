#include "porestab/operators.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

namespace porestab {

namespace {

void add_sym_flux(std::vector<Triplet>& t, int row_a, int row_b, double g, double va, double vb) {
  t.emplace_back(row_a, row_a, g / va);
  t.emplace_back(row_a, row_b, -g / va);
  t.emplace_back(row_b, row_b, g / vb);
  t.emplace_back(row_b, row_a, -g / vb);
}

} // namespace

SpMat bulk_diffusion_neumann(const CylinderMesh& mesh, double d) {
  const int nr = mesh.n_r(), nth = mesh.n_theta(), nz = mesh.n_z();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(7) * mesh.n_bulk());
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < nth; ++j) {
      for (int i = 0; i < nr; ++i) {
        const int c = mesh.bulk_index(i, j, k);
        const double v = mesh.cell_volume(i);
        if (i + 1 < nr) {
          const double g = d * mesh.radial_face_area(i) / mesh.dr();
          add_sym_flux(trips, c, mesh.bulk_index(i + 1, j, k), g, v, mesh.cell_volume(i + 1));
        }
        {
          // periodic: each theta face added once, from its lower-j side
          const double g = d * mesh.angular_face_area() / (mesh.r_center(i) * mesh.dtheta());
          add_sym_flux(trips, c, mesh.bulk_index(i, (j + 1) % nth, k), g, v, v);
        }
        if (k + 1 < nz) {
          const double g = d * mesh.axial_face_area(i) / mesh.dz();
          add_sym_flux(trips, c, mesh.bulk_index(i, j, k + 1), g, v, v);
        }
      }
    }
  }
  SpMat m(mesh.n_bulk(), mesh.n_bulk());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

LinearizedOperator assemble_A0(std::shared_ptr<const CylinderMesh> mesh, const SpeciesSystem& sys,
                               const VelocityField& vel, const SurfaceLinearization& lin) {
  if (!mesh) throw ValidationError("assemble_A0: null mesh");
  const CylinderMesh& m = *mesh;
  if (vel.w.size() != m.n_r()) {
    throw ValidationError("assemble_A0: velocity field built for a different mesh");
  }
  if (lin.n_species() != sys.n_species) {
    throw ValidationError("assemble_A0: linearization species count mismatch");
  }
  if (!lin.constant() && lin.n_points() != m.n_surface()) {
    throw ValidationError("assemble_A0: per-point linearization does not match the surface grid");
  }

  LinearizedOperator op;
  op.mesh = mesh;
  op.sys = sys;
  op.lin = lin;
  const int ns_cells = m.n_surface();
  const int nb_cells = m.n_bulk();
  const int N = sys.n_species;
  op.n_bulk_unknowns = N * nb_cells;
  op.n_surf_unknowns = N * ns_cells;
  const int n = op.size();

  const int nr = m.n_r(), nth = m.n_theta(), nz = m.n_z();
  const double area_s = m.surface_cell_area();

  std::vector<Triplet> t_adv, t_diff, t_surf, t_tr, t_lap;
  t_adv.reserve(static_cast<size_t>(3) * op.n_bulk_unknowns);
  t_diff.reserve(static_cast<size_t>(8) * op.n_bulk_unknowns);
  t_surf.reserve(static_cast<size_t>(8) * op.n_surf_unknowns);

  const SpMat lap_s = surface_neg_laplacian(m);

  for (int s = 0; s < N; ++s) {
    const int bo = op.bulk_offset(s);
    const int so = op.surf_offset(s);
    const double d = sys.d_bulk[s];
    const double ds = sys.d_surf[s];
    const double kad = sys.k_ad[s];
    const double kde = sys.k_de[s];

    // bulk rows: diffusion with metric factors + flux closures
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nth; ++j) {
        for (int i = 0; i < nr; ++i) {
          const int c = bo + m.bulk_index(i, j, k);
          const double v = m.cell_volume(i);
          if (i + 1 < nr) {
            const double g = d * m.radial_face_area(i) / m.dr();
            add_sym_flux(t_diff, c, bo + m.bulk_index(i + 1, j, k), g, v, m.cell_volume(i + 1));
          } else {
            // wall face: total flux = k_ad Tr(c) - k_de cSigma
            const int c2 = bo + m.bulk_index(nr - 2, j, k);
            const int sc = so + m.surface_index(j, k);
            t_diff.emplace_back(c, c, 1.5 * kad * area_s / v);
            t_diff.emplace_back(c, c2, -0.5 * kad * area_s / v);
            t_diff.emplace_back(c, sc, -kde * area_s / v);
          }
          {
            const double g = d * m.angular_face_area() / (m.r_center(i) * m.dtheta());
            const int c2 = bo + m.bulk_index(i, (j + 1) % nth, k);
            t_diff.emplace_back(c, c, g / v);
            t_diff.emplace_back(c, c2, -g / v);
            t_diff.emplace_back(c2, c2, g / v);
            t_diff.emplace_back(c2, c, -g / v);
          }
          const double az = m.axial_face_area(i);
          if (k + 1 < nz) {
            const double g = d * az / m.dz();
            add_sym_flux(t_diff, c, bo + m.bulk_index(i, j, k + 1), g, v, v);
          }
          const double w = vel.w[i];
          if (w != 0.0) {
            if (k == 0) {
              // Gamma_in: zero total flux for the deviation; the advective part
              // (u.nu) c and its anti-advective diffusive complement cancel.
              t_adv.emplace_back(c, c, -w * az / v);
              t_diff.emplace_back(c, c, w * az / v);
            }
            if (k + 1 < nz) {
              const int cu = bo + m.bulk_index(i, j, k + 1);
              t_adv.emplace_back(c, c, w * az / v);   // upwind outflow through the top face
              t_adv.emplace_back(cu, c, -w * az / v); // same flux entering the cell above
            } else {
              t_adv.emplace_back(c, c, w * az / v); // Gamma_out advective outflow
            }
          }
        }
      }
    }

    // surface rows
    for (int k = 0; k < ns_cells; ++k) {
      const int sc = so + k;
      t_surf.emplace_back(sc, sc, kde);
    }
    for (int outer = 0; outer < lap_s.outerSize(); ++outer) {
      for (SpMat::InnerIterator it(lap_s, outer); it; ++it) {
        t_surf.emplace_back(so + static_cast<int>(it.row()), so + static_cast<int>(it.col()),
                            ds * it.value());
        t_lap.emplace_back(so + static_cast<int>(it.row()), so + static_cast<int>(it.col()),
                           ds * it.value());
      }
    }
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nth; ++j) {
        const int sc = so + m.surface_index(j, k);
        const int cw = bo + m.wall_bulk_index(j, k);
        const int cw2 = bo + m.bulk_index(nr - 2, j, k);
        t_surf.emplace_back(sc, cw, -1.5 * kad);
        t_surf.emplace_back(sc, cw2, 0.5 * kad);
        t_tr.emplace_back(sc, cw, 1.5);
        t_tr.emplace_back(sc, cw2, -0.5);
      }
    }
  }

  // -M_tilde coupling among species, per surface point
  for (int p = 0; p < ns_cells; ++p) {
    const Mat mt = lin.m_tilde(lin.constant() ? 0 : p);
    for (int s = 0; s < N; ++s) {
      for (int t = 0; t < N; ++t) {
        const double v = mt(s, t);
        if (v != 0.0) t_surf.emplace_back(op.surf_offset(s) + p, op.surf_offset(t) + p, -v);
      }
    }
  }

  auto build = [n](const std::vector<Triplet>& trips) {
    SpMat out(n, n);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  };
  op.adv = build(t_adv);
  op.diff = build(t_diff);
  op.surf = build(t_surf);
  op.surf_neglap = build(t_lap);
  op.trace_op = build(t_tr);
  op.a0 = op.adv + op.diff + op.surf;
  op.a0.makeCompressed();
  return op;
}

Vec apply_A0(const LinearizedOperator& op, const Vec& state) {
  if (state.size() != op.size()) {
    std::ostringstream os;
    os << "apply_A0: state length " << state.size() << " != operator size " << op.size();
    throw ValidationError(os.str());
  }
  return op.a0 * state;
}

CVec apply_sparse(const SpMat& m, const CVec& x) {
  Vec re = m * x.real();
  Vec im = m * x.imag();
  CVec out(x.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

CVec apply_A0(const LinearizedOperator& op, const CVec& state) {
  if (state.size() != op.size()) {
    std::ostringstream os;
    os << "apply_A0: state length " << state.size() << " != operator size " << op.size();
    throw ValidationError(os.str());
  }
  return apply_sparse(op.a0, state);
}

EnergyForms energy_forms(const LinearizedOperator& op, const CVec& state) {
  if (state.size() != op.size()) throw ValidationError("energy_forms: state length mismatch");
  const CylinderMesh& m = *op.mesh;
  const int N = op.sys.n_species;
  const int nb = m.n_bulk();
  const int ns = m.n_surface();
  const double area = m.surface_cell_area();

  // operator variables -> paper variables (c, cSigma) = K^{1,-1} state
  CVec x = state;
  for (int s = 0; s < N; ++s) {
    const double f = op.sys.k_ad[s] / op.sys.k_de[s];
    x.segment(op.bulk_offset(s), nb) *= f;
    x.segment(op.surf_offset(s), ns) *= f;
  }

  const CVec adv_c = apply_sparse(op.adv, x);
  const CVec diff_c = apply_sparse(op.diff, x);
  const CVec tr_c = apply_sparse(op.trace_op, x);
  const CVec nl_c = apply_sparse(op.surf_neglap, x);

  Vec vols(nb);
  for (int k = 0; k < m.n_z(); ++k)
    for (int j = 0; j < m.n_theta(); ++j)
      for (int i = 0; i < m.n_r(); ++i) vols[m.bulk_index(i, j, k)] = m.cell_volume(i);

  EnergyForms ef;
  for (int s = 0; s < N; ++s) {
    const double kad = op.sys.k_ad[s];
    const double kde = op.sys.k_de[s];
    const double w11 = kde / kad;
    const auto cb = x.segment(op.bulk_offset(s), nb);
    const auto ab = adv_c.segment(op.bulk_offset(s), nb);
    const auto db = diff_c.segment(op.bulk_offset(s), nb);
    for (int c = 0; c < nb; ++c) {
      ef.f_omega += w11 * (ab[c] + db[c]) * std::conj(cb[c]) * vols[c];
      ef.norm_bulk += w11 * std::norm(cb[c]) * vols[c];
    }
    const auto cs = x.segment(op.surf_offset(s), ns);
    const auto ts = tr_c.segment(op.surf_offset(s), ns);
    const auto nls = nl_c.segment(op.surf_offset(s), ns);
    const double w12 = kde * kde / kad;
    const double w22 = w11 * w11;
    const double w23 = kde * kde * kde / (kad * kad);
    for (int c = 0; c < ns; ++c) {
      ef.f_sigma += (-w12 * ts[c] + w22 * nls[c] + w23 * cs[c]) * std::conj(cs[c]) * area;
      ef.norm_surf += w22 * std::norm(cs[c]) * area;
    }
  }
  // -(M K^{-1,1} cS, K^{-1,1} cS); K^{-1,1} cS is the raw operator-variable state
  for (int p = 0; p < ns; ++p) {
    const Mat mt = op.lin.m_tilde(op.lin.constant() ? 0 : p);
    for (int s = 0; s < N; ++s) {
      Complex row{0.0, 0.0};
      for (int t = 0; t < N; ++t) row += mt(s, t) * state[op.surf_offset(t) + p];
      ef.f_sigma -= row * std::conj(state[op.surf_offset(s) + p]) * area;
    }
  }
  return ef;
}

void write_triplets(const LinearizedOperator& op, std::ostream& os) {
  os.precision(17);
  os << "# porestab-operator v1 rows=" << op.size() << " cols=" << op.size()
     << " bulk_unknowns=" << op.n_bulk_unknowns << " surf_unknowns=" << op.n_surf_unknowns << "\n";
  for (int outer = 0; outer < op.a0.outerSize(); ++outer) {
    for (SpMat::InnerIterator it(op.a0, outer); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }
  }
}

Mat dense_matrix(const LinearizedOperator& op) {
  if (op.size() > 6000) {
    throw ValidationError("dense_matrix: operator exceeds the 6000-unknown dense cap");
  }
  return Mat(op.a0);
}

Vec constant_pair_vector(const LinearizedOperator& op, const Vec& psi, const Vec& xi) {
  Vec v(op.size());
  const int nb = op.mesh->n_bulk();
  const int ns = op.mesh->n_surface();
  for (int s = 0; s < op.sys.n_species; ++s) {
    v.segment(op.bulk_offset(s), nb).setConstant(psi[s]);
    v.segment(op.surf_offset(s), ns).setConstant(xi[s]);
  }
  return v;
}

} // namespace porestab
