#include "porestab/compat.hpp"

#include <algorithm>
#include <cmath>

namespace porestab {

CompatibilityReport check_compatibility(const SpeciesSystem& sys, const CylinderMesh& mesh,
                                        const StateField& state0, const VelocityField& vel,
                                        const InflowField& g_in, double p) {
  const int N = sys.n_species;
  const int nr = mesh.n_r(), nth = mesh.n_theta(), nz = mesh.n_z();
  CompatibilityReport rep;
  rep.p = p;
  rep.advisory_only = p <= 3.0;
  rep.res_inflow = Vec::Zero(N);
  rep.res_sorption = Vec::Zero(N);
  rep.res_outflow = Vec::Zero(N);
  rep.res_edge = Vec::Zero(N);

  for (int s = 0; s < N; ++s) {
    const Vec& c = state0.c[s];
    const Vec& cs = state0.c_surf[s];
    const double d = sys.d_bulk[s];
    const double ds = sys.d_surf[s];

    for (int j = 0; j < nth; ++j) {
      for (int i = 0; i < nr; ++i) {
        // Gamma_in (nu = -e_z): c0 (u.nu) - d dnu(c0) = g_in
        const double c0 = c[mesh.bulk_index(i, j, 0)];
        const double c1 = c[mesh.bulk_index(i, j, 1)];
        const double trace_in = 1.5 * c0 - 0.5 * c1;
        const double dnu_in = -(c1 - c0) / mesh.dz();
        const double gin = g_in.empty() ? 0.0 : g_in.values(mesh.inflow_face_index(i, j), s);
        rep.res_inflow[s] = std::max(rep.res_inflow[s],
                                     std::abs(trace_in * (-vel.w[i]) - d * dnu_in - gin));

        // Gamma_out (nu = +e_z): -d dnu(c0) = 0
        const double ct = c[mesh.bulk_index(i, j, nz - 1)];
        const double cb = c[mesh.bulk_index(i, j, nz - 2)];
        rep.res_outflow[s] = std::max(rep.res_outflow[s], std::abs(d * (ct - cb) / mesh.dz()));
      }
      for (int k = 0; k < nz; ++k) {
        // Sigma (nu = +e_r): -d dnu(c0) = k_ad Tr(c0) - k_de cSigma0
        const double cw = c[mesh.bulk_index(nr - 1, j, k)];
        const double cw2 = c[mesh.bulk_index(nr - 2, j, k)];
        const double trace_w = 1.5 * cw - 0.5 * cw2;
        const double dnu_w = (cw - cw2) / mesh.dr();
        const double sorp = sys.k_ad[s] * trace_w - sys.k_de[s] * cs[mesh.surface_index(j, k)];
        rep.res_sorption[s] = std::max(rep.res_sorption[s], std::abs(-d * dnu_w - sorp));
      }
      // dSigma edges at z = 0 and z = h: zero-flux in z
      const double e0 = cs[mesh.surface_index(j, 1)] - cs[mesh.surface_index(j, 0)];
      const double e1 = cs[mesh.surface_index(j, nz - 1)] - cs[mesh.surface_index(j, nz - 2)];
      rep.res_edge[s] = std::max({rep.res_edge[s], std::abs(ds * e0 / mesh.dz()),
                                  std::abs(ds * e1 / mesh.dz())});
    }
    rep.max_residual = std::max({rep.max_residual, rep.res_inflow[s], rep.res_sorption[s],
                                 rep.res_outflow[s], rep.res_edge[s]});
  }
  return rep;
}

} // namespace porestab
