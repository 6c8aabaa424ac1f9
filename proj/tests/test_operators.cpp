#include "porestab/operators.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace porestab;

namespace {

std::shared_ptr<const CylinderMesh> tiny_mesh(double R = 1.0, double h = 1.0, int nr = 3,
                                              int nth = 4, int nz = 3) {
  return std::make_shared<CylinderMesh>(build_mesh({R, h}, nr, nth, nz));
}

Vec random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

CVec random_cstate(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(d(rng), d(rng));
  return v;
}

/// Independent matrix-free evaluation of the A0 action: per-cell outward flux
/// sums written directly from the flux closures, no assembled matrix involved.
Vec reference_apply(const CylinderMesh& m, const SpeciesSystem& sys, const VelocityField& vel,
                    const SurfaceLinearization& lin, const Vec& x) {
  const int N = sys.n_species;
  const int nb = m.n_bulk(), ns = m.n_surface();
  const int nr = m.n_r(), nth = m.n_theta(), nz = m.n_z();
  auto bulk_at = [&](int s, int i, int j, int k) { return x[s * nb + m.bulk_index(i, j, k)]; };
  auto surf_at = [&](int s, int j, int k) { return x[N * nb + s * ns + m.surface_index(j, k)]; };

  Vec out = Vec::Zero(x.size());
  for (int s = 0; s < N; ++s) {
    const double d = sys.d_bulk[s], ds = sys.d_surf[s];
    const double kad = sys.k_ad[s], kde = sys.k_de[s];
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nth; ++j) {
        for (int i = 0; i < nr; ++i) {
          double flux = 0.0;
          const double c = bulk_at(s, i, j, k);
          // radial faces
          if (i > 0) flux += -d * (bulk_at(s, i - 1, j, k) - c) / m.dr() * m.radial_face_area(i - 1);
          if (i + 1 < nr) flux += -d * (bulk_at(s, i + 1, j, k) - c) / m.dr() * m.radial_face_area(i);
          if (i == nr - 1) {
            const double trace = 1.5 * c - 0.5 * bulk_at(s, nr - 2, j, k);
            flux += (kad * trace - kde * surf_at(s, j, k)) * m.surface_cell_area();
          }
          // angular faces (periodic)
          const int jm = (j + nth - 1) % nth, jp = (j + 1) % nth;
          flux += -d * (bulk_at(s, i, jm, k) - c) / (m.r_center(i) * m.dtheta()) *
                  m.angular_face_area();
          flux += -d * (bulk_at(s, i, jp, k) - c) / (m.r_center(i) * m.dtheta()) *
                  m.angular_face_area();
          // axial faces: diffusion + upwind advection
          const double az = m.axial_face_area(i);
          const double w = vel.w[i];
          if (k > 0) {
            flux += -d * (bulk_at(s, i, j, k - 1) - c) / m.dz() * az;
            flux += -w * bulk_at(s, i, j, k - 1) * az; // inflow from below, upwind
          }
          if (k + 1 < nz) {
            flux += -d * (bulk_at(s, i, j, k + 1) - c) / m.dz() * az;
            flux += w * c * az; // outflow to the cell above, upwind
          } else {
            flux += w * c * az; // Gamma_out
          }
          // Gamma_in carries zero total flux for the deviation system
          out[s * nb + m.bulk_index(i, j, k)] = flux / m.cell_volume(i);
        }
      }
    }
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nth; ++j) {
        double acc = 0.0;
        const double cs = surf_at(s, j, k);
        // -dS Laplace_Beltrami
        const int jm = (j + nth - 1) % nth, jp = (j + 1) % nth;
        double flux = 0.0;
        flux += -ds * (surf_at(s, jm, k) - cs) / (m.radius() * m.dtheta()) * m.dz();
        flux += -ds * (surf_at(s, jp, k) - cs) / (m.radius() * m.dtheta()) * m.dz();
        if (k > 0) flux += -ds * (surf_at(s, j, k - 1) - cs) / m.dz() * (m.radius() * m.dtheta());
        if (k + 1 < nz)
          flux += -ds * (surf_at(s, j, k + 1) - cs) / m.dz() * (m.radius() * m.dtheta());
        acc += flux / m.surface_cell_area();
        // -K_ad Tr + K_de
        const double trace =
            1.5 * bulk_at(s, nr - 1, j, k) - 0.5 * bulk_at(s, nr - 2, j, k);
        acc += -kad * trace + kde * cs;
        // -M_tilde
        const Mat mt = lin.m_tilde(lin.constant() ? 0 : m.surface_index(j, k));
        for (int t = 0; t < N; ++t) acc -= mt(s, t) * surf_at(t, j, k);
        out[N * nb + s * ns + m.surface_index(j, k)] = acc;
      }
    }
  }
  return out;
}

} // namespace

TEST_CASE("A0 action matches the matrix-free reference") {
  std::mt19937_64 rng(2024);
  auto mesh = tiny_mesh(1.2, 0.9, 4, 5, 4);
  const SpeciesSystem sys = test::random_system(rng, 3, false);
  const VelocityField vel = build_velocity(*mesh, 0.8, VelocityProfile::poiseuille);
  const SurfaceLinearization lin = linearize_reaction(sys, test::random_positive(rng, 3));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, lin);

  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = random_state(rng, op.size());
    const Vec got = apply_A0(op, x);
    const Vec want = reference_apply(*mesh, sys, vel, lin, x);
    const double scale = want.cwiseAbs().maxCoeff() + 1.0;
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("discrete equilibrium: sorption-matched constants are in the kernel") {
  std::mt19937_64 rng(11);
  auto mesh = tiny_mesh();
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField vel = build_velocity(*mesh, 0.0, VelocityProfile::poiseuille);
  const SurfaceLinearization zero_lin = make_linearization(sys.alpha - sys.beta, Vec::Zero(2));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, zero_lin);

  Vec xi = test::random_positive(rng, 2);
  Vec psi = sys.k_de.cwiseQuotient(sys.k_ad).cwiseProduct(xi);
  const Vec v = constant_pair_vector(op, psi, xi);
  CHECK(apply_A0(op, v).cwiseAbs().maxCoeff() <= 1e-10 * xi.maxCoeff());
}

TEST_CASE("non-matched constant pair leaves the sorption mismatch in surface rows") {
  std::mt19937_64 rng(12);
  auto mesh = tiny_mesh();
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField vel = build_velocity(*mesh, 0.0, VelocityProfile::plug);
  const SurfaceLinearization zero_lin = make_linearization(sys.alpha - sys.beta, Vec::Zero(2));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, zero_lin);

  Vec xi = test::random_positive(rng, 2);
  Vec psi = test::random_positive(rng, 2); // not sorption-matched
  const Vec r = apply_A0(op, constant_pair_vector(op, psi, xi));
  for (int s = 0; s < 2; ++s) {
    const double want = -sys.k_ad[s] * psi[s] + sys.k_de[s] * xi[s];
    for (int p = 0; p < mesh->n_surface(); ++p) {
      CHECK(r[op.surf_offset(s) + p] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("with nonzero inflow the constant pair is not in the kernel") {
  std::mt19937_64 rng(13);
  auto mesh = tiny_mesh();
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField vel = build_velocity(*mesh, 1.0, VelocityProfile::poiseuille);
  const SurfaceLinearization zero_lin = make_linearization(sys.alpha - sys.beta, Vec::Zero(2));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, zero_lin);

  Vec xi = test::random_positive(rng, 2);
  Vec psi = sys.k_de.cwiseQuotient(sys.k_ad).cwiseProduct(xi);
  const Vec r = apply_A0(op, constant_pair_vector(op, psi, xi));
  CHECK(r.cwiseAbs().maxCoeff() > 1e-3 * xi.maxCoeff());
}

TEST_CASE("apply_A0: linearity, basis columns and the dense oracle") {
  std::mt19937_64 rng(14);
  auto mesh = tiny_mesh();
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField vel = build_velocity(*mesh, 0.7, VelocityProfile::poiseuille);
  const SurfaceLinearization lin = linearize_reaction(sys, test::random_positive(rng, 2));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, lin);

  CHECK(apply_A0(op, Vec(Vec::Zero(op.size()))).cwiseAbs().maxCoeff() == 0.0);

  const Mat dense = dense_matrix(op);
  for (int c : {0, op.size() / 2, op.size() - 1}) {
    Vec e = Vec::Zero(op.size());
    e[c] = 1.0;
    CHECK((apply_A0(op, e) - dense.col(c)).cwiseAbs().maxCoeff() <= 1e-13 * dense.cwiseAbs().maxCoeff());
  }

  const Vec x = random_state(rng, op.size());
  const Vec twice = apply_A0(op, apply_A0(op, x));
  const Vec squared = (dense * dense) * x;
  CHECK((twice - squared).cwiseAbs().maxCoeff() <=
        1e-10 * (squared.cwiseAbs().maxCoeff() + 1.0));

  Vec bad(op.size() + 1);
  bad.setZero();
  CHECK_THROWS_AS(apply_A0(op, bad), ValidationError);
}

TEST_CASE("stencil sparsity: 7-point bulk, 5-point surface plus couplings") {
  std::mt19937_64 rng(15);
  auto mesh = tiny_mesh(1.0, 1.0, 4, 6, 5);
  const int N = 3;
  const SpeciesSystem sys = test::random_system(rng, N, false);
  const VelocityField vel = build_velocity(*mesh, 1.0, VelocityProfile::poiseuille);
  const SurfaceLinearization lin = linearize_reaction(sys, test::random_positive(rng, N));
  const LinearizedOperator op = assemble_A0(mesh, sys, vel, lin);

  SpMat byrow = op.a0.transpose(); // column-major: iterate rows cheaply
  for (int r = 0; r < op.n_bulk_unknowns; ++r) {
    int nnz = 0;
    for (SpMat::InnerIterator it(byrow, r); it; ++it) ++nnz;
    CHECK(nnz <= 8); // 7-point stencil plus the wall coupling entry
  }
  for (int r = op.n_bulk_unknowns; r < op.size(); ++r) {
    int nnz = 0;
    for (SpMat::InnerIterator it(byrow, r); it; ++it) ++nnz;
    CHECK(nnz <= 5 + 2 + N); // 5-point stencil, trace pair, species couplings
  }
}

TEST_CASE("pure-diffusion bulk block is volume-weighted symmetric") {
  auto mesh = tiny_mesh(1.1, 1.4, 4, 5, 4);
  const SpMat d = bulk_diffusion_neumann(*mesh, 0.8);
  Vec vols(mesh->n_bulk());
  for (int k = 0; k < mesh->n_z(); ++k)
    for (int j = 0; j < mesh->n_theta(); ++j)
      for (int i = 0; i < mesh->n_r(); ++i)
        vols[mesh->bulk_index(i, j, k)] = mesh->cell_volume(i);
  const Mat wd = vols.asDiagonal() * Mat(d);
  const double scale = wd.cwiseAbs().maxCoeff();
  CHECK((wd - wd.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale);

  // zero-flux closures keep constants in the kernel
  CHECK((d * Vec::Ones(mesh->n_bulk())).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("upwind advection is dissipative against its boundary terms") {
  std::mt19937_64 rng(16);
  auto mesh = tiny_mesh(1.0, 2.0, 4, 5, 6);
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  for (auto profile : {VelocityProfile::poiseuille, VelocityProfile::plug}) {
    const VelocityField vel = build_velocity(*mesh, 1.3, profile);
    const SurfaceLinearization zero_lin = make_linearization(sys.alpha - sys.beta, Vec::Zero(2));
    const LinearizedOperator op = assemble_A0(mesh, sys, vel, zero_lin);
    for (int trial = 0; trial < 8; ++trial) {
      const CVec x = random_cstate(rng, op.size());
      const CVec ax = apply_sparse(op.adv, x);
      Complex q{0.0, 0.0};
      double bnd = 0.0; // -1/2 (u.nu)|c|^2 on Gamma_in + 1/2 (u.nu)|c|^2 on Gamma_out
      for (int s = 0; s < 2; ++s) {
        for (int k = 0; k < mesh->n_z(); ++k)
          for (int j = 0; j < mesh->n_theta(); ++j)
            for (int i = 0; i < mesh->n_r(); ++i) {
              const int c = op.bulk_offset(s) + mesh->bulk_index(i, j, k);
              q += ax[c] * std::conj(x[c]) * mesh->cell_volume(i);
            }
        for (int j = 0; j < mesh->n_theta(); ++j) {
          for (int i = 0; i < mesh->n_r(); ++i) {
            const double az = mesh->axial_face_area(i);
            const int c0 = op.bulk_offset(s) + mesh->bulk_index(i, j, 0);
            const int ct = op.bulk_offset(s) + mesh->bulk_index(i, j, mesh->n_z() - 1);
            bnd += 0.5 * vel.w[i] * std::norm(x[c0]) * az; // -(u.nu) = +w on Gamma_in
            bnd -= 0.5 * vel.w[i] * std::norm(x[ct]) * az; // +(u.nu) = +w on Gamma_out
          }
        }
      }
      CHECK(q.real() + bnd >= -1e-10 * (std::abs(q) + std::abs(bnd) + 1.0));
    }
  }
}

TEST_CASE("energy forms: zero state, quadratic homogeneity, dissipative case") {
  std::mt19937_64 rng(17);
  auto mesh = tiny_mesh(0.9, 1.3, 4, 5, 4);
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField still = build_velocity(*mesh, 0.0, VelocityProfile::plug);
  const SurfaceLinearization zero_lin = make_linearization(sys.alpha - sys.beta, Vec::Zero(2));
  const LinearizedOperator op = assemble_A0(mesh, sys, still, zero_lin);

  const EnergyForms z = energy_forms(op, CVec::Zero(op.size()));
  CHECK(std::abs(z.f_omega) == 0.0);
  CHECK(std::abs(z.f_sigma) == 0.0);
  CHECK(z.norm_bulk == 0.0);
  CHECK(z.norm_surf == 0.0);

  // M=0, velocity=0: every displayed term is a square or sign-definite, so
  // Re F_Omega + Re F_Sigma >= 0 on arbitrary states
  for (int trial = 0; trial < 12; ++trial) {
    const CVec x = random_cstate(rng, op.size());
    const EnergyForms ef = energy_forms(op, x);
    const double scale = std::abs(ef.f_omega) + std::abs(ef.f_sigma) + 1.0;
    CHECK((ef.f_omega + ef.f_sigma).real() >= -1e-10 * scale);

    const Complex alpha{2.0, 0.5};
    const EnergyForms es = energy_forms(op, (alpha * x).eval());
    const double a2 = std::norm(alpha);
    CHECK(std::abs(es.f_omega - a2 * ef.f_omega) <= 1e-10 * a2 * scale);
    CHECK(std::abs(es.f_sigma - a2 * ef.f_sigma) <= 1e-10 * a2 * scale);
    CHECK(es.norm_bulk == doctest::Approx(a2 * ef.norm_bulk));
  }
}

TEST_CASE("triplet export carries every stored entry") {
  std::mt19937_64 rng(18);
  auto mesh = tiny_mesh();
  const SpeciesSystem sys = test::random_system(rng, 2, false);
  const VelocityField vel = build_velocity(*mesh, 0.5, VelocityProfile::poiseuille);
  const LinearizedOperator op =
      assemble_A0(mesh, sys, vel, linearize_reaction(sys, test::random_positive(rng, 2)));
  std::ostringstream os;
  write_triplets(op, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header.find("porestab-operator v1") != std::string::npos);
  long lines = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == static_cast<long>(op.a0.nonZeros()));
}

TEST_CASE("velocity profiles and matched inflow") {
  auto mesh = tiny_mesh(2.0, 1.0, 8, 4, 3);
  SUBCASE("poiseuille endpoints and divergence") {
    const VelocityField vel = build_velocity(*mesh, 2.0, VelocityProfile::poiseuille);
    CHECK(vel.w[0] == doctest::Approx(2.0 * (1.0 - std::pow(mesh->r_center(0) / 2.0, 2))));
    CHECK(vel.w[mesh->n_r() - 1] < vel.w[0]);
    CHECK(max_divergence_residual(*mesh, vel) <= 1e-12);
    CHECK(vel.nontrivial_inflow());
  }
  SUBCASE("w_max = 0 flags (A_vel_in) violated") {
    const VelocityField vel = build_velocity(*mesh, 0.0, VelocityProfile::plug);
    CHECK(!vel.nontrivial_inflow());
    CHECK(vel.w.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("negative w_max is a configuration error") {
    CHECK_THROWS_AS(build_velocity(*mesh, -1.0, VelocityProfile::plug), ValidationError);
  }
  SUBCASE("matched inflow: sign, zero-flow and k_ad = k_de cases") {
    std::mt19937_64 rng(19);
    const SpeciesSystem sys = test::ab_system(1.0, 1.0, 1.0);
    const EquilibriumPair eq = test::ab_equilibrium(sys);
    const VelocityField vel = build_velocity(*mesh, 1.5, VelocityProfile::poiseuille);
    const InflowField g = matched_inflow(*mesh, sys, eq, vel);
    for (int j = 0; j < mesh->n_theta(); ++j) {
      for (int i = 0; i < mesh->n_r(); ++i) {
        const double want = eq.xi[0] * (-vel.w[i]); // k_ad = k_de
        CHECK(g.values(mesh->inflow_face_index(i, j), 0) == doctest::Approx(want));
        CHECK(g.values(mesh->inflow_face_index(i, j), 0) <= 0.0);
      }
    }
    const VelocityField still = build_velocity(*mesh, 0.0, VelocityProfile::plug);
    const InflowField g0 = matched_inflow(*mesh, sys, eq, still);
    CHECK(g0.values.cwiseAbs().maxCoeff() == 0.0);

    EquilibriumPair bad = eq;
    bad.xi[1] = 0.0;
    CHECK_THROWS_AS(matched_inflow(*mesh, sys, bad, vel), ValidationError);
  }
}
