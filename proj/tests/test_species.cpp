#include "porestab/species.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

using namespace porestab;

namespace {

Vec make2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SpeciesSystem ab_unit() {
  return make_species_system(2, make2(1, 0), make2(0, 1), 1.0, 1.0, make2(1, 1), make2(1, 1),
                             make2(1, 1), make2(1, 1));
}

/// Independent oracle: sorted eigenvalues of a dense symmetric matrix.
Vec dense_sym_spectrum_desc(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  Vec ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  return ev;
}

/// Independent oracle: sorted real parts of a dense general eigensolve; the
/// imaginary parts must vanish for the matrices this is used on.
Vec dense_gen_spectrum_desc(const Mat& m, double imag_tol) {
  Eigen::EigenSolver<Mat> es(m);
  Vec ev(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    REQUIRE(std::abs(es.eigenvalues()[i].imag()) <= imag_tol);
    ev[i] = es.eigenvalues()[i].real();
  }
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  return ev;
}

} // namespace

TEST_CASE("reaction_rate: balanced monomials cancel") {
  const Vec r = reaction_rate(ab_unit(), make2(1, 1));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
}

TEST_CASE("reaction_rate: direct scalar evaluation") {
  // c = (2,1): c^beta = 1, c^alpha = 2, so r = (alpha-beta) * (1 - 2)
  const Vec r = reaction_rate(ab_unit(), make2(2, 1));
  CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("reaction_rate: zero at any chemical-balance equilibrium") {
  std::mt19937_64 rng(7101);
  for (int trial = 0; trial < 30; ++trial) {
    const SpeciesSystem sys = test::random_system(rng, 2 + trial % 4, true);
    const EquilibriumPair eq = equilibrium_chemical_balance(sys);
    const Vec r = reaction_rate(sys, eq.xi);
    const double scale = sys.kappa_f * monomial(eq.xi, sys.alpha) + 1.0;
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-12 * scale);
    // sorption also closes at the matched pair
    const Vec srt = sorption_rate(sys, eq.psi, eq.xi);
    CHECK(srt.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reaction_rate: negative concentration names the species") {
  CHECK_THROWS_WITH_AS(reaction_rate(ab_unit(), make2(1, -0.5)), doctest::Contains("species 1"),
                       ValidationError);
}

TEST_CASE("sorption_rate examples") {
  const SpeciesSystem sys = ab_unit();
  CHECK(sorption_rate(sys, make2(1, 2), make2(1, 2)).cwiseAbs().maxCoeff() == 0.0);

  const SpeciesSystem sys2 = make_species_system(2, make2(1, 0), make2(0, 1), 1.0, 1.0,
                                                 make2(2, 3), make2(1, 1), make2(1, 1),
                                                 make2(1, 1));
  const Vec r = sorption_rate(sys2, make2(1, 1), make2(1, 1));
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));

  // c_surf = (k_ad/k_de) c_bulk kills the rate componentwise
  std::mt19937_64 rng(42);
  const SpeciesSystem sys3 = test::random_system(rng, 4, false);
  const Vec cb = test::random_positive(rng, 4);
  const Vec cs = sys3.k_ad.cwiseQuotient(sys3.k_de).cwiseProduct(cb);
  CHECK(sorption_rate(sys3, cb, cs).cwiseAbs().maxCoeff() <= 1e-14);

  Vec short_vec(1);
  short_vec << 1.0;
  CHECK_THROWS_AS(sorption_rate(sys, short_vec, make2(1, 1)), ValidationError);
}

TEST_CASE("equilibrium_chemical_balance: gamma closed form") {
  SUBCASE("kappa_f == kappa_b gives gamma = 1") {
    const SpeciesSystem sys = make_species_system(2, make2(2, 0), make2(0, 1), 3.0, 3.0,
                                                  make2(1, 2), make2(2, 1), make2(1, 1),
                                                  make2(1, 1));
    const EquilibriumPair eq = equilibrium_chemical_balance(sys);
    CHECK(eq.xi[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eq.xi[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eq.psi[0] == doctest::Approx(2.0));
    CHECK(eq.psi[1] == doctest::Approx(0.5));
  }
  SUBCASE("2A <-> B with kappa_b/kappa_f = 8 gives gamma = 8") {
    const SpeciesSystem sys = make_species_system(2, make2(2, 0), make2(0, 1), 1.0, 8.0,
                                                  make2(1, 1), make2(1, 1), make2(1, 1),
                                                  make2(1, 1));
    const EquilibriumPair eq = equilibrium_chemical_balance(sys);
    CHECK(eq.xi[0] == doctest::Approx(8.0).epsilon(1e-14));
    const Vec r = reaction_rate(sys, eq.xi);
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-12 * sys.kappa_f * monomial(eq.xi, sys.alpha));
  }
  SUBCASE("|alpha| == |beta| is refused") {
    CHECK_THROWS_AS(equilibrium_chemical_balance(ab_unit()), ValidationError);
  }
}

TEST_CASE("linearize_reaction: hand evaluation for A<->B") {
  const SurfaceLinearization lin = linearize_reaction(ab_unit(), make2(1, 1));
  CHECK(lin.a[0] == 1.0);
  CHECK(lin.a[1] == -1.0);
  CHECK(lin.b(0, 0) == doctest::Approx(-1.0));
  CHECK(lin.b(0, 1) == doctest::Approx(1.0));
  CHECK(lin.a.dot(lin.b.row(0).transpose()) == doctest::Approx(-2.0));

  // symmetric part spectrum {0, -2}: both the closed form and the dense oracle
  const Vec closed = symmetric_part_spectrum(lin);
  const Vec oracle = dense_sym_spectrum_desc(lin.s_sym());
  CHECK(closed[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(closed[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK((closed - oracle).cwiseAbs().maxCoeff() <= 1e-12 * 2.0);
}

TEST_CASE("linearize_reaction: alpha == beta gives the zero matrix") {
  const SpeciesSystem sys = make_species_system(2, make2(1, 1), make2(1, 1), 1.0, 2.0,
                                                make2(1, 1), make2(1, 1), make2(1, 1),
                                                make2(1, 1));
  const SurfaceLinearization lin = linearize_reaction(sys, make2(1.5, 0.5));
  CHECK(lin.m_tilde().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("monomial: 0^0 = 1 and singular negative powers are rejected") {
  CHECK(monomial(make2(0, 2), make2(0, 1)) == 2.0);
  CHECK_THROWS_WITH_AS(monomial(make2(0, 2), make2(-0.5, 1)), doctest::Contains("species 0"),
                       ValidationError);
}

TEST_CASE("symmetric_part_spectrum: dependent case against the dense oracle") {
  // b = -a: true spectrum {0, -|a|^2}, all nonpositive with top eigenvalue 0
  const SurfaceLinearization lin = make_linearization(make2(1, -1), make2(-1, 1));
  const Vec closed = symmetric_part_spectrum(lin);
  const Vec oracle = dense_sym_spectrum_desc(lin.s_sym());
  CHECK((closed - oracle).cwiseAbs().maxCoeff() <= 1e-12 * 2.0);
  CHECK(closed[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(closed[closed.size() - 1] <= 0.0);
}

TEST_CASE("symmetric_part_spectrum: orthogonal unit vectors give {1/2, -1/2}") {
  const SurfaceLinearization lin = make_linearization(make2(1, 0), make2(0, 1));
  const Vec closed = symmetric_part_spectrum(lin);
  CHECK(closed[0] == doctest::Approx(0.5));
  CHECK(closed[1] == doctest::Approx(-0.5));
}

TEST_CASE("symmetric part is negative semidefinite at chemical balance") {
  std::mt19937_64 rng(9001);
  for (int trial = 0; trial < 25; ++trial) {
    const SpeciesSystem sys = test::random_system(rng, 2 + trial % 4, true);
    const EquilibriumPair eq = equilibrium_chemical_balance(sys);
    const SurfaceLinearization lin = linearize_reaction(sys, eq.xi);
    const Vec ev = symmetric_part_spectrum(lin);
    const double scale = lin.a.norm() * lin.b.row(0).norm() + 1.0;
    CHECK(ev[0] <= 1e-12 * scale);
  }
}

TEST_CASE("rank-one structure: closed forms match dense eigensolves") {
  std::mt19937_64 rng(1337);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const SpeciesSystem sys = test::random_system(rng, n, false);
    const Vec c_star = test::random_positive(rng, n);
    const SurfaceLinearization lin = linearize_reaction(sys, c_star);
    const double scale = std::max(1e-300, lin.a.norm() * lin.b.row(0).norm());

    const Vec s_closed = symmetric_part_spectrum(lin);
    const Vec s_oracle = dense_sym_spectrum_desc(lin.s_sym());
    CHECK((s_closed - s_oracle).cwiseAbs().maxCoeff() <= 1e-12 * scale);

    const Vec m_closed = m_tilde_spectrum(lin);
    const Vec m_oracle = dense_gen_spectrum_desc(lin.m_tilde(), 1e-12 * scale);
    CHECK((m_closed - m_oracle).cwiseAbs().maxCoeff() <= 1e-12 * scale);

    Eigen::FullPivLU<Mat> lu(lin.m_tilde());
    CHECK(lu.rank() <= 1);
  }
}

TEST_CASE("stoichiometric proportionality r_i a_j = r_j a_i") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const SpeciesSystem sys = test::random_system(rng, n, false);
    const Vec c = test::random_positive(rng, n, 0.1, 3.0);
    const Vec r = reaction_rate(sys, c);
    const Vec a = sys.alpha - sys.beta;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double lhs = r[i] * a[j];
        const double rhs = r[j] * a[i];
        CHECK(std::abs(lhs - rhs) <= 1e-14 * (std::abs(lhs) + std::abs(rhs) + 1e-300));
      }
    }
  }
}

TEST_CASE("weighted antiparallelism at chemical balance") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    const SpeciesSystem sys = test::random_system(rng, 2 + trial % 4, true);
    const EquilibriumPair eq = equilibrium_chemical_balance(sys);
    const SurfaceLinearization lin = linearize_reaction(sys, eq.xi);
    const double factor = -sys.kappa_f * monomial(eq.xi, sys.alpha);
    for (int i = 0; i < sys.n_species; ++i) {
      const double lhs = eq.xi[i] * lin.b(0, i);
      const double rhs = factor * lin.a[i];
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(rhs) + std::abs(factor)));
    }
  }
}

TEST_CASE("monomial scaling is log-linear on positive inputs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const SpeciesSystem sys = test::random_system(rng, n, false);
    const Vec c = test::random_positive(rng, n, 0.2, 2.5);
    std::uniform_real_distribution<double> td(0.1, 5.0);
    const double t = td(rng);
    const double lhs = monomial(t * c, sys.alpha);
    const double rhs = std::pow(t, sys.alpha_sum()) * monomial(c, sys.alpha);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("make_species_system rejects bad fields by name") {
  CHECK_THROWS_WITH_AS(make_species_system(2, make2(0.5, 1), make2(0, 1), 1, 1, make2(1, 1),
                                           make2(1, 1), make2(1, 1), make2(1, 1)),
                       doctest::Contains("alpha"), ValidationError);
  CHECK_THROWS_WITH_AS(make_species_system(2, make2(0, 0), make2(0, 1), 1, 1, make2(1, 1),
                                           make2(1, 1), make2(1, 1), make2(1, 1)),
                       doctest::Contains("alpha"), ValidationError);
  CHECK_THROWS_WITH_AS(make_species_system(2, make2(1, 0), make2(0, 1), -1, 1, make2(1, 1),
                                           make2(1, 1), make2(1, 1), make2(1, 1)),
                       doctest::Contains("kappa_f"), ValidationError);
  CHECK_THROWS_WITH_AS(make_species_system(2, make2(1, 0), make2(0, 1), 1, 1, make2(0, 1),
                                           make2(1, 1), make2(1, 1), make2(1, 1)),
                       doctest::Contains("k_ad"), ValidationError);
}
