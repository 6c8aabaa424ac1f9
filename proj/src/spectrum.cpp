#include "porestab/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace porestab {

double eigen_residual(const SpMat& a, const Complex& lambda, const CVec& v) {
  const double nv = v.norm();
  if (nv == 0.0) return std::numeric_limits<double>::infinity();
  return (apply_sparse(a, v) - lambda * v).norm() / nv;
}

bool conjugate_symmetric(const std::vector<Eigenpair>& pairs, double tol) {
  for (const auto& p : pairs) {
    if (std::abs(p.lambda.imag()) <= tol) continue;
    const Complex want = std::conj(p.lambda);
    bool found = false;
    for (const auto& q : pairs) {
      if (std::abs(q.lambda - want) <= tol * std::max(1.0, std::abs(want))) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

namespace {

double target_key(const Complex& lambda, SpectrumTarget which) {
  return which == SpectrumTarget::smallest_real ? lambda.real() : std::abs(lambda);
}

void sort_by_real(std::vector<Eigenpair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
}

/// Picks the k best by target order and pulls in any conjugate partner that
/// straddles the cut, so the reported set stays conjugate-closed.
std::vector<Eigenpair> select_k(std::vector<Eigenpair> all, int k, SpectrumTarget which) {
  std::sort(all.begin(), all.end(), [&](const Eigenpair& a, const Eigenpair& b) {
    const double ka = target_key(a.lambda, which), kb = target_key(b.lambda, which);
    if (ka != kb) return ka < kb;
    return a.lambda.imag() < b.lambda.imag();
  });
  size_t take = std::min<size_t>(k, all.size());
  while (take < all.size()) {
    bool grew = false;
    for (size_t i = 0; i < take; ++i) {
      if (std::abs(all[i].lambda.imag()) < 1e-14) continue;
      const Complex want = std::conj(all[i].lambda);
      bool inside = false;
      for (size_t j = 0; j < take; ++j) {
        if (i != j && std::abs(all[j].lambda - want) <= 1e-10 * std::max(1.0, std::abs(want))) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        for (size_t j = take; j < all.size(); ++j) {
          if (std::abs(all[j].lambda - want) <= 1e-10 * std::max(1.0, std::abs(want))) {
            std::swap(all[j], all[take]);
            ++take;
            grew = true;
            break;
          }
        }
        if (grew) break;
      }
    }
    if (!grew) break;
  }
  all.resize(take);
  sort_by_real(all);
  return all;
}

std::vector<Eigenpair> dense_spectrum(const SpMat& a, const SpectrumOptions& opts) {
  const int n = static_cast<int>(a.rows());
  if (n > 6000) throw ValidationError("compute_spectrum: dense path requires <= 6000 unknowns");
  Mat d(a);
  std::vector<double> wr(n), wi(n), vr(static_cast<size_t>(n) * n);
  const int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, d.data(), n, wr.data(), wi.data(),
                                 nullptr, n, vr.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "dense eigensolve (dgeev) failed with info=" << info;
    throw NumericalError(os.str());
  }
  std::vector<Eigenpair> out;
  out.reserve(n);
  for (int j = 0; j < n; ++j) {
    Eigenpair p;
    p.lambda = Complex(wr[j], wi[j]);
    p.vec.resize(n);
    if (wi[j] == 0.0) {
      for (int i = 0; i < n; ++i) p.vec[i] = Complex(vr[i + static_cast<size_t>(j) * n], 0.0);
    } else if (wi[j] > 0.0) {
      for (int i = 0; i < n; ++i)
        p.vec[i] = Complex(vr[i + static_cast<size_t>(j) * n],
                           vr[i + static_cast<size_t>(j + 1) * n]);
    } else {
      for (int i = 0; i < n; ++i)
        p.vec[i] = Complex(vr[i + static_cast<size_t>(j - 1) * n],
                           -vr[i + static_cast<size_t>(j) * n]);
    }
    p.vec.normalize();
    p.residual = eigen_residual(a, p.lambda, p.vec);
    out.push_back(std::move(p));
  }
  return out;
}

struct ArnoldiDiagnostics {
  int subspace = 0;
  int converged = 0;
  double worst_selected_residual = 0.0;
  double sigma = 0.0;
};

std::vector<Eigenpair> arnoldi_spectrum(const SpMat& a, const SpectrumOptions& opts,
                                        ArnoldiDiagnostics& diag) {
  const int n = static_cast<int>(a.rows());
  double scale = 0.0;
  for (int outer = 0; outer < a.outerSize(); ++outer) {
    for (SpMat::InnerIterator it(a, outer); it; ++it) {
      if (it.row() == it.col()) scale = std::max(scale, std::abs(it.value()));
    }
  }
  scale = std::max(scale, 1.0);

  double sigma = -1e-6 * scale;
  SpMat shifted = a;
  Eigen::SparseLU<SpMat> lu;
  for (int attempt = 0;; ++attempt) {
    shifted = a;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    lu.compute(shifted);
    if (lu.info() == Eigen::Success) break;
    if (attempt >= 3) throw NumericalError("shift-invert factorization failed repeatedly");
    sigma *= 10.0;
  }
  diag.sigma = sigma;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> dist;
  Vec v0(n);
  for (int i = 0; i < n; ++i) v0[i] = dist(rng);
  v0.normalize();

  int m = std::min({std::max(2 * opts.k + 20, 80), n, std::max(opts.max_subspace, opts.k + 2)});
  std::vector<Eigenpair> converged;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Mat v(n, m + 1);
    Mat h = Mat::Zero(m + 1, m);
    v.col(0) = v0;
    int built = m;
    for (int j = 0; j < m; ++j) {
      Vec w = lu.solve(v.col(j));
      for (int pass = 0; pass < 2; ++pass) { // modified Gram-Schmidt, re-orthogonalized
        for (int i = 0; i <= j; ++i) {
          const double hij = v.col(i).dot(w);
          if (pass == 0)
            h(i, j) = hij;
          else
            h(i, j) += hij;
          w -= hij * v.col(i);
        }
      }
      const double beta = w.norm();
      h(j + 1, j) = beta;
      if (beta < 1e-13) { // invariant subspace found
        built = j + 1;
        break;
      }
      v.col(j + 1) = w / beta;
    }

    const Mat hm = h.topLeftCorner(built, built);
    Eigen::EigenSolver<Mat> es(hm, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw NumericalError("Arnoldi Hessenberg eigensolve failed");

    converged.clear();
    for (int j = 0; j < built; ++j) {
      const Complex theta = es.eigenvalues()[j];
      if (std::abs(theta) < 1e-300) continue;
      Eigenpair p;
      p.lambda = sigma + 1.0 / theta;
      const CVec y = es.eigenvectors().col(j);
      CVec x(n);
      x.real() = v.leftCols(built) * y.real();
      x.imag() = v.leftCols(built) * y.imag();
      const double nx = x.norm();
      if (nx == 0.0) continue;
      p.vec = x / nx;
      p.residual = eigen_residual(a, p.lambda, p.vec);
      if (p.residual <= opts.residual_tol) converged.push_back(std::move(p));
    }
    diag.subspace = built;
    diag.converged = static_cast<int>(converged.size());
    if (static_cast<int>(converged.size()) >= std::min(n, opts.k + 4) ||
        (built < m && static_cast<int>(converged.size()) >= opts.k)) {
      break;
    }
    if (m >= n) break;
    m = std::min(n, m + m / 2 + 20);
  }

  // near-duplicate Ritz values collapse to one representative
  std::vector<Eigenpair> unique;
  for (auto& p : converged) {
    bool dup = false;
    for (const auto& q : unique) {
      if (std::abs(p.lambda - q.lambda) <= 1e-9 * std::max(1.0, std::abs(q.lambda)) &&
          std::abs((p.vec.adjoint() * q.vec)(0, 0)) > 1.0 - 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(std::move(p));
  }
  return unique;
}

std::vector<Eigenpair> spectrum_impl(const SpMat& a, const SpectrumOptions& opts) {
  const int n = static_cast<int>(a.rows());
  if (opts.k < 1) throw ValidationError("compute_spectrum: k must be >= 1");
  if (opts.k > n) throw ValidationError("compute_spectrum: k exceeds the problem size");

  if (n <= opts.dense_threshold && n <= 6000) {
    auto all = dense_spectrum(a, opts);
    auto sel = select_k(std::move(all), opts.k, opts.which);
    for (const auto& p : sel) {
      if (p.residual > opts.residual_tol) {
        std::ostringstream os;
        os << "dense eigenpair residual " << p.residual << " exceeds tolerance "
           << opts.residual_tol << " for lambda=(" << p.lambda.real() << "," << p.lambda.imag()
           << ")";
        throw NumericalError(os.str());
      }
    }
    return sel;
  }

  ArnoldiDiagnostics diag;
  auto conv = arnoldi_spectrum(a, opts, diag);
  if (static_cast<int>(conv.size()) < opts.k) {
    std::ostringstream os;
    os << "shift-invert Arnoldi converged only " << conv.size() << " of " << opts.k
       << " requested eigenpairs (subspace " << diag.subspace << ", sigma " << diag.sigma
       << ", residual tol " << opts.residual_tol << ")";
    throw NumericalError(os.str());
  }
  return select_k(std::move(conv), opts.k, opts.which);
}

} // namespace

std::vector<Eigenpair> compute_spectrum(const LinearizedOperator& op, const SpectrumOptions& opts) {
  return spectrum_impl(op.a0, opts);
}

std::vector<Eigenpair> compute_spectrum_matrix(const SpMat& a, const SpectrumOptions& opts) {
  return spectrum_impl(a, opts);
}

} // namespace porestab
