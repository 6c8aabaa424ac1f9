#include "porestab/mesh.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

namespace porestab {

CylinderMesh::CylinderMesh(CylinderSpec spec, int n_r, int n_theta, int n_z)
    : spec_(spec), nr_(n_r), nth_(n_theta), nz_(n_z) {
  dr_ = spec_.radius / nr_;
  dth_ = 2.0 * std::numbers::pi / nth_;
  dz_ = spec_.height / nz_;
}

double CylinderMesh::total_volume() const {
  double v = 0.0;
  for (int i = 0; i < nr_; ++i) v += cell_volume(i);
  return v * nth_ * nz_;
}

double CylinderMesh::total_surface_area() const {
  return surface_cell_area() * n_surface();
}

CylinderMesh build_mesh(const CylinderSpec& spec, int n_r, int n_theta, int n_z) {
  if (!(spec.radius > 0.0)) throw ValidationError("field 'radius' must be > 0");
  if (!(spec.height > 0.0)) throw ValidationError("field 'height' must be > 0");
  if (n_r < 2 || n_theta < 2 || n_z < 2) {
    throw ValidationError("mesh counts must all be >= 2");
  }
  if (n_theta < 4) throw ValidationError("field 'n_theta' must be >= 4 to resolve periodicity");
  return CylinderMesh(spec, n_r, n_theta, n_z);
}

SpMat surface_neg_laplacian(const CylinderMesh& mesh) {
  const int nth = mesh.n_theta();
  const int nz = mesh.n_z();
  const int n = mesh.n_surface();
  const double area = mesh.surface_cell_area();
  // theta face: length dz, center distance R*dtheta; z face: length R*dtheta, distance dz
  const double g_th = mesh.dz() / (mesh.radius() * mesh.dtheta()) / area;
  const double g_z = (mesh.radius() * mesh.dtheta()) / mesh.dz() / area;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(5) * n);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < nth; ++j) {
      const int c = mesh.surface_index(j, k);
      const int jp = mesh.surface_index((j + 1) % nth, k);
      trips.emplace_back(c, c, g_th);
      trips.emplace_back(c, jp, -g_th);
      trips.emplace_back(jp, jp, g_th);
      trips.emplace_back(jp, c, -g_th);
      if (k + 1 < nz) {
        const int kp = mesh.surface_index(j, k + 1);
        trips.emplace_back(c, c, g_z);
        trips.emplace_back(c, kp, -g_z);
        trips.emplace_back(kp, kp, g_z);
        trips.emplace_back(kp, c, -g_z);
      }
    }
  }
  SpMat lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

double poincare_mu1_continuum(double radius, double height) {
  const double ang = 1.0 / (radius * radius);
  const double ax = std::numbers::pi * std::numbers::pi / (height * height);
  return std::min(ang, ax);
}

PoincareResult poincare_constant_surface(const CylinderMesh& mesh) {
  const SpMat lap = surface_neg_laplacian(mesh);
  const int n = static_cast<int>(lap.rows());

  double diag_scale = 0.0;
  for (int i = 0; i < n; ++i) diag_scale = std::max(diag_scale, lap.coeff(i, i));

  // Small positive shift keeps the factorization away from the constant kernel.
  const double sigma = 1e-6 * diag_scale;
  SpMat shifted = lap;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<SpMat> solver(shifted);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("poincare_constant_surface: LDLT factorization failed");
  }

  const int m = std::min(6, n - 1);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> dist;
  Mat v(n, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < n; ++r) v(r, c) = dist(rng);

  auto deflate_constant = [&](Mat& w) {
    for (int c = 0; c < w.cols(); ++c) w.col(c).array() -= w.col(c).mean();
  };

  const double tol = 1e-11 * std::max(1.0, diag_scale);
  const int max_iters = 2000;
  double mu = 0.0, resid = std::numeric_limits<double>::infinity();
  int it = 0;
  Vec x;
  deflate_constant(v);
  v = Eigen::HouseholderQR<Mat>(v).householderQ() * Mat::Identity(n, m);
  for (it = 1; it <= max_iters; ++it) {
    Mat w = solver.solve(v);
    deflate_constant(w);
    v = Eigen::HouseholderQR<Mat>(w).householderQ() * Mat::Identity(n, m);
    const Mat h = v.transpose() * (lap * v).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
    const Mat rot = es.eigenvectors();
    v = (v * rot).eval();
    mu = es.eigenvalues()[0];
    x = v.col(0);
    resid = (lap * x - mu * x).norm();
    if (resid <= tol) break;
  }
  if (resid > tol) {
    std::ostringstream os;
    os << "poincare_constant_surface: inverse iteration did not converge after " << it
       << " iterations (residual " << resid << ", tol " << tol << ")";
    throw NumericalError(os.str());
  }

  PoincareResult out;
  out.mu_1 = mu;
  out.c_p = 1.0 / std::sqrt(mu);
  out.iterations = it;
  out.residual = resid;
  return out;
}

std::string mesh_summary(const CylinderMesh& mesh) {
  std::ostringstream os;
  os.precision(15);
  const double vol = mesh.total_volume();
  const double area = mesh.total_surface_area();
  const double vol_exact = std::numbers::pi * mesh.radius() * mesh.radius() * mesh.height();
  const double area_exact = 2.0 * std::numbers::pi * mesh.radius() * mesh.height();
  os << "mesh:\n"
     << "  radius: " << mesh.radius() << "\n"
     << "  height: " << mesh.height() << "\n"
     << "  n_r: " << mesh.n_r() << "\n"
     << "  n_theta: " << mesh.n_theta() << "\n"
     << "  n_z: " << mesh.n_z() << "\n"
     << "  bulk_cells: " << mesh.n_bulk() << "\n"
     << "  surface_cells: " << mesh.n_surface() << "\n"
     << "  total_volume: " << vol << "\n"
     << "  total_volume_rel_err: " << std::abs(vol - vol_exact) / vol_exact << "\n"
     << "  total_surface_area: " << area << "\n"
     << "  total_surface_area_rel_err: " << std::abs(area - area_exact) / area_exact << "\n";
  return os.str();
}

} // namespace porestab
