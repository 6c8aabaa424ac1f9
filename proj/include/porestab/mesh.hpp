#pragma once

#include "porestab/common.hpp"

#include <string>

namespace porestab {

/// Geometry of the pore: Omega = disk(radius) x (0, height).
struct CylinderSpec {
  double radius = 1.0;
  double height = 1.0;
};

/// Cell-centered grid in cylindrical coordinates over Omega, plus the induced
/// (theta, z) grid on the lateral wall Sigma = {r = radius}. The cross-section
/// is a disk, so Sigma is intrinsically flat: in arc-length coordinates
/// (R*theta, z) the Laplace-Beltrami operator is the plain 2D Laplacian,
/// periodic in theta with zero-flux edges at z = 0, height.
///
/// No unknown sits on the axis r = 0; the innermost radial face has zero area,
/// so the coordinate singularity never enters a flux.
class CylinderMesh {
public:
  CylinderMesh(CylinderSpec spec, int n_r, int n_theta, int n_z);

  int n_r() const { return nr_; }
  int n_theta() const { return nth_; }
  int n_z() const { return nz_; }
  double radius() const { return spec_.radius; }
  double height() const { return spec_.height; }
  double dr() const { return dr_; }
  double dtheta() const { return dth_; }
  double dz() const { return dz_; }

  int n_bulk() const { return nr_ * nth_ * nz_; }
  int n_surface() const { return nth_ * nz_; }
  int n_inflow_faces() const { return nr_ * nth_; }

  int bulk_index(int i, int j, int k) const { return i + nr_ * (j + nth_ * k); }
  int surface_index(int j, int k) const { return j + nth_ * k; }
  /// Bulk cell adjacent to the wall behind surface cell (j,k); the trace map
  /// surface_index(j,k) <-> bulk_index(n_r-1, j, k) is a bijection.
  int wall_bulk_index(int j, int k) const { return bulk_index(nr_ - 1, j, k); }
  int inflow_face_index(int i, int j) const { return i + nr_ * j; }

  double r_center(int i) const { return (i + 0.5) * dr_; }
  double theta_center(int j) const { return (j + 0.5) * dth_; }
  double z_center(int k) const { return (k + 0.5) * dz_; }

  /// Exact volume of the annular-wedge cell at radial index i: r_c dr dtheta dz.
  double cell_volume(int i) const { return r_center(i) * dr_ * dth_ * dz_; }
  /// Radial face between cells i and i+1, at r = (i+1) dr.
  double radial_face_area(int i) const { return (i + 1) * dr_ * dth_ * dz_; }
  double angular_face_area() const { return dr_ * dz_; }
  double axial_face_area(int i) const { return r_center(i) * dr_ * dth_; }
  /// Wall face of a bulk cell = area of the matching surface cell.
  double surface_cell_area() const { return spec_.radius * dth_ * dz_; }

  double total_volume() const;
  double total_surface_area() const;

private:
  CylinderSpec spec_;
  int nr_, nth_, nz_;
  double dr_, dth_, dz_;
};

/// Validates counts (all >= 2, n_theta >= 4) and builds the mesh.
CylinderMesh build_mesh(const CylinderSpec& spec, int n_r, int n_theta, int n_z);

/// Matrix of -Laplace_Beltrami on the surface grid (positive semidefinite,
/// kernel = constants). Finite-volume two-point fluxes, periodic in theta,
/// zero-flux at the z edges; cells have uniform area so the plain matrix is
/// symmetric.
SpMat surface_neg_laplacian(const CylinderMesh& mesh);

struct PoincareResult {
  double c_p = 0.0;  ///< 1/sqrt(mu_1)
  double mu_1 = 0.0; ///< smallest nonzero Neumann eigenvalue of -Laplace_Beltrami on Sigma
  int iterations = 0;
  double residual = 0.0; ///< ||L x - mu x|| of the converged eigenpair
  std::string subspace = "neumann-mean-zero";
};

/// First nonzero eigenvalue of the discrete Neumann Laplace-Beltrami operator,
/// by inverse subspace iteration with the constant mode deflated. Continuum
/// value on the flat lateral surface: mu_1 = min(1/R^2, pi^2/h^2).
PoincareResult poincare_constant_surface(const CylinderMesh& mesh);

/// Analytic continuum value min over (m,k) != (0,0) of (m/R)^2 + (k pi / h)^2.
double poincare_mu1_continuum(double radius, double height);

/// Dimensions, counts and quadrature checks as a structured-text block.
std::string mesh_summary(const CylinderMesh& mesh);

} // namespace porestab
