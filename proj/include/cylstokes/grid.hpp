#pragma once

#include <array>
#include <memory>

#include "cylstokes/common.hpp"

namespace cylstokes {

/// Staggered placement of a discrete quantity on the cross-section.
enum class Location { cell, xface, yface, node };

/// MAC discretization of a rectangle (0,Lx)x(0,Ly) with square cells.
///
/// Unknown placement: u1 on interior x-faces, u2 on interior y-faces,
/// u_n and p at cell centers. Boundary faces carry the homogeneous Dirichlet
/// value of the normal velocity; tangential and axial components use mirrored
/// ghost cells. Cheap to copy; operators are shared and immutable.
class CrossSectionGrid {
 public:
  static CrossSectionGrid build(double lx, double ly, int nx, int ny);

  double lx() const { return d_->lx; }
  double ly() const { return d_->ly; }
  int nx() const { return d_->nx; }
  int ny() const { return d_->ny; }
  double h() const { return d_->h; }
  double cell_area() const { return d_->h * d_->h; }
  double area() const { return d_->lx * d_->ly; }

  int num_cells() const { return d_->nx * d_->ny; }
  int num_u1() const { return (d_->nx - 1) * d_->ny; }
  int num_u2() const { return d_->nx * (d_->ny - 1); }
  int num_face_unknowns() const { return num_u1() + num_u2(); }
  int num_velocity() const { return num_face_unknowns() + num_cells(); }
  int num_unknowns() const { return num_velocity() + num_cells(); }

  // Packed layouts: velocity = [u1; u2; un], mode unknowns = [u1; u2; un; p].
  int offset_u2() const { return num_u1(); }
  int offset_un() const { return num_face_unknowns(); }
  int offset_p() const { return num_velocity(); }

  int cell(int i, int j) const { return i + d_->nx * j; }
  int u1(int i, int j) const { return (i - 1) + (d_->nx - 1) * j; }  // i in [1, nx-1]
  int u2(int i, int j) const { return i + d_->nx * (j - 1); }        // j in [1, ny-1]

  /// Size of a full array at a location, boundary entries included.
  int location_size(Location loc) const;
  std::array<int, 2> location_shape(Location loc) const;
  std::array<double, 2> location_point(Location loc, int i, int j) const;
  /// Control volume of a location entry, clipped to the rectangle.
  std::array<double, 4> control_volume(Location loc, int i, int j) const;

  /// div' : faces -> cells.
  const RSparse& divergence() const { return d_->div; }
  /// grad' : cells -> interior faces; equals -divergence()^T.
  const RSparse& gradient() const { return d_->grad; }
  const RSparse& laplacian_u1() const { return d_->lap_u1; }
  const RSparse& laplacian_u2() const { return d_->lap_u2; }
  const RSparse& laplacian_dirichlet() const { return d_->lap_dir; }
  const RSparse& laplacian_neumann() const { return d_->lap_neu; }
  /// blockdiag(L_u1, L_u2, L_dirichlet) acting on packed velocity.
  const RSparse& velocity_laplacian() const { return d_->lap_vel; }

  bool same_layout(const CrossSectionGrid& o) const {
    return nx() == o.nx() && ny() == o.ny() && h() == o.h();
  }

 private:
  struct Data {
    double lx = 0, ly = 0, h = 0;
    int nx = 0, ny = 0;
    RSparse div, grad, lap_u1, lap_u2, lap_dir, lap_neu, lap_vel;
  };
  explicit CrossSectionGrid(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

}  // namespace cylstokes
