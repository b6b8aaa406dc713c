#include "cylstokes/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cylstokes {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

RSparse from_triplets(int rows, int cols, const Triplets& t) {
  RSparse m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

CrossSectionGrid CrossSectionGrid::build(double lx, double ly, int nx, int ny) {
  require(lx > 0 && ly > 0, "cross-section extents must be positive");
  require(nx >= 4 && ny >= 4, "cross-section needs at least 4 cells per direction");
  const double hx = lx / nx;
  const double hy = ly / ny;
  const double eps = std::numeric_limits<double>::epsilon();
  require(std::abs(hx - hy) <= 4 * eps * std::max(hx, hy),
          "non-square cells: Lx/Nx must equal Ly/Ny");

  auto d = std::make_shared<Data>();
  d->lx = lx;
  d->ly = ly;
  d->nx = nx;
  d->ny = ny;
  d->h = hx;
  const double h = hx;
  const double ih = 1.0 / h;
  const double ih2 = 1.0 / (h * h);

  CrossSectionGrid g(d);
  const int nc = g.num_cells();
  const int nu1 = g.num_u1();
  const int nu2 = g.num_u2();
  const int nf = nu1 + nu2;

  // Divergence: cells <- faces; boundary faces carry zero normal velocity.
  Triplets t;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = g.cell(i, j);
      if (i + 1 <= nx - 1) t.emplace_back(c, g.u1(i + 1, j), ih);
      if (i >= 1) t.emplace_back(c, g.u1(i, j), -ih);
      if (j + 1 <= ny - 1) t.emplace_back(c, nu1 + g.u2(i, j + 1), ih);
      if (j >= 1) t.emplace_back(c, nu1 + g.u2(i, j), -ih);
    }
  }
  d->div = from_triplets(nc, nf, t);
  d->grad = RSparse(-RSparse(d->div.transpose()));
  d->grad.makeCompressed();

  // u1 on x-faces: Dirichlet nodes in x, mirrored ghosts in y.
  t.clear();
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i <= nx - 1; ++i) {
      const int r = g.u1(i, j);
      double diag = -4 * ih2;
      if (i - 1 >= 1) t.emplace_back(r, g.u1(i - 1, j), ih2);
      if (i + 1 <= nx - 1) t.emplace_back(r, g.u1(i + 1, j), ih2);
      if (j - 1 >= 0) t.emplace_back(r, g.u1(i, j - 1), ih2); else diag -= ih2;
      if (j + 1 <= ny - 1) t.emplace_back(r, g.u1(i, j + 1), ih2); else diag -= ih2;
      t.emplace_back(r, r, diag);
    }
  }
  d->lap_u1 = from_triplets(nu1, nu1, t);

  t.clear();
  for (int j = 1; j <= ny - 1; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int r = g.u2(i, j);
      double diag = -4 * ih2;
      if (j - 1 >= 1) t.emplace_back(r, g.u2(i, j - 1), ih2);
      if (j + 1 <= ny - 1) t.emplace_back(r, g.u2(i, j + 1), ih2);
      if (i - 1 >= 0) t.emplace_back(r, g.u2(i - 1, j), ih2); else diag -= ih2;
      if (i + 1 <= nx - 1) t.emplace_back(r, g.u2(i + 1, j), ih2); else diag -= ih2;
      t.emplace_back(r, r, diag);
    }
  }
  d->lap_u2 = from_triplets(nu2, nu2, t);

  // Cell-centered Laplacians; ghost = -u (Dirichlet) or +u (Neumann).
  auto cell_laplacian = [&](double ghost_sign) {
    Triplets tc;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int r = g.cell(i, j);
        double diag = -4 * ih2;
        const int ni[4] = {i - 1, i + 1, i, i};
        const int nj[4] = {j, j, j - 1, j + 1};
        for (int k = 0; k < 4; ++k) {
          if (ni[k] >= 0 && ni[k] < nx && nj[k] >= 0 && nj[k] < ny) {
            tc.emplace_back(r, g.cell(ni[k], nj[k]), ih2);
          } else {
            diag += ghost_sign * ih2;
          }
        }
        tc.emplace_back(r, r, diag);
      }
    }
    return from_triplets(nc, nc, tc);
  };
  d->lap_dir = cell_laplacian(-1.0);
  d->lap_neu = cell_laplacian(+1.0);

  t.clear();
  const int nv = nf + nc;
  auto append_block = [&](const RSparse& m, int off) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (RSparse::InnerIterator it(m, k); it; ++it)
        t.emplace_back(off + it.row(), off + it.col(), it.value());
  };
  append_block(d->lap_u1, 0);
  append_block(d->lap_u2, nu1);
  append_block(d->lap_dir, nf);
  d->lap_vel = from_triplets(nv, nv, t);

  return g;
}

std::array<int, 2> CrossSectionGrid::location_shape(Location loc) const {
  switch (loc) {
    case Location::cell: return {nx(), ny()};
    case Location::xface: return {nx() + 1, ny()};
    case Location::yface: return {nx(), ny() + 1};
    case Location::node: return {nx() + 1, ny() + 1};
  }
  return {0, 0};
}

int CrossSectionGrid::location_size(Location loc) const {
  const auto s = location_shape(loc);
  return s[0] * s[1];
}

std::array<double, 2> CrossSectionGrid::location_point(Location loc, int i, int j) const {
  const double hh = h();
  switch (loc) {
    case Location::cell: return {(i + 0.5) * hh, (j + 0.5) * hh};
    case Location::xface: return {i * hh, (j + 0.5) * hh};
    case Location::yface: return {(i + 0.5) * hh, j * hh};
    case Location::node: return {i * hh, j * hh};
  }
  return {0, 0};
}

std::array<double, 4> CrossSectionGrid::control_volume(Location loc, int i, int j) const {
  const double hh = h();
  double x0 = i * hh, x1 = (i + 1) * hh, y0 = j * hh, y1 = (j + 1) * hh;
  if (loc == Location::xface || loc == Location::node) {
    x0 = (i - 0.5) * hh;
    x1 = (i + 0.5) * hh;
  }
  if (loc == Location::yface || loc == Location::node) {
    y0 = (j - 0.5) * hh;
    y1 = (j + 0.5) * hh;
  }
  x0 = std::clamp(x0, 0.0, lx());
  x1 = std::clamp(x1, 0.0, lx());
  y0 = std::clamp(y0, 0.0, ly());
  y1 = std::clamp(y1, 0.0, ly());
  return {x0, x1, y0, y1};
}

}  // namespace cylstokes
