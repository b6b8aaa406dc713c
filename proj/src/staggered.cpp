#include "cylstokes/staggered.hpp"

#include <cmath>

namespace cylstokes {

namespace {

/// Full array on a location with 2D access.
struct Array2 {
  Location loc;
  int n0 = 0, n1 = 0;
  CVec v;

  Array2(const CrossSectionGrid& g, Location l) : loc(l) {
    const auto s = g.location_shape(l);
    n0 = s[0];
    n1 = s[1];
    v = CVec::Zero(static_cast<Eigen::Index>(n0) * n1);
  }
  cplx& operator()(int i, int j) { return v[i + n0 * j]; }
  cplx operator()(int i, int j) const { return v[i + n0 * j]; }
  LocatedField field() && { return {loc, std::move(v)}; }
};

struct Components {
  Array2 u1, u2, un;
};

Components expand(const CrossSectionGrid& g, const CVec& velocity) {
  require(velocity.size() == g.num_velocity(), "expected packed velocity [u1; u2; un]");
  Components c{Array2(g, Location::xface), Array2(g, Location::yface), Array2(g, Location::cell)};
  const int nx = g.nx(), ny = g.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) c.u1(i, j) = velocity[g.u1(i, j)];
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) c.u2(i, j) = velocity[g.offset_u2() + g.u2(i, j)];
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) c.un(i, j) = velocity[g.offset_un() + g.cell(i, j)];
  return c;
}

// Differences along one axis of a field that vanishes on the walls normal to that axis via
// mirrored ghosts (staggered by half a cell: n values -> n+1 values).
// dir = 0 differences in i, dir = 1 in j.
Array2 ghost_diff(const CrossSectionGrid& g, const Array2& a, int dir, Location out_loc) {
  Array2 out(g, out_loc);
  const double ih = 1.0 / g.h();
  for (int j = 0; j < out.n1; ++j)
    for (int i = 0; i < out.n0; ++i) {
      if (dir == 0) {
        const cplx hi = i < a.n0 ? a(i, j) : -a(a.n0 - 1, j);
        const cplx lo = i > 0 ? a(i - 1, j) : -a(0, j);
        out(i, j) = (hi - lo) * ih;
      } else {
        const cplx hi = j < a.n1 ? a(i, j) : -a(i, a.n1 - 1);
        const cplx lo = j > 0 ? a(i, j - 1) : -a(i, 0);
        out(i, j) = (hi - lo) * ih;
      }
    }
  return out;
}

// Plain differences along one axis (n+1 values -> n values).
Array2 plain_diff(const CrossSectionGrid& g, const Array2& a, int dir, Location out_loc) {
  Array2 out(g, out_loc);
  const double ih = 1.0 / g.h();
  for (int j = 0; j < out.n1; ++j)
    for (int i = 0; i < out.n0; ++i)
      out(i, j) = dir == 0 ? (a(i + 1, j) - a(i, j)) * ih : (a(i, j + 1) - a(i, j)) * ih;
  return out;
}

// Unscaled second difference at interior entries; boundary entries copy their neighbour.
Array2 second_diff_interior(const Array2& a, int dir) {
  Array2 out = a;
  const int n = dir == 0 ? a.n0 : a.n1;
  for (int j = 0; j < a.n1; ++j)
    for (int i = 0; i < a.n0; ++i) {
      const int k = dir == 0 ? i : j;
      if (k == 0 || k == n - 1) continue;
      out(i, j) = dir == 0 ? a(i + 1, j) - 2.0 * a(i, j) + a(i - 1, j) : a(i, j + 1) - 2.0 * a(i, j) + a(i, j - 1);
    }
  for (int j = 0; j < a.n1; ++j)
    for (int i = 0; i < a.n0; ++i) {
      const int k = dir == 0 ? i : j;
      if (k == 0) out(i, j) = dir == 0 ? out(1, j) : out(i, 1);
      if (k == n - 1) out(i, j) = dir == 0 ? out(n - 2, j) : out(i, n - 2);
    }
  return out;
}

// Unscaled second difference with mirrored ghosts.
Array2 second_diff_ghost(const Array2& a, int dir) {
  Array2 out = a;
  const int n = dir == 0 ? a.n0 : a.n1;
  for (int j = 0; j < a.n1; ++j)
    for (int i = 0; i < a.n0; ++i) {
      const int k = dir == 0 ? i : j;
      auto at = [&](int m) { return dir == 0 ? a(m, j) : a(i, m); };
      const cplx c = at(k);
      const cplx lo = k > 0 ? at(k - 1) : -c;
      const cplx hi = k < n - 1 ? at(k + 1) : -c;
      out(i, j) = hi - 2.0 * c + lo;
    }
  return out;
}

Array2 scale(Array2 a, double s) {
  a.v *= s;
  return a;
}

}  // namespace

FieldList velocity_components(const CrossSectionGrid& g, const CVec& velocity) {
  Components c = expand(g, velocity);
  FieldList out;
  out.push_back(std::move(c.u1).field());
  out.push_back(std::move(c.u2).field());
  out.push_back(std::move(c.un).field());
  return out;
}

FieldList velocity_gradient(const CrossSectionGrid& g, const CVec& velocity) {
  const Components c = expand(g, velocity);
  FieldList out;
  out.push_back(plain_diff(g, c.u1, 0, Location::cell).field());
  out.push_back(ghost_diff(g, c.u1, 1, Location::node).field());
  out.push_back(ghost_diff(g, c.u2, 0, Location::node).field());
  out.push_back(plain_diff(g, c.u2, 1, Location::cell).field());
  out.push_back(ghost_diff(g, c.un, 0, Location::xface).field());
  out.push_back(ghost_diff(g, c.un, 1, Location::yface).field());
  return out;
}

FieldList velocity_hessian(const CrossSectionGrid& g, const CVec& velocity) {
  const Components c = expand(g, velocity);
  const double ih2 = 1.0 / (g.h() * g.h());
  FieldList out;
  // u1
  out.push_back(scale(second_diff_interior(c.u1, 0), ih2).field());
  out.push_back(plain_diff(g, ghost_diff(g, c.u1, 1, Location::node), 0, Location::yface).field());
  {
    Array2 yy = scale(second_diff_ghost(c.u1, 1), ih2);
    for (int j = 0; j < yy.n1; ++j) {
      yy(0, j) = yy(1, j);
      yy(yy.n0 - 1, j) = yy(yy.n0 - 2, j);
    }
    out.push_back(std::move(yy).field());
  }
  // u2
  {
    Array2 xx = scale(second_diff_ghost(c.u2, 0), ih2);
    for (int i = 0; i < xx.n0; ++i) {
      xx(i, 0) = xx(i, 1);
      xx(i, xx.n1 - 1) = xx(i, xx.n1 - 2);
    }
    out.push_back(std::move(xx).field());
  }
  out.push_back(plain_diff(g, ghost_diff(g, c.u2, 0, Location::node), 1, Location::xface).field());
  out.push_back(scale(second_diff_interior(c.u2, 1), ih2).field());
  // un
  out.push_back(scale(second_diff_ghost(c.un, 0), ih2).field());
  out.push_back(ghost_diff(g, ghost_diff(g, c.un, 1, Location::yface), 0, Location::node).field());
  out.push_back(scale(second_diff_ghost(c.un, 1), ih2).field());
  return out;
}

FieldList cell_gradient(const CrossSectionGrid& g, const CVec& s) {
  require(s.size() == g.num_cells(), "cell_gradient expects a cell field");
  const CVec faces = g.gradient().cast<cplx>() * s;
  Array2 gx(g, Location::xface), gy(g, Location::yface);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) gx(i, j) = faces[g.u1(i, j)];
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) gy(i, j) = faces[g.offset_u2() + g.u2(i, j)];
  FieldList out;
  out.push_back(std::move(gx).field());
  out.push_back(std::move(gy).field());
  return out;
}

LocatedField cell_field(const CVec& s) { return {Location::cell, s}; }

double norm_sum(const FieldList& fields, const WeightTables& tables, double r) {
  double s = 0.0;
  for (const auto& f : fields) s += weighted_norm(f.values, f.loc, tables, r);
  return s;
}

double norm_lr(const FieldList& fields, const WeightTables& tables, double r) {
  double s = 0.0;
  for (const auto& f : fields)
    s += weighted_norm_pow(std::span<const cplx>(f.values.data(), static_cast<std::size_t>(f.values.size())),
                           f.loc, tables, r);
  return std::pow(s, 1.0 / r);
}

FieldList scaled(FieldList fields, cplx s) {
  for (auto& f : fields) f.values *= s;
  return fields;
}

void append(FieldList& to, const FieldList& from) { to.insert(to.end(), from.begin(), from.end()); }

}  // namespace cylstokes
