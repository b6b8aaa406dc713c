#include "cylstokes/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadrature.hpp"

namespace cylstokes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_double(std::string_view s, std::string_view spec) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad number in weight spec '" + std::string(spec) + "'");
  }
  if (used != tmp.size()) throw InvalidArgument("bad number in weight spec '" + std::string(spec) + "'");
  return v;
}

// I(T) = int_0^T (1+t^2)^{a/2} dt.
double radial_profile(double a, double T) {
  auto f = [a](double t) { return std::pow(1.0 + t * t, 0.5 * a); };
  const auto& g = detail::gauss16();
  if (T <= 1.0) return detail::integrate(f, 0.0, T, 2, g);
  const double head = detail::integrate(f, 0.0, 1.0, 2, g);
  const double L = std::log(T);
  const int panels = static_cast<int>(std::ceil(L)) + 1;
  auto fs = [&](double s) {
    const double t = std::exp(s);
    return f(t) * t;
  };
  return head + detail::integrate(fs, 0.0, L, panels, g);
}

// int_0^w int_0^h (x^2+y^2)^{a/2} dy dx for w, h >= 0 and a > -2 (polar split along the diagonal).
double corner_integral(double a, double w, double h) {
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double e = a + 2.0;
  return (std::pow(w, e) * radial_profile(a, h / w) + std::pow(h, e) * radial_profile(a, w / h)) / e;
}

double signed_corner(double a, double X, double Y) {
  const double s = (X < 0 ? -1.0 : 1.0) * (Y < 0 ? -1.0 : 1.0);
  return s * corner_integral(a, std::abs(X), std::abs(Y));
}

double tensor_gauss(const PowerWeight& w, double x0, double x1, double y0, double y1) {
  const auto& g = detail::gauss8();
  const double hx = 0.5 * (x1 - x0), mx = 0.5 * (x1 + x0);
  const double hy = 0.5 * (y1 - y0), my = 0.5 * (y1 + y0);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i)
    for (std::size_t j = 0; j < g.x.size(); ++j)
      s += g.w[i] * g.w[j] * w.value(mx + hx * g.x[i], my + hy * g.x[j]);
  return s * hx * hy;
}

double rect_integral_impl(const PowerWeight& w, double x0, double x1, double y0, double y1, int level) {
  if (x1 <= x0 || y1 <= y0) return 0.0;
  if (w.is_unit()) return (x1 - x0) * (y1 - y0);
  const double dx = std::max({x0 - w.cx, 0.0, w.cx - x1});
  const double dy = std::max({y0 - w.cy, 0.0, w.cy - y1});
  const double dist = std::hypot(dx, dy);
  const double diag = std::hypot(x1 - x0, y1 - y0);
  if (dist >= diag) return tensor_gauss(w, x0, x1, y0, y1);
  if (w.a > -2.0) {
    const double X0 = x0 - w.cx, X1 = x1 - w.cx, Y0 = y0 - w.cy, Y1 = y1 - w.cy;
    return signed_corner(w.a, X1, Y1) - signed_corner(w.a, X0, Y1) - signed_corner(w.a, X1, Y0) +
           signed_corner(w.a, X0, Y0);
  }
  if (dist == 0.0 || level > 60) return kInf;
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  return rect_integral_impl(w, x0, xm, y0, ym, level + 1) + rect_integral_impl(w, xm, x1, y0, ym, level + 1) +
         rect_integral_impl(w, x0, xm, ym, y1, level + 1) + rect_integral_impl(w, xm, x1, ym, y1, level + 1);
}

}  // namespace

PowerWeight PowerWeight::parse(std::string_view spec) {
  if (spec == "unit") return unit();
  constexpr std::string_view prefix = "power:";
  if (spec.substr(0, prefix.size()) != prefix)
    throw InvalidArgument("weight spec must be 'unit' or 'power:a=..,cx=..,cy=..', got '" +
                          std::string(spec) + "'");
  PowerWeight w;
  bool has_a = false;
  std::string_view rest = spec.substr(prefix.size());
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("missing '=' in weight spec '" + std::string(spec) + "'");
    const auto key = item.substr(0, eq);
    const double v = parse_double(item.substr(eq + 1), spec);
    if (key == "a") {
      w.a = v;
      has_a = true;
    } else if (key == "cx") {
      w.cx = v;
    } else if (key == "cy") {
      w.cy = v;
    } else {
      throw InvalidArgument("unknown key '" + std::string(key) + "' in weight spec");
    }
  }
  if (!has_a) throw InvalidArgument("power weight needs an exponent a");
  return w;
}

double PowerWeight::value(double x, double y) const {
  if (is_unit()) return 1.0;
  return std::pow(std::hypot(x - cx, y - cy), a);
}

std::string PowerWeight::id() const {
  if (is_unit()) return "unit";
  std::ostringstream os;
  os.precision(17);
  os << "power:a=" << a << ",cx=" << cx << ",cy=" << cy;
  return os.str();
}

bool in_ar_range(const PowerWeight& w, double r) { return w.a > -2.0 && w.a < 2.0 * (r - 1.0); }

double rect_integral(const PowerWeight& w, double x0, double x1, double y0, double y1) {
  return rect_integral_impl(w, x0, x1, y0, y1, 0);
}

DualWeight dual_weight(const PowerWeight& w, double r) {
  require(r > 1.0, "dual_weight needs r > 1");
  DualWeight d;
  d.weight = w;
  d.weight.a = w.a == 0.0 ? 0.0 : -w.a / (r - 1.0);
  d.r = r / (r - 1.0);
  return d;
}

DyadicWeight DyadicWeight::discretize(const PowerWeight& w, const BoundingCube& cube, int depth) {
  require(depth >= 0 && depth <= 12, "dyadic depth must lie in [0, 12]");
  require(cube.side > 0, "bounding cube side must be positive");
  DyadicWeight d;
  d.cube = cube;
  d.depth = depth;
  const int n = 1 << depth;
  const double s = cube.side / n;
  d.cell_average.resize(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x0 = cube.x0 + i * s, y0 = cube.y0 + j * s;
      const double v = w.is_unit() ? 1.0 : rect_integral(w, x0, x0 + s, y0, y0 + s) / (s * s);
      d.cell_average[static_cast<std::size_t>(j) * n + i] = v;
      if (!std::isfinite(v)) d.divergent = true;
    }
  }
  return d;
}

DyadicWeight DyadicWeight::dual(double r) const {
  require(r > 1.0, "dual needs r > 1");
  DyadicWeight d = *this;
  const double s = -1.0 / (r - 1.0);
  for (double& v : d.cell_average) v = std::pow(v, s);
  for (double v : d.cell_average)
    if (!std::isfinite(v) || v == 0.0) d.divergent = true;
  return d;
}

ArEstimate ar_constant(const DyadicWeight& w, double r) {
  require(r > 1.0, "A_r constant needs r > 1");
  ArEstimate est;
  est.depth = w.depth;
  if (w.divergent) {
    est.value = kInf;
    est.divergent = true;
    return est;
  }
  const double s = -1.0 / (r - 1.0);
  int n = 1 << w.depth;
  std::vector<double> sw = w.cell_average;
  std::vector<double> sd(sw.size());
  for (std::size_t k = 0; k < sw.size(); ++k) sd[k] = std::pow(sw[k], s);
  double best = 0.0;
  double count = 1.0;  // cells per cube at the current level
  while (true) {
    for (std::size_t k = 0; k < sw.size(); ++k) {
      const double v = (sw[k] / count) * std::pow(sd[k] / count, r - 1.0);
      best = std::max(best, v);
    }
    if (n == 1) break;
    const int m = n / 2;
    std::vector<double> nw(static_cast<std::size_t>(m) * m), nd(nw.size());
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const std::size_t a = static_cast<std::size_t>(2 * j) * n + 2 * i;
        const std::size_t b = a + n;
        nw[static_cast<std::size_t>(j) * m + i] = sw[a] + sw[a + 1] + sw[b] + sw[b + 1];
        nd[static_cast<std::size_t>(j) * m + i] = sd[a] + sd[a + 1] + sd[b] + sd[b + 1];
      }
    }
    sw.swap(nw);
    sd.swap(nd);
    n = m;
    count *= 4.0;
  }
  est.value = best;
  return est;
}

ArEstimate ar_constant(const PowerWeight& w, double r, int depth, const BoundingCube& cube) {
  require(depth >= 1, "cube family depth must be >= 1");
  return ar_constant(DyadicWeight::discretize(w, cube, depth), r);
}

ArDepthStudy ar_depth_study(const PowerWeight& w, double r, int max_depth, const BoundingCube& cube) {
  require(max_depth >= 1, "max depth must be >= 1");
  ArDepthStudy st;
  for (int d = 1; d <= max_depth; ++d) st.estimates.push_back(ar_constant(w, r, d, cube));
  for (std::size_t k = 1; k < st.estimates.size(); ++k)
    st.growth.push_back(st.estimates[k].value / st.estimates[k - 1].value);
  if (st.estimates.back().divergent) {
    st.trend = ArTrend::divergent;
  } else if (st.growth.size() >= 3 &&
             std::all_of(st.growth.end() - 3, st.growth.end(), [](double g) { return g > 2.0; })) {
    st.trend = ArTrend::diverging;
  } else if (!st.growth.empty() && st.growth.back() < 1.05) {
    st.trend = ArTrend::stable;
  }
  return st;
}

std::string to_string(ArTrend t) {
  switch (t) {
    case ArTrend::stable: return "stable";
    case ArTrend::diverging: return "diverging";
    case ArTrend::divergent: return "divergent";
    case ArTrend::undecided: return "undecided";
  }
  return "undecided";
}

WeightTables::WeightTables(const CrossSectionGrid& grid, const PowerWeight& weight)
    : grid_(grid), weight_(weight) {
  for (Location loc : {Location::cell, Location::xface, Location::yface, Location::node}) {
    const auto shape = grid.location_shape(loc);
    auto& tab = tables_[static_cast<int>(loc)];
    tab.resize(static_cast<std::size_t>(shape[0]) * shape[1]);
    for (int j = 0; j < shape[1]; ++j) {
      for (int i = 0; i < shape[0]; ++i) {
        const auto cv = grid.control_volume(loc, i, j);
        const double v = rect_integral(weight, cv[0], cv[1], cv[2], cv[3]);
        if (!std::isfinite(v)) throw InvalidArgument("weight " + weight.id() + " is not integrable on the grid");
        tab[static_cast<std::size_t>(j) * shape[0] + i] = v;
      }
    }
  }
}

double weighted_norm_pow(std::span<const cplx> values, Location loc, const WeightTables& tables, double r) {
  const auto w = tables.at(loc);
  require(values.size() == w.size(), "field size does not match its location");
  double s = 0.0;
  if (r == 2.0) {
    for (std::size_t k = 0; k < values.size(); ++k) s += std::norm(values[k]) * w[k];
  } else {
    for (std::size_t k = 0; k < values.size(); ++k) s += std::pow(std::abs(values[k]), r) * w[k];
  }
  return s;
}

double weighted_norm(std::span<const cplx> values, Location loc, const WeightTables& tables, double r) {
  require(r >= 1.0, "norm exponent must be >= 1");
  return std::pow(weighted_norm_pow(values, loc, tables, r), 1.0 / r);
}

double weighted_norm(const CVec& values, Location loc, const WeightTables& tables, double r) {
  return weighted_norm(std::span<const cplx>(values.data(), static_cast<std::size_t>(values.size())), loc,
                       tables, r);
}

}  // namespace cylstokes
