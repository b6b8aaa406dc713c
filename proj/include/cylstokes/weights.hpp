#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"

namespace cylstokes {

/// Power weight w(x') = |x' - x0|^a on the cross-section plane; a = 0 is the unit weight.
struct PowerWeight {
  double a = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  static PowerWeight unit() { return {}; }
  /// Parses "unit" or "power:a=<float>,cx=<float>,cy=<float>" (cx, cy optional).
  static PowerWeight parse(std::string_view spec);

  bool is_unit() const { return a == 0.0; }
  double value(double x, double y) const;
  std::string id() const;
};

/// Membership of |x'|^a in A_r on the plane: -2 < a < 2(r-1).
bool in_ar_range(const PowerWeight& w, double r);

/// Exact integral of the weight over an axis-aligned rectangle.
/// Returns +inf when the rectangle touches a non-integrable singularity (a <= -2).
double rect_integral(const PowerWeight& w, double x0, double x1, double y0, double y1);

struct DualWeight {
  PowerWeight weight;
  double r = 2.0;
};

/// w' = w^{-1/(r-1)} with conjugate exponent r' = r/(r-1).
DualWeight dual_weight(const PowerWeight& w, double r);

/// Axis-aligned bounding square [x0, x0+side] x [y0, y0+side] used as the root cube.
struct BoundingCube {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 1.0;
};

/// A weight represented by its averages over the 2^depth x 2^depth dyadic cells of a
/// bounding cube. Cube averages are assembled from these cell averages.
struct DyadicWeight {
  BoundingCube cube;
  int depth = 0;
  std::vector<double> cell_average;  // row-major, 2^depth x 2^depth
  bool divergent = false;            // a cell average is infinite

  static DyadicWeight discretize(const PowerWeight& w, const BoundingCube& cube, int depth);
  /// Cellwise w^{-1/(r-1)}; the A_r identity with the dual is exact on this representation.
  DyadicWeight dual(double r) const;
};

struct ArEstimate {
  double value = 0.0;
  bool divergent = false;
  int depth = 0;
};

/// sup over all dyadic cubes of levels 0..depth of (avg w)(avg w^{-1/(r-1)})^{r-1}.
ArEstimate ar_constant(const DyadicWeight& w, double r);
ArEstimate ar_constant(const PowerWeight& w, double r, int depth, const BoundingCube& cube);

enum class ArTrend { stable, diverging, divergent, undecided };

struct ArDepthStudy {
  std::vector<ArEstimate> estimates;  // depths 1..max_depth
  std::vector<double> growth;         // consecutive-depth ratios
  ArTrend trend = ArTrend::undecided;
};

/// Runs ar_constant for depths 1..max_depth. Sustained growth ratio > 2 over the last
/// three depths flags divergence; a last ratio below 1.05 counts as stable.
ArDepthStudy ar_depth_study(const PowerWeight& w, double r, int max_depth, const BoundingCube& cube);

std::string to_string(ArTrend t);

/// Control-volume integrals of a weight for every staggered location of a grid.
class WeightTables {
 public:
  WeightTables(const CrossSectionGrid& grid, const PowerWeight& weight);

  std::span<const double> at(Location loc) const { return tables_[static_cast<int>(loc)]; }
  const PowerWeight& weight() const { return weight_; }
  const CrossSectionGrid& grid() const { return grid_; }

 private:
  CrossSectionGrid grid_;
  PowerWeight weight_;
  std::array<std::vector<double>, 4> tables_;
};

/// (sum |v_k|^r W_k)^{1/r} for a full location array v.
double weighted_norm(std::span<const cplx> values, Location loc, const WeightTables& tables, double r);
double weighted_norm(const CVec& values, Location loc, const WeightTables& tables, double r);
/// Same, returning the r-th power (for assembling product norms).
double weighted_norm_pow(std::span<const cplx> values, Location loc, const WeightTables& tables,
                         double r);

}  // namespace cylstokes
