#pragma once

#include <vector>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"
#include "cylstokes/weights.hpp"

namespace cylstokes {

/// A full location array (boundary entries included) of one scalar quantity.
struct LocatedField {
  Location loc = Location::cell;
  CVec values;
};

using FieldList = std::vector<LocatedField>;

/// u1, u2, un as full arrays (zero normal velocity on boundary faces).
FieldList velocity_components(const CrossSectionGrid& g, const CVec& velocity);
/// All first derivatives of the three velocity components (6 fields).
FieldList velocity_gradient(const CrossSectionGrid& g, const CVec& velocity);
/// xx, xy, yy derivatives of each velocity component (9 fields).
FieldList velocity_hessian(const CrossSectionGrid& g, const CVec& velocity);
/// grad' of a cell field without boundary condition (interior faces only).
FieldList cell_gradient(const CrossSectionGrid& g, const CVec& s);
LocatedField cell_field(const CVec& s);

/// Sum of the weighted r-norms of the listed fields.
double norm_sum(const FieldList& fields, const WeightTables& tables, double r);
/// (sum of r-th powers)^{1/r}: the l^r product norm of the listed fields.
double norm_lr(const FieldList& fields, const WeightTables& tables, double r);

FieldList scaled(FieldList fields, cplx s);
void append(FieldList& to, const FieldList& from);

}  // namespace cylstokes
