#pragma once

#include <cstdint>
#include <random>

#include "cylstokes/common.hpp"
#include "cylstokes/grid.hpp"

namespace cylstokes {

/// Seeded generator shared by all randomized experiments.
using Rng = std::mt19937_64;

/// Standard complex normal entries (real and imaginary parts N(0,1)).
CVec random_complex(int n, Rng& rng);
RVec random_real(int n, Rng& rng);

/// Packed velocity whose components are random combinations of the lowest
/// modes sin(k pi x/Lx) sin(l pi y/Ly), 1 <= k, l <= modes; vanishes on the walls.
CVec smooth_velocity(const CrossSectionGrid& g, Rng& rng, int modes = 3, bool complex_coefficients = true);
/// Cell field from random cos(k pi x/Lx) cos(l pi y/Ly), 0 <= k, l < modes (mean included).
CVec smooth_cell_field(const CrossSectionGrid& g, Rng& rng, int modes = 3, bool complex_coefficients = true);

}  // namespace cylstokes
