#pragma once

#include <algorithm>
#include <cstddef>

namespace fraclab {

/// Number of points lo, lo + step, ... not exceeding hi, allowing a 1e-9
/// relative slack so that 0..2 step 0.001 includes 2.
std::size_t grid_count(double lo, double hi, double step);

/// lo + i * step, clamped to hi so that slack never pushes a point past it.
inline double grid_value(double lo, double hi, double step, std::size_t i) {
  return std::min(lo + static_cast<double>(i) * step, hi);
}

}  // namespace fraclab
