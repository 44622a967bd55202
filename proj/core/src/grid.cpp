#include "fraclab/grid.hpp"

#include <cmath>

#include "fraclab/errors.hpp"

namespace fraclab {

std::size_t grid_count(double lo, double hi, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (!(lo <= hi)) throw DomainError("grid lower bound exceeds upper bound");
  const double span = (hi - lo) / step;
  return static_cast<std::size_t>(std::floor(span + 1e-9 * (1.0 + span))) + 1;
}

}  // namespace fraclab
