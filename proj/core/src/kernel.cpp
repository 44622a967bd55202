#include "fraclab/kernel.hpp"

#include <cmath>
#include <string>

#include "fraclab/errors.hpp"

namespace fraclab {

KernelTable build_kernel(double nu, long long horizon) {
  if (!(nu > 0.0) || nu > 1.0) {
    throw DomainError("build_kernel: nu must lie in (0, 1], got " +
                      std::to_string(nu));
  }
  if (horizon < 0) {
    throw DomainError("build_kernel: negative horizon " +
                      std::to_string(horizon));
  }
  std::vector<double> w(static_cast<std::size_t>(horizon) + 1);
  w[0] = 1.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    const double jd = static_cast<double>(j);
    w[j + 1] = w[j] * (nu + jd) / (jd + 1.0);
  }
  return KernelTable(nu, std::move(w));
}

double kernel_partial_sum(const KernelTable& table, long long n) {
  if (n < 0 || static_cast<std::size_t>(n) > table.horizon()) {
    throw RangeError("kernel_partial_sum: n=" + std::to_string(n) +
                     " outside [0, " + std::to_string(table.horizon()) + "]");
  }
  double sum = 0.0;
  for (long long j = 0; j <= n; ++j) sum += table[static_cast<std::size_t>(j)];
  return sum;
}

}  // namespace fraclab
