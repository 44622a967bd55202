#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fraclab {

// Cesaro numbers of order nu, k(j) = Gamma(nu + j) / (Gamma(nu) Gamma(j + 1)).
// These are the memory weights of the fractional logistic map: the gamma
// ratio Gamma(n - j + nu) / Gamma(n - j + 1) divided by Gamma(nu) equals
// k(n - j), so the fractional sum becomes a plain convolution.
class KernelTable {
 public:
  double nu() const { return nu_; }
  std::size_t horizon() const { return weights_.size() - 1; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t j) const { return weights_[j]; }

 private:
  friend KernelTable build_kernel(double nu, long long horizon);
  KernelTable(double nu, std::vector<double> weights)
      : nu_(nu), weights_(std::move(weights)) {}

  double nu_;
  std::vector<double> weights_;
};

/// Weights k(0..horizon) via k(0) = 1, k(j+1) = k(j) (nu + j) / (j + 1).
/// Throws DomainError unless 0 < nu <= 1 and horizon >= 0.
KernelTable build_kernel(double nu, long long horizon);

/// Sum of k(0..n). Equals the Cesaro number of order nu + 1 at n.
/// Throws RangeError when n is outside [0, horizon].
double kernel_partial_sum(const KernelTable& table, long long n);

}  // namespace fraclab
