#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "fraclab/kernel.hpp"

namespace fraclab {

enum class MapKind { Plain, Delayed };

std::string_view to_string(MapKind kind);
/// Accepts "plain" or "delayed"; throws DomainError otherwise.
MapKind parse_map_kind(std::string_view text);

// Values outside this band stop a trajectory.
inline constexpr double kLowerBound = -1.0;
inline constexpr double kUpperBound = 3.0;

inline bool within_bounds(double v) {
  return v >= kLowerBound && v <= kUpperBound;
}

struct MapSpec {
  MapKind kind = MapKind::Plain;
  double mu = 0.0;
  double nu = 1.0;
  double x0 = 0.0;
  // Delayed channel start y(0); x0 when unset. Ignored for Plain.
  std::optional<double> y0;

  double delayed_start() const { return y0.value_or(x0); }
};

struct Trajectory {
  MapSpec spec;
  std::vector<double> values;
  // The step after values.back() left [-1, 3] and was dropped.
  bool truncated = false;
};

/// x(n) = x0 + mu * sum_{j=1..n} k(n-j) x(j-1) (1 - x(j-1)).
Trajectory generate_plain(double mu, double nu, double x0, long long n_steps);

/// Same memory sum with the logistic factor coupled to the delayed channel,
/// x(j-1) (1 - y(j-1)), where y(0) = y0 and y(m) = x(m-1). Only x is returned.
Trajectory generate_delayed(double mu, double nu, double x0, double y0,
                            long long n_steps);

/// Dispatches on spec.kind. `kernel` must have nu == spec.nu and a horizon of
/// at least n_steps - 1; it lets callers reuse one table across many draws.
Trajectory generate(const MapSpec& spec, long long n_steps,
                    const KernelTable& kernel);
Trajectory generate(const MapSpec& spec, long long n_steps);

/// The nu = 1 map iterated incrementally, with no memory sum:
///   Plain:   x(n+1) = x(n) + mu x(n) (1 - x(n))
///   Delayed: x(n+1) = x(n) + mu x(n) (1 - x(n-1)),  x(-1) = y0
/// Applies the same [-1, 3] guard. Reference for testing only.
Trajectory euler_oracle(MapKind kind, double mu, double x0, double y0,
                        long long n_steps);

}  // namespace fraclab
