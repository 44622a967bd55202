#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "fraclab/dynamics.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

struct BifurcationColumn {
  double mu = 0.0;
  // Trailing values of the trajectory, oldest first; at most n_keep of them.
  std::vector<double> values;
  bool truncated = false;
  std::size_t kept_count() const { return values.size(); }
};

struct BifurcationSweep {
  MapKind kind = MapKind::Plain;
  double nu = 1.0;
  double x0 = 0.0;
  long long n_total = 200;
  long long n_keep = 100;
  std::vector<BifurcationColumn> columns;  // ascending mu
};

struct SweepOptions {
  MapKind kind = MapKind::Plain;
  double nu = 1.0;
  double x0 = 0.3;
  double mu_lo = 0.0;
  double mu_hi = 2.0;
  double mu_step = 0.001;
  long long n_total = 200;
  long long n_keep = 100;
  unsigned threads = 1;
};

/// Feigenbaum data: for every mu on the grid, iterate n_total terms from x0
/// (y0 = x0) and keep the last min(n_keep, generated) values. Diverging
/// trajectories contribute whatever tail they produced.
BifurcationSweep sweep(const SweepOptions& options);

/// CSV with header `mu,value`, one row per retained point, 17 significant
/// digits, ordered by mu then time index.
void write_sweep_csv(const BifurcationSweep& sweep, std::ostream& out);

}  // namespace fraclab
