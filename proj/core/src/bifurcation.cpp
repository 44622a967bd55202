#include "fraclab/bifurcation.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "fraclab/errors.hpp"
#include "fraclab/format.hpp"
#include "fraclab/parallel.hpp"

namespace fraclab {

BifurcationSweep sweep(const SweepOptions& o) {
  if (o.n_total < 1) throw DomainError("sweep: n_total must be positive");
  if (o.n_keep < 0 || o.n_keep > o.n_total) {
    throw DomainError("sweep: n_keep must lie in [0, n_total]");
  }
  const std::size_t count = grid_count(o.mu_lo, o.mu_hi, o.mu_step);
  const KernelTable kernel = build_kernel(o.nu, o.n_total - 1);

  BifurcationSweep out{o.kind, o.nu, o.x0, o.n_total, o.n_keep, {}};
  out.columns.resize(count);
  parallel_for(count, o.threads, [&](std::size_t i) {
    const double mu = grid_value(o.mu_lo, o.mu_hi, o.mu_step, i);
    const Trajectory t =
        generate(MapSpec{o.kind, mu, o.nu, o.x0, o.x0}, o.n_total, kernel);
    const std::size_t keep =
        std::min(static_cast<std::size_t>(o.n_keep), t.values.size());
    auto& col = out.columns[i];
    col.mu = mu;
    col.truncated = t.truncated;
    col.values.assign(t.values.end() - static_cast<std::ptrdiff_t>(keep),
                      t.values.end());
  });
  return out;
}

void write_sweep_csv(const BifurcationSweep& sweep, std::ostream& out) {
  out << "mu,value\n";
  for (const auto& col : sweep.columns) {
    const std::string mu = format_real(col.mu);
    for (double v : col.values) out << mu << ',' << format_real(v) << '\n';
  }
}

}  // namespace fraclab
