#include "fraclab/dynamics.hpp"

#include <cmath>
#include <string>

#include "fraclab/errors.hpp"

namespace fraclab {

std::string_view to_string(MapKind kind) {
  return kind == MapKind::Plain ? "plain" : "delayed";
}

MapKind parse_map_kind(std::string_view text) {
  if (text == "plain") return MapKind::Plain;
  if (text == "delayed") return MapKind::Delayed;
  throw DomainError("unknown map kind '" + std::string(text) +
                    "' (expected plain or delayed)");
}

namespace {

void check_inputs(const MapSpec& spec, long long n_steps) {
  if (n_steps < 1) {
    throw DomainError("trajectory needs at least one step, got " +
                      std::to_string(n_steps));
  }
  if (!std::isfinite(spec.mu) || !std::isfinite(spec.x0) ||
      !std::isfinite(spec.delayed_start())) {
    throw DomainError("trajectory parameters must be finite");
  }
}

}  // namespace

Trajectory generate(const MapSpec& spec, long long n_steps,
                    const KernelTable& kernel) {
  check_inputs(spec, n_steps);
  if (kernel.nu() != spec.nu) {
    throw DomainError("kernel nu does not match map nu");
  }
  if (kernel.horizon() + 1 < static_cast<std::size_t>(n_steps)) {
    throw RangeError("kernel horizon " + std::to_string(kernel.horizon()) +
                     " too short for " + std::to_string(n_steps) + " steps");
  }

  Trajectory out{spec, {}, false};
  const auto n_total = static_cast<std::size_t>(n_steps);
  out.values.reserve(n_total);
  out.values.push_back(spec.x0);

  // logistic[m] = x(m) (1 - x(m)) or x(m) (1 - y(m)).
  std::vector<double> logistic;
  logistic.reserve(n_total);
  const bool delayed = spec.kind == MapKind::Delayed;
  const double y0 = spec.delayed_start();

  for (std::size_t n = 1; n < n_total; ++n) {
    const double prev = out.values[n - 1];
    const double coupled = !delayed ? prev : (n == 1 ? y0 : out.values[n - 2]);
    logistic.push_back(prev * (1.0 - coupled));

    double sum = 0.0;
    for (std::size_t j = 1; j <= n; ++j) sum += kernel[n - j] * logistic[j - 1];
    const double next = spec.x0 + spec.mu * sum;
    if (!within_bounds(next)) {
      out.truncated = true;
      break;
    }
    out.values.push_back(next);
  }
  return out;
}

Trajectory generate(const MapSpec& spec, long long n_steps) {
  check_inputs(spec, n_steps);
  return generate(spec, n_steps, build_kernel(spec.nu, n_steps - 1));
}

Trajectory generate_plain(double mu, double nu, double x0, long long n_steps) {
  return generate(MapSpec{MapKind::Plain, mu, nu, x0, std::nullopt}, n_steps);
}

Trajectory generate_delayed(double mu, double nu, double x0, double y0,
                            long long n_steps) {
  return generate(MapSpec{MapKind::Delayed, mu, nu, x0, y0}, n_steps);
}

Trajectory euler_oracle(MapKind kind, double mu, double x0, double y0,
                        long long n_steps) {
  MapSpec spec{kind, mu, 1.0, x0, y0};
  check_inputs(spec, n_steps);
  Trajectory out{spec, {x0}, false};
  double lagged = y0;
  for (long long n = 1; n < n_steps; ++n) {
    const double x = out.values.back();
    const double coupled = kind == MapKind::Plain ? x : lagged;
    const double next = x + mu * x * (1.0 - coupled);
    if (!within_bounds(next)) {
      out.truncated = true;
      break;
    }
    lagged = x;
    out.values.push_back(next);
  }
  return out;
}

}  // namespace fraclab
