#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraclab/analysis.hpp"
#include "fraclab/bifurcation.hpp"

namespace fraclab::svg {

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Polylines on shared linear axes with a small legend.
std::string line_chart(const Axes& axes, std::span<const Series> series);

/// Unconnected dots, one per (x, y).
std::string scatter(const Axes& axes, std::span<const double> x,
                    std::span<const double> y, double radius = 0.6);

/// Grey-scale cells; empty cells are drawn hatched in pale red.
std::string heatmap(const Axes& axes, std::span<const double> rows,
                    std::span<const double> cols,
                    std::span<const std::optional<double>> cells);

std::string histogram(const Axes& axes, const Histogram& h);

std::string boxplot(const Axes& axes, std::span<const BoxRow> rows);

// Convenience renderers for the standard artifacts.
std::string feigenbaum(const BifurcationSweep& sweep);
std::string roc(const RocCurve& curve);
std::string quartiles(const std::string& parameter, std::span<const QuartileRow> rows);
std::string density(const std::string& title, const DensityGrid& grid);

}  // namespace fraclab::svg
