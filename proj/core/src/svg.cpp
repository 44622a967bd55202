#include "fraclab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace fraclab::svg {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;

  double px(double x) const {
    return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y_lo) / (y_hi - y_lo) * (kHeight - kTop - kBottom);
  }
};

Frame fit(std::span<const double> xs, std::span<const double> ys) {
  auto range = [](std::span<const double> v) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double d : v) {
      if (!std::isfinite(d)) continue;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (!std::isfinite(lo)) return std::pair{0.0, 1.0};
    if (hi - lo < 1e-12) return std::pair{lo - 0.5, hi + 0.5};
    return std::pair{lo, hi};
  };
  const auto [x_lo, x_hi] = range(xs);
  const auto [y_lo, y_hi] = range(ys);
  return {x_lo, x_hi, y_lo, y_hi};
}

std::string open(const Axes& axes) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(axes.title));
}

std::string frame_and_ticks(const Axes& axes, const Frame& f) {
  std::string s = fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    s += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n",
        f.px(xv), kHeight - kBottom + 16, xv);
    s += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
        kLeft - 6, f.py(yv) + 4, yv);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                   kLeft + (kWidth - kLeft - kRight) / 2, kHeight - 12,
                   escape(axes.x_label));
  s += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      kTop + (kHeight - kTop - kBottom) / 2, escape(axes.y_label));
  return s;
}

}  // namespace

std::string line_chart(const Axes& axes, std::span<const Series> series) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Frame f = fit(xs, ys);
  std::string out = open(axes) + frame_and_ticks(axes, f);
  double legend_y = kTop + 14;
  for (const auto& s : series) {
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"",
                       s.color);
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out += fmt::format("{:.2f},{:.2f} ", f.px(s.x[i]), f.py(s.y[i]));
    }
    out += "\"/>\n";
    if (!s.name.empty()) {
      out += fmt::format(
          "<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n",
          kWidth - kRight - 110, legend_y, s.color, escape(s.name));
      legend_y += 15;
    }
  }
  return out + "</svg>\n";
}

std::string scatter(const Axes& axes, std::span<const double> x,
                    std::span<const double> y, double radius) {
  const Frame f = fit(x, y);
  std::string out = open(axes) + frame_and_ticks(axes, f);
  out += "<g fill=\"black\" fill-opacity=\"0.5\">\n";
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\"/>\n",
                       f.px(x[i]), f.py(y[i]), radius);
  }
  return out + "</g>\n</svg>\n";
}

std::string heatmap(const Axes& axes, std::span<const double> rows,
                    std::span<const double> cols,
                    std::span<const std::optional<double>> cells) {
  const Frame f{0.0, static_cast<double>(std::max<std::size_t>(cols.size(), 1)), 0.0,
                static_cast<double>(std::max<std::size_t>(rows.size(), 1))};
  std::string out = open(axes);
  double peak = 0.0;
  for (const auto& c : cells) {
    if (c) peak = std::max(peak, *c);
  }
  const double cw = (kWidth - kLeft - kRight) / f.x_hi;
  const double ch = (kHeight - kTop - kBottom) / f.y_hi;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& cell = cells[r * cols.size() + c];
      std::string fill = "#f4d6d6";
      if (cell) {
        const int shade = static_cast<int>(255 - 255 * (peak > 0 ? *cell / peak : 0));
        fill = fmt::format("rgb({0},{0},{0})", shade);
      }
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
          "fill=\"{}\"/>\n",
          kLeft + c * cw, kHeight - kBottom - (r + 1) * ch, cw + 0.05, ch + 0.05, fill);
    }
  }
  Frame labels{cols.empty() ? 0.0 : cols.front(), cols.empty() ? 1.0 : cols.back(),
               rows.empty() ? 0.0 : rows.front(), rows.empty() ? 1.0 : rows.back()};
  if (labels.x_hi <= labels.x_lo) labels.x_hi = labels.x_lo + 1;
  if (labels.y_hi <= labels.y_lo) labels.y_hi = labels.y_lo + 1;
  out += frame_and_ticks(axes, labels);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">max {:.3g}</text>\n",
                     kWidth - kRight, kTop - 6, peak);
  return out + "</svg>\n";
}

std::string histogram(const Axes& axes, const Histogram& h) {
  std::vector<double> ys(h.counts.begin(), h.counts.end());
  ys.push_back(0.0);
  const double xs[] = {h.lo, h.hi};
  Frame f = fit(xs, ys);
  f.y_lo = 0.0;
  std::string out = open(axes) + frame_and_ticks(axes, f);
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double x0 = h.lo + b * h.bin_width();
    const double top = f.py(static_cast<double>(h.counts[b]));
    out += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"steelblue\" stroke=\"white\"/>\n",
        f.px(x0), top, f.px(x0 + h.bin_width()) - f.px(x0), f.py(0.0) - top);
  }
  return out + "</svg>\n";
}

std::string boxplot(const Axes& axes, std::span<const BoxRow> rows) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.key);
    ys.push_back(r.whisker_lo);
    ys.push_back(r.whisker_hi);
  }
  Frame f = fit(xs, ys);
  const double span = f.x_hi - f.x_lo;
  f.x_lo -= 0.02 * span;
  f.x_hi += 0.02 * span;
  std::string out = open(axes) + frame_and_ticks(axes, f);
  const double half =
      rows.size() > 1 ? 0.35 * (kWidth - kLeft - kRight) / rows.size() : 10.0;
  for (const auto& r : rows) {
    const double cx = f.px(r.key);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"grey\"/>\n",
        cx, f.py(r.whisker_lo), f.py(r.whisker_hi));
    out += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"green\" fill-opacity=\"0.6\"/>\n",
        cx - half, f.py(r.q.q3), 2 * half, std::max(0.5, f.py(r.q.q1) - f.py(r.q.q3)));
    out += fmt::format(
        "<line x1=\"{:.2f}\" x2=\"{:.2f}\" y1=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"black\"/>\n",
        cx - half, cx + half, f.py(r.q.q2), f.py(r.q.q2));
  }
  return out + "</svg>\n";
}

std::string feigenbaum(const BifurcationSweep& sweep) {
  std::vector<double> xs, ys;
  for (const auto& col : sweep.columns) {
    for (double v : col.values) {
      xs.push_back(col.mu);
      ys.push_back(v);
    }
  }
  return scatter({fmt::format("{} map, nu = {:g}, x(0) = {:g}", to_string(sweep.kind),
                              sweep.nu, sweep.x0),
                  "mu", "x(n)"},
                 xs, ys, 0.4);
}

std::string roc(const RocCurve& curve) {
  Series s{fmt::format("AUC = {:.5f}", curve.auc), "darkorange", {}, {}};
  for (const auto& p : curve.points) {
    s.x.push_back(p.fpr);
    s.y.push_back(p.tpr);
  }
  const Series chance{"chance", "grey", {0.0, 1.0}, {0.0, 1.0}};
  const Series all[] = {s, chance};
  return line_chart({"ROC curve", "false positive rate", "true positive rate"}, all);
}

std::string quartiles(const std::string& parameter, std::span<const QuartileRow> rows) {
  Series q1{"Q1", "red", {}, {}}, q2{"Q2", "blue", {}, {}}, q3{"Q3", "green", {}, {}};
  for (const auto& r : rows) {
    for (auto* s : {&q1, &q2, &q3}) s->x.push_back(r.value);
    q1.y.push_back(r.q.q1);
    q2.y.push_back(r.q.q2);
    q3.y.push_back(r.q.q3);
  }
  const Series all[] = {q1, q2, q3};
  return line_chart({"Absolute error quartiles by " + parameter, parameter,
                     "absolute error"},
                    all);
}

std::string density(const std::string& title, const DensityGrid& g) {
  std::vector<double> centers(g.bins);
  const double w = (g.hi - g.lo) / static_cast<double>(g.bins);
  for (std::size_t i = 0; i < g.bins; ++i) centers[i] = g.lo + w * (i + 0.5);
  std::vector<std::optional<double>> cells(g.counts.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (g.counts[i]) cells[i] = std::log1p(static_cast<double>(g.counts[i]));
  }
  return heatmap({title, "prediction", "truth"}, centers, centers, cells);
}

}  // namespace fraclab::svg
