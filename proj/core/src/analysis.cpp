#include "fraclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "fraclab/errors.hpp"
#include "fraclab/format.hpp"

namespace fraclab {

std::string_view to_string(Parameter p) { return p == Parameter::Mu ? "mu" : "nu"; }

bool EvaluatedRecord::has(Parameter p) const {
  return p == Parameter::Mu ? mu_prediction.has_value() : nu_prediction.has_value();
}

double EvaluatedRecord::abs_error(Parameter p) const {
  const auto& pred = p == Parameter::Mu ? mu_prediction : nu_prediction;
  if (!pred) {
    throw DataError(fmt::format("record {} has no {} prediction", record_id,
                                to_string(p)));
  }
  return std::abs(*pred - truth(p));
}

std::vector<const EvaluatedRecord*> EvaluationReport::with(Parameter p) const {
  std::vector<const EvaluatedRecord*> out;
  for (const auto& r : records) {
    if (r.has(p)) out.push_back(&r);
  }
  return out;
}

EvaluationReport build_report(std::span<const TrajectoryRecord> corpus,
                              std::span<const PredictionRow> predictions) {
  std::map<std::size_t, EvaluatedRecord> joined;
  for (const auto& row : predictions) {
    if (row.record_id >= corpus.size()) {
      throw DataError(fmt::format("prediction references record {} but the corpus has {}",
                                  row.record_id, corpus.size()));
    }
    auto [it, inserted] = joined.try_emplace(row.record_id);
    auto& e = it->second;
    if (inserted) {
      const auto& r = corpus[row.record_id];
      e.record_id = row.record_id;
      e.kind = r.kind;
      e.mu = r.mu;
      e.nu = r.nu;
      e.x0 = r.x0;
      e.raw_length = r.raw_length;
    }
    if (row.target == "mu") {
      e.mu_prediction = row.prediction;
    } else if (row.target == "nu") {
      e.nu_prediction = row.prediction;
    } else {
      e.delay_score = row.prediction;
    }
  }
  EvaluationReport report;
  report.records.reserve(joined.size());
  for (auto& [id, rec] : joined) report.records.push_back(std::move(rec));
  return report;
}

// ---------------------------------------------------------------------------

std::vector<LengthBin> mae_by_length(const EvaluationReport& report, Parameter p) {
  const auto recs = report.with(p);
  if (recs.empty()) {
    throw DataError(fmt::format("no {} predictions to tabulate", to_string(p)));
  }
  std::vector<LengthBin> bins{{"10-19", 10, 19, 0, 0.0},
                              {"20-29", 20, 29, 0, 0.0},
                              {"30-39", 30, 39, 0, 0.0},
                              {"40-50", 40, 50, 0, 0.0},
                              {"all", 0, std::numeric_limits<int>::max(), 0, 0.0}};
  for (const auto* r : recs) {
    const double err = r->abs_error(p);
    for (auto& b : bins) {
      if (r->raw_length >= b.lo && r->raw_length <= b.hi) {
        ++b.count;
        b.mae += err;
      }
    }
  }
  for (auto& b : bins) {
    b.mae = b.count ? b.mae / static_cast<double>(b.count)
                    : std::numeric_limits<double>::quiet_NaN();
  }
  return bins;
}

// ---------------------------------------------------------------------------

Histogram make_histogram(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) {
    throw DomainError("histogram needs hi > lo and at least one bin");
  }
  return Histogram{lo, hi, std::vector<std::size_t>(bins, 0)};
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::size_t Histogram::mode() const {
  return static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void Histogram::add(double v) {
  if (!(v >= lo && v <= hi)) return;
  auto b = static_cast<std::size_t>((v - lo) / bin_width());
  counts[std::min(b, counts.size() - 1)] += 1;
}

HighErrorHistograms high_error_histograms(const EvaluationReport& report,
                                          Parameter p, double threshold,
                                          int min_length) {
  const auto recs = report.with(p);
  double mu_lo = 0.0, mu_hi = 0.0;
  if (!recs.empty()) {
    const auto [lo, hi] = std::minmax_element(
        recs.begin(), recs.end(),
        [](const auto* a, const auto* b) { return a->mu < b->mu; });
    mu_lo = (*lo)->mu;
    mu_hi = (*hi)->mu;
  }
  if (!(mu_hi > mu_lo)) mu_hi = mu_lo + 1.0;

  HighErrorHistograms h{0, make_histogram(0.0, 1.0, 20),
                        make_histogram(9.5, 50.5, 41),
                        make_histogram(mu_lo, mu_hi, 20),
                        make_histogram(0.0, 1.0, 20)};
  for (const auto* r : recs) {
    if (!(r->abs_error(p) > threshold)) continue;
    if (min_length > 0 && r->raw_length <= min_length) continue;
    ++h.selected;
    h.x0.add(r->x0);
    h.length.add(r->raw_length);
    h.mu.add(r->mu);
    h.nu.add(r->nu);
  }
  return h;
}

// ---------------------------------------------------------------------------

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

namespace {

// Groups |error(p)| by a key (exact double equality), keys ascending.
template <typename KeyFn>
std::map<double, std::vector<double>> group_errors(const EvaluationReport& report,
                                                   Parameter p, KeyFn key) {
  std::map<double, std::vector<double>> groups;
  for (const auto* r : report.with(p)) groups[key(*r)].push_back(r->abs_error(p));
  return groups;
}

}  // namespace

std::vector<QuartileRow> quartile_curves(const EvaluationReport& report,
                                         Parameter p) {
  std::vector<QuartileRow> rows;
  for (auto& [value, errs] :
       group_errors(report, p, [p](const EvaluatedRecord& r) { return r.truth(p); })) {
    rows.push_back({value, errs.size(), quartiles(std::move(errs))});
  }
  return rows;
}

std::vector<BoxRow> box_stats(const EvaluationReport& report, Parameter p) {
  std::vector<BoxRow> rows;
  for (auto& [key, errs] :
       group_errors(report, p, [](const EvaluatedRecord& r) { return r.x0; })) {
    std::sort(errs.begin(), errs.end());
    BoxRow row{key, errs.size(),
               {quantile(errs, 0.25), quantile(errs, 0.5), quantile(errs, 0.75)},
               0.0, 0.0};
    const double iqr = row.q.q3 - row.q.q1;
    const double lo_fence = row.q.q1 - 1.5 * iqr;
    const double hi_fence = row.q.q3 + 1.5 * iqr;
    // With interpolated quartiles the nearest datum inside a fence can sit
    // inside the box; the whisker then stops at the box edge.
    row.whisker_lo = std::min(row.q.q1, *std::find_if(errs.begin(), errs.end(),
                                                      [&](double e) { return e >= lo_fence; }));
    row.whisker_hi = std::max(row.q.q3, *std::find_if(errs.rbegin(), errs.rend(),
                                                      [&](double e) { return e <= hi_fence; }));
    rows.push_back(row);
  }
  return rows;
}

Heatmap heatmap(const EvaluationReport& report, Parameter p) {
  const auto recs = report.with(p);
  if (recs.empty()) {
    throw DataError(fmt::format("no {} predictions for a heat map", to_string(p)));
  }
  Heatmap map;
  for (const auto* r : recs) {
    map.rows.push_back(r->x0);
    map.cols.push_back(r->truth(p));
  }
  for (auto* axis : {&map.rows, &map.cols}) {
    std::sort(axis->begin(), axis->end());
    axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
  }
  const std::size_t n = map.rows.size() * map.cols.size();
  std::vector<double> sums(n, 0.0);
  map.counts.assign(n, 0);
  for (const auto* r : recs) {
    const auto ri = static_cast<std::size_t>(
        std::lower_bound(map.rows.begin(), map.rows.end(), r->x0) - map.rows.begin());
    const auto ci = static_cast<std::size_t>(
        std::lower_bound(map.cols.begin(), map.cols.end(), r->truth(p)) -
        map.cols.begin());
    sums[ri * map.cols.size() + ci] += r->abs_error(p);
    ++map.counts[ri * map.cols.size() + ci];
  }
  map.mean_error.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (map.counts[i]) map.mean_error[i] = sums[i] / static_cast<double>(map.counts[i]);
  }
  return map;
}

DensityGrid truth_vs_prediction(const EvaluationReport& report, Parameter p,
                                double lo, double hi, std::size_t bins,
                                int min_length, int max_length) {
  if (bins == 0 || !(hi > lo)) throw DomainError("density grid needs hi > lo and bins > 0");
  DensityGrid g{lo, hi, bins, std::vector<std::size_t>(bins * bins, 0)};
  const double width = (hi - lo) / static_cast<double>(bins);
  auto bin_of = [&](double v) {
    const double b = std::floor((v - lo) / width);
    return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(bins - 1)));
  };
  for (const auto* r : report.with(p)) {
    if (r->raw_length < min_length || r->raw_length > max_length) continue;
    const double pred = p == Parameter::Mu ? *r->mu_prediction : *r->nu_prediction;
    ++g.counts[bin_of(r->truth(p)) * bins + bin_of(pred)];
  }
  return g;
}

// ---------------------------------------------------------------------------

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("roc_auc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  for (int l : labels) (l ? roc.positives : roc.negatives) += 1;
  if (roc.positives == 0 || roc.negatives == 0) {
    throw DataError("roc_auc needs both positive and negative labels");
  }
  const double P = static_cast<double>(roc.positives);
  const double N = static_cast<double>(roc.negatives);

  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // twice the area in units of (1 / N) x (1 / P)
  unsigned long long area2 = 0;
  unsigned long long tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    unsigned long long dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      (labels[order[i]] ? dtp : dfp) += 1;
    }
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({s, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  roc.auc = static_cast<double>(area2) / (2.0 * P * N);
  return roc;
}

double accuracy_at_half(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw DataError("accuracy needs equally sized, nonempty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    hits += static_cast<int>(scores[i] >= 0.5) == (labels[i] ? 1 : 0);
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

// ---------------------------------------------------------------------------

namespace {

std::string real_or_empty(double v) { return std::isnan(v) ? "" : format_real(v); }

}  // namespace

void write_length_table_csv(std::ostream& out, std::span<const LengthBin> mu,
                            std::span<const LengthBin> nu) {
  out << "length,count,mae_mu,mae_nu\n";
  const auto& rows = mu.empty() ? nu : mu;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].label << ',' << rows[i].count << ','
        << (mu.empty() ? "" : real_or_empty(mu[i].mae)) << ','
        << (nu.empty() ? "" : real_or_empty(nu[i].mae)) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const HighErrorHistograms& h) {
  out << "covariate,bin_lo,bin_hi,count\n";
  const std::pair<const char*, const Histogram*> all[] = {
      {"x0", &h.x0}, {"length", &h.length}, {"mu", &h.mu}, {"nu", &h.nu}};
  for (const auto& [name, hist] : all) {
    for (std::size_t b = 0; b < hist->counts.size(); ++b) {
      const double lo = hist->lo + static_cast<double>(b) * hist->bin_width();
      out << name << ',' << format_real(lo) << ','
          << format_real(lo + hist->bin_width()) << ',' << hist->counts[b] << '\n';
    }
  }
}

void write_quartiles_csv(std::ostream& out, std::span<const QuartileRow> rows) {
  out << "value,count,q1,q2,q3\n";
  for (const auto& r : rows) {
    out << format_real(r.value) << ',' << r.count << ',' << format_real(r.q.q1)
        << ',' << format_real(r.q.q2) << ',' << format_real(r.q.q3) << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const Heatmap& map) {
  out << "x0,value,count,mean_abs_error\n";
  for (std::size_t r = 0; r < map.rows.size(); ++r) {
    for (std::size_t c = 0; c < map.cols.size(); ++c) {
      const auto& cell = map.at(r, c);
      out << format_real(map.rows[r]) << ',' << format_real(map.cols[c]) << ','
          << map.counts[r * map.cols.size() + c] << ','
          << (cell ? format_real(*cell) : "") << '\n';
    }
  }
}

void write_box_csv(std::ostream& out, std::span<const BoxRow> rows) {
  out << "x0,count,q1,q2,q3,whisker_lo,whisker_hi\n";
  for (const auto& r : rows) {
    out << format_real(r.key) << ',' << r.count << ',' << format_real(r.q.q1) << ','
        << format_real(r.q.q2) << ',' << format_real(r.q.q3) << ','
        << format_real(r.whisker_lo) << ',' << format_real(r.whisker_hi) << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityGrid& g) {
  out << "truth_lo,prediction_lo,count\n";
  const double w = (g.hi - g.lo) / static_cast<double>(g.bins);
  for (std::size_t t = 0; t < g.bins; ++t) {
    for (std::size_t q = 0; q < g.bins; ++q) {
      out << format_real(g.lo + w * static_cast<double>(t)) << ','
          << format_real(g.lo + w * static_cast<double>(q)) << ','
          << g.counts[t * g.bins + q] << '\n';
    }
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : roc.points) {
    out << (std::isinf(pt.threshold) ? std::string("inf") : format_real(pt.threshold))
        << ',' << format_real(pt.fpr) << ',' << format_real(pt.tpr) << '\n';
  }
}

}  // namespace fraclab
