#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fraclab/analysis.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/pipeline.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

namespace {

EvaluatedRecord rec(double mu, double nu, double x0, int length, double mu_err,
                    double nu_err = 0.0) {
  EvaluatedRecord r;
  r.mu = mu;
  r.nu = nu;
  r.x0 = x0;
  r.raw_length = length;
  r.mu_prediction = mu + mu_err;
  r.nu_prediction = nu + nu_err;
  return r;
}

// Pairwise Mann-Whitney statistic with ties worth one half, over n1 n0.
double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Order-statistic interpolation written out from the definition.
double brute_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

EvaluationReport random_report(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  EvaluationReport r;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = 0.5 * static_cast<double>(rng.below(5));
    const double x0 = 0.01 * static_cast<double>(rng.below(101));
    r.records.push_back(rec(mu, 0.01 + 0.1 * static_cast<double>(rng.below(10)), x0,
                            static_cast<int>(rng.between(10, 50)), rng.uniform() - 0.5,
                            0.2 * rng.uniform()));
  }
  return r;
}

}  // namespace

TEST(Roc, PerfectSeparation) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  const auto c = roc_auc(s, y);
  EXPECT_EQ(c.auc, 1.0);
  EXPECT_EQ(c.points.front().fpr, 0.0);
  EXPECT_EQ(c.points.front().tpr, 0.0);
  EXPECT_EQ(c.points.back().fpr, 1.0);
  EXPECT_EQ(c.points.back().tpr, 1.0);
  EXPECT_EQ(accuracy_at_half(s, y), 1.0);
}

TEST(Roc, SingleClassRejected) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{1, 1};
  EXPECT_THROW(roc_auc(s, y), DataError);
}

TEST(Roc, MatchesMannWhitneyExactly) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(1000);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
      // Coarse scores force many ties.
      s[i] = trial % 2 ? static_cast<double>(rng.below(7)) / 7 + 0.1 * y[i]
                       : rng.uniform() + 0.3 * y[i];
    }
    EXPECT_EQ(roc_auc(s, y).auc, brute_auc(s, y)) << "trial " << trial;
  }
}

TEST(Roc, IndependentLabelsNearHalf) {
  SplitMix64 rng(12);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = static_cast<int>(rng.below(2));
  }
  EXPECT_NEAR(roc_auc(s, y).auc, 0.5, 0.05);
}

TEST(LengthTable, Bins) {
  EvaluationReport r;
  r.records = {rec(1, 0.5, 0.1, 12, 0.1), rec(1, 0.5, 0.1, 19, -0.3),
               rec(1, 0.5, 0.1, 45, 0.0), rec(1, 0.5, 0.1, 50, 0.0)};
  const auto bins = mae_by_length(r, Parameter::Mu);
  ASSERT_EQ(bins.size(), 5u);
  EXPECT_EQ(bins[0].label, "10-19");
  EXPECT_NEAR(bins[0].mae, 0.2, 1e-12);
  EXPECT_EQ(bins[1].count, 0u);
  EXPECT_TRUE(std::isnan(bins[1].mae));
  EXPECT_EQ(bins[3].count, 2u);
  EXPECT_EQ(bins[3].mae, 0.0);
  EXPECT_EQ(bins[4].count, 4u);
  EXPECT_NEAR(bins[4].mae, 0.1, 1e-12);
  EXPECT_THROW(mae_by_length(EvaluationReport{}, Parameter::Nu), DataError);
}

TEST(LengthTable, PerfectPredictions) {
  auto r = random_report(1, 200);
  for (auto& e : r.records) e.nu_prediction = e.nu;
  for (const auto& b : mae_by_length(r, Parameter::Nu)) {
    if (b.count) EXPECT_EQ(b.mae, 0.0);
  }
}

TEST(Histograms, ThresholdsAndMode) {
  EvaluationReport r;
  for (int i = 0; i < 30; ++i) r.records.push_back(rec(1.0, 0.5, 0.0, 20, 0.3));
  for (int i = 0; i < 10; ++i) r.records.push_back(rec(1.0, 0.5, 0.9, 12, 0.3));
  for (int i = 0; i < 10; ++i) r.records.push_back(rec(1.0, 0.5, 0.5, 30, 0.01));

  EXPECT_EQ(high_error_histograms(r, Parameter::Mu, 10.0, 0).x0.total(), 0u);
  const auto all = high_error_histograms(r, Parameter::Mu, 0.0, 0);
  EXPECT_EQ(all.selected, r.records.size());
  EXPECT_EQ(all.x0.total(), r.records.size());
  EXPECT_EQ(all.length.total(), r.records.size());

  const auto high = high_error_histograms(r, Parameter::Mu, 0.05, 0);
  EXPECT_EQ(high.selected, 40u);
  EXPECT_EQ(high.x0.mode(), 0u);
  EXPECT_EQ(high.x0.counts[18], 10u);
  const auto longer = high_error_histograms(r, Parameter::Mu, 0.05, 15);
  EXPECT_EQ(longer.selected, 30u);
  EXPECT_EQ(longer.length.counts.size(), 41u);
}

TEST(Histograms, EdgesAndRange) {
  auto h = make_histogram(0.0, 1.0, 4);
  for (double v : {0.0, 0.24, 0.25, 0.99, 1.0, 1.5, -0.1}) h.add(v);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 1, 0, 2}));
  EXPECT_EQ(h.total(), 5u);
}

TEST(Quartiles, Conventions) {
  EXPECT_EQ(quartiles({1, 2, 3, 4}).q2, 2.5);
  const auto c = quartiles({0.3, 0.3, 0.3});
  EXPECT_EQ(c.q1, 0.3);
  EXPECT_EQ(c.q3, 0.3);
  const std::vector<double> sorted{1, 2, 3, 4, 5};
  EXPECT_EQ(quantile(sorted, 0.25), 2.0);
  EXPECT_EQ(quantile(sorted, 0.1), 1.4);
}

TEST(Quartiles, AgreeWithOracle) {
  const auto r = random_report(4, 500);
  const auto rows = quartile_curves(r, Parameter::Mu);
  ASSERT_EQ(rows.size(), 5u);
  std::size_t total = 0;
  for (const auto& row : rows) {
    std::vector<double> errs;
    for (const auto& e : r.records) {
      if (e.mu == row.value) errs.push_back(e.abs_error(Parameter::Mu));
    }
    total += row.count;
    EXPECT_EQ(row.count, errs.size());
    EXPECT_NEAR(row.q.q1, brute_quantile(errs, 0.25), 1e-15);
    EXPECT_NEAR(row.q.q2, brute_quantile(errs, 0.50), 1e-15);
    EXPECT_NEAR(row.q.q3, brute_quantile(errs, 0.75), 1e-15);
    EXPECT_LE(row.q.q1, row.q.q2);
    EXPECT_LE(row.q.q2, row.q.q3);
  }
  EXPECT_EQ(total, r.records.size());
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(),
                             [](auto& a, auto& b) { return a.value < b.value; }));
}

TEST(BoxStats, WhiskersAgreeWithOracle) {
  const auto r = random_report(6, 800);
  for (const auto& row : box_stats(r, Parameter::Nu)) {
    std::vector<double> errs;
    for (const auto& e : r.records) {
      if (e.x0 == row.key) errs.push_back(e.abs_error(Parameter::Nu));
    }
    ASSERT_EQ(errs.size(), row.count);
    const double q1 = brute_quantile(errs, 0.25), q3 = brute_quantile(errs, 0.75);
    const double iqr = q3 - q1;
    double lo = q1, hi = q3;
    for (double e : errs) {
      if (e >= q1 - 1.5 * iqr) lo = std::min(lo, e);
      if (e <= q3 + 1.5 * iqr) hi = std::max(hi, e);
    }
    EXPECT_EQ(row.whisker_lo, lo);
    EXPECT_EQ(row.whisker_hi, hi);
    EXPECT_LE(row.whisker_lo, row.q.q1);
    EXPECT_LE(row.q.q3, row.whisker_hi);
  }
}

TEST(BoxStats, DegenerateAndOmitted) {
  EvaluationReport r;
  r.records = {rec(1, 0.5, 0.2, 20, 0.1), rec(1, 0.5, 0.2, 20, 0.1), rec(1, 0.5, 0.7, 20, 0.1)};
  const auto rows = box_stats(r, Parameter::Mu);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].q.q1, 0.1, 1e-15);
  EXPECT_EQ(rows[0].whisker_lo, rows[0].whisker_hi);
}

TEST(Heatmap, Cells) {
  EvaluationReport r;
  r.records = {rec(0.5, 0.2, 0.1, 20, 0.0), rec(1.5, 0.2, 0.3, 20, 0.0)};
  const auto perfect = heatmap(r, Parameter::Mu);
  EXPECT_EQ(perfect.rows, (std::vector<double>{0.1, 0.3}));
  EXPECT_EQ(perfect.cols, (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(perfect.at(0, 0), 0.0);
  EXPECT_FALSE(perfect.at(0, 1).has_value());
  EXPECT_EQ(perfect.at(1, 1), 0.0);

  EvaluationReport one;
  one.records = {rec(0.5, 0.2, 0.1, 20, -0.25)};
  const auto single = heatmap(one, Parameter::Mu);
  ASSERT_EQ(single.mean_error.size(), 1u);
  EXPECT_EQ(single.at(0, 0), 0.25);
  EXPECT_THROW(heatmap(EvaluationReport{}, Parameter::Mu), DataError);
}

TEST(Density, CountsAndFilter) {
  EvaluationReport r;
  r.records = {rec(0.1, 0.5, 0.1, 45, 0.0), rec(1.9, 0.5, 0.1, 12, 5.0)};
  const auto all = truth_vs_prediction(r, Parameter::Mu, 0.0, 2.0, 4);
  std::size_t sum = 0;
  for (auto c : all.counts) sum += c;
  EXPECT_EQ(sum, 2u);
  EXPECT_EQ(all.counts[0], 1u);
  EXPECT_EQ(all.counts[3 * 4 + 3], 1u);
  const auto long_only = truth_vs_prediction(r, Parameter::Mu, 0.0, 2.0, 4, 40, 50);
  sum = 0;
  for (auto c : long_only.counts) sum += c;
  EXPECT_EQ(sum, 1u);
}

TEST(Report, JoinsPredictions) {
  std::vector<TrajectoryRecord> corpus(3);
  for (std::size_t i = 0; i < 3; ++i) {
    corpus[i].mu = 0.5 * i;
    corpus[i].nu = 0.1;
    corpus[i].raw_length = 20;
  }
  const std::vector<PredictionRow> rows{{2, "mu", 1.0, 1.2}, {2, "nu", 0.1, 0.15},
                                        {0, "delay", 1.0, 0.9}};
  const auto r = build_report(corpus, rows);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_NEAR(r.with(Parameter::Mu).at(0)->abs_error(Parameter::Mu), 0.2, 1e-12);
  EXPECT_EQ(r.with(Parameter::Nu).size(), 1u);
  const std::vector<PredictionRow> bad{{7, "mu", 1.0, 1.0}};
  EXPECT_THROW(build_report(corpus, bad), DataError);
}

TEST(Csv, Emitters) {
  const auto r = random_report(2, 50);
  std::ostringstream a, b, c;
  write_quartiles_csv(a, quartile_curves(r, Parameter::Mu));
  write_heatmap_csv(b, heatmap(r, Parameter::Nu));
  write_roc_csv(c, roc_auc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1}));
  EXPECT_NE(a.str().find("q1"), std::string::npos);
  EXPECT_FALSE(b.str().empty());
  EXPECT_EQ(c.str().substr(0, c.str().find('\n')).find("fpr") != std::string::npos, true);
}
