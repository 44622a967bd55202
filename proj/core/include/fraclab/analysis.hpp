#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraclab/corpus.hpp"
#include "fraclab/pipeline.hpp"

namespace fraclab {

enum class Parameter { Mu, Nu };

std::string_view to_string(Parameter p);

/// One evaluated trajectory: its labels joined with whatever predictions exist.
struct EvaluatedRecord {
  std::size_t record_id = 0;
  MapKind kind = MapKind::Delayed;
  double mu = 0.0;
  double nu = 0.0;
  double x0 = 0.0;
  int raw_length = 0;
  std::optional<double> mu_prediction;
  std::optional<double> nu_prediction;
  std::optional<double> delay_score;

  double truth(Parameter p) const { return p == Parameter::Mu ? mu : nu; }
  bool has(Parameter p) const;
  /// |prediction - truth|; DataError when that prediction is missing.
  double abs_error(Parameter p) const;
};

struct EvaluationReport {
  std::vector<EvaluatedRecord> records;

  /// Records that carry a prediction for p.
  std::vector<const EvaluatedRecord*> with(Parameter p) const;
};

/// Joins prediction rows onto the corpus records they reference. DataError on
/// an out-of-range record_id.
EvaluationReport build_report(std::span<const TrajectoryRecord> corpus,
                              std::span<const PredictionRow> predictions);

// --- Mean absolute error by trajectory length ------------------------------

struct LengthBin {
  std::string label;  // "10-19", ..., "40-50", "all"
  int lo = 0;
  int hi = 0;  // inclusive
  std::size_t count = 0;
  double mae = 0.0;  // NaN when count == 0
};

/// Bins 10-19, 20-29, 30-39, 40-50 and all. DataError on no predictions.
std::vector<LengthBin> mae_by_length(const EvaluationReport& report, Parameter p);

// --- Histograms of high-error trajectories ---------------------------------

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  std::size_t total() const;
  /// Index of the fullest bin (first on ties).
  std::size_t mode() const;
  /// Values outside [lo, hi] are dropped; hi falls in the last bin.
  void add(double v);
};

Histogram make_histogram(double lo, double hi, std::size_t bins);

struct HighErrorHistograms {
  std::size_t selected = 0;
  Histogram x0;      // 20 bins on [0, 1]
  Histogram length;  // one bin per length 10..50
  Histogram mu;      // 20 bins spanning the report's mu range
  Histogram nu;      // 20 bins on [0, 1]
};

/// Keeps records with |error(p)| > threshold and raw_length > min_length
/// (min_length 0 keeps every length) and bins their covariates.
HighErrorHistograms high_error_histograms(const EvaluationReport& report,
                                          Parameter p, double threshold,
                                          int min_length);

// --- Quartiles --------------------------------------------------------------

struct Quartiles {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics at h = (n - 1) q.
double quantile(std::span<const double> sorted, double q);
Quartiles quartiles(std::vector<double> values);

struct QuartileRow {
  double value = 0.0;  // distinct truth value of the parameter
  std::size_t count = 0;
  Quartiles q;
};

/// Absolute-error quartiles per distinct truth value of p, ascending.
std::vector<QuartileRow> quartile_curves(const EvaluationReport& report,
                                         Parameter p);

// --- Heat map of mean error over (x0, parameter) ---------------------------

struct Heatmap {
  std::vector<double> rows;  // distinct x0 values, ascending
  std::vector<double> cols;  // distinct parameter values, ascending
  // rows x cols, row-major; nullopt marks a cell with no records.
  std::vector<std::optional<double>> mean_error;
  std::vector<std::size_t> counts;
  const std::optional<double>& at(std::size_t r, std::size_t c) const {
    return mean_error[r * cols.size() + c];
  }
};

/// Mean |error(p)| per (x0, truth value of p). DataError on an empty report.
Heatmap heatmap(const EvaluationReport& report, Parameter p);

// --- Box statistics per x0 --------------------------------------------------

struct BoxRow {
  double key = 0.0;
  std::size_t count = 0;
  Quartiles q;
  // Most extreme datum within 1.5 IQR of the box, never inside the box.
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
};

/// Box statistics of |error(p)| grouped by x0; groups without records are
/// not emitted.
std::vector<BoxRow> box_stats(const EvaluationReport& report, Parameter p);

// --- Truth vs prediction density -------------------------------------------

struct DensityGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 0;
  std::vector<std::size_t> counts;  // truth bin (row) x prediction bin (col)
};

/// Counts of (truth, prediction) pairs on a bins x bins grid over [lo, hi];
/// predictions outside are clamped to the edge bins. Only records with
/// min_length <= raw_length <= max_length are counted.
DensityGrid truth_vs_prediction(const EvaluationReport& report, Parameter p,
                                double lo, double hi, std::size_t bins,
                                int min_length = 0, int max_length = 1 << 30);

// --- ROC --------------------------------------------------------------------

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Sweeps thresholds over the distinct scores, descending; tied scores move
/// together. AUC is the trapezoid area, accumulated on integer counts so it
/// equals the Mann-Whitney U / (n1 n0) with ties worth one half. DataError
/// unless both classes occur.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Fraction of records where (score >= 0.5) matches the label.
double accuracy_at_half(std::span<const double> scores, std::span<const int> labels);

// --- CSV emitters -----------------------------------------------------------

void write_length_table_csv(std::ostream& out, std::span<const LengthBin> mu,
                            std::span<const LengthBin> nu);
void write_histogram_csv(std::ostream& out, const HighErrorHistograms& h);
void write_quartiles_csv(std::ostream& out, std::span<const QuartileRow> rows);
void write_heatmap_csv(std::ostream& out, const Heatmap& map);
void write_box_csv(std::ostream& out, std::span<const BoxRow> rows);
void write_density_csv(std::ostream& out, const DensityGrid& grid);
void write_roc_csv(std::ostream& out, const RocCurve& roc);

}  // namespace fraclab
