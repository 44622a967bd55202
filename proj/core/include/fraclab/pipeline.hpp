#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraclab/corpus.hpp"
#include "fraclab/nn/checkpoint.hpp"
#include "fraclab/nn/network.hpp"
#include "fraclab/nn/optimizer.hpp"

namespace fraclab {

enum class Target { Mu, Nu, Both, DelayClass };

std::string_view to_string(Target target);
/// "mu", "nu", "both", "delay".
Target parse_target(std::string_view text);

/// Copy of `base` with head and output count set for `target`.
nn::NetworkConfig configure_for(Target target, nn::NetworkConfig base);

/// Label vector of a record for `target` (unnormalised mu / nu, or 0/1).
std::vector<double> target_values(const TrajectoryRecord& record, Target target);

std::vector<nn::Example> make_examples(std::span<const TrajectoryRecord> records,
                                       Target target);

struct TrainConfig {
  int max_epochs = 200;
  int patience = 20;
  std::size_t batch_size = 256;
  Target target = Target::Mu;
  std::uint64_t seed = 0;
  nn::AdamConfig adam;
  unsigned threads = 1;
  // Best-epoch parameters are written here when set.
  std::optional<std::filesystem::path> checkpoint_path;

  void validate() const;
};

/// Patience bookkeeping. Epochs are numbered from 1; an epoch improves when
/// its metric is strictly below the best so far. Training stops once
/// `patience` epochs have passed without improvement or max_epochs is hit.
class EarlyStopping {
 public:
  EarlyStopping(int patience, int max_epochs);

  /// Records the metric of the next epoch. Returns true when training should
  /// continue.
  bool update(double metric);

  int epochs_seen() const { return epoch_; }
  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_metric_; }
  bool improved_last() const { return improved_last_; }
  bool stopped() const { return !stop_reason_.empty(); }
  /// "patience" or "max_epochs" once stopped, empty before.
  const std::string& stop_reason() const { return stop_reason_; }

 private:
  int patience_;
  int max_epochs_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_metric_ = 0.0;
  bool improved_last_ = false;
  std::string stop_reason_;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_metric = 0.0;  // MAE for regression, BCE for classification
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  int best_epoch = 0;
  double best_metric = 0.0;
  std::string stop_reason;
  double wall_seconds = 0.0;
  std::optional<std::filesystem::path> checkpoint_path;
  nn::Checkpoint best;
};

/// Validation metric monitored for `target`: MAE, or BCE for the delay class.
nn::Loss monitored_loss(Target target);

/// Trains on the Train split and monitors the Validation split of `records`.
/// Shuffles the training order each epoch from the seed, restores the best
/// epoch's parameters, and writes them to checkpoint_path when set.
TrainReport train(std::span<const TrajectoryRecord> records,
                  const nn::NetworkConfig& network, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Evaluation-mode outputs per record. DataError when a record's padded
/// length differs from the network input length.
std::vector<std::vector<double>> predict(const nn::Checkpoint& checkpoint,
                                         std::span<const TrajectoryRecord> records,
                                         unsigned threads = 1);

std::string train_report_to_json(const TrainReport& report,
                                 const TrainConfig& config);

struct PredictionRow {
  std::size_t record_id = 0;
  std::string target;  // "mu", "nu" or "delay"
  double truth = 0.0;
  double prediction = 0.0;
};

/// One row per record and predicted quantity (two for the joint head).
/// record_ids[i] is the corpus line index of records[i].
std::vector<PredictionRow> prediction_rows(
    std::span<const TrajectoryRecord> records,
    const std::vector<std::vector<double>>& outputs, Target target,
    std::span<const std::size_t> record_ids);

// CSV: record_id,target,truth,prediction
void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);
std::vector<PredictionRow> read_predictions_csv(std::istream& in);

}  // namespace fraclab
