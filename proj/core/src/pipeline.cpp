#include "fraclab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fraclab/errors.hpp"
#include "fraclab/format.hpp"
#include "fraclab/rng.hpp"
#include "json.hpp"

namespace fraclab {

std::string_view to_string(Target target) {
  switch (target) {
    case Target::Mu:
      return "mu";
    case Target::Nu:
      return "nu";
    case Target::Both:
      return "both";
    case Target::DelayClass:
      return "delay";
  }
  return "mu";
}

Target parse_target(std::string_view text) {
  if (text == "mu") return Target::Mu;
  if (text == "nu") return Target::Nu;
  if (text == "both") return Target::Both;
  if (text == "delay") return Target::DelayClass;
  throw DomainError("unknown target '" + std::string(text) +
                    "' (expected mu, nu, both or delay)");
}

nn::NetworkConfig configure_for(Target target, nn::NetworkConfig base) {
  base.head = target == Target::DelayClass ? nn::Head::Sigmoid : nn::Head::Linear;
  base.outputs = target == Target::Both ? 2 : 1;
  return base;
}

std::vector<double> target_values(const TrajectoryRecord& r, Target target) {
  switch (target) {
    case Target::Mu:
      return {r.mu};
    case Target::Nu:
      return {r.nu};
    case Target::Both:
      return {r.mu, r.nu};
    case Target::DelayClass:
      return {delay_label(r)};
  }
  return {};
}

std::vector<nn::Example> make_examples(std::span<const TrajectoryRecord> records,
                                       Target target) {
  std::vector<nn::Example> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.padded, target_values(r, target)});
  return out;
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw DomainError("max_epochs must be at least 1");
  if (patience < 1) throw DomainError("patience must be at least 1");
  if (batch_size < 1) throw DomainError("batch_size must be at least 1");
}

EarlyStopping::EarlyStopping(int patience, int max_epochs)
    : patience_(patience), max_epochs_(max_epochs) {
  if (patience < 1 || max_epochs < 1) {
    throw DomainError("patience and max_epochs must be positive");
  }
}

bool EarlyStopping::update(double metric) {
  if (stopped()) return false;
  ++epoch_;
  improved_last_ = epoch_ == 1 || metric < best_metric_;
  if (improved_last_) {
    best_metric_ = metric;
    best_epoch_ = epoch_;
  }
  if (epoch_ - best_epoch_ >= patience_) {
    stop_reason_ = "patience";
  } else if (epoch_ >= max_epochs_) {
    stop_reason_ = "max_epochs";
  }
  return !stopped();
}

nn::Loss monitored_loss(Target target) {
  return target == Target::DelayClass ? nn::Loss::BCE : nn::Loss::MAE;
}

TrainReport train(std::span<const TrajectoryRecord> records,
                  const nn::NetworkConfig& network, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  config.validate();
  const nn::NetworkConfig net = configure_for(config.target, network);
  net.validate();
  const auto started = std::chrono::steady_clock::now();

  const auto train_set = make_examples(select_split(records, Split::Train), config.target);
  const auto valid_set =
      make_examples(select_split(records, Split::Validation), config.target);
  if (train_set.empty()) throw DataError("corpus has no train records");
  if (valid_set.empty()) throw DataError("corpus has no validation records");
  for (const auto& ex : train_set) {
    if (ex.input.size() != net.input_length) {
      throw DataError(fmt::format("record length {} differs from network input {}",
                                  ex.input.size(), net.input_length));
    }
  }

  const nn::Loss loss = monitored_loss(config.target);
  nn::ModelParameters params = nn::init_parameters(net, config.seed);
  nn::AdamState adam = nn::make_adam_state(params);
  EarlyStopping stopper(config.patience, config.max_epochs);

  TrainReport report;
  report.best = nn::Checkpoint{net, params, std::string(to_string(config.target))};

  std::vector<std::size_t> order(train_set.size());
  std::vector<nn::Example> batch;
  for (int epoch = 1;; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 shuffler(derive_seed(config.seed, 0x5E1u, epoch));
    shuffle(order.begin(), order.end(), shuffler);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      const nn::DropoutMode mode{true, params.rng_state};
      params.rng_state = mix64(params.rng_state + kGoldenGamma);
      nn::LossResult step;
      try {
        step = nn::loss_and_gradients(params, net, batch, loss, mode, config.threads);
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("epoch {}: {}", epoch, e.what()));
      }
      loss_sum += step.loss * static_cast<double>(batch.size());
      nn::adam_step(params, step.gradients, adam, config.adam);
    }

    EpochMetrics m{epoch, loss_sum / static_cast<double>(train_set.size()), 0.0};
    try {
      m.validation_metric = nn::evaluate_loss(params, net, valid_set, loss, config.threads);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("epoch {}: {}", epoch, e.what()));
    }
    if (!std::isfinite(m.train_loss)) {
      throw NumericError(fmt::format("epoch {}: non-finite training loss", epoch));
    }
    report.epochs.push_back(m);
    const bool keep_going = stopper.update(m.validation_metric);
    if (stopper.improved_last()) report.best.params = params;
    if (on_epoch) on_epoch(m);
    if (!keep_going) break;
  }

  report.best_epoch = stopper.best_epoch();
  report.best_metric = stopper.best_metric();
  report.stop_reason = stopper.stop_reason();
  if (config.checkpoint_path) {
    nn::save_checkpoint(report.best, *config.checkpoint_path);
    report.checkpoint_path = config.checkpoint_path;
  }
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return report;
}

std::vector<std::vector<double>> predict(const nn::Checkpoint& checkpoint,
                                         std::span<const TrajectoryRecord> records,
                                         unsigned threads) {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(records.size());
  for (const auto& r : records) {
    if (r.padded.size() != checkpoint.config.input_length) {
      throw DataError(fmt::format(
          "record padded length {} differs from model input length {}",
          r.padded.size(), checkpoint.config.input_length));
    }
    inputs.push_back(r.padded);
  }
  return nn::predict_batch(checkpoint.params, checkpoint.config, inputs, threads);
}

std::string train_report_to_json(const TrainReport& report,
                                 const TrainConfig& config) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"validation_metric", e.validation_metric}});
  }
  nlohmann::json j{
      {"target", to_string(config.target)},
      {"monitor", monitored_loss(config.target) == nn::Loss::MAE
                      ? "validation_mae"
                      : "validation_bce"},
      {"seed", config.seed},
      {"batch_size", config.batch_size},
      {"max_epochs", config.max_epochs},
      {"patience", config.patience},
      {"learning_rate", config.adam.learning_rate},
      {"epochs", epochs},
      {"best_epoch", report.best_epoch},
      {"best_metric", report.best_metric},
      {"stop_reason", report.stop_reason},
      {"wall_seconds", report.wall_seconds},
      {"network", nlohmann::json::parse(nn::config_to_json(report.best.config))},
      {"checkpoint", report.checkpoint_path ? report.checkpoint_path->string() : ""}};
  return j.dump(2) + "\n";
}

std::vector<PredictionRow> prediction_rows(
    std::span<const TrajectoryRecord> records,
    const std::vector<std::vector<double>>& outputs, Target target,
    std::span<const std::size_t> record_ids) {
  if (outputs.size() != records.size() || record_ids.size() != records.size()) {
    throw DataError("prediction_rows: records, outputs and ids differ in length");
  }
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto truth = target_values(records[i], target);
    if (outputs[i].size() != truth.size()) {
      throw DataError("model output width does not match target");
    }
    for (std::size_t k = 0; k < truth.size(); ++k) {
      std::string name = target == Target::Both ? (k == 0 ? "mu" : "nu")
                                                : std::string(to_string(target));
      rows.push_back({record_ids[i], std::move(name), truth[k], outputs[i][k]});
    }
  }
  return rows;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
  out << "record_id,target,truth,prediction\n";
  for (const auto& r : rows) {
    out << r.record_id << ',' << r.target << ',' << format_real(r.truth) << ','
        << format_real(r.prediction) << '\n';
  }
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "record_id,target,truth,prediction") {
    throw DataError("predictions header must be record_id,target,truth,prediction");
  }
  std::vector<PredictionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) {
      throw DataError(fmt::format("predictions line {}: expected 4 fields", line_no));
    }
    try {
      const auto id = parse_integer(f[0], "record_id");
      if (id < 0) throw DataError("negative record_id");
      if (f[1] != "mu" && f[1] != "nu" && f[1] != "delay") {
        throw DataError("unknown target '" + std::string(f[1]) + "'");
      }
      rows.push_back({static_cast<std::size_t>(id), std::string(f[1]),
                      parse_real(f[2], "truth"), parse_real(f[3], "prediction")});
    } catch (const DataError& e) {
      throw DataError(fmt::format("predictions line {}: {}", line_no, e.what()));
    }
  }
  return rows;
}

}  // namespace fraclab
