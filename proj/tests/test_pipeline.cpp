#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "fraclab/errors.hpp"
#include "fraclab/nn/checkpoint.hpp"
#include "fraclab/pipeline.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

namespace {

struct Run {
  int stop_epoch;
  int best_epoch;
  std::string reason;
};

Run replay(const std::vector<double>& metrics, int patience, int max_epochs) {
  EarlyStopping s(patience, max_epochs);
  for (double m : metrics) {
    if (!s.update(m)) break;
  }
  return {s.epochs_seen(), s.best_epoch(), s.stop_reason()};
}

std::vector<TrajectoryRecord> small_corpus() {
  GridSpec g = preset_grid("desk");
  g.mu_step = 0.25;
  g.nu_step = 0.3;
  return build_corpus(g, 5).records;
}

nn::NetworkConfig small_net() {
  nn::NetworkConfig c;
  c.conv1_filters = 3;
  c.conv2_filters = 4;
  c.lstm_layers = 1;
  c.lstm_units = 4;
  c.dense_units = 6;
  return c;
}

TrainConfig quick(Target target) {
  TrainConfig t;
  t.max_epochs = 4;
  t.patience = 2;
  t.batch_size = 16;
  t.target = target;
  t.seed = 17;
  t.threads = 2;
  t.adam.learning_rate = 3e-3;
  return t;
}

}  // namespace

TEST(EarlyStopping, PatienceOneStopsAfterNoImprovement) {
  const auto r = replay({0.5, 0.5, 0.1}, 1, 200);
  EXPECT_EQ(r.stop_epoch, 2);
  EXPECT_EQ(r.best_epoch, 1);
  EXPECT_EQ(r.reason, "patience");
}

TEST(EarlyStopping, PlateauAfterImprovement) {
  std::vector<double> m;
  for (int e = 1; e <= 30; ++e) m.push_back(1.0 / e);
  m.resize(200, 0.5);
  const auto r = replay(m, 20, 200);
  EXPECT_EQ(r.best_epoch, 30);
  EXPECT_EQ(r.stop_epoch, 50);
  EXPECT_EQ(r.reason, "patience");
}

TEST(EarlyStopping, TiesDoNotImprove) {
  std::vector<double> m{1.0, 0.4};
  m.resize(100, 0.4);
  const auto r = replay(m, 20, 200);
  EXPECT_EQ(r.best_epoch, 2);
  EXPECT_EQ(r.stop_epoch, 22);
}

TEST(EarlyStopping, LateImprovementResetsPatience) {
  std::vector<double> m(200, 1.0);
  m[0] = 0.9;
  m[19] = 0.8;  // epoch 20, just inside the window opened at epoch 1
  const auto r = replay(m, 20, 200);
  EXPECT_EQ(r.best_epoch, 20);
  EXPECT_EQ(r.stop_epoch, 40);
}

TEST(EarlyStopping, MaxEpochs) {
  std::vector<double> m(300);
  for (int e = 0; e < 300; ++e) m[e] = 1.0 - 1e-3 * e;
  const auto r = replay(m, 20, 200);
  EXPECT_EQ(r.stop_epoch, 200);
  EXPECT_EQ(r.best_epoch, 200);
  EXPECT_EQ(r.reason, "max_epochs");
}

TEST(EarlyStopping, NeverRunsPastPatience) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> m(200);
    for (auto& v : m) v = rng.uniform();
    const int patience = 1 + static_cast<int>(rng.below(30));
    const auto r = replay(m, patience, 200);
    EXPECT_LE(r.stop_epoch - r.best_epoch, patience);
    const double best = *std::min_element(m.begin(), m.begin() + r.stop_epoch);
    EXPECT_EQ(m[r.best_epoch - 1], best);
    EXPECT_EQ(std::find(m.begin(), m.end(), best) - m.begin(), r.best_epoch - 1);
  }
}

TEST(Pipeline, TargetsAndHeads) {
  TrajectoryRecord r;
  r.mu = 1.25;
  r.nu = 0.4;
  r.kind = MapKind::Plain;
  EXPECT_EQ(target_values(r, Target::Both), (std::vector<double>{1.25, 0.4}));
  EXPECT_EQ(target_values(r, Target::DelayClass), std::vector<double>{0.0});
  EXPECT_EQ(configure_for(Target::DelayClass, {}).head, nn::Head::Sigmoid);
  EXPECT_EQ(configure_for(Target::Both, {}).outputs, 2u);
  EXPECT_EQ(parse_target("nu"), Target::Nu);
  EXPECT_THROW(parse_target("x0"), DomainError);
}

TEST(Pipeline, ShuffleIsPermutation) {
  std::vector<std::size_t> order(1000);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(1, 2, 3));
  shuffle(order.begin(), order.end(), rng);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(order.begin(), order.end()));
}

TEST(Pipeline, TrainingIsDeterministic) {
  const auto records = small_corpus();
  const auto a = train(records, small_net(), quick(Target::Mu));
  auto cfg = quick(Target::Mu);
  cfg.threads = 1;
  const auto b = train(records, small_net(), cfg);
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].train_loss, b.epochs[i].train_loss);
    EXPECT_EQ(a.epochs[i].validation_metric, b.epochs[i].validation_metric);
  }
  double best = a.epochs.front().validation_metric;
  for (const auto& e : a.epochs) best = std::min(best, e.validation_metric);
  EXPECT_EQ(a.best_metric, best);
}

TEST(Pipeline, CheckpointReproducesBestMetric) {
  const auto records = small_corpus();
  for (Target target : {Target::Nu, Target::DelayClass}) {
    auto cfg = quick(target);
    auto local = records;
    if (target == Target::DelayClass) {
      for (std::size_t i = 0; i < local.size(); i += 2) local[i].kind = MapKind::Plain;
    }
    const auto path = std::filesystem::temp_directory_path() /
                      ("fraclab_pipeline_" + std::string(to_string(target)) + ".ckpt");
    cfg.checkpoint_path = path;
    const auto report = train(local, small_net(), cfg);
    const auto ck = nn::load_checkpoint(path);
    const auto valid = make_examples(select_split(local, Split::Validation), target);
    const double again = nn::evaluate_loss(ck.params, ck.config, valid,
                                           monitored_loss(target), 1);
    EXPECT_NEAR(again, report.best_metric, 1e-12);
    EXPECT_EQ(ck.target, to_string(target));
    std::filesystem::remove(path);
  }
}

TEST(Pipeline, Errors) {
  auto records = small_corpus();
  for (auto& r : records) {
    if (r.split == Split::Validation) r.split = Split::Train;
  }
  EXPECT_THROW(train(records, small_net(), quick(Target::Mu)), DataError);
  auto cfg = quick(Target::Mu);
  cfg.batch_size = 0;
  EXPECT_THROW(train(small_corpus(), small_net(), cfg), DomainError);
}

TEST(Pipeline, PredictZeroModelAndRepeatability) {
  const auto records = small_corpus();
  const auto net = configure_for(Target::DelayClass, small_net());
  const nn::Checkpoint zero{net, nn::zero_parameters(net), "delay"};
  for (const auto& out : predict(zero, records)) EXPECT_EQ(out, std::vector<double>{0.5});

  const auto mu_net = configure_for(Target::Mu, small_net());
  const nn::Checkpoint ck{mu_net, nn::init_parameters(mu_net, 4), "mu"};
  EXPECT_EQ(predict(ck, records, 1), predict(ck, records, 3));

  auto shorter = records;
  shorter[0].padded.pop_back();
  EXPECT_THROW(predict(ck, shorter), DataError);
}

TEST(Pipeline, PredictionCsvRoundTrip) {
  const auto records = small_corpus();
  const std::vector<std::vector<double>> outputs{{0.1, 0.2}, {1.0 / 3.0, 0.7}};
  const std::vector<std::size_t> ids{4, 9};
  const auto rows = prediction_rows(std::span(records).first(2), outputs, Target::Both, ids);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].target, "nu");
  EXPECT_EQ(rows[1].record_id, 4u);
  std::stringstream s;
  write_predictions_csv(s, rows);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "record_id,target,truth,prediction");
  const auto back = read_predictions_csv(s);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].record_id, rows[i].record_id);
    EXPECT_EQ(back[i].target, rows[i].target);
    EXPECT_EQ(back[i].truth, rows[i].truth);
    EXPECT_EQ(back[i].prediction, rows[i].prediction);
  }
  std::istringstream bad("record_id,target,truth,prediction\n1,mu,abc,0.2\n");
  EXPECT_THROW(read_predictions_csv(bad), DataError);
}
