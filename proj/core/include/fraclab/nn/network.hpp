#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraclab/nn/tensor.hpp"

namespace fraclab::nn {

enum class Head { Linear, Sigmoid };

std::string_view to_string(Head head);
Head parse_head(std::string_view text);

/// conv -> conv -> BiLSTM x lstm_layers (dropout after each) -> dense(ReLU)
/// -> head. The last BiLSTM layer is summarised by its final forward state
/// concatenated with its final backward state.
struct NetworkConfig {
  std::size_t conv1_filters = 32;
  std::size_t conv2_filters = 64;
  std::size_t kernel_size = 5;
  std::size_t lstm_layers = 3;
  std::size_t lstm_units = 32;
  double dropout_rate = 0.10;
  std::size_t dense_units = 20;
  Head head = Head::Linear;
  std::size_t outputs = 1;  // 1 or 2 for Linear, 1 for Sigmoid
  std::size_t input_length = 50;

  /// DomainError on zero sizes, bad dropout or an invalid head/outputs pair.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;
  bool operator==(const NamedTensor&) const = default;
};

/// All network weights in a fixed layout order, plus the dropout stream state.
/// Tensor names:
///   conv1.kernel [c1 x 1 x K], conv1.bias [c1], conv2.kernel [c2 x c1 x K],
///   conv2.bias [c2], lstm{l}.{fwd,bwd}.{input,recurrent,bias}
///   ([4H x D], [4H x H], [4H]), dense.weights [U x 2H], dense.bias [U],
///   head.weights [outputs x U], head.bias [outputs].
struct ModelParameters {
  std::vector<NamedTensor> tensors;
  std::uint64_t rng_state = 0;

  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  std::size_t parameter_count() const;
  bool operator==(const ModelParameters&) const = default;
};

/// Zero-filled parameters with the layout of `config`.
ModelParameters zero_parameters(const NetworkConfig& config);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)) for every weight tensor; biases
/// zero except the LSTM forget-gate block, which starts at 1.
ModelParameters init_parameters(const NetworkConfig& config, std::uint64_t seed);

/// Closed-form parameter count of the layout.
std::size_t parameter_count(const NetworkConfig& config);

/// DataError unless `params` has exactly the layout of `config`.
void check_layout(const ModelParameters& params, const NetworkConfig& config);

struct DropoutMode {
  bool training = false;
  std::uint64_t seed = 0;  // per-sample stream: derive_seed(seed, sample index)
};

/// One sample through the network. Returns `outputs` values: raw for the
/// Linear head, probabilities for the Sigmoid head. NumericError on any
/// non-finite output.
std::vector<double> forward(const ModelParameters& params,
                            const NetworkConfig& config,
                            std::span<const double> input,
                            DropoutMode mode = {}, std::size_t sample_index = 0);

struct Example {
  std::vector<double> input;   // config.input_length values
  std::vector<double> target;  // config.outputs values
};

enum class Loss { MAE, BCE };

struct LossResult {
  double loss = 0.0;            // mean over the batch
  ModelParameters gradients;    // same layout as the parameters
};

/// Mean loss over the batch and its gradient. MAE averages |prediction -
/// target| over outputs and samples (subgradient 0 at a tie). BCE applies to
/// the Sigmoid head and is evaluated from the logit. Samples are processed in
/// fixed blocks whose partial gradients are summed in block order, so the
/// result does not depend on `threads`.
LossResult loss_and_gradients(const ModelParameters& params,
                              const NetworkConfig& config,
                              std::span<const Example> batch, Loss loss,
                              DropoutMode mode = {}, unsigned threads = 1);

/// Mean loss only, evaluation mode.
double evaluate_loss(const ModelParameters& params, const NetworkConfig& config,
                     std::span<const Example> batch, Loss loss,
                     unsigned threads = 1);

/// Evaluation-mode predictions for many inputs.
std::vector<std::vector<double>> predict_batch(
    const ModelParameters& params, const NetworkConfig& config,
    std::span<const std::vector<double>> inputs, unsigned threads = 1);

}  // namespace fraclab::nn
