#include "fraclab/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "fraclab/errors.hpp"
#include "fraclab/nn/layers.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

namespace fraclab::nn {

std::string_view to_string(Head head) {
  return head == Head::Linear ? "linear" : "sigmoid";
}

Head parse_head(std::string_view text) {
  if (text == "linear") return Head::Linear;
  if (text == "sigmoid") return Head::Sigmoid;
  throw DomainError("unknown head '" + std::string(text) + "'");
}

void NetworkConfig::validate() const {
  if (conv1_filters == 0 || conv2_filters == 0 || kernel_size == 0 ||
      lstm_layers == 0 || lstm_units == 0 || dense_units == 0 ||
      input_length == 0) {
    throw DomainError("network sizes must all be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw DomainError("dropout rate must lie in [0, 1)");
  }
  if (outputs == 0 || outputs > 2 || (head == Head::Sigmoid && outputs != 1)) {
    throw DomainError("head must be linear with 1-2 outputs or sigmoid with 1");
  }
}

Tensor& ModelParameters::at(std::string_view name) {
  for (auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw DataError("no parameter tensor named '" + std::string(name) + "'");
}

const Tensor& ModelParameters::at(std::string_view name) const {
  return const_cast<ModelParameters*>(this)->at(name);
}

std::size_t ModelParameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.value.size();
  return n;
}

namespace {

// Tensor order is fixed, so layers are addressed by index.
constexpr std::size_t kConv1Kernel = 0, kConv1Bias = 1, kConv2Kernel = 2,
                      kConv2Bias = 3, kFirstLstm = 4, kTensorsPerLstm = 6;

std::size_t dense_index(const NetworkConfig& c) {
  return kFirstLstm + kTensorsPerLstm * c.lstm_layers;
}

std::vector<NamedTensor> layout(const NetworkConfig& c) {
  c.validate();
  const std::size_t H = c.lstm_units, K = c.kernel_size;
  std::vector<NamedTensor> t;
  t.push_back({"conv1.kernel", Tensor({c.conv1_filters, 1, K})});
  t.push_back({"conv1.bias", Tensor({c.conv1_filters})});
  t.push_back({"conv2.kernel", Tensor({c.conv2_filters, c.conv1_filters, K})});
  t.push_back({"conv2.bias", Tensor({c.conv2_filters})});
  for (std::size_t l = 0; l < c.lstm_layers; ++l) {
    const std::size_t D = l == 0 ? c.conv2_filters : 2 * H;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = fmt::format("lstm{}.{}.", l, dir);
      t.push_back({prefix + "input", Tensor({4 * H, D})});
      t.push_back({prefix + "recurrent", Tensor({4 * H, H})});
      t.push_back({prefix + "bias", Tensor({4 * H})});
    }
  }
  t.push_back({"dense.weights", Tensor({c.dense_units, 2 * H})});
  t.push_back({"dense.bias", Tensor({c.dense_units})});
  t.push_back({"head.weights", Tensor({c.outputs, c.dense_units})});
  t.push_back({"head.bias", Tensor({c.outputs})});
  return t;
}

void fill_uniform(Tensor& t, double limit, SplitMix64& rng) {
  for (double& v : t.data()) v = (2.0 * rng.uniform() - 1.0) * limit;
}

}  // namespace

ModelParameters zero_parameters(const NetworkConfig& config) {
  return ModelParameters{layout(config), 0};
}

ModelParameters init_parameters(const NetworkConfig& c, std::uint64_t seed) {
  ModelParameters p = zero_parameters(c);
  p.rng_state = derive_seed(seed, 0xD20u);
  SplitMix64 rng(seed);
  const std::size_t H = c.lstm_units, K = c.kernel_size;
  auto glorot = [](double fan_in, double fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
  };
  fill_uniform(p.tensors[kConv1Kernel].value,
               glorot(1.0 * K, static_cast<double>(c.conv1_filters * K)), rng);
  fill_uniform(p.tensors[kConv2Kernel].value,
               glorot(static_cast<double>(c.conv1_filters * K),
                      static_cast<double>(c.conv2_filters * K)),
               rng);
  for (std::size_t l = 0; l < c.lstm_layers; ++l) {
    const double D = l == 0 ? static_cast<double>(c.conv2_filters) : 2.0 * H;
    for (std::size_t d = 0; d < 2; ++d) {
      const std::size_t base = kFirstLstm + kTensorsPerLstm * l + 3 * d;
      fill_uniform(p.tensors[base].value, glorot(D, 4.0 * H), rng);
      fill_uniform(p.tensors[base + 1].value,
                   glorot(static_cast<double>(H), 4.0 * H), rng);
      Tensor& bias = p.tensors[base + 2].value;
      for (std::size_t k = H; k < 2 * H; ++k) bias[k] = 1.0;
    }
  }
  const std::size_t di = dense_index(c);
  fill_uniform(p.tensors[di].value,
               glorot(2.0 * H, static_cast<double>(c.dense_units)), rng);
  fill_uniform(p.tensors[di + 2].value,
               glorot(static_cast<double>(c.dense_units),
                      static_cast<double>(c.outputs)),
               rng);
  return p;
}

std::size_t parameter_count(const NetworkConfig& c) {
  c.validate();
  const std::size_t H = c.lstm_units, K = c.kernel_size;
  std::size_t n = c.conv1_filters * K + c.conv1_filters;
  n += c.conv2_filters * c.conv1_filters * K + c.conv2_filters;
  for (std::size_t l = 0; l < c.lstm_layers; ++l) {
    const std::size_t D = l == 0 ? c.conv2_filters : 2 * H;
    n += 2 * (4 * H * D + 4 * H * H + 4 * H);
  }
  n += c.dense_units * 2 * H + c.dense_units;
  n += c.outputs * c.dense_units + c.outputs;
  return n;
}

void check_layout(const ModelParameters& params, const NetworkConfig& config) {
  const auto expected = layout(config);
  if (params.tensors.size() != expected.size()) {
    throw DataError(fmt::format("parameter set has {} tensors, config expects {}",
                                params.tensors.size(), expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& got = params.tensors[i];
    if (got.name != expected[i].name ||
        got.value.shape() != expected[i].value.shape()) {
      throw DataError(fmt::format("parameter {} is {} {}, config expects {} {}",
                                  i, got.name, got.value.shape_string(),
                                  expected[i].name,
                                  expected[i].value.shape_string()));
    }
  }
}

namespace {

LstmWeights lstm_view(const ModelParameters& p, std::size_t layer,
                      std::size_t dir) {
  const std::size_t base = kFirstLstm + kTensorsPerLstm * layer + 3 * dir;
  return {p.tensors[base].value, p.tensors[base + 1].value,
          p.tensors[base + 2].value};
}

LstmGrads lstm_grads(ModelParameters& g, std::size_t layer, std::size_t dir) {
  const std::size_t base = kFirstLstm + kTensorsPerLstm * layer + 3 * dir;
  return {g.tensors[base].value, g.tensors[base + 1].value,
          g.tensors[base + 2].value};
}

struct ForwardCache {
  Tensor input;
  Tensor conv1;
  Tensor conv2;
  std::vector<BiLstmCache> lstm;
  std::vector<Tensor> lstm_masks;  // for layers 0..L-2, on the full sequence
  std::vector<double> summary;     // last layer, before dropout
  Tensor summary_mask;
  std::vector<double> summary_dropped;
  std::vector<double> dense;
  std::vector<double> logits;
};

// Returns head logits; fills cache when given.
std::vector<double> forward_logits(const ModelParameters& p,
                                   const NetworkConfig& c,
                                   std::span<const double> input,
                                   DropoutMode mode, std::size_t sample_index,
                                   ForwardCache* cache) {
  if (input.size() != c.input_length) {
    throw DataError(fmt::format("network input has length {}, config expects {}",
                                input.size(), c.input_length));
  }
  SplitMix64 rng(derive_seed(mode.seed, sample_index));
  const std::size_t H = c.lstm_units, L = c.lstm_layers;

  Tensor x({c.input_length, 1}, std::vector<double>(input.begin(), input.end()));
  Tensor h1 = conv1d_forward(x, p.tensors[kConv1Kernel].value,
                             p.tensors[kConv1Bias].value);
  Tensor h2 = conv1d_forward(h1, p.tensors[kConv2Kernel].value,
                             p.tensors[kConv2Bias].value);

  std::vector<BiLstmCache> lstm_caches(cache ? L : 0);
  std::vector<Tensor> masks;
  Tensor seq = std::move(h2);
  Tensor conv2_copy;
  if (cache) conv2_copy = seq;
  Tensor last;
  for (std::size_t l = 0; l < L; ++l) {
    Tensor out = bilstm_forward(seq, lstm_view(p, l, 0), lstm_view(p, l, 1),
                                cache ? &lstm_caches[l] : nullptr);
    if (l + 1 < L) {
      Tensor mask;
      seq = dropout(out, c.dropout_rate, mode.training, rng,
                    cache ? &mask : nullptr);
      if (cache) masks.push_back(std::move(mask));
    } else {
      last = std::move(out);
    }
  }

  const std::size_t T = last.dim(0);
  Tensor summary({2 * H});
  for (std::size_t k = 0; k < H; ++k) {
    summary[k] = last(T - 1, k);
    summary[H + k] = last(0, H + k);
  }
  Tensor summary_mask;
  Tensor dropped = dropout(summary, c.dropout_rate, mode.training, rng,
                           cache ? &summary_mask : nullptr);

  const std::size_t di = dense_index(c);
  std::vector<double> dense =
      dense_forward(dropped.data(), p.tensors[di].value, p.tensors[di + 1].value,
                    Activation::ReLU);
  std::vector<double> logits =
      dense_forward(dense, p.tensors[di + 2].value, p.tensors[di + 3].value,
                    Activation::Linear);
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite network output");
    }
  }
  if (cache) {
    cache->input = std::move(x);
    cache->conv1 = std::move(h1);
    cache->conv2 = std::move(conv2_copy);
    cache->lstm = std::move(lstm_caches);
    cache->lstm_masks = std::move(masks);
    cache->summary.assign(summary.data().begin(), summary.data().end());
    cache->summary_mask = std::move(summary_mask);
    cache->summary_dropped.assign(dropped.data().begin(), dropped.data().end());
    cache->dense = dense;
    cache->logits = logits;
  }
  return logits;
}

void backward(const ModelParameters& p, const NetworkConfig& c,
              const ForwardCache& cache, std::span<const double> d_logits,
              ModelParameters& g) {
  const std::size_t H = c.lstm_units, L = c.lstm_layers;
  const std::size_t di = dense_index(c);
  std::vector<double> d_dense =
      dense_backward(cache.dense, p.tensors[di + 2].value, cache.logits,
                     d_logits, Activation::Linear, g.tensors[di + 2].value,
                     g.tensors[di + 3].value);
  std::vector<double> d_dropped =
      dense_backward(cache.summary_dropped, p.tensors[di].value, cache.dense,
                     d_dense, Activation::ReLU, g.tensors[di].value,
                     g.tensors[di + 1].value);

  const std::size_t T = cache.input.dim(0);
  Tensor d_seq({T, 2 * H});
  for (std::size_t k = 0; k < H; ++k) {
    d_seq(T - 1, k) = d_dropped[k] * cache.summary_mask[k];
    d_seq(0, H + k) = d_dropped[H + k] * cache.summary_mask[H + k];
  }
  for (std::size_t l = L; l-- > 0;) {
    Tensor d_in = bilstm_backward(cache.lstm[l], d_seq, lstm_view(p, l, 0),
                                  lstm_view(p, l, 1), lstm_grads(g, l, 0),
                                  lstm_grads(g, l, 1));
    if (l > 0) {
      const Tensor& mask = cache.lstm_masks[l - 1];
      for (std::size_t i = 0; i < d_in.size(); ++i) d_in[i] *= mask[i];
    }
    d_seq = std::move(d_in);
  }
  Tensor d_conv1 = conv1d_backward(cache.conv1, p.tensors[kConv2Kernel].value,
                                   cache.conv2, d_seq, g.tensors[kConv2Kernel].value,
                                   g.tensors[kConv2Bias].value);
  conv1d_backward(cache.input, p.tensors[kConv1Kernel].value, cache.conv1,
                  d_conv1, g.tensors[kConv1Kernel].value,
                  g.tensors[kConv1Bias].value);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Loss contribution of one sample (not yet divided by batch size) and its
// gradient with respect to the logits.
double sample_loss(const NetworkConfig& c, std::span<const double> logits,
                   std::span<const double> target, Loss loss,
                   std::vector<double>* d_logits) {
  if (target.size() != c.outputs) {
    throw DataError(fmt::format("example target has {} values, head has {}",
                                target.size(), c.outputs));
  }
  double total = 0.0;
  if (d_logits) d_logits->assign(c.outputs, 0.0);
  if (loss == Loss::MAE) {
    const bool sig = c.head == Head::Sigmoid;
    const double inv = 1.0 / static_cast<double>(c.outputs);
    for (std::size_t k = 0; k < c.outputs; ++k) {
      const double pred = sig ? logistic(logits[k]) : logits[k];
      const double diff = pred - target[k];
      total += std::abs(diff) * inv;
      if (d_logits) {
        const double sign = diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0;
        (*d_logits)[k] = sign * inv * (sig ? pred * (1.0 - pred) : 1.0);
      }
    }
  } else {
    if (c.head != Head::Sigmoid) {
      throw DomainError("binary cross-entropy needs the sigmoid head");
    }
    const double z = logits[0], y = target[0];
    total = softplus(z) - y * z;
    if (d_logits) (*d_logits)[0] = logistic(z) - y;
  }
  if (!std::isfinite(total)) throw NumericError("non-finite loss");
  return total;
}

// Samples per gradient block; fixed so reduction order ignores thread count.
constexpr std::size_t kBlock = 8;

}  // namespace

std::vector<double> forward(const ModelParameters& params,
                            const NetworkConfig& config,
                            std::span<const double> input, DropoutMode mode,
                            std::size_t sample_index) {
  std::vector<double> out =
      forward_logits(params, config, input, mode, sample_index, nullptr);
  if (config.head == Head::Sigmoid) {
    for (double& v : out) v = logistic(v);
  }
  return out;
}

LossResult loss_and_gradients(const ModelParameters& params,
                              const NetworkConfig& config,
                              std::span<const Example> batch, Loss loss,
                              DropoutMode mode, unsigned threads) {
  if (batch.empty()) throw DataError("loss_and_gradients: empty batch");
  const std::size_t blocks = (batch.size() + kBlock - 1) / kBlock;
  std::vector<ModelParameters> block_grads(blocks);
  std::vector<double> block_loss(blocks, 0.0);

  parallel_for(blocks, threads, [&](std::size_t b) {
    ModelParameters g = zero_parameters(config);
    double total = 0.0;
    ForwardCache cache;
    std::vector<double> d_logits;
    const std::size_t end = std::min(batch.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto& ex = batch[i];
      std::vector<double> logits =
          forward_logits(params, config, ex.input, mode, i, &cache);
      total += sample_loss(config, logits, ex.target, loss, &d_logits);
      backward(params, config, cache, d_logits, g);
    }
    block_grads[b] = std::move(g);
    block_loss[b] = total;
  });

  LossResult result{0.0, std::move(block_grads[0])};
  result.loss = block_loss[0];
  for (std::size_t b = 1; b < blocks; ++b) {
    result.loss += block_loss[b];
    for (std::size_t t = 0; t < result.gradients.tensors.size(); ++t) {
      auto dst = result.gradients.tensors[t].value.data();
      auto src = block_grads[b].tensors[t].value.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  result.loss *= inv;
  for (auto& t : result.gradients.tensors) {
    for (double& v : t.value.data()) v *= inv;
  }
  if (!std::isfinite(result.loss)) throw NumericError("non-finite batch loss");
  return result;
}

double evaluate_loss(const ModelParameters& params, const NetworkConfig& config,
                     std::span<const Example> batch, Loss loss,
                     unsigned threads) {
  if (batch.empty()) throw DataError("evaluate_loss: empty batch");
  const std::size_t blocks = (batch.size() + kBlock - 1) / kBlock;
  std::vector<double> block_loss(blocks, 0.0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    double total = 0.0;
    const std::size_t end = std::min(batch.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto logits =
          forward_logits(params, config, batch[i].input, {}, i, nullptr);
      total += sample_loss(config, logits, batch[i].target, loss, nullptr);
    }
    block_loss[b] = total;
  });
  double sum = 0.0;
  for (double v : block_loss) sum += v;
  return sum / static_cast<double>(batch.size());
}

std::vector<std::vector<double>> predict_batch(
    const ModelParameters& params, const NetworkConfig& config,
    std::span<const std::vector<double>> inputs, unsigned threads) {
  std::vector<std::vector<double>> out(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) {
    out[i] = forward(params, config, inputs[i]);
  });
  return out;
}

}  // namespace fraclab::nn
