#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fraclab/nn/tensor.hpp"
#include "fraclab/rng.hpp"

namespace fraclab::nn {

enum class Activation { ReLU, Linear, Sigmoid };

inline double logistic(double z) {
  // Split by sign so exp never overflows.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// 1-D convolution, same length, ReLU.
//
// input  [time x channels], kernel [filters x channels x width], bias [filters]
// out[t, f] = relu(bias[f] + sum_{c,k} kernel[f, c, k] input[t + k - width/2, c])
// with zeros outside [0, time).

Tensor conv1d_forward(const Tensor& input, const Tensor& kernel,
                      const Tensor& bias);

/// Accumulates into d_kernel and d_bias; returns d_input. `output` is the
/// post-ReLU forward result.
Tensor conv1d_backward(const Tensor& input, const Tensor& kernel,
                       const Tensor& output, const Tensor& d_output,
                       Tensor& d_kernel, Tensor& d_bias);

// ---------------------------------------------------------------------------
// LSTM. Gate blocks are stacked in the order input, forget, candidate, output:
// rows [0,H) -> i, [H,2H) -> f, [2H,3H) -> g, [3H,4H) -> o.

struct LstmWeights {
  const Tensor& input;      // [4H x D]
  const Tensor& recurrent;  // [4H x H]
  const Tensor& bias;       // [4H]
  std::size_t units() const { return recurrent.dim(1); }
  std::size_t input_width() const { return input.dim(1); }
};

struct LstmGrads {
  Tensor& input;
  Tensor& recurrent;
  Tensor& bias;
};

struct LstmStep {
  std::vector<double> h;
  std::vector<double> c;
  std::vector<double> gates;  // activated i, f, g, o (4H)
};

/// i, f, o = logistic(W x + U h + b), g = tanh(...), c = f c_prev + i g,
/// h = o tanh(c).
LstmStep lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmWeights& w);

struct LstmStepGrads {
  std::vector<double> x;
  std::vector<double> h_prev;
  std::vector<double> c_prev;
};

/// Reverse-mode through one step given upstream dh, dc. Accumulates weight
/// gradients into `grads`.
LstmStepGrads lstm_cell_backward(std::span<const double> x,
                                 std::span<const double> h_prev,
                                 std::span<const double> c_prev,
                                 const LstmStep& step, std::span<const double> dh,
                                 std::span<const double> dc, const LstmWeights& w,
                                 LstmGrads& grads);

// ---------------------------------------------------------------------------
// Bidirectional layer. Output [time x 2H]: columns [0,H) hold the forward
// state after reading x(0..t), columns [H,2H) the backward state after reading
// x(T-1..t).

struct LstmDirectionCache {
  Tensor gates;  // [T x 4H], indexed by time
  Tensor c;      // [T x H]
  Tensor h;      // [T x H]
};

struct BiLstmCache {
  Tensor input;
  LstmDirectionCache forward;
  LstmDirectionCache backward;
};

Tensor bilstm_forward(const Tensor& sequence, const LstmWeights& fwd,
                      const LstmWeights& bwd, BiLstmCache* cache = nullptr);

/// Returns d_sequence; accumulates both directions' weight gradients.
Tensor bilstm_backward(const BiLstmCache& cache, const Tensor& d_output,
                       const LstmWeights& fwd, const LstmWeights& bwd,
                       LstmGrads fwd_grads, LstmGrads bwd_grads);

// ---------------------------------------------------------------------------
// Inverted dropout. Training zeroes each entry with probability `rate` and
// scales survivors by 1 / (1 - rate); evaluation returns the input. When
// `mask` is given it receives the per-entry multiplier.

Tensor dropout(const Tensor& input, double rate, bool training, SplitMix64& rng,
               Tensor* mask = nullptr);

// ---------------------------------------------------------------------------
// Dense: out = act(W x + b), W [out x in], b [out].

std::vector<double> dense_forward(std::span<const double> input,
                                  const Tensor& weights, const Tensor& bias,
                                  Activation activation);

/// `output` is the activated forward result. Accumulates dW, db; returns dx.
std::vector<double> dense_backward(std::span<const double> input,
                                   const Tensor& weights,
                                   std::span<const double> output,
                                   std::span<const double> d_output,
                                   Activation activation, Tensor& d_weights,
                                   Tensor& d_bias);

}  // namespace fraclab::nn
