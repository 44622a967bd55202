#include "fraclab/nn/layers.hpp"

#include <cmath>
#include <string>

#include "fraclab/errors.hpp"

namespace fraclab::nn {

// --------------------------------------------------------------------------
// Convolution

namespace {

void check_conv_shapes(const Tensor& input, const Tensor& kernel,
                       const Tensor& bias) {
  if (input.rank() != 2 || input.dim(0) == 0) {
    throw DataError("conv1d: input must be [time x channels] with time >= 1, got " +
                    input.shape_string());
  }
  if (kernel.rank() != 3 || kernel.dim(1) != input.dim(1)) {
    throw DataError("conv1d: kernel " + kernel.shape_string() +
                    " does not match input " + input.shape_string());
  }
  expect_shape(bias, {kernel.dim(0)}, "conv1d bias");
}

}  // namespace

Tensor conv1d_forward(const Tensor& input, const Tensor& kernel,
                      const Tensor& bias) {
  check_conv_shapes(input, kernel, bias);
  const std::size_t T = input.dim(0), C = input.dim(1);
  const std::size_t F = kernel.dim(0), K = kernel.dim(2);
  const auto pad = static_cast<long>(K / 2);
  Tensor out({T, F});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      double acc = bias[f];
      const double* w = kernel.ptr() + f * C * K;
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(t + k) - pad;
        if (src < 0 || src >= static_cast<long>(T)) continue;
        const double* x = input.ptr() + static_cast<std::size_t>(src) * C;
        for (std::size_t c = 0; c < C; ++c) acc += w[c * K + k] * x[c];
      }
      out(t, f) = acc > 0.0 ? acc : 0.0;
    }
  }
  return out;
}

Tensor conv1d_backward(const Tensor& input, const Tensor& kernel,
                       const Tensor& output, const Tensor& d_output,
                       Tensor& d_kernel, Tensor& d_bias) {
  check_conv_shapes(input, kernel, d_bias);
  const std::size_t T = input.dim(0), C = input.dim(1);
  const std::size_t F = kernel.dim(0), K = kernel.dim(2);
  expect_shape(output, {T, F}, "conv1d output");
  expect_shape(d_output, {T, F}, "conv1d d_output");
  expect_shape(d_kernel, kernel.shape(), "conv1d d_kernel");
  const auto pad = static_cast<long>(K / 2);
  Tensor d_input({T, C});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      if (output(t, f) <= 0.0) continue;
      const double g = d_output(t, f);
      if (g == 0.0) continue;
      d_bias[f] += g;
      const double* w = kernel.ptr() + f * C * K;
      double* dw = d_kernel.ptr() + f * C * K;
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(t + k) - pad;
        if (src < 0 || src >= static_cast<long>(T)) continue;
        const auto s = static_cast<std::size_t>(src);
        const double* x = input.ptr() + s * C;
        double* dx = d_input.ptr() + s * C;
        for (std::size_t c = 0; c < C; ++c) {
          dw[c * K + k] += g * x[c];
          dx[c] += g * w[c * K + k];
        }
      }
    }
  }
  return d_input;
}

// --------------------------------------------------------------------------
// LSTM

namespace {

void check_lstm(const LstmWeights& w) {
  const std::size_t H = w.recurrent.rank() == 2 ? w.recurrent.dim(1) : 0;
  if (H == 0 || w.recurrent.dim(0) != 4 * H) {
    throw DataError("lstm: recurrent weights must be [4H x H], got " +
                    w.recurrent.shape_string());
  }
  if (w.input.rank() != 2 || w.input.dim(0) != 4 * H) {
    throw DataError("lstm: input weights must be [4H x D], got " +
                    w.input.shape_string());
  }
  expect_shape(w.bias, {4 * H}, "lstm bias");
}

// zx must already hold W x + b (4H). Writes activated gates, c, h.
void step_core(const double* zx, const double* h_prev, const double* c_prev,
               const Tensor& U, std::size_t H, double* gates, double* c,
               double* h) {
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double z = zx[r];
    const double* u = U.ptr() + r * H;
    for (std::size_t k = 0; k < H; ++k) z += u[k] * h_prev[k];
    gates[r] = (r >= 2 * H && r < 3 * H) ? std::tanh(z) : logistic(z);
  }
  for (std::size_t k = 0; k < H; ++k) {
    const double i = gates[k], f = gates[H + k], g = gates[2 * H + k],
                 o = gates[3 * H + k];
    c[k] = f * c_prev[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

// Given dh, dc at this step, writes pre-activation gradients dz (4H) and
// dc_prev (H).
void step_backward_core(const double* gates, const double* c,
                        const double* c_prev, const double* dh,
                        const double* dc_in, std::size_t H, double* dz,
                        double* dc_prev) {
  for (std::size_t k = 0; k < H; ++k) {
    const double i = gates[k], f = gates[H + k], g = gates[2 * H + k],
                 o = gates[3 * H + k];
    const double tc = std::tanh(c[k]);
    const double dc = dh[k] * o * (1.0 - tc * tc) + dc_in[k];
    dz[k] = dc * g * i * (1.0 - i);
    dz[H + k] = dc * c_prev[k] * f * (1.0 - f);
    dz[2 * H + k] = dc * i * (1.0 - g * g);
    dz[3 * H + k] = dh[k] * tc * o * (1.0 - o);
    dc_prev[k] = dc * f;
  }
}

void affine_into(const Tensor& W, const Tensor& b, const double* x,
                 std::size_t D, double* out) {
  const std::size_t R = W.dim(0);
  for (std::size_t r = 0; r < R; ++r) {
    double z = b[r];
    const double* w = W.ptr() + r * D;
    for (std::size_t k = 0; k < D; ++k) z += w[k] * x[k];
    out[r] = z;
  }
}

}  // namespace

LstmStep lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmWeights& w) {
  check_lstm(w);
  const std::size_t H = w.units(), D = w.input_width();
  if (x.size() != D || h_prev.size() != H || c_prev.size() != H) {
    throw DataError("lstm_cell_step: input/state widths do not match weights");
  }
  LstmStep s{std::vector<double>(H), std::vector<double>(H),
             std::vector<double>(4 * H)};
  std::vector<double> zx(4 * H);
  affine_into(w.input, w.bias, x.data(), D, zx.data());
  step_core(zx.data(), h_prev.data(), c_prev.data(), w.recurrent, H,
            s.gates.data(), s.c.data(), s.h.data());
  return s;
}

LstmStepGrads lstm_cell_backward(std::span<const double> x,
                                 std::span<const double> h_prev,
                                 std::span<const double> c_prev,
                                 const LstmStep& step, std::span<const double> dh,
                                 std::span<const double> dc, const LstmWeights& w,
                                 LstmGrads& grads) {
  check_lstm(w);
  const std::size_t H = w.units(), D = w.input_width();
  if (x.size() != D || h_prev.size() != H || c_prev.size() != H ||
      dh.size() != H || dc.size() != H) {
    throw DataError("lstm_cell_backward: widths do not match weights");
  }
  LstmStepGrads out{std::vector<double>(D), std::vector<double>(H),
                    std::vector<double>(H)};
  std::vector<double> dz(4 * H);
  step_backward_core(step.gates.data(), step.c.data(), c_prev.data(), dh.data(),
                     dc.data(), H, dz.data(), out.c_prev.data());
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const double g = dz[r];
    grads.bias[r] += g;
    for (std::size_t k = 0; k < D; ++k) {
      grads.input(r, k) += g * x[k];
      out.x[k] += g * w.input(r, k);
    }
    for (std::size_t k = 0; k < H; ++k) {
      grads.recurrent(r, k) += g * h_prev[k];
      out.h_prev[k] += g * w.recurrent(r, k);
    }
  }
  return out;
}

namespace {

// Runs one direction over `sequence`; reverse=true reads t = T-1 .. 0.
// Writes hidden states into out[:, col_offset : col_offset + H].
void run_direction(const Tensor& sequence, const LstmWeights& w, bool reverse,
                   LstmDirectionCache& cache, Tensor& out,
                   std::size_t col_offset) {
  const std::size_t T = sequence.dim(0), D = sequence.dim(1), H = w.units();
  cache.gates = Tensor({T, 4 * H});
  cache.c = Tensor({T, H});
  cache.h = Tensor({T, H});
  const std::vector<double> zeros(H, 0.0);
  std::vector<double> zx(4 * H);
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    const double* h_prev = s == 0 ? zeros.data()
                                  : cache.h.ptr() + (reverse ? t + 1 : t - 1) * H;
    const double* c_prev = s == 0 ? zeros.data()
                                  : cache.c.ptr() + (reverse ? t + 1 : t - 1) * H;
    affine_into(w.input, w.bias, sequence.ptr() + t * D, D, zx.data());
    step_core(zx.data(), h_prev, c_prev, w.recurrent, H,
              cache.gates.ptr() + t * 4 * H, cache.c.ptr() + t * H,
              cache.h.ptr() + t * H);
    for (std::size_t k = 0; k < H; ++k) out(t, col_offset + k) = cache.h(t, k);
  }
}

void backprop_direction(const Tensor& sequence, const LstmDirectionCache& cache,
                        const Tensor& d_output, std::size_t col_offset,
                        const LstmWeights& w, LstmGrads& grads, bool reverse,
                        Tensor& d_sequence) {
  const std::size_t T = sequence.dim(0), D = sequence.dim(1), H = w.units();
  const std::vector<double> zeros(H, 0.0);
  std::vector<double> dh(H), dh_next(H, 0.0), dc_next(H, 0.0), dc_prev(H),
      dz(4 * H);
  // Visit steps in reverse processing order.
  for (std::size_t s = T; s-- > 0;) {
    const std::size_t t = reverse ? T - 1 - s : s;
    const bool first = s == 0;
    const std::size_t prev_t = reverse ? t + 1 : t - 1;
    const double* h_prev = first ? zeros.data() : cache.h.ptr() + prev_t * H;
    const double* c_prev = first ? zeros.data() : cache.c.ptr() + prev_t * H;
    for (std::size_t k = 0; k < H; ++k) {
      dh[k] = d_output(t, col_offset + k) + dh_next[k];
    }
    step_backward_core(cache.gates.ptr() + t * 4 * H, cache.c.ptr() + t * H,
                       c_prev, dh.data(), dc_next.data(), H, dz.data(),
                       dc_prev.data());
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    const double* x = sequence.ptr() + t * D;
    double* dx = d_sequence.ptr() + t * D;
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double g = dz[r];
      if (g == 0.0) continue;
      grads.bias[r] += g;
      double* gw = grads.input.ptr() + r * D;
      const double* wr = w.input.ptr() + r * D;
      for (std::size_t k = 0; k < D; ++k) {
        gw[k] += g * x[k];
        dx[k] += g * wr[k];
      }
      double* gu = grads.recurrent.ptr() + r * H;
      const double* ur = w.recurrent.ptr() + r * H;
      for (std::size_t k = 0; k < H; ++k) {
        gu[k] += g * h_prev[k];
        dh_next[k] += g * ur[k];
      }
    }
    dc_next = dc_prev;
  }
}

}  // namespace

Tensor bilstm_forward(const Tensor& sequence, const LstmWeights& fwd,
                      const LstmWeights& bwd, BiLstmCache* cache) {
  check_lstm(fwd);
  check_lstm(bwd);
  if (sequence.rank() != 2 || sequence.dim(0) == 0 ||
      sequence.dim(1) != fwd.input_width() || sequence.dim(1) != bwd.input_width() ||
      fwd.units() != bwd.units()) {
    throw DataError("bilstm: sequence " + sequence.shape_string() +
                    " does not match layer weights");
  }
  const std::size_t T = sequence.dim(0), H = fwd.units();
  Tensor out({T, 2 * H});
  BiLstmCache local;
  BiLstmCache& c = cache ? *cache : local;
  run_direction(sequence, fwd, false, c.forward, out, 0);
  run_direction(sequence, bwd, true, c.backward, out, H);
  if (cache) cache->input = sequence;
  return out;
}

Tensor bilstm_backward(const BiLstmCache& cache, const Tensor& d_output,
                       const LstmWeights& fwd, const LstmWeights& bwd,
                       LstmGrads fwd_grads, LstmGrads bwd_grads) {
  const std::size_t T = cache.input.dim(0), H = fwd.units();
  expect_shape(d_output, {T, 2 * H}, "bilstm d_output");
  Tensor d_sequence({T, cache.input.dim(1)});
  backprop_direction(cache.input, cache.forward, d_output, 0, fwd, fwd_grads,
                     false, d_sequence);
  backprop_direction(cache.input, cache.backward, d_output, H, bwd, bwd_grads,
                     true, d_sequence);
  return d_sequence;
}

// --------------------------------------------------------------------------
// Dropout

Tensor dropout(const Tensor& input, double rate, bool training, SplitMix64& rng,
               Tensor* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw DomainError("dropout rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) {
    if (mask) *mask = Tensor(input.shape(), 1.0);
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor m(input.shape());
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    m[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    out[i] = input[i] * m[i];
  }
  if (mask) *mask = std::move(m);
  return out;
}

// --------------------------------------------------------------------------
// Dense

namespace {

double activate(double z, Activation a) {
  switch (a) {
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid:
      return logistic(z);
    case Activation::Linear:
      break;
  }
  return z;
}

double activation_slope(double y, Activation a) {
  switch (a) {
    case Activation::ReLU:
      return y > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid:
      return y * (1.0 - y);
    case Activation::Linear:
      break;
  }
  return 1.0;
}

}  // namespace

std::vector<double> dense_forward(std::span<const double> input,
                                  const Tensor& weights, const Tensor& bias,
                                  Activation activation) {
  if (weights.rank() != 2 || weights.dim(1) != input.size()) {
    throw DataError("dense: weights " + weights.shape_string() +
                    " do not match input width " + std::to_string(input.size()));
  }
  expect_shape(bias, {weights.dim(0)}, "dense bias");
  std::vector<double> out(weights.dim(0));
  affine_into(weights, bias, input.data(), input.size(), out.data());
  for (double& v : out) v = activate(v, activation);
  return out;
}

std::vector<double> dense_backward(std::span<const double> input,
                                   const Tensor& weights,
                                   std::span<const double> output,
                                   std::span<const double> d_output,
                                   Activation activation, Tensor& d_weights,
                                   Tensor& d_bias) {
  const std::size_t O = weights.dim(0), I = weights.dim(1);
  if (input.size() != I || output.size() != O || d_output.size() != O) {
    throw DataError("dense_backward: widths do not match weights");
  }
  std::vector<double> dx(I, 0.0);
  for (std::size_t o = 0; o < O; ++o) {
    const double g = d_output[o] * activation_slope(output[o], activation);
    d_bias[o] += g;
    for (std::size_t i = 0; i < I; ++i) {
      d_weights(o, i) += g * input[i];
      dx[i] += g * weights(o, i);
    }
  }
  return dx;
}

}  // namespace fraclab::nn
