#include <cmath>

#include <gtest/gtest.h>

#include "fraclab/errors.hpp"
#include "fraclab/nn/layers.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;
using namespace fraclab::nn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, SplitMix64& rng, double scale = 0.5) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = scale * (2.0 * rng.uniform() - 1.0);
  return t;
}

std::vector<double> random_vector(std::size_t n, SplitMix64& rng, double scale = 0.5) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Central difference of f with respect to v[i].
template <typename F>
double central(F&& f, double& v, double h = 1e-6) {
  const double keep = v;
  v = keep + h;
  const double up = f();
  v = keep - h;
  const double down = f();
  v = keep;
  return (up - down) / (2 * h);
}

}  // namespace

TEST(Conv1d, ShapeAndZeros) {
  const Tensor input({50, 1}, 0.0);
  const Tensor kernel({32, 1, 5}, 0.3);
  const Tensor bias({32}, 0.0);
  const auto out = conv1d_forward(input, kernel, bias);
  EXPECT_EQ(out.shape(), (std::vector<std::size_t>{50, 32}));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv1d, IdentityKernel) {
  Tensor input({7, 1});
  for (std::size_t t = 0; t < 7; ++t) input(t, 0) = 1.0;
  Tensor kernel({1, 1, 5}, 0.0);
  kernel[2] = 1.0;
  const auto out = conv1d_forward(input, kernel, Tensor({1}, 0.0));
  for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(out(t, 0), 1.0);
}

TEST(Conv1d, SamePaddingEdges) {
  // Box filter over ones: edges see fewer taps.
  const Tensor input({6, 1}, 1.0);
  const Tensor kernel({1, 1, 5}, 1.0);
  const auto out = conv1d_forward(input, kernel, Tensor({1}, 0.0));
  const double expected[] = {3, 4, 5, 5, 4, 3};
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(out(t, 0), expected[t]);
}

TEST(Conv1d, ReluClamps) {
  const Tensor input({4, 1}, 1.0);
  const Tensor kernel({1, 1, 1}, -1.0);
  const auto out = conv1d_forward(input, kernel, Tensor({1}, 0.5));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv1d, ShapeMismatch) {
  EXPECT_THROW(conv1d_forward(Tensor({5, 2}), Tensor({3, 1, 3}), Tensor({3})), DataError);
}

TEST(Conv1d, GradientCheck) {
  SplitMix64 rng(5);
  Tensor input = random_tensor({9, 3}, rng);
  Tensor kernel = random_tensor({4, 3, 3}, rng);
  Tensor bias = random_tensor({4}, rng, 0.1);
  const Tensor up = random_tensor({9, 4}, rng);
  auto loss = [&] { return dot(conv1d_forward(input, kernel, bias).data(), up.data()); };

  const auto out = conv1d_forward(input, kernel, bias);
  Tensor dk(kernel.shape()), db(bias.shape());
  const auto dx = conv1d_backward(input, kernel, out, up, dk, db);
  for (std::size_t i = 0; i < input.size(); ++i)
    EXPECT_LT(rel_error(dx[i], central(loss, input[i])), 1e-6);
  for (std::size_t i = 0; i < kernel.size(); ++i)
    EXPECT_LT(rel_error(dk[i], central(loss, kernel[i])), 1e-6);
  for (std::size_t i = 0; i < bias.size(); ++i)
    EXPECT_LT(rel_error(db[i], central(loss, bias[i])), 1e-6);
}

TEST(Lstm, ZeroWeightsGiveZeroState) {
  const Tensor w({8, 3}), u({8, 2}), b({8});
  const LstmWeights lw{w, u, b};
  const std::vector<double> x{0.4, -1.0, 2.0}, h{0.3, 0.1}, c{0.0, 0.0};
  const auto s = lstm_cell_step(x, h, c, lw);
  for (double v : s.h) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, SaturatedForgetCarriesMemory) {
  const std::size_t H = 2;
  const Tensor w({4 * H, 1}), u({4 * H, H});
  Tensor b({4 * H});
  for (std::size_t k = 0; k < H; ++k) {
    b[k] = -60.0;     // input gate closed
    b[H + k] = 60.0;  // forget gate open
  }
  const LstmWeights lw{w, u, b};
  const std::vector<double> x{0.9}, h{0.2, -0.4}, c{0.7, -1.3};
  const auto s = lstm_cell_step(x, h, c, lw);
  EXPECT_NEAR(s.c[0], 0.7, 1e-15);
  EXPECT_NEAR(s.c[1], -1.3, 1e-15);
}

TEST(Lstm, CellGradientCheck) {
  SplitMix64 rng(17);
  const std::size_t D = 3, H = 4;
  Tensor w = random_tensor({4 * H, D}, rng), u = random_tensor({4 * H, H}, rng);
  Tensor b = random_tensor({4 * H}, rng);
  auto x = random_vector(D, rng), h = random_vector(H, rng), c = random_vector(H, rng);
  const auto up_h = random_vector(H, rng), up_c = random_vector(H, rng);
  auto loss = [&] {
    const auto s = lstm_cell_step(x, h, c, LstmWeights{w, u, b});
    return dot(s.h, up_h) + dot(s.c, up_c);
  };
  const LstmWeights lw{w, u, b};
  const auto step = lstm_cell_step(x, h, c, lw);
  Tensor dw(w.shape()), du(u.shape()), db(b.shape());
  LstmGrads grads{dw, du, db};
  const auto g = lstm_cell_backward(x, h, c, step, up_h, up_c, lw, grads);

  for (std::size_t i = 0; i < D; ++i) EXPECT_LT(rel_error(g.x[i], central(loss, x[i])), 1e-6);
  for (std::size_t i = 0; i < H; ++i) {
    EXPECT_LT(rel_error(g.h_prev[i], central(loss, h[i])), 1e-6);
    EXPECT_LT(rel_error(g.c_prev[i], central(loss, c[i])), 1e-6);
  }
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LT(rel_error(dw[i], central(loss, w[i])), 1e-6);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_LT(rel_error(du[i], central(loss, u[i])), 1e-6);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_LT(rel_error(db[i], central(loss, b[i])), 1e-6);
}

TEST(BiLstm, WidthAndPalindromeSymmetry) {
  SplitMix64 rng(23);
  const std::size_t T = 7, D = 2, H = 32;
  const Tensor w = random_tensor({4 * H, D}, rng), u = random_tensor({4 * H, H}, rng);
  const Tensor b = random_tensor({4 * H}, rng);
  Tensor seq({T, D});
  for (std::size_t t = 0; t <= T / 2; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      seq(t, d) = seq(T - 1 - t, d) = rng.uniform();
    }
  }
  const LstmWeights lw{w, u, b};
  const auto out = bilstm_forward(seq, lw, lw);
  EXPECT_EQ(out.shape(), (std::vector<std::size_t>{T, 2 * H}));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < H; ++k) {
      EXPECT_EQ(out(t, k), out(T - 1 - t, H + k));
    }
  }
}

TEST(BiLstm, GradientCheck) {
  SplitMix64 rng(29);
  const std::size_t T = 5, D = 3, H = 3;
  Tensor fw = random_tensor({4 * H, D}, rng), fu = random_tensor({4 * H, H}, rng),
         fb = random_tensor({4 * H}, rng);
  Tensor bw = random_tensor({4 * H, D}, rng), bu = random_tensor({4 * H, H}, rng),
         bb = random_tensor({4 * H}, rng);
  Tensor seq = random_tensor({T, D}, rng);
  const Tensor up = random_tensor({T, 2 * H}, rng);
  auto loss = [&] {
    return dot(bilstm_forward(seq, {fw, fu, fb}, {bw, bu, bb}).data(), up.data());
  };
  BiLstmCache cache;
  bilstm_forward(seq, {fw, fu, fb}, {bw, bu, bb}, &cache);
  Tensor dfw(fw.shape()), dfu(fu.shape()), dfb(fb.shape());
  Tensor dbw(bw.shape()), dbu(bu.shape()), dbb(bb.shape());
  const auto dseq = bilstm_backward(cache, up, {fw, fu, fb}, {bw, bu, bb},
                                    {dfw, dfu, dfb}, {dbw, dbu, dbb});
  for (std::size_t i = 0; i < seq.size(); ++i)
    EXPECT_LT(rel_error(dseq[i], central(loss, seq[i])), 1e-6);
  const std::pair<Tensor*, Tensor*> pairs[] = {{&fw, &dfw}, {&fu, &dfu}, {&fb, &dfb},
                                               {&bw, &dbw}, {&bu, &dbu}, {&bb, &dbb}};
  for (auto [p, g] : pairs) {
    for (std::size_t i = 0; i < p->size(); ++i)
      EXPECT_LT(rel_error((*g)[i], central(loss, (*p)[i])), 1e-6);
  }
}

TEST(Dropout, Identities) {
  SplitMix64 rng(1);
  const Tensor x = random_tensor({10, 10}, rng);
  EXPECT_EQ(dropout(x, 0.0, true, rng), x);
  EXPECT_EQ(dropout(x, 0.5, false, rng), x);
}

TEST(Dropout, ZeroedFraction) {
  SplitMix64 rng(99);
  const Tensor x({100000}, 1.0);
  Tensor mask;
  const auto y = dropout(x, 0.1, true, rng, &mask);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      ++zeros;
    } else {
      EXPECT_DOUBLE_EQ(y[i], 1.0 / 0.9);
    }
    EXPECT_EQ(y[i], x[i] * mask[i]);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 1e5, 0.1, 0.005);
}

TEST(Dense, ZeroSigmoidAndIdentityLinear) {
  const Tensor w0({3, 3}), b0({3});
  for (double v : dense_forward(std::vector<double>{1, 2, 3}, w0, b0, Activation::Sigmoid))
    EXPECT_EQ(v, 0.5);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const std::vector<double> in{0.2, -4.0, 7.5};
  EXPECT_EQ(dense_forward(in, eye, b0, Activation::Linear), in);
}

TEST(Dense, GradientCheck) {
  SplitMix64 rng(41);
  for (Activation act : {Activation::ReLU, Activation::Linear, Activation::Sigmoid}) {
    Tensor w = random_tensor({4, 5}, rng), b = random_tensor({4}, rng, 0.2);
    auto x = random_vector(5, rng);
    const auto up = random_vector(4, rng);
    auto loss = [&] { return dot(dense_forward(x, w, b, act), up); };
    const auto out = dense_forward(x, w, b, act);
    Tensor dw(w.shape()), db(b.shape());
    const auto dx = dense_backward(x, w, out, up, act, dw, db);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(rel_error(dx[i], central(loss, x[i])), 1e-6);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LT(rel_error(dw[i], central(loss, w[i])), 1e-6);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_LT(rel_error(db[i], central(loss, b[i])), 1e-6);
  }
}
