// Copyright 2026 The AM-MTEEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "ammteeg/checkpoint.h"
#include "ammteeg/errors.h"
#include "ammteeg/ops.h"
#include "ammteeg/optimizer.h"
#include "ammteeg/tape.h"
#include "ammteeg/tensor.h"
#include "support/gradcheck.h"
#include "support/oracles.h"

using namespace ammteeg;

namespace {

LayerParams SingleKernel(std::vector<double> taps, std::size_t padding) {
  const std::size_t k = taps.size();
  LayerParams p = LayerParams::Conv1d(1, 1, k, 1, padding);
  p.weight = Tensor({1, 1, k}, std::move(taps));
  return p;
}

}  // namespace

TEST_CASE("tensor keeps data length equal to the shape product") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(ShapeSize(t.shape()) == t.size());
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ConfigError);
  t.grad()[5] = 1.0;
  CHECK(t.grad().size() == t.size());
  CHECK_THROWS_AS(t.Reshaped({5, 5}), ConfigError);
}

TEST_CASE("conv1d identity kernel reproduces the input") {
  const LayerParams p = SingleKernel({0, 0, 1, 0, 0}, 2);
  const Tensor x({1, 5}, {1, 2, 3, 4, 5});
  CHECK(Conv1dForward(x, p) == x);

  const LayerGrads g = Conv1dBackward(Tensor({1, 5}, 1.0), x, p);
  for (double v : g.input.data()) CHECK(v == 1.0);
}

TEST_CASE("conv1d on a constant signal sums the kernel") {
  const LayerParams p = SingleKernel({1, 1, 1}, 0);
  const Tensor y = Conv1dForward(Tensor({1, 4}, {1, 1, 1, 1}), p);
  CHECK(y == Tensor({1, 2}, {3, 3}));
}

TEST_CASE("conv1d block shape from 3 to 128 channels keeps the length") {
  std::mt19937_64 rng(3);
  LayerParams p = LayerParams::Conv1dSame(3, 128, 5);
  InitializeUniform(p, rng);
  CHECK(Conv1dForward(oracle::Random({3, 32}, rng), p).shape() ==
        Shape{128, 32});
}

TEST_CASE("conv1d forward matches the loop oracle") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 20; ++n) {
    const std::size_t k = 2 * oracle::Uniform(rng, 0, 3) + 1;
    LayerParams p = LayerParams::Conv1d(oracle::Uniform(rng, 1, 4),
                                        oracle::Uniform(rng, 1, 4), k,
                                        oracle::Uniform(rng, 1, 3),
                                        oracle::Uniform(rng, 0, k / 2));
    p.weight = oracle::Random(p.weight.shape(), rng);
    p.bias = oracle::Random(p.bias.shape(), rng);
    const Tensor x =
        oracle::Random({p.in_channels, oracle::Uniform(rng, k, 20)}, rng);
    const Tensor y = Conv1dForward(x, p);
    CHECK(MaxAbsDifference(y, oracle::Conv1d(x, p.weight, p.bias, p.stride,
                                             p.padding)) < 1e-12);
  }
}

TEST_CASE("conv1d rejects mismatched channels and missing saved input") {
  const LayerParams p = LayerParams::Conv1dSame(3, 4, 5);
  CHECK_THROWS_AS(Conv1dForward(Tensor({2, 10}), p), ConfigError);
  CHECK_THROWS_AS(Conv1dBackward(Tensor({4, 10}), Tensor(), p), UsageError);
  CHECK_THROWS_AS(Conv1dForward(Tensor({3, 2}), LayerParams::Conv1d(3, 4, 5)),
                  InputTooShortError);
}

TEST_CASE("conv1d zero output gradient gives zero gradients") {
  std::mt19937_64 rng(5);
  LayerParams p = LayerParams::Conv1dSame(2, 3, 5);
  InitializeUniform(p, rng);
  const Tensor x = oracle::Random({2, 9}, rng);
  const LayerGrads g = Conv1dBackward(Tensor({3, 9}), x, p);
  for (const Tensor* t : {&g.input, &g.weight, &g.bias}) {
    for (double v : t->data()) CHECK(v == 0.0);
  }
}

TEST_CASE("average pooling takes window means") {
  CHECK(AvgPool1d(Tensor({1, 4}, {1, 3, 2, 4})) == Tensor({1, 2}, {2, 3}));
  CHECK(AvgPool1d(Tensor({1, 4}, {5, 5, 5, 5})) == Tensor({1, 2}, {5, 5}));
  CHECK(Pool1dForward(Tensor({1, 4}, {1, 3, 2, 4}), PoolMode::kMax) ==
        Tensor({1, 2}, {3, 4}));
  CHECK_THROWS_AS(AvgPool1d(Tensor({1, 1}, {1})), InputTooShortError);
  // Odd length: the trailing sample is dropped.
  CHECK(AvgPool1d(Tensor({1, 5}, {1, 3, 2, 4, 9})) == Tensor({1, 2}, {2, 3}));
}

TEST_CASE("transposed convolution doubles the length") {
  std::mt19937_64 rng(7);
  LayerParams p = LayerParams::ConvTranspose1d(128, 128, 8, 2, 3);
  InitializeUniform(p, rng);
  const Tensor x = oracle::Random({128, 16}, rng);
  const Tensor y = ConvTranspose1dForward(x, p);
  CHECK(y.shape() == Shape{128, 32});
  CHECK(MaxAbsDifference(y, oracle::ConvTranspose1d(x, p.weight, p.bias, 2,
                                                    3)) < 1e-12);

  const Tensor zero = ConvTranspose1dForward(Tensor({128, 16}), p);
  for (std::size_t c = 0; c < 128; ++c) {
    for (std::size_t t = 0; t < 32; ++t) CHECK(zero.at(c, t) == p.bias[c]);
  }
}

TEST_CASE("dense layers, activations and losses") {
  CHECK(Relu(Tensor({3}, {-1, 0, 2})) == Tensor({3}, {0, 0, 2}));

  const Tensor x({2, 3}, {1, -2, 3, 0.5, 0, 4});
  CHECK(MeanSquaredError(x, x).value == 0.0);
  CHECK(MeanSquaredError(Tensor({2}, {1, 3}), Tensor({2}, {0, 0})).value ==
        doctest::Approx(5.0));

  for (std::size_t label = 0; label < 4; ++label) {
    const std::vector<std::size_t> l = {label};
    CHECK(SoftmaxCrossEntropy(Tensor({4}, 0.7), l).value ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  const std::vector<std::size_t> bad = {4};
  CHECK_THROWS_AS(SoftmaxCrossEntropy(Tensor({4}), bad), ConfigError);

  const std::vector<double> inf = {INFINITY, 0.0};
  CHECK_THROWS_AS(MeanSquaredError(Tensor({2}, inf), Tensor({2})),
                  NumericError);

  LayerParams fc = LayerParams::FullyConnected(3, 2);
  fc.weight = Tensor({2, 3}, {1, 2, 3, -1, 0, 1});
  fc.bias = Tensor({2}, {0.5, -0.5});
  CHECK(FullyConnectedForward(Tensor({3}, {1, 1, 1}), fc) ==
        Tensor({2}, {6.5, -0.5}));
  // Per-step application on [batch x features x steps].
  const Tensor seq = FullyConnectedForward(
      Tensor({1, 3, 2}, {1, 0, 1, 0, 1, 1}), fc);
  CHECK(seq == Tensor({1, 2, 2}, {6.5, 3.5, -0.5, 0.5}));
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(2026);
  CHECK(gradcheck::Conv1d(rng, 24) <= 1e-4);
  CHECK(gradcheck::ConvTranspose1d(rng, 24) <= 1e-4);
  CHECK(gradcheck::FullyConnected(rng, 24) <= 1e-4);
  CHECK(gradcheck::Pool(rng, 24, PoolMode::kAverage) <= 1e-6);
  CHECK(gradcheck::Pool(rng, 24, PoolMode::kMax) <= 1e-6);
  CHECK(gradcheck::Relu(rng, 24) <= 1e-4);
  CHECK(gradcheck::Tanh(rng, 24) <= 1e-4);
  CHECK(gradcheck::MeanSquaredError(rng, 24) <= 1e-4);
  CHECK(gradcheck::CrossEntropy(rng, 24) <= 1e-4);
}

TEST_CASE("float32 compute stays close to float64") {
  std::mt19937_64 rng(8);
  LayerParams p = LayerParams::Conv1dSame(4, 6, 5);
  InitializeUniform(p, rng);
  const Tensor x = oracle::Random({2, 4, 30}, rng);
  CHECK(MaxAbsDifference(Conv1dForward(x, p),
                         Conv1dForward(x, p, ComputePrecision::kFloat32)) <
        1e-5);
}

TEST_CASE("adjoint identity of the linear convolutions") {
  std::mt19937_64 rng(13);
  for (int n = 0; n < 20; ++n) {
    const std::size_t k = 2 * oracle::Uniform(rng, 0, 2) + 1;
    LayerParams p = LayerParams::Conv1d(oracle::Uniform(rng, 1, 4),
                                        oracle::Uniform(rng, 1, 4), k,
                                        oracle::Uniform(rng, 1, 2), k / 2);
    p.weight = oracle::Random(p.weight.shape(), rng);
    const Tensor x =
        oracle::Random({p.in_channels, oracle::Uniform(rng, k, 16)}, rng);
    const Tensor y = oracle::Random(Conv1dForward(x, p).shape(), rng);
    CHECK(std::abs(Dot(Conv1dForward(x, p), y) -
                   Dot(x, Conv1dBackward(y, x, p).input)) < 1e-10);

    LayerParams q = LayerParams::ConvTranspose1d(
        oracle::Uniform(rng, 1, 4), oracle::Uniform(rng, 1, 4), 8, 2, 3);
    q.weight = oracle::Random(q.weight.shape(), rng);
    const Tensor u =
        oracle::Random({q.in_channels, oracle::Uniform(rng, 1, 10)}, rng);
    const Tensor v = oracle::Random(ConvTranspose1dForward(u, q).shape(), rng);
    CHECK(std::abs(Dot(ConvTranspose1dForward(u, q), v) -
                   Dot(u, ConvTranspose1dBackward(v, u, q).input)) < 1e-10);
  }
}

TEST_CASE("tape replays a chain in reverse") {
  std::mt19937_64 rng(17);
  LayerParams conv = LayerParams::Conv1dSame(2, 3, 5);
  LayerParams fc = LayerParams::FullyConnected(3, 2);
  InitializeUniform(conv, rng);
  InitializeUniform(fc, rng);
  Tensor x = oracle::Random({1, 2, 8}, rng);

  Tape tape;
  const Tensor h = ApplyRelu(ApplyConv1d(conv, x, &tape), &tape);
  const Tensor y = ApplyFullyConnected(fc, ApplyPool1d(h, PoolMode::kAverage,
                                                       &tape),
                                       &tape);
  CHECK(tape.size() == 4);
  const Tensor r = oracle::Random(y.shape(), rng);
  const Tensor dx = tape.Backpropagate(r);

  auto f = [&] {
    const Tensor z = FullyConnectedForward(
        AvgPool1d(Relu(Conv1dForward(x, conv))), fc);
    return oracle::Weighted(z, r);
  };
  CHECK(oracle::MaxRelativeError(dx.data(), oracle::NumericGradient(f, x)) <
        1e-4);
  CHECK(oracle::MaxRelativeError(conv.weight.grad(),
                                 oracle::NumericGradient(f, conv.weight)) <
        1e-4);
  CHECK(oracle::MaxRelativeError(fc.bias.grad(),
                                 oracle::NumericGradient(f, fc.bias)) < 1e-4);
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937_64 rng(19);
  std::vector<LayerParams> layers = {LayerParams::Conv1dSame(3, 4, 5),
                                     LayerParams::ConvTranspose1d(4, 4, 8, 2, 3),
                                     LayerParams::FullyConnected(6, 2)};
  for (LayerParams& p : layers) InitializeUniform(p, rng);
  std::vector<const LayerParams*> view;
  for (const LayerParams& p : layers) view.push_back(&p);

  std::stringstream buffer;
  WriteCheckpoint(buffer, view);
  const std::vector<LayerParams> back = ReadCheckpoint(buffer);
  REQUIRE(back.size() == layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    CHECK(back[i].kind == layers[i].kind);
    CHECK(back[i].stride == layers[i].stride);
    CHECK(back[i].padding == layers[i].padding);
    CHECK(back[i].weight == layers[i].weight);
    CHECK(back[i].bias == layers[i].bias);
  }

  std::string bytes = buffer.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ReadCheckpoint(truncated), CheckpointError);
  bytes[8] = 9;  // version
  std::istringstream wrong_version(bytes);
  CHECK_THROWS_AS(ReadCheckpoint(wrong_version), CheckpointError);
}

TEST_CASE("initialization respects the fan-in bounds") {
  std::mt19937_64 rng(23);
  LayerParams p = LayerParams::Conv1dSame(4, 8, 5);
  InitializeUniform(p, rng);
  const double bound = std::sqrt(1.0 / 20.0);
  for (double w : p.weight.data()) CHECK(std::abs(w) <= bound);
  for (double b : p.bias.data()) CHECK(std::abs(b) <= bound);
  InitializeHeUniform(p, rng);
  for (double w : p.weight.data()) CHECK(std::abs(w) <= std::sqrt(6.0 / 20.0));
  for (double b : p.bias.data()) CHECK(b == 0.0);
}

TEST_CASE("adam takes the bias-corrected first step") {
  LayerParams p = LayerParams::FullyConnected(2, 1);
  p.weight = Tensor({1, 2}, {1.0, -1.0});
  Adam adam({&p}, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  p.weight.grad()[0] = 2.0;
  p.weight.grad()[1] = -0.5;
  adam.Step();
  // m_hat = g and v_hat = g^2 after one step, so each weight moves by lr.
  CHECK(p.weight[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p.weight[1] == doctest::Approx(-0.9).epsilon(1e-7));
  CHECK(p.bias[0] == 0.0);
  CHECK(p.weight.grad()[0] == 0.0);
}
