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
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "ammteeg/codec.h"
#include "ammteeg/errors.h"
#include "ammteeg/optimizer.h"
#include "support/oracles.h"

using namespace ammteeg;

namespace {

CodecConfig Small(std::size_t channels = 4, std::size_t length = 64) {
  CodecConfig c;
  c.channels = channels;
  c.length = length;
  c.classes = 3;
  c.encoder = {{1, 8}, {1, 16}, {1, 16}};
  c.decoder = {{1, 16}, {1, 16}, {1, 0}};
  c.lif.neurons = 32;
  return c;
}

void ZeroBiases(CodecModel& model) {
  for (LayerParams* p : model.Parameters()) {
    for (double& b : p->bias.data()) b = 0.0;
  }
}

// Two sinusoids per channel with channel-dependent phase.
Tensor Waveform(std::size_t channels, std::size_t length, double f1,
                double f2) {
  Tensor x({channels, length});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < length; ++t) {
      const double s = static_cast<double>(t) / static_cast<double>(length);
      x.at(c, t) = std::sin(2 * std::numbers::pi * (f1 * s + 0.1 * c)) +
                   0.5 * std::cos(2 * std::numbers::pi * (f2 * s + 0.2 * c));
    }
  }
  return x;
}

double Variance(const Tensor& x) {
  const double m = oracle::Mean(x.data());
  double s = 0.0;
  for (double v : x.data()) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("shape chain for 22 channels and 750 samples") {
  CodecConfig config;  // full-size architecture
  config.channels = 22;
  config.length = 750;
  const CodecModel model(config, 1);
  std::mt19937_64 rng(1);
  const CodecModel::Encoding e = model.Encode(oracle::Random({22, 750}, rng));
  CHECK(e.hidden.shape() == Shape{256, 187});
  CHECK(e.currents.shape() == Shape{200, 187});
  CHECK(e.spikes.shape() == Shape{200, 187});
  CHECK(model.Decode(e.spikes).shape() == Shape{22, 748});
  CHECK(config.TrimmedSamples() == 2);
  CHECK(model.AuxLogits(e.spikes).shape() == Shape{4});
}

TEST_CASE("shape chain for 118 channels and 300 samples") {
  CodecConfig config;
  config.channels = 118;
  config.length = 300;
  config.classes = 2;
  const CodecModel model(config, 2);
  std::mt19937_64 rng(2);
  const CodecModel::Encoding e =
      model.Encode(oracle::Random({2, 118, 300}, rng));
  CHECK(e.hidden.shape() == Shape{2, 256, 75});
  CHECK(e.spikes.shape() == Shape{2, 200, 75});
  CHECK(model.Decode(e.spikes).shape() == Shape{2, 118, 300});
  CHECK(model.AuxLogits(e.spikes).shape() == Shape{2, 2});
}

TEST_CASE("shape contract holds for many channel counts and lengths") {
  std::mt19937_64 rng(3);
  for (std::size_t c : {1, 3, 8}) {
    for (std::size_t t : {8, 36, 64, 101}) {
      const CodecConfig config = Small(c, t);
      const CodecModel model(config, c * 100 + t);
      const CodecModel::Encoding e = model.Encode(oracle::Random({c, t}, rng));
      const std::size_t steps = (t - t % 4) / 4;
      CHECK(e.hidden.shape() == Shape{16, steps});
      CHECK(e.spikes.shape() == Shape{32, steps});
      CHECK(model.Decode(e.spikes).shape() == Shape{c, t - t % 4});
    }
  }
}

TEST_CASE("shape mismatches are configuration errors") {
  const CodecModel model(Small(), 4);
  CHECK_THROWS_AS(model.Encode(Tensor({5, 64})), ConfigError);
  CHECK_THROWS_AS(model.Encode(Tensor({4, 60})), ConfigError);
  CHECK_THROWS_AS(model.Decode(Tensor({31, 16})), ConfigError);
  CodecConfig bad = Small();
  bad.lambda_mix = -1.0;
  CHECK_THROWS_AS(CodecModel(bad, 1), ConfigError);
}

TEST_CASE("zero input and zero biases stay silent") {
  CodecModel model(Small(), 5);
  ZeroBiases(model);
  const CodecModel::Encoding e = model.Encode(Tensor({4, 64}));
  for (double s : e.spikes.data()) CHECK(s == 0.0);
  const Tensor out = model.Decode(e.spikes);
  for (double v : out.data()) CHECK(v == 0.0);

  model.aux_classifier().weight = Tensor(model.aux_classifier().weight.shape());
  const Tensor logits = model.AuxLogits(e.spikes);
  for (double v : logits.data()) CHECK(v == 0.0);
}

TEST_CASE("batched encoding equals per-trial encoding") {
  const CodecModel model(Small(), 6);
  std::mt19937_64 rng(6);
  const Tensor batch = oracle::Random({3, 4, 64}, rng, -2.0, 2.0);
  const CodecModel::Encoding all = model.Encode(batch);
  for (std::size_t b = 0; b < 3; ++b) {
    std::vector<double> one(batch.data().begin() + b * 256,
                            batch.data().begin() + (b + 1) * 256);
    const CodecModel::Encoding e = model.Encode(Tensor({4, 64}, one));
    for (std::size_t i = 0; i < e.spikes.size(); ++i) {
      CHECK(e.spikes[i] == all.spikes[b * e.spikes.size() + i]);
    }
    const Tensor out = model.Decode(e.spikes);
    const Tensor outs = model.Decode(all.spikes);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(std::abs(out[i] - outs[b * out.size() + i]) < 1e-12);
    }
  }
}

TEST_CASE("joint loss is reconstruction plus lambda times classification") {
  std::mt19937_64 rng(7);
  const Tensor batch = oracle::Random({2, 4, 64}, rng, -2.0, 2.0);
  const std::vector<std::size_t> labels = {0, 2};
  for (double lambda : {0.0, 0.1, 0.7}) {
    CodecConfig config = Small();
    config.lambda_mix = lambda;
    const CodecModel model(config, 7);
    const CodecModel::Loss loss = model.EvaluateLoss(batch, labels);
    CHECK(loss.total == doctest::Approx(loss.reconstruction +
                                        lambda * loss.classification)
                            .epsilon(1e-14));
    if (lambda == 0.0) CHECK(loss.total == loss.reconstruction);
  }
  // Perfect reconstruction and a confident correct prediction.
  const Tensor x = oracle::Random({4, 8}, rng);
  const std::vector<std::size_t> label = {1};
  const double perfect = MeanSquaredError(x, x).value +
                         0.1 * SoftmaxCrossEntropy(
                                   Tensor({3}, {-50.0, 50.0, -50.0}), label)
                                   .value;
  CHECK(perfect < 1e-40);
}

TEST_CASE("aux classifier gradient matches central differences") {
  CodecConfig config = Small();
  config.lambda_mix = 0.3;
  CodecModel model(config, 8);
  std::mt19937_64 rng(8);
  const Tensor batch = oracle::Random({2, 4, 64}, rng, -3.0, 3.0);
  const std::vector<std::size_t> labels = {1, 2};
  model.AccumulateGradients(batch, labels);
  LayerParams& aux = model.aux_classifier();
  const std::vector<double> analytic_w(aux.weight.grad().begin(),
                                       aux.weight.grad().end());
  const std::vector<double> analytic_b(aux.bias.grad().begin(),
                                       aux.bias.grad().end());
  auto f = [&] { return model.EvaluateLoss(batch, labels).total; };
  CHECK(oracle::MaxRelativeError(analytic_w,
                                 oracle::NumericGradient(f, aux.weight)) <=
        1e-4);
  CHECK(oracle::MaxRelativeError(analytic_b,
                                 oracle::NumericGradient(f, aux.bias)) <= 1e-4);
}

TEST_CASE("lambda zero leaves the aux classifier without gradient") {
  CodecConfig config = Small();
  config.lambda_mix = 0.0;
  CodecModel model(config, 9);
  std::mt19937_64 rng(9);
  const std::vector<std::size_t> labels = {0, 1};
  model.AccumulateGradients(oracle::Random({2, 4, 64}, rng, -3.0, 3.0),
                            labels);
  for (double g : model.aux_classifier().weight.grad()) CHECK(g == 0.0);
  for (double g : model.aux_classifier().bias.grad()) CHECK(g == 0.0);
}

TEST_CASE("checkpoint round trip reproduces the forward pass bit for bit") {
  const CodecConfig config = Small();
  const CodecModel a(config, 10);
  const auto dir = oracle::WorkDir("codec_ckpt");
  a.Save(dir / "codec.ckpt");
  CodecModel b(config, 11);
  CHECK(a.Fingerprint() != b.Fingerprint());
  b.Load(dir / "codec.ckpt");
  CHECK(a.Fingerprint() == b.Fingerprint());

  std::mt19937_64 rng(10);
  const Tensor x = oracle::Random({4, 64}, rng, -2.0, 2.0);
  const CodecModel::Encoding ea = a.Encode(x), eb = b.Encode(x);
  CHECK(ea.hidden == eb.hidden);
  CHECK(ea.spikes == eb.spikes);
  CHECK(a.Decode(ea.spikes) == b.Decode(eb.spikes));

  CodecModel other(Small(5, 64), 1);
  CHECK_THROWS_AS(other.Load(dir / "codec.ckpt"), ConfigError);
}

TEST_CASE("same seed builds the same model") {
  CHECK(CodecModel(Small(), 12).Fingerprint() ==
        CodecModel(Small(), 12).Fingerprint());
  CHECK(CodecModel(Small(), 12).Fingerprint() !=
        CodecModel(Small(), 13).Fingerprint());
}

TEST_CASE("joint loss decreases on a single trial with a smooth hidden unit") {
  const Tensor batch = Waveform(4, 64, 3.0, 7.0).Reshaped({1, 4, 64});
  const std::vector<std::size_t> label = {1};
  CodecConfig config = Small();
  config.hidden = HiddenUnit::kTanh;
  CodecModel model(config, 14);
  Adam adam(model.Parameters(), AdamConfig{1e-3});

  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    losses.push_back(model.AccumulateGradients(batch, label).total);
    adam.Step();
  }
  losses.push_back(model.EvaluateLoss(batch, label).total);
  int decreasing = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i] < losses[i - 1]) ++decreasing;
  }
  MESSAGE("strictly decreasing steps: " << decreasing << "/200");
  CHECK(decreasing >= 190);
}

TEST_CASE("overfitting a single trial") {
  const Tensor x = Waveform(4, 64, 3.0, 7.0);
  const Tensor batch = x.Reshaped({1, 4, 64});
  const std::vector<std::size_t> label = {1};
  CodecModel model(Small(), 14);
  Adam adam(model.Parameters(), AdamConfig{3e-3});
  for (int step = 0; step < 500; ++step) {
    model.AccumulateGradients(batch, label);
    adam.Step();
  }
  const Tensor out = model.Decode(model.Encode(x).spikes);
  CHECK(MeanSquaredError(out, x).value < 0.1 * Variance(x));
}
