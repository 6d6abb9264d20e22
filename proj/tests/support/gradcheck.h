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

#ifndef AMMTEEG_TESTS_SUPPORT_GRADCHECK_H_
#define AMMTEEG_TESTS_SUPPORT_GRADCHECK_H_

// Finite-difference checks of every differentiable op on random instances.
// Each check draws its own shapes, evaluates the analytic backward pass of
// L = sum(r * op(x)) for a random r, and compares it with central differences
// of the forward pass (64-bit, eps 1e-5). The return value is the largest
// relative error seen over all instances and all differentiated arguments.

#include <algorithm>
#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "ammteeg/ops.h"
#include "support/oracles.h"

namespace gradcheck {

using ammteeg::LayerParams;
using ammteeg::Shape;
using ammteeg::Tensor;

inline constexpr double kEps = 1e-5;

namespace detail {

inline Shape WithBatch(std::mt19937_64& rng, std::size_t c, std::size_t t) {
  if (oracle::Uniform(rng, 0, 1) == 0) return {c, t};
  return {oracle::Uniform(rng, 1, 3), c, t};
}

inline double CheckLayer(
    LayerParams& p, Tensor& x,
    Tensor (*forward)(const Tensor&, const LayerParams&,
                      ammteeg::ComputePrecision),
    ammteeg::LayerGrads (*backward)(const Tensor&, const Tensor&,
                                    const LayerParams&,
                                    ammteeg::ComputePrecision),
    std::mt19937_64& rng) {
  const auto precision = ammteeg::ComputePrecision::kFloat64;
  const Tensor r = oracle::Random(forward(x, p, precision).shape(), rng);
  const ammteeg::LayerGrads g = backward(r, x, p, precision);
  auto f = [&] { return oracle::Weighted(forward(x, p, precision), r); };
  double worst = oracle::MaxRelativeError(
      g.input.data(), oracle::NumericGradient(f, x, kEps));
  worst = std::max(worst, oracle::MaxRelativeError(
                              g.weight.data(),
                              oracle::NumericGradient(f, p.weight, kEps)));
  worst = std::max(worst,
                   oracle::MaxRelativeError(
                       g.bias.data(), oracle::NumericGradient(f, p.bias, kEps)));
  return worst;
}

}  // namespace detail

inline double Conv1d(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const std::size_t k = std::array<std::size_t, 3>{1, 3, 5}[n % 3];
    const std::size_t cin = oracle::Uniform(rng, 1, 3);
    const std::size_t cout = oracle::Uniform(rng, 1, 3);
    const std::size_t stride = oracle::Uniform(rng, 1, 2);
    const std::size_t padding = oracle::Uniform(rng, 0, k / 2);
    LayerParams p = LayerParams::Conv1d(cin, cout, k, stride, padding);
    p.weight = oracle::Random(p.weight.shape(), rng);
    p.bias = oracle::Random(p.bias.shape(), rng);
    Tensor x =
        oracle::Random(detail::WithBatch(rng, cin, oracle::Uniform(rng, k, 10)),
                       rng);
    worst = std::max(worst, detail::CheckLayer(p, x, ammteeg::Conv1dForward,
                                               ammteeg::Conv1dBackward, rng));
  }
  return worst;
}

inline double ConvTranspose1d(std::mt19937_64& rng, int instances) {
  struct Geometry {
    std::size_t kernel, stride, padding;
  };
  constexpr std::array<Geometry, 3> kGeometries = {
      Geometry{8, 2, 3}, Geometry{4, 2, 1}, Geometry{3, 1, 1}};
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const Geometry g = kGeometries[n % kGeometries.size()];
    const std::size_t cin = oracle::Uniform(rng, 1, 3);
    const std::size_t cout = oracle::Uniform(rng, 1, 3);
    LayerParams p = LayerParams::ConvTranspose1d(cin, cout, g.kernel, g.stride,
                                                 g.padding);
    p.weight = oracle::Random(p.weight.shape(), rng);
    p.bias = oracle::Random(p.bias.shape(), rng);
    Tensor x = oracle::Random(
        detail::WithBatch(rng, cin, oracle::Uniform(rng, 1, 6)), rng);
    worst = std::max(worst,
                     detail::CheckLayer(p, x, ammteeg::ConvTranspose1dForward,
                                        ammteeg::ConvTranspose1dBackward, rng));
  }
  return worst;
}

inline double FullyConnected(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const std::size_t in = oracle::Uniform(rng, 1, 6);
    const std::size_t out = oracle::Uniform(rng, 1, 5);
    LayerParams p = LayerParams::FullyConnected(in, out);
    p.weight = oracle::Random(p.weight.shape(), rng);
    p.bias = oracle::Random(p.bias.shape(), rng);
    Shape shape;
    switch (n % 3) {
      case 0: shape = {in}; break;
      case 1: shape = {oracle::Uniform(rng, 1, 4), in}; break;
      default:
        shape = {oracle::Uniform(rng, 1, 3), in, oracle::Uniform(rng, 1, 5)};
    }
    Tensor x = oracle::Random(shape, rng);
    worst = std::max(worst,
                     detail::CheckLayer(p, x, ammteeg::FullyConnectedForward,
                                        ammteeg::FullyConnectedBackward, rng));
  }
  return worst;
}

inline double Pool(std::mt19937_64& rng, int instances,
                   ammteeg::PoolMode mode) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    Tensor x = oracle::Random(
        detail::WithBatch(rng, oracle::Uniform(rng, 1, 3),
                          2 * oracle::Uniform(rng, 1, 6)),
        rng);
    const Tensor r =
        oracle::Random(ammteeg::Pool1dForward(x, mode).shape(), rng);
    const Tensor g = ammteeg::Pool1dBackward(r, x, mode);
    auto f = [&] { return oracle::Weighted(ammteeg::Pool1dForward(x, mode), r); };
    worst = std::max(worst, oracle::MaxRelativeError(
                                g.data(), oracle::NumericGradient(f, x, kEps)));
  }
  return worst;
}

// Inputs are kept at least 0.01 away from the kink.
inline double Relu(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    Tensor x = oracle::Random(
        detail::WithBatch(rng, oracle::Uniform(rng, 1, 3),
                          oracle::Uniform(rng, 1, 8)),
        rng);
    for (double& v : x.data()) {
      if (std::abs(v) < 0.01) v = v < 0 ? -0.5 : 0.5;
    }
    const Tensor r = oracle::Random(x.shape(), rng);
    const Tensor g = ammteeg::ReluBackward(r, x);
    auto f = [&] { return oracle::Weighted(ammteeg::Relu(x), r); };
    worst = std::max(worst, oracle::MaxRelativeError(
                                g.data(), oracle::NumericGradient(f, x, kEps)));
  }
  return worst;
}

inline double Tanh(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    Tensor x = oracle::Random(
        detail::WithBatch(rng, oracle::Uniform(rng, 1, 3),
                          oracle::Uniform(rng, 1, 8)),
        rng, -2.0, 2.0);
    const Tensor r = oracle::Random(x.shape(), rng);
    const Tensor g = ammteeg::TanhBackward(r, ammteeg::Tanh(x));
    auto f = [&] { return oracle::Weighted(ammteeg::Tanh(x), r); };
    worst = std::max(worst, oracle::MaxRelativeError(
                                g.data(), oracle::NumericGradient(f, x, kEps)));
  }
  return worst;
}

inline double MeanSquaredError(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const Shape shape = detail::WithBatch(rng, oracle::Uniform(rng, 1, 3),
                                          oracle::Uniform(rng, 1, 8));
    Tensor x = oracle::Random(shape, rng);
    const Tensor target = oracle::Random(shape, rng);
    const Tensor g = ammteeg::MeanSquaredError(x, target).grad;
    auto f = [&] { return ammteeg::MeanSquaredError(x, target).value; };
    worst = std::max(worst, oracle::MaxRelativeError(
                                g.data(), oracle::NumericGradient(f, x, kEps)));
  }
  return worst;
}

inline double CrossEntropy(std::mt19937_64& rng, int instances) {
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const std::size_t classes = oracle::Uniform(rng, 2, 5);
    const bool batched = n % 2 == 1;
    const std::size_t batch = batched ? oracle::Uniform(rng, 1, 4) : 1;
    Tensor logits = oracle::Random(
        batched ? Shape{batch, classes} : Shape{classes}, rng, -3.0, 3.0);
    std::vector<std::size_t> labels(batch);
    for (std::size_t& l : labels) l = oracle::Uniform(rng, 0, classes - 1);
    const Tensor g = ammteeg::SoftmaxCrossEntropy(logits, labels).grad;
    auto f = [&] { return ammteeg::SoftmaxCrossEntropy(logits, labels).value; };
    worst = std::max(worst,
                     oracle::MaxRelativeError(
                         g.data(), oracle::NumericGradient(f, logits, kEps)));
  }
  return worst;
}

}  // namespace gradcheck

#endif  // AMMTEEG_TESTS_SUPPORT_GRADCHECK_H_
