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

#ifndef AMMTEEG_OPS_H_
#define AMMTEEG_OPS_H_

// Differentiable building blocks of the codec network. Every forward op takes
// a single sample ([channels x time]) or a batch ([batch x channels x time])
// and returns a tensor of the same rank. Backward ops take the gradient of
// the forward output together with the input saved by the caller.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "ammteeg/tensor.h"

namespace ammteeg {

enum class LayerKind : std::uint32_t {
  kConv1d = 1,
  kConvTranspose1d = 2,
  kFullyConnected = 3,
};

const char* LayerKindName(LayerKind kind);

// Precision of the matrix products inside convolutions and dense layers.
// Storage is always 64-bit; kFloat32 rounds the operands of each product.
enum class ComputePrecision { kFloat64, kFloat32 };

struct LayerParams {
  LayerKind kind = LayerKind::kConv1d;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // conv1d: [out, in, kernel]; conv_transpose1d: [in, out, kernel];
  // fully_connected: [out, in].
  Tensor weight;
  Tensor bias;  // [out]

  // Zero-initialized layers. Conv1dSame requires an odd kernel.
  static LayerParams Conv1d(std::size_t in, std::size_t out,
                            std::size_t kernel, std::size_t stride = 1,
                            std::size_t padding = 0);
  static LayerParams Conv1dSame(std::size_t in, std::size_t out,
                                std::size_t kernel);
  static LayerParams ConvTranspose1d(std::size_t in, std::size_t out,
                                     std::size_t kernel, std::size_t stride,
                                     std::size_t padding);
  static LayerParams FullyConnected(std::size_t in, std::size_t out);

  // Throws ConfigError if weight/bias shapes disagree with the declared
  // channel counts or the hyperparameters are invalid.
  void Validate() const;
  std::size_t FanIn() const;
  // Temporal output length for an input of `length` samples.
  std::size_t OutputLength(std::size_t length) const;
  std::size_t ParameterCount() const { return weight.size() + bias.size(); }
};

// Uniform in +-sqrt(1 / fan_in) for weights and biases.
void InitializeUniform(LayerParams& params, std::mt19937_64& rng);
// Weights uniform in +-sqrt(6 / fan_in), biases zero. Keeps the activation
// variance through ReLU stacks.
void InitializeHeUniform(LayerParams& params, std::mt19937_64& rng);

struct LayerGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

Tensor Conv1dForward(const Tensor& input, const LayerParams& params,
                     ComputePrecision precision = ComputePrecision::kFloat64);
LayerGrads Conv1dBackward(
    const Tensor& output_grad, const Tensor& saved_input,
    const LayerParams& params,
    ComputePrecision precision = ComputePrecision::kFloat64);

// Output length (t - 1) * stride - 2 * padding + kernel; kernel 8, stride 2,
// padding 3 doubles the input length exactly.
Tensor ConvTranspose1dForward(
    const Tensor& input, const LayerParams& params,
    ComputePrecision precision = ComputePrecision::kFloat64);
LayerGrads ConvTranspose1dBackward(
    const Tensor& output_grad, const Tensor& saved_input,
    const LayerParams& params,
    ComputePrecision precision = ComputePrecision::kFloat64);

// Accepts [in], [batch x in] or [batch x in x positions]; in the last form
// the same affine map is applied at every position.
Tensor FullyConnectedForward(
    const Tensor& input, const LayerParams& params,
    ComputePrecision precision = ComputePrecision::kFloat64);
LayerGrads FullyConnectedBackward(
    const Tensor& output_grad, const Tensor& saved_input,
    const LayerParams& params,
    ComputePrecision precision = ComputePrecision::kFloat64);

enum class PoolMode { kAverage, kMax };

// Pad-free pooling. A trailing sample that does not fill a window is dropped
// with a warning; an input shorter than one window is an InputTooShortError.
Tensor Pool1dForward(const Tensor& input, PoolMode mode, std::size_t size = 2,
                     std::size_t stride = 2);
Tensor Pool1dBackward(const Tensor& output_grad, const Tensor& saved_input,
                      PoolMode mode, std::size_t size = 2,
                      std::size_t stride = 2);
inline Tensor AvgPool1d(const Tensor& input, std::size_t size = 2,
                        std::size_t stride = 2) {
  return Pool1dForward(input, PoolMode::kAverage, size, stride);
}

Tensor Relu(const Tensor& input);
Tensor ReluBackward(const Tensor& output_grad, const Tensor& saved_input);
Tensor Tanh(const Tensor& input);
Tensor TanhBackward(const Tensor& output_grad, const Tensor& saved_output);

struct LossValue {
  double value = 0.0;
  Tensor grad;  // d value / d first argument
};

// (1/n) sum (prediction - target)^2.
LossValue MeanSquaredError(const Tensor& prediction, const Tensor& target);

// Softmax followed by the negative log of the true-class probability,
// averaged over the batch. logits: [classes] or [batch x classes].
LossValue SoftmaxCrossEntropy(const Tensor& logits,
                              std::span<const std::size_t> labels);

}  // namespace ammteeg

#endif  // AMMTEEG_OPS_H_
