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

#include "ammteeg/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "ammteeg/errors.h"

namespace ammteeg {
namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Batched [batch x channels x length] view of a rank-2 or rank-3 tensor.
struct Batched {
  std::size_t batch;
  std::size_t channels;
  std::size_t length;
};

Batched AsBatched(const Tensor& t, const char* op) {
  if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
  if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
  throw ConfigError(std::string(op) + ": expected [channels x time] or " +
                    "[batch x channels x time], got " +
                    ShapeToString(t.shape()));
}

Shape MakeShape(std::size_t rank, Batched b) {
  if (rank == 2) return {b.channels, b.length};
  return {b.batch, b.channels, b.length};
}

// [batch x channels x length] -> (channels x batch*length).
template <typename S>
Mat<S> GatherChannels(const Tensor& t, Batched b) {
  Mat<S> m(b.channels, b.batch * b.length);
  const double* src = t.data().data();
  for (std::size_t n = 0; n < b.batch; ++n) {
    for (std::size_t c = 0; c < b.channels; ++c) {
      const double* row = src + (n * b.channels + c) * b.length;
      S* dst = &m(c, n * b.length);
      for (std::size_t t = 0; t < b.length; ++t) dst[t] = static_cast<S>(row[t]);
    }
  }
  return m;
}

// (channels x batch*length) plus optional per-channel bias -> tensor.
template <typename S>
Tensor ScatterChannels(const Mat<S>& m, Batched b, std::size_t rank,
                       const Tensor* bias) {
  Tensor out(MakeShape(rank, b));
  double* dst = out.data().data();
  for (std::size_t n = 0; n < b.batch; ++n) {
    for (std::size_t c = 0; c < b.channels; ++c) {
      const S* row = &m(c, n * b.length);
      double* out_row = dst + (n * b.channels + c) * b.length;
      const double shift = bias ? (*bias)[c] : 0.0;
      for (std::size_t t = 0; t < b.length; ++t) {
        out_row[t] = static_cast<double>(row[t]) + shift;
      }
    }
  }
  return out;
}

// Output positions j whose tap j * stride + k - padding lands inside
// [0, length).
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange ValidTaps(std::size_t k, std::size_t stride, std::size_t padding,
                   std::size_t length, std::size_t out_len) {
  const auto shift = static_cast<std::ptrdiff_t>(k) -
                     static_cast<std::ptrdiff_t>(padding);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const std::ptrdiff_t lo = shift >= 0 ? 0 : (-shift + s - 1) / s;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(length) - 1 - shift;
  const std::ptrdiff_t hi =
      last < 0 ? 0
               : std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out_len),
                                          last / s + 1);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// cols(c * kernel + k, n * out_len + j) = x[n, c, j * stride + k - padding].
template <typename S>
Mat<S> Im2Col(const Tensor& x, Batched b, std::size_t kernel,
              std::size_t stride, std::size_t padding, std::size_t out_len) {
  Mat<S> cols(b.channels * kernel, b.batch * out_len);
  const double* src = x.data().data();
  for (std::size_t k = 0; k < kernel; ++k) {
    const TapRange r = ValidTaps(k, stride, padding, b.length, out_len);
    for (std::size_t c = 0; c < b.channels; ++c) {
      S* row = &cols(c * kernel + k, 0);
      for (std::size_t n = 0; n < b.batch; ++n) {
        const double* signal = src + (n * b.channels + c) * b.length;
        S* dst = row + n * out_len;
        std::fill(dst, dst + r.lo, S(0));
        for (std::size_t j = r.lo; j < r.hi; ++j) {
          dst[j] = static_cast<S>(signal[j * stride + k - padding]);
        }
        std::fill(dst + r.hi, dst + out_len, S(0));
      }
    }
  }
  return cols;
}

// Adjoint of Im2Col: scatter-adds columns back onto a [batch x channels x
// length] tensor.
template <typename S>
Tensor Col2Im(const Mat<S>& cols, Batched b, std::size_t kernel,
              std::size_t stride, std::size_t padding, std::size_t cols_len,
              std::size_t rank) {
  Tensor out(MakeShape(rank, b));
  double* dst = out.data().data();
  for (std::size_t k = 0; k < kernel; ++k) {
    const TapRange r = ValidTaps(k, stride, padding, b.length, cols_len);
    for (std::size_t c = 0; c < b.channels; ++c) {
      const S* row = &cols(c * kernel + k, 0);
      for (std::size_t n = 0; n < b.batch; ++n) {
        double* signal = dst + (n * b.channels + c) * b.length;
        const S* src = row + n * cols_len;
        for (std::size_t j = r.lo; j < r.hi; ++j) {
          signal[j * stride + k - padding] += static_cast<double>(src[j]);
        }
      }
    }
  }
  return out;
}

// Per-channel sum of a [batch x channels x length] gradient.
Tensor BiasGrad(const Tensor& grad, Batched b) {
  Tensor db(Shape{b.channels});
  const double* src = grad.data().data();
  for (std::size_t n = 0; n < b.batch; ++n) {
    for (std::size_t c = 0; c < b.channels; ++c) {
      const double* row = src + (n * b.channels + c) * b.length;
      double sum = 0.0;
      for (std::size_t t = 0; t < b.length; ++t) sum += row[t];
      db[c] += sum;
    }
  }
  return db;
}

template <typename S>
Tensor ToTensor(const Mat<S>& m, const Shape& shape) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  const S* src = m.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(src[i]);
  return Tensor(shape, std::move(v));
}

void CheckKind(const LayerParams& p, LayerKind kind, const char* op) {
  if (p.kind != kind) {
    throw ConfigError(std::string(op) + ": layer is " +
                      LayerKindName(p.kind));
  }
  p.Validate();
}

void CheckSavedInput(const Tensor& saved, const char* op) {
  if (saved.empty()) {
    throw UsageError(std::string(op) + ": no saved forward input");
  }
}

void CheckGradShape(const Tensor& grad, const Shape& expected,
                    const char* op) {
  if (grad.shape() != expected) {
    throw ConfigError(std::string(op) + ": output gradient " +
                      ShapeToString(grad.shape()) + " does not match " +
                      ShapeToString(expected));
  }
}

template <typename S>
Mat<S> WeightMatrix(const LayerParams& p, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(p.weight.data().data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols))
      .cast<S>();
}

// Views fully-connected inputs as [batch x features x positions].
Batched AsDense(const Tensor& t) {
  switch (t.rank()) {
    case 1:
      return {1, t.dim(0), 1};
    case 2:
      return {t.dim(0), t.dim(1), 1};
    case 3:
      return {t.dim(0), t.dim(1), t.dim(2)};
    default:
      throw ConfigError("fully_connected: unsupported input rank " +
                        ShapeToString(t.shape()));
  }
}

Shape DenseShape(std::size_t rank, Batched b) {
  if (rank == 1) return {b.channels};
  if (rank == 2) return {b.batch, b.channels};
  return {b.batch, b.channels, b.length};
}

template <typename S>
Tensor Conv1dForwardImpl(const Tensor& input, const LayerParams& params,
                         Batched in, std::size_t out_len) {
  const Mat<S> cols = Im2Col<S>(input, in, params.kernel, params.stride,
                                params.padding, out_len);
  const Mat<S> w = WeightMatrix<S>(params, params.out_channels,
                                   params.in_channels * params.kernel);
  Mat<S> out;
  out.noalias() = w * cols;
  return ScatterChannels<S>(out, {in.batch, params.out_channels, out_len},
                            input.rank(), &params.bias);
}

template <typename S>
LayerGrads Conv1dBackwardImpl(const Tensor& output_grad,
                              const Tensor& saved_input,
                              const LayerParams& params, Batched in,
                              Batched out) {
  const Mat<S> grad = GatherChannels<S>(output_grad, out);
  const Mat<S> cols = Im2Col<S>(saved_input, in, params.kernel, params.stride,
                                params.padding, out.length);
  const Mat<S> w = WeightMatrix<S>(params, params.out_channels,
                                   params.in_channels * params.kernel);
  LayerGrads g;
  Mat<S> dw;
  dw.noalias() = grad * cols.transpose();
  g.weight = ToTensor<S>(dw, params.weight.shape());
  g.bias = BiasGrad(output_grad, out);
  Mat<S> dcols;
  dcols.noalias() = w.transpose() * grad;
  g.input = Col2Im<S>(dcols, in, params.kernel, params.stride, params.padding,
                      out.length, saved_input.rank());
  return g;
}

template <typename S>
Tensor ConvTranspose1dForwardImpl(const Tensor& input,
                                  const LayerParams& params, Batched in,
                                  Batched out) {
  const Mat<S> x = GatherChannels<S>(input, in);
  const Mat<S> w = WeightMatrix<S>(params, params.in_channels,
                                   params.out_channels * params.kernel);
  Mat<S> cols;
  cols.noalias() = w.transpose() * x;
  Tensor result = Col2Im<S>(cols, out, params.kernel, params.stride,
                            params.padding, in.length, input.rank());
  double* dst = result.data().data();
  for (std::size_t n = 0; n < out.batch; ++n) {
    for (std::size_t c = 0; c < out.channels; ++c) {
      double* row = dst + (n * out.channels + c) * out.length;
      const double b = params.bias[c];
      for (std::size_t t = 0; t < out.length; ++t) row[t] += b;
    }
  }
  return result;
}

template <typename S>
LayerGrads ConvTranspose1dBackwardImpl(const Tensor& output_grad,
                                       const Tensor& saved_input,
                                       const LayerParams& params, Batched in,
                                       Batched out) {
  const Mat<S> gcols = Im2Col<S>(output_grad, out, params.kernel,
                                 params.stride, params.padding, in.length);
  const Mat<S> x = GatherChannels<S>(saved_input, in);
  const Mat<S> w = WeightMatrix<S>(params, params.in_channels,
                                   params.out_channels * params.kernel);
  LayerGrads g;
  Mat<S> dx;
  dx.noalias() = w * gcols;
  g.input = ScatterChannels<S>(dx, in, saved_input.rank(), nullptr);
  Mat<S> dw;
  dw.noalias() = x * gcols.transpose();
  g.weight = ToTensor<S>(dw, params.weight.shape());
  g.bias = BiasGrad(output_grad, out);
  return g;
}

template <typename S>
Tensor FullyConnectedForwardImpl(const Tensor& input,
                                 const LayerParams& params, Batched in) {
  const Mat<S> x = GatherChannels<S>(input, in);
  const Mat<S> w =
      WeightMatrix<S>(params, params.out_channels, params.in_channels);
  Mat<S> y;
  y.noalias() = w * x;
  const Batched out{in.batch, params.out_channels, in.length};
  return ScatterChannels<S>(y, out, 3, &params.bias)
      .Reshaped(DenseShape(input.rank(), out));
}

template <typename S>
LayerGrads FullyConnectedBackwardImpl(const Tensor& output_grad,
                                      const Tensor& saved_input,
                                      const LayerParams& params, Batched in,
                                      Batched out) {
  const Mat<S> grad = GatherChannels<S>(output_grad, out);
  const Mat<S> x = GatherChannels<S>(saved_input, in);
  const Mat<S> w =
      WeightMatrix<S>(params, params.out_channels, params.in_channels);
  LayerGrads g;
  Mat<S> dw;
  dw.noalias() = grad * x.transpose();
  g.weight = ToTensor<S>(dw, params.weight.shape());
  g.bias = BiasGrad(output_grad, out);
  Mat<S> dx;
  dx.noalias() = w.transpose() * grad;
  g.input = ScatterChannels<S>(dx, in, 3, nullptr).Reshaped(saved_input.shape());
  return g;
}

}  // namespace

const char* LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv1d:
      return "conv1d";
    case LayerKind::kConvTranspose1d:
      return "conv_transpose1d";
    case LayerKind::kFullyConnected:
      return "fully_connected";
  }
  return "unknown";
}

LayerParams LayerParams::Conv1d(std::size_t in, std::size_t out,
                                std::size_t kernel, std::size_t stride,
                                std::size_t padding) {
  LayerParams p;
  p.kind = LayerKind::kConv1d;
  p.in_channels = in;
  p.out_channels = out;
  p.kernel = kernel;
  p.stride = stride;
  p.padding = padding;
  p.weight = Tensor({out, in, kernel});
  p.bias = Tensor({out});
  p.Validate();
  return p;
}

LayerParams LayerParams::Conv1dSame(std::size_t in, std::size_t out,
                                    std::size_t kernel) {
  if (kernel % 2 == 0) {
    throw ConfigError("same padding needs an odd kernel, got " +
                      std::to_string(kernel));
  }
  return Conv1d(in, out, kernel, 1, (kernel - 1) / 2);
}

LayerParams LayerParams::ConvTranspose1d(std::size_t in, std::size_t out,
                                         std::size_t kernel,
                                         std::size_t stride,
                                         std::size_t padding) {
  LayerParams p;
  p.kind = LayerKind::kConvTranspose1d;
  p.in_channels = in;
  p.out_channels = out;
  p.kernel = kernel;
  p.stride = stride;
  p.padding = padding;
  p.weight = Tensor({in, out, kernel});
  p.bias = Tensor({out});
  p.Validate();
  return p;
}

LayerParams LayerParams::FullyConnected(std::size_t in, std::size_t out) {
  LayerParams p;
  p.kind = LayerKind::kFullyConnected;
  p.in_channels = in;
  p.out_channels = out;
  p.weight = Tensor({out, in});
  p.bias = Tensor({out});
  p.Validate();
  return p;
}

void LayerParams::Validate() const {
  if (in_channels == 0 || out_channels == 0) {
    throw ConfigError(std::string(LayerKindName(kind)) +
                      ": channel counts must be positive");
  }
  if (stride == 0) throw ConfigError("stride must be at least 1");
  if (kernel == 0) throw ConfigError("kernel must be at least 1");
  Shape expected;
  switch (kind) {
    case LayerKind::kConv1d:
      expected = {out_channels, in_channels, kernel};
      break;
    case LayerKind::kConvTranspose1d:
      expected = {in_channels, out_channels, kernel};
      if (2 * padding >= kernel + stride) {
        throw ConfigError("conv_transpose1d padding too large for kernel");
      }
      break;
    case LayerKind::kFullyConnected:
      expected = {out_channels, in_channels};
      break;
  }
  if (weight.shape() != expected) {
    throw ConfigError(std::string(LayerKindName(kind)) + ": weight shape " +
                      ShapeToString(weight.shape()) + ", expected " +
                      ShapeToString(expected));
  }
  if (bias.shape() != Shape{out_channels}) {
    throw ConfigError(std::string(LayerKindName(kind)) + ": bias shape " +
                      ShapeToString(bias.shape()) + ", expected [" +
                      std::to_string(out_channels) + "]");
  }
}

std::size_t LayerParams::FanIn() const {
  return kind == LayerKind::kFullyConnected ? in_channels
                                            : in_channels * kernel;
}

std::size_t LayerParams::OutputLength(std::size_t length) const {
  switch (kind) {
    case LayerKind::kConv1d:
      if (kernel > length + 2 * padding) {
        throw InputTooShortError("conv1d: kernel " + std::to_string(kernel) +
                                 " longer than padded input of " +
                                 std::to_string(length + 2 * padding));
      }
      return (length + 2 * padding - kernel) / stride + 1;
    case LayerKind::kConvTranspose1d:
      return (length - 1) * stride + kernel - 2 * padding;
    case LayerKind::kFullyConnected:
      return length;
  }
  return length;
}

void InitializeUniform(LayerParams& params, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(params.FanIn()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : params.weight.data()) w = dist(rng);
  for (double& b : params.bias.data()) b = dist(rng);
}

void InitializeHeUniform(LayerParams& params, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(params.FanIn()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : params.weight.data()) w = dist(rng);
  for (double& b : params.bias.data()) b = 0.0;
}

Tensor Conv1dForward(const Tensor& input, const LayerParams& params,
                     ComputePrecision precision) {
  CheckKind(params, LayerKind::kConv1d, "conv1d");
  const Batched in = AsBatched(input, "conv1d");
  if (in.channels != params.in_channels) {
    throw ConfigError("conv1d: input has " + std::to_string(in.channels) +
                      " channels, layer expects " +
                      std::to_string(params.in_channels));
  }
  const std::size_t out_len = params.OutputLength(in.length);
  if (precision == ComputePrecision::kFloat32) {
    return Conv1dForwardImpl<float>(input, params, in, out_len);
  }
  return Conv1dForwardImpl<double>(input, params, in, out_len);
}

LayerGrads Conv1dBackward(const Tensor& output_grad, const Tensor& saved_input,
                          const LayerParams& params,
                          ComputePrecision precision) {
  CheckSavedInput(saved_input, "conv1d_backward");
  CheckKind(params, LayerKind::kConv1d, "conv1d_backward");
  const Batched in = AsBatched(saved_input, "conv1d_backward");
  if (in.channels != params.in_channels) {
    throw ConfigError("conv1d_backward: saved input channel mismatch");
  }
  const std::size_t out_len = params.OutputLength(in.length);
  const Batched out{in.batch, params.out_channels, out_len};
  CheckGradShape(output_grad, MakeShape(saved_input.rank(), out),
                 "conv1d_backward");
  if (precision == ComputePrecision::kFloat32) {
    return Conv1dBackwardImpl<float>(output_grad, saved_input, params, in, out);
  }
  return Conv1dBackwardImpl<double>(output_grad, saved_input, params, in, out);
}

Tensor ConvTranspose1dForward(const Tensor& input, const LayerParams& params,
                              ComputePrecision precision) {
  CheckKind(params, LayerKind::kConvTranspose1d, "conv_transpose1d");
  const Batched in = AsBatched(input, "conv_transpose1d");
  if (in.channels != params.in_channels) {
    throw ConfigError("conv_transpose1d: input has " +
                      std::to_string(in.channels) + " channels, layer expects " +
                      std::to_string(params.in_channels));
  }
  const Batched out{in.batch, params.out_channels,
                    params.OutputLength(in.length)};
  if (precision == ComputePrecision::kFloat32) {
    return ConvTranspose1dForwardImpl<float>(input, params, in, out);
  }
  return ConvTranspose1dForwardImpl<double>(input, params, in, out);
}

LayerGrads ConvTranspose1dBackward(const Tensor& output_grad,
                                   const Tensor& saved_input,
                                   const LayerParams& params,
                                   ComputePrecision precision) {
  CheckSavedInput(saved_input, "conv_transpose1d_backward");
  CheckKind(params, LayerKind::kConvTranspose1d, "conv_transpose1d_backward");
  const Batched in = AsBatched(saved_input, "conv_transpose1d_backward");
  if (in.channels != params.in_channels) {
    throw ConfigError("conv_transpose1d_backward: saved input channel mismatch");
  }
  const Batched out{in.batch, params.out_channels,
                    params.OutputLength(in.length)};
  CheckGradShape(output_grad, MakeShape(saved_input.rank(), out),
                 "conv_transpose1d_backward");
  if (precision == ComputePrecision::kFloat32) {
    return ConvTranspose1dBackwardImpl<float>(output_grad, saved_input, params,
                                              in, out);
  }
  return ConvTranspose1dBackwardImpl<double>(output_grad, saved_input, params,
                                             in, out);
}

Tensor FullyConnectedForward(const Tensor& input, const LayerParams& params,
                             ComputePrecision precision) {
  CheckKind(params, LayerKind::kFullyConnected, "fully_connected");
  const Batched in = AsDense(input);
  if (in.channels != params.in_channels) {
    throw ConfigError("fully_connected: input has " +
                      std::to_string(in.channels) + " features, layer expects " +
                      std::to_string(params.in_channels));
  }
  if (precision == ComputePrecision::kFloat32) {
    return FullyConnectedForwardImpl<float>(input, params, in);
  }
  return FullyConnectedForwardImpl<double>(input, params, in);
}

LayerGrads FullyConnectedBackward(const Tensor& output_grad,
                                  const Tensor& saved_input,
                                  const LayerParams& params,
                                  ComputePrecision precision) {
  CheckSavedInput(saved_input, "fully_connected_backward");
  CheckKind(params, LayerKind::kFullyConnected, "fully_connected_backward");
  const Batched in = AsDense(saved_input);
  if (in.channels != params.in_channels) {
    throw ConfigError("fully_connected_backward: saved input feature mismatch");
  }
  const Batched out{in.batch, params.out_channels, in.length};
  CheckGradShape(output_grad, DenseShape(saved_input.rank(), out),
                 "fully_connected_backward");
  if (precision == ComputePrecision::kFloat32) {
    return FullyConnectedBackwardImpl<float>(output_grad, saved_input, params,
                                             in, out);
  }
  return FullyConnectedBackwardImpl<double>(output_grad, saved_input, params,
                                            in, out);
}

namespace {

std::size_t PoolOutputLength(std::size_t length, std::size_t size,
                             std::size_t stride) {
  if (size == 0 || stride == 0) {
    throw ConfigError("pooling size and stride must be positive");
  }
  if (length < size) {
    throw InputTooShortError("pool1d: input of " + std::to_string(length) +
                             " samples is shorter than the window of " +
                             std::to_string(size));
  }
  return (length - size) / stride + 1;
}

}  // namespace

Tensor Pool1dForward(const Tensor& input, PoolMode mode, std::size_t size,
                     std::size_t stride) {
  const Batched in = AsBatched(input, "pool1d");
  const std::size_t out_len = PoolOutputLength(in.length, size, stride);
  const std::size_t covered = (out_len - 1) * stride + size;
  if (covered < in.length) {
    spdlog::warn("pool1d: dropping {} trailing sample(s) of {}",
                 in.length - covered, in.length);
  }
  Tensor out(MakeShape(input.rank(), {in.batch, in.channels, out_len}));
  const double* src = input.data().data();
  double* dst = out.data().data();
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t row = 0; row < in.batch * in.channels; ++row) {
    const double* signal = src + row * in.length;
    double* pooled = dst + row * out_len;
    for (std::size_t j = 0; j < out_len; ++j) {
      const double* window = signal + j * stride;
      if (mode == PoolMode::kAverage) {
        double sum = 0.0;
        for (std::size_t i = 0; i < size; ++i) sum += window[i];
        pooled[j] = sum * inv;
      } else {
        pooled[j] = *std::max_element(window, window + size);
      }
    }
  }
  return out;
}

Tensor Pool1dBackward(const Tensor& output_grad, const Tensor& saved_input,
                      PoolMode mode, std::size_t size, std::size_t stride) {
  CheckSavedInput(saved_input, "pool1d_backward");
  const Batched in = AsBatched(saved_input, "pool1d_backward");
  const std::size_t out_len = PoolOutputLength(in.length, size, stride);
  CheckGradShape(output_grad,
                 MakeShape(saved_input.rank(), {in.batch, in.channels, out_len}),
                 "pool1d_backward");
  Tensor grad(saved_input.shape());
  const double* src = saved_input.data().data();
  const double* up = output_grad.data().data();
  double* dst = grad.data().data();
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t row = 0; row < in.batch * in.channels; ++row) {
    for (std::size_t j = 0; j < out_len; ++j) {
      const double g = up[row * out_len + j];
      const std::size_t start = row * in.length + j * stride;
      if (mode == PoolMode::kAverage) {
        for (std::size_t i = 0; i < size; ++i) dst[start + i] += g * inv;
      } else {
        const double* window = src + start;
        const auto arg = std::max_element(window, window + size) - window;
        dst[start + arg] += g;
      }
    }
  }
  return grad;
}

Tensor Relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

Tensor ReluBackward(const Tensor& output_grad, const Tensor& saved_input) {
  CheckSavedInput(saved_input, "relu_backward");
  CheckGradShape(output_grad, saved_input.shape(), "relu_backward");
  Tensor grad = output_grad;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (saved_input[i] <= 0.0) grad[i] = 0.0;
  }
  return grad;
}

Tensor Tanh(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.data()) v = std::tanh(v);
  return out;
}

Tensor TanhBackward(const Tensor& output_grad, const Tensor& saved_output) {
  CheckSavedInput(saved_output, "tanh_backward");
  CheckGradShape(output_grad, saved_output.shape(), "tanh_backward");
  Tensor grad = output_grad;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] *= 1.0 - saved_output[i] * saved_output[i];
  }
  return grad;
}

LossValue MeanSquaredError(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw ConfigError("mse: prediction " + ShapeToString(prediction.shape()) +
                      " vs target " + ShapeToString(target.shape()));
  }
  LossValue loss;
  loss.grad = Tensor(prediction.shape());
  const double n = static_cast<double>(prediction.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double diff = prediction[i] - target[i];
    sum += diff * diff;
    loss.grad[i] = 2.0 * diff / n;
  }
  loss.value = sum / n;
  if (!std::isfinite(loss.value)) throw NumericError("mse is not finite");
  return loss;
}

LossValue SoftmaxCrossEntropy(const Tensor& logits,
                              std::span<const std::size_t> labels) {
  if (logits.rank() != 1 && logits.rank() != 2) {
    throw ConfigError("cross_entropy: logits must be [classes] or "
                      "[batch x classes]");
  }
  const std::size_t batch = logits.rank() == 1 ? 1 : logits.dim(0);
  const std::size_t classes = logits.shape().back();
  if (labels.size() != batch) {
    throw ConfigError("cross_entropy: " + std::to_string(labels.size()) +
                      " labels for a batch of " + std::to_string(batch));
  }
  LossValue loss;
  loss.grad = Tensor(logits.shape());
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] >= classes) {
      throw ConfigError("cross_entropy: label " + std::to_string(labels[n]) +
                        " outside " + std::to_string(classes) + " classes");
    }
    const double* row = logits.data().data() + n * classes;
    double* grow = loss.grad.data().data() + n * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - peak);
    const double log_denom = std::log(denom);
    total += -(row[labels[n]] - peak - log_denom);
    for (std::size_t k = 0; k < classes; ++k) {
      const double p = std::exp(row[k] - peak - log_denom);
      grow[k] = (p - (k == labels[n] ? 1.0 : 0.0)) / static_cast<double>(batch);
    }
  }
  loss.value = total / static_cast<double>(batch);
  if (!std::isfinite(loss.value)) {
    throw NumericError("cross-entropy is not finite");
  }
  return loss;
}

}  // namespace ammteeg
