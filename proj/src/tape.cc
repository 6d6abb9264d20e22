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

#include "ammteeg/tape.h"

#include <utility>

#include "ammteeg/errors.h"

namespace ammteeg {

void Tape::Record(std::string op, BackwardFn backward) {
  entries_.push_back({std::move(op), std::move(backward)});
}

Tensor Tape::Backpropagate(Tensor grad) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    grad = it->backward(grad);
    if (!grad.AllFinite()) {
      throw NumericError("non-finite gradient after " + it->op);
    }
  }
  return grad;
}

void AccumulateGrads(LayerParams& params, const LayerGrads& grads) {
  auto weight = params.weight.grad();
  for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += grads.weight[i];
  auto bias = params.bias.grad();
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += grads.bias[i];
}

Tensor ApplyConv1d(LayerParams& params, const Tensor& input, Tape* tape,
                   ComputePrecision precision) {
  Tensor out = Conv1dForward(input, params, precision);
  if (tape) {
    tape->Record("conv1d", [&params, input, precision](const Tensor& g) {
      LayerGrads grads = Conv1dBackward(g, input, params, precision);
      AccumulateGrads(params, grads);
      return std::move(grads.input);
    });
  }
  return out;
}

Tensor ApplyConvTranspose1d(LayerParams& params, const Tensor& input,
                            Tape* tape, ComputePrecision precision) {
  Tensor out = ConvTranspose1dForward(input, params, precision);
  if (tape) {
    tape->Record("conv_transpose1d",
                 [&params, input, precision](const Tensor& g) {
                   LayerGrads grads =
                       ConvTranspose1dBackward(g, input, params, precision);
                   AccumulateGrads(params, grads);
                   return std::move(grads.input);
                 });
  }
  return out;
}

Tensor ApplyFullyConnected(LayerParams& params, const Tensor& input,
                           Tape* tape, ComputePrecision precision) {
  Tensor out = FullyConnectedForward(input, params, precision);
  if (tape) {
    tape->Record("fully_connected",
                 [&params, input, precision](const Tensor& g) {
                   LayerGrads grads =
                       FullyConnectedBackward(g, input, params, precision);
                   AccumulateGrads(params, grads);
                   return std::move(grads.input);
                 });
  }
  return out;
}

Tensor ApplyPool1d(const Tensor& input, PoolMode mode, Tape* tape) {
  Tensor out = Pool1dForward(input, mode);
  if (tape) {
    tape->Record("pool1d", [input, mode](const Tensor& g) {
      return Pool1dBackward(g, input, mode);
    });
  }
  return out;
}

Tensor ApplyRelu(const Tensor& input, Tape* tape) {
  Tensor out = Relu(input);
  if (tape) {
    tape->Record("relu",
                 [input](const Tensor& g) { return ReluBackward(g, input); });
  }
  return out;
}

Tensor ApplyTanh(const Tensor& input, Tape* tape) {
  Tensor out = Tanh(input);
  if (tape) {
    tape->Record("tanh",
                 [out](const Tensor& g) { return TanhBackward(g, out); });
  }
  return out;
}

}  // namespace ammteeg
