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

#ifndef AMMTEEG_TAPE_H_
#define AMMTEEG_TAPE_H_

#include <functional>
#include <string>
#include <vector>

#include "ammteeg/ops.h"
#include "ammteeg/tensor.h"

namespace ammteeg {

// Reverse-mode tape for a chain of ops. Each recorded entry owns the forward
// input it needs and maps an output gradient to an input gradient; parameter
// gradients are accumulated into LayerParams::weight/bias as a side effect.
// The tape references the LayerParams it was recorded against, so those must
// outlive it.
class Tape {
 public:
  using BackwardFn = std::function<Tensor(const Tensor&)>;

  void Record(std::string op, BackwardFn backward);

  // Replays the entries newest-first and returns the gradient with respect
  // to the input of the first recorded op.
  Tensor Backpropagate(Tensor grad) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void Clear() { entries_.clear(); }

 private:
  struct Entry {
    std::string op;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

// Forward helpers that also record their backward pass when `tape` is set.
Tensor ApplyConv1d(LayerParams& params, const Tensor& input, Tape* tape,
                   ComputePrecision precision = ComputePrecision::kFloat64);
Tensor ApplyConvTranspose1d(
    LayerParams& params, const Tensor& input, Tape* tape,
    ComputePrecision precision = ComputePrecision::kFloat64);
Tensor ApplyFullyConnected(
    LayerParams& params, const Tensor& input, Tape* tape,
    ComputePrecision precision = ComputePrecision::kFloat64);
Tensor ApplyPool1d(const Tensor& input, PoolMode mode, Tape* tape);
Tensor ApplyRelu(const Tensor& input, Tape* tape);
Tensor ApplyTanh(const Tensor& input, Tape* tape);

// Adds `grads.weight` and `grads.bias` into the parameter gradients.
void AccumulateGrads(LayerParams& params, const LayerGrads& grads);

}  // namespace ammteeg

#endif  // AMMTEEG_TAPE_H_
