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

#ifndef AMMTEEG_OPTIMIZER_H_
#define AMMTEEG_OPTIMIZER_H_

#include <vector>

#include "ammteeg/ops.h"

namespace ammteeg {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation over a fixed set of layers. Step() consumes the
// accumulated gradients and zeroes them.
class Adam {
 public:
  Adam(std::vector<LayerParams*> layers, AdamConfig config);

  void Step();
  void ZeroGrad();
  long steps() const { return steps_; }

 private:
  struct Slot {
    Tensor* param;
    std::vector<double> first;
    std::vector<double> second;
  };
  AdamConfig config_;
  std::vector<Slot> slots_;
  long steps_ = 0;
};

}  // namespace ammteeg

#endif  // AMMTEEG_OPTIMIZER_H_
