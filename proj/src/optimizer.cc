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

#include "ammteeg/optimizer.h"

#include <cmath>

namespace ammteeg {

Adam::Adam(std::vector<LayerParams*> layers, AdamConfig config)
    : config_(config) {
  for (LayerParams* layer : layers) {
    for (Tensor* t : {&layer->weight, &layer->bias}) {
      t->grad();
      slots_.push_back({t, std::vector<double>(t->size(), 0.0),
                        std::vector<double>(t->size(), 0.0)});
    }
  }
}

void Adam::Step() {
  ++steps_;
  const double correction1 = 1.0 - std::pow(config_.beta1, steps_);
  const double correction2 = 1.0 - std::pow(config_.beta2, steps_);
  for (Slot& slot : slots_) {
    auto values = slot.param->data();
    auto grads = slot.param->grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      slot.first[i] = config_.beta1 * slot.first[i] + (1.0 - config_.beta1) * g;
      slot.second[i] =
          config_.beta2 * slot.second[i] + (1.0 - config_.beta2) * g * g;
      const double m = slot.first[i] / correction1;
      const double v = slot.second[i] / correction2;
      values[i] -= config_.learning_rate * m / (std::sqrt(v) + config_.epsilon);
    }
  }
  ZeroGrad();
}

void Adam::ZeroGrad() {
  for (Slot& slot : slots_) slot.param->ZeroGrad();
}

}  // namespace ammteeg
