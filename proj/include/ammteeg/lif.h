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

#ifndef AMMTEEG_LIF_H_
#define AMMTEEG_LIF_H_

// Leaky integrate-and-fire population driven by per-step input currents:
//
//   u[t] = (1 - tau) * u[t-1] - s[t-1] * threshold + I[t]
//   s[t] = 1 if u[t] >= threshold else 0
//
// Backward passes replace ds/du with a unit rectangular window of half-width
// 0.5 around the threshold.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ammteeg/tensor.h"

namespace ammteeg {

enum class ResetMode {
  kSubtract,  // subtract the threshold on the step after a spike
  kZero,      // clear the membrane on the step after a spike
};

// How the membrane gradient is carried from step t back to step t-1.
enum class SurrogateRecurrence {
  // grad_u[t-1] += grad_u[t] * ((1 - tau) + threshold * rect(u[t] - threshold))
  kPrinted,
  // True derivative of the forward recursion under the chosen reset, with
  // the surrogate standing in for ds[t-1]/du[t-1].
  kExact,
};

struct LifConfig {
  static constexpr double kSurrogateHalfWidth = 0.5;

  std::size_t neurons = 200;
  double tau = 0.5;
  double threshold = 1.0;
  ResetMode reset = ResetMode::kSubtract;
  SurrogateRecurrence recurrence = SurrogateRecurrence::kPrinted;

  // 0 < tau <= 1, threshold > 0, neurons >= 1.
  void Validate() const;
};

struct LifState {
  std::vector<double> membrane;
  std::vector<std::uint8_t> spikes;

  static LifState Resting(std::size_t neurons);
};

// One update of every neuron; the returned state carries (u[t], s[t]).
LifState LifStep(const LifState& previous, std::span<const double> current,
                 const LifConfig& config);

// 1 for |x| <= 0.5, else 0.
double SurrogateRect(double x);

// Binary neurons x timesteps matrix.
class SpikeTrain {
 public:
  SpikeTrain() = default;
  SpikeTrain(std::size_t neurons, std::size_t steps);
  SpikeTrain(std::size_t neurons, std::size_t steps,
             std::vector<std::uint8_t> spikes);

  // Accepts a [neurons x steps] tensor whose entries are exactly 0 or 1.
  static SpikeTrain FromTensor(const Tensor& t);
  Tensor ToTensor() const;

  std::size_t neurons() const { return neurons_; }
  std::size_t steps() const { return steps_; }
  std::uint8_t at(std::size_t neuron, std::size_t step) const {
    return spikes_[neuron * steps_ + step];
  }
  void set(std::size_t neuron, std::size_t step, bool fired) {
    spikes_[neuron * steps_ + step] = fired ? 1 : 0;
  }
  std::span<const std::uint8_t> values() const { return spikes_; }
  std::size_t Count() const;

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

 private:
  std::size_t neurons_ = 0;
  std::size_t steps_ = 0;
  std::vector<std::uint8_t> spikes_;
};

// Membrane potentials and spikes of a forward run, shaped like the currents.
struct LifTrace {
  Tensor membrane;
  Tensor spikes;
};

// currents: [neurons x steps] or [batch x neurons x steps]; every sequence
// starts from the resting state.
LifTrace LifForward(const Tensor& currents, const LifConfig& config);

// Gradient with respect to the input currents given the gradient with
// respect to the emitted spikes.
Tensor LifBackward(const Tensor& spike_grad, const LifTrace& trace,
                   const LifConfig& config);

// "neuron_index,timestep" header followed by one row per spike, ordered by
// neuron then time.
void WriteSpikeRasterCsv(std::ostream& out, const SpikeTrain& spikes);

}  // namespace ammteeg

#endif  // AMMTEEG_LIF_H_
