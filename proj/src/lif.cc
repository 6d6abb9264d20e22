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

#include "ammteeg/lif.h"

#include <cmath>
#include <ostream>
#include <string>

#include "ammteeg/errors.h"

namespace ammteeg {
namespace {

struct Layout {
  std::size_t batch;
  std::size_t neurons;
  std::size_t steps;
};

Layout LayoutOf(const Tensor& t, const LifConfig& config) {
  Layout l{};
  if (t.rank() == 2) {
    l = {1, t.dim(0), t.dim(1)};
  } else if (t.rank() == 3) {
    l = {t.dim(0), t.dim(1), t.dim(2)};
  } else {
    throw ConfigError("lif: currents must be [neurons x steps] or "
                      "[batch x neurons x steps], got " +
                      ShapeToString(t.shape()));
  }
  if (l.neurons != config.neurons) {
    throw ConfigError("lif: " + std::to_string(l.neurons) +
                      " current rows for a population of " +
                      std::to_string(config.neurons));
  }
  return l;
}

}  // namespace

void LifConfig::Validate() const {
  if (neurons == 0) throw ConfigError("lif: population must be non-empty");
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("lif: tau must lie in (0, 1], got " +
                      std::to_string(tau));
  }
  if (!(threshold > 0.0)) {
    throw ConfigError("lif: threshold must be positive");
  }
}

LifState LifState::Resting(std::size_t neurons) {
  return {std::vector<double>(neurons, 0.0),
          std::vector<std::uint8_t>(neurons, 0)};
}

double SurrogateRect(double x) {
  return std::abs(x) <= LifConfig::kSurrogateHalfWidth ? 1.0 : 0.0;
}

LifState LifStep(const LifState& previous, std::span<const double> current,
                 const LifConfig& config) {
  const std::size_t n = config.neurons;
  if (current.size() != n || previous.membrane.size() != n ||
      previous.spikes.size() != n) {
    throw ConfigError("lif_step: expected vectors of length " +
                      std::to_string(n));
  }
  LifState next = LifState::Resting(n);
  const double decay = 1.0 - config.tau;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(current[i])) {
      throw NumericError("lif_step: NaN input current at neuron " +
                         std::to_string(i));
    }
    const bool fired = previous.spikes[i] != 0;
    double u;
    if (config.reset == ResetMode::kSubtract) {
      u = decay * previous.membrane[i] - (fired ? config.threshold : 0.0) +
          current[i];
    } else {
      u = (fired ? 0.0 : decay * previous.membrane[i]) + current[i];
    }
    next.membrane[i] = u;
    next.spikes[i] = u >= config.threshold ? 1 : 0;
  }
  return next;
}

SpikeTrain::SpikeTrain(std::size_t neurons, std::size_t steps)
    : neurons_(neurons), steps_(steps), spikes_(neurons * steps, 0) {}

SpikeTrain::SpikeTrain(std::size_t neurons, std::size_t steps,
                       std::vector<std::uint8_t> spikes)
    : neurons_(neurons), steps_(steps), spikes_(std::move(spikes)) {
  if (spikes_.size() != neurons_ * steps_) {
    throw ConfigError("spike train size does not match its shape");
  }
  for (std::uint8_t s : spikes_) {
    if (s > 1) throw ConfigError("spike trains hold only 0 and 1");
  }
}

SpikeTrain SpikeTrain::FromTensor(const Tensor& t) {
  if (t.rank() != 2) {
    throw ConfigError("spike train needs a [neurons x steps] tensor, got " +
                      ShapeToString(t.shape()));
  }
  std::vector<std::uint8_t> spikes(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == 1.0) {
      spikes[i] = 1;
    } else if (t[i] != 0.0) {
      throw ConfigError("spike tensor entry " + std::to_string(i) +
                        " is neither 0 nor 1");
    }
  }
  return SpikeTrain(t.dim(0), t.dim(1), std::move(spikes));
}

Tensor SpikeTrain::ToTensor() const {
  std::vector<double> values(spikes_.begin(), spikes_.end());
  return Tensor({neurons_, steps_}, std::move(values));
}

std::size_t SpikeTrain::Count() const {
  std::size_t count = 0;
  for (std::uint8_t s : spikes_) count += s;
  return count;
}

LifTrace LifForward(const Tensor& currents, const LifConfig& config) {
  config.Validate();
  const Layout l = LayoutOf(currents, config);
  LifTrace trace{Tensor(currents.shape()), Tensor(currents.shape())};
  const double decay = 1.0 - config.tau;
  const double* in = currents.data().data();
  double* u_out = trace.membrane.data().data();
  double* s_out = trace.spikes.data().data();
  for (std::size_t row = 0; row < l.batch * l.neurons; ++row) {
    const std::size_t base = row * l.steps;
    double u_prev = 0.0;
    bool fired = false;
    for (std::size_t t = 0; t < l.steps; ++t) {
      const double current = in[base + t];
      if (std::isnan(current)) {
        throw NumericError("lif_forward: NaN input current");
      }
      double u;
      if (config.reset == ResetMode::kSubtract) {
        u = decay * u_prev - (fired ? config.threshold : 0.0) + current;
      } else {
        u = (fired ? 0.0 : decay * u_prev) + current;
      }
      fired = u >= config.threshold;
      u_out[base + t] = u;
      s_out[base + t] = fired ? 1.0 : 0.0;
      u_prev = u;
    }
  }
  return trace;
}

Tensor LifBackward(const Tensor& spike_grad, const LifTrace& trace,
                   const LifConfig& config) {
  config.Validate();
  if (trace.membrane.empty()) {
    throw UsageError("lif_backward: no saved forward trajectory");
  }
  if (spike_grad.shape() != trace.membrane.shape() ||
      trace.spikes.shape() != trace.membrane.shape()) {
    throw UsageError("lif_backward: gradient " +
                     ShapeToString(spike_grad.shape()) +
                     " does not match trajectory " +
                     ShapeToString(trace.membrane.shape()));
  }
  const Layout l = LayoutOf(spike_grad, config);
  const double decay = 1.0 - config.tau;
  const double th = config.threshold;
  Tensor current_grad(spike_grad.shape());
  const double* gs = spike_grad.data().data();
  const double* u = trace.membrane.data().data();
  const double* s = trace.spikes.data().data();
  double* gi = current_grad.data().data();

  for (std::size_t row = 0; row < l.batch * l.neurons; ++row) {
    const std::size_t base = row * l.steps;
    double carried = 0.0;  // dL/du[t+1] * du[t+1]/du[t]
    for (std::size_t k = l.steps; k-- > 0;) {
      const std::size_t i = base + k;
      const double rect = SurrogateRect(u[i] - th);
      const double grad_u = gs[i] * rect + carried;
      gi[i] = grad_u;
      if (k == 0) break;
      double jacobian;  // du[k] / du[k-1]
      if (config.recurrence == SurrogateRecurrence::kPrinted) {
        jacobian = decay + th * rect;
      } else if (config.reset == ResetMode::kSubtract) {
        jacobian = decay - th * SurrogateRect(u[i - 1] - th);
      } else {
        jacobian = decay * (1.0 - s[i - 1]) -
                   decay * u[i - 1] * SurrogateRect(u[i - 1] - th);
      }
      carried = grad_u * jacobian;
    }
  }
  return current_grad;
}

void WriteSpikeRasterCsv(std::ostream& out, const SpikeTrain& spikes) {
  out << "neuron_index,timestep\n";
  for (std::size_t n = 0; n < spikes.neurons(); ++n) {
    for (std::size_t t = 0; t < spikes.steps(); ++t) {
      if (spikes.at(n, t)) out << n << ',' << t << '\n';
    }
  }
}

}  // namespace ammteeg
