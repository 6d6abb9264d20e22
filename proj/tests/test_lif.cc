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
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "ammteeg/errors.h"
#include "ammteeg/lif.h"
#include "support/lif_oracle.h"
#include "support/oracles.h"

using namespace ammteeg;

namespace {

LifConfig Single(double tau, double threshold) {
  LifConfig c;
  c.neurons = 1;
  c.tau = tau;
  c.threshold = threshold;
  return c;
}

LifState StateOf(double u, bool fired) {
  return {{u}, {static_cast<std::uint8_t>(fired ? 1 : 0)}};
}

}  // namespace

TEST_CASE("lif step integrates, fires and resets by subtraction") {
  const LifConfig c = Single(0.5, 1.0);
  const std::vector<double> drive = {0.7};
  LifState next = LifStep(StateOf(0.8, false), drive, c);
  CHECK(next.membrane[0] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(next.spikes[0] == 1);

  const std::vector<double> none = {0.0};
  next = LifStep(StateOf(0.8, false), none, c);
  CHECK(next.membrane[0] == 0.4);
  CHECK(next.spikes[0] == 0);

  next = LifStep(StateOf(1.0, true), none, c);
  CHECK(next.membrane[0] == -0.5);
  CHECK(next.membrane[0] < 0.0);
  CHECK(next.spikes[0] == 0);

  // Equality fires.
  const std::vector<double> exact = {1.0};
  CHECK(LifStep(StateOf(0.0, false), exact, c).spikes[0] == 1);
}

TEST_CASE("lif step zero reset clears the membrane after a spike") {
  LifConfig c = Single(0.5, 1.0);
  c.reset = ResetMode::kZero;
  const std::vector<double> drive = {0.3};
  CHECK(LifStep(StateOf(5.0, true), drive, c).membrane[0] == 0.3);
  CHECK(LifStep(StateOf(0.8, false), drive, c).membrane[0] ==
        doctest::Approx(0.7));
}

TEST_CASE("lif step rejects NaN currents and bad configs") {
  const std::vector<double> nan = {std::nan("")};
  CHECK_THROWS_AS(LifStep(StateOf(0.0, false), nan, Single(0.5, 1.0)),
                  NumericError);
  CHECK_THROWS_AS(Single(0.0, 1.0).Validate(), ConfigError);
  CHECK_THROWS_AS(Single(1.5, 1.0).Validate(), ConfigError);
  CHECK_THROWS_AS(Single(0.5, 0.0).Validate(), ConfigError);
  CHECK_NOTHROW(Single(1.0, 1.0).Validate());
}

TEST_CASE("lif forward: saturating drive, silence and shape") {
  LifConfig c = Single(1.0, 1.0);
  c.neurons = 3;
  const LifTrace hot = LifForward(Tensor({3, 12}, 2.0), c);
  for (double s : hot.spikes.data()) CHECK(s == 1.0);

  const LifTrace cold = LifForward(Tensor({3, 12}), c);
  for (double s : cold.spikes.data()) CHECK(s == 0.0);

  LifConfig wide;
  const LifTrace t = LifForward(Tensor({200, 64}, 0.3), wide);
  CHECK(t.spikes.shape() == Shape{200, 64});
  CHECK(t.membrane.shape() == Shape{200, 64});
  CHECK_THROWS_AS(LifForward(Tensor({10, 4}), wide), ConfigError);
}

TEST_CASE("lif forward agrees with repeated steps") {
  std::mt19937_64 rng(31);
  LifConfig c;
  c.neurons = 5;
  const Tensor currents = oracle::Random({2, 5, 20}, rng, -1.0, 2.0);
  const LifTrace trace = LifForward(currents, c);
  for (std::size_t b = 0; b < 2; ++b) {
    LifState state = LifState::Resting(5);
    for (std::size_t t = 0; t < 20; ++t) {
      std::vector<double> drive(5);
      for (std::size_t n = 0; n < 5; ++n) drive[n] = currents.at(b, n, t);
      state = LifStep(state, drive, c);
      for (std::size_t n = 0; n < 5; ++n) {
        CHECK(trace.membrane[(b * 5 + n) * 20 + t] == state.membrane[n]);
        CHECK(trace.spikes[(b * 5 + n) * 20 + t] == state.spikes[n]);
      }
    }
  }
}

TEST_CASE("spikes are binary and the membrane stays bounded") {
  std::mt19937_64 rng(37);
  for (int run = 0; run < 200; ++run) {
    LifConfig c;
    c.neurons = 4;
    c.tau = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    c.threshold = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    const double bound_current =
        std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    const Tensor currents =
        oracle::Random({4, 100}, rng, -bound_current, bound_current);
    const LifTrace trace = LifForward(currents, c);
    const double limit = (bound_current + c.threshold) / c.tau;
    for (double s : trace.spikes.data()) CHECK((s == 0.0 || s == 1.0));
    for (double u : trace.membrane.data()) CHECK(std::abs(u) <= limit);
  }
}

TEST_CASE("rectangular surrogate window") {
  CHECK(SurrogateRect(0.3) == 1.0);
  CHECK(SurrogateRect(-0.5) == 1.0);
  CHECK(SurrogateRect(0.6) == 0.0);
  CHECK(SurrogateRect(-0.51) == 0.0);
}

TEST_CASE("lif backward matches the hand-unrolled chain rule") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const struct {
    SurrogateRecurrence recurrence;
    ResetMode reset;
    oracle::Lif3Form form;
  } kForms[] = {
      {SurrogateRecurrence::kPrinted, ResetMode::kSubtract,
       oracle::Lif3Form::kPrinted},
      {SurrogateRecurrence::kExact, ResetMode::kSubtract,
       oracle::Lif3Form::kExactSubtract},
      {SurrogateRecurrence::kExact, ResetMode::kZero,
       oracle::Lif3Form::kExactZero},
  };
  for (const auto& f : kForms) {
    for (int run = 0; run < 100; ++run) {
      LifConfig c = Single(0.05 + 0.95 * unit(rng), 0.2 + 1.8 * unit(rng));
      c.recurrence = f.recurrence;
      c.reset = f.reset;
      std::array<double, 3> drive, gs;
      for (double& v : drive) v = c.threshold * (-0.5 + 3.0 * unit(rng));
      for (double& v : gs) v = -1.0 + 2.0 * unit(rng);

      const oracle::Lif3 want =
          oracle::HandUnrolled(c.tau, c.threshold, drive, gs, f.form);
      const LifTrace trace = LifForward(
          Tensor({1, 3}, {drive[0], drive[1], drive[2]}), c);
      const Tensor got =
          LifBackward(Tensor({1, 3}, {gs[0], gs[1], gs[2]}), trace, c);
      for (int t = 0; t < 3; ++t) {
        CHECK(std::abs(trace.membrane[t] - want.u[t]) <= 1e-12);
        CHECK(trace.spikes[t] == want.s[t]);
        CHECK(std::abs(got[t] - want.grad_current[t]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("lif backward two-step case by hand") {
  // tau 0.5, th 1: u0 = 0.8 (r0 = 1), u1 = 0.4 + 0.9 = 1.3 (r1 = 1, fires).
  const LifConfig c = Single(0.5, 1.0);
  const LifTrace trace = LifForward(Tensor({1, 2}, {0.8, 0.9}), c);
  const Tensor g = LifBackward(Tensor({1, 2}, {0.25, 2.0}), trace, c);
  // gu1 = 2 * 1; gu0 = 0.25 * 1 + 2 * (0.5 + 1 * 1).
  CHECK(g[1] == 2.0);
  CHECK(g[0] == 3.25);
}

TEST_CASE("lif backward zero upstream gradient and misuse") {
  LifConfig c;
  c.neurons = 2;
  const LifTrace trace = LifForward(Tensor({2, 6}, 0.9), c);
  const Tensor g = LifBackward(Tensor({2, 6}), trace, c);
  for (double v : g.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(LifBackward(Tensor({2, 6}), LifTrace{}, c), UsageError);
  CHECK_THROWS_AS(LifBackward(Tensor({2, 5}), trace, c), UsageError);
}

TEST_CASE("spike trains and raster export") {
  SpikeTrain s(2, 3);
  s.set(0, 2, true);
  s.set(1, 0, true);
  CHECK(s.Count() == 2);
  CHECK(SpikeTrain::FromTensor(s.ToTensor()) == s);
  CHECK_THROWS_AS(SpikeTrain::FromTensor(Tensor({1, 2}, {0.0, 0.5})),
                  ConfigError);

  std::ostringstream csv;
  WriteSpikeRasterCsv(csv, s);
  CHECK(csv.str() == "neuron_index,timestep\n0,2\n1,0\n");
}
