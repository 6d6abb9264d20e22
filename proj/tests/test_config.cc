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
#include <fstream>
#include <stdexcept>
#include <sstream>
#include <string>

#include "doctest.h"

#include "ammteeg/commands.h"
#include "ammteeg/errors.h"
#include "ammteeg/run_config.h"
#include "support/oracles.h"

using namespace ammteeg;

namespace {

RunConfig Parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::Parse(in);
}

std::string ParseError(const std::string& text) {
  try {
    Parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig c = Parse("[data]\nsource = synth\n");
  CHECK(c.data_source == "synth");
  CHECK(c.seed == 0);
  CHECK(c.synth.tasks == 3);
  CHECK(c.synth.channels == 8);
  CHECK(c.synth.length == 256);
  CHECK(c.synth.snr_db == 5.0);
  CHECK(c.codec.lif.neurons == 200);
  CHECK(c.codec.lambda_mix == 0.1);
  CHECK(c.plan.test_fraction == 0.2);
  CHECK(c.plan.ablation == Ablation::kNone);
}

TEST_CASE("every section is parsed") {
  const RunConfig c = Parse(R"(
[run]
seed = 42
out = somewhere
[data]
source = bundle
bundle = a/b.bundle
trim_to_header_length = true
[synth]
tasks = 9
snr_db = inf
seed = 3
[model]
encoder = 2x8,1x4
decoder = 1x4,1x0
kernel = 3
neurons = 17
tau = 0.25
threshold = 0.5
reset = zero
recurrence = exact
pooling = max
lambda_mix = 0
precision = float32
init = fan-in-uniform
[train]
epochs = 7
batch = 3
learning_rate = 1e-4
test_fraction = 0.5
zscore = yes
trim_to_multiple_of_4 = 1
label_coding = bipolar
ablation = no-bam
head_epochs = 5
head_learning_rate = 0.5
)");
  CHECK(c.seed == 42);
  CHECK(c.out == "somewhere");
  CHECK(c.bundle == "a/b.bundle");
  CHECK(c.bundle_options.trim_to_header_length);
  CHECK(c.synth.tasks == 9);
  CHECK(std::isinf(c.synth.snr_db));
  CHECK(c.synth_seed == 3u);
  REQUIRE(c.codec.encoder.size() == 2);
  CHECK(c.codec.encoder[0].depth == 2);
  CHECK(c.codec.encoder[0].width == 8);
  CHECK(c.codec.decoder[1].width == 0);
  CHECK(c.codec.kernel == 3);
  CHECK(c.codec.lif.neurons == 17);
  CHECK(c.codec.lif.tau == 0.25);
  CHECK(c.codec.lif.threshold == 0.5);
  CHECK(c.codec.lif.reset == ResetMode::kZero);
  CHECK(c.codec.lif.recurrence == SurrogateRecurrence::kExact);
  CHECK(c.codec.pooling == PoolMode::kMax);
  CHECK(c.codec.lambda_mix == 0.0);
  CHECK(c.codec.precision == ComputePrecision::kFloat32);
  CHECK(c.codec.init == WeightInit::kFanInUniform);
  CHECK(c.plan.epochs == 7);
  CHECK(c.plan.batch == 3);
  CHECK(c.plan.learning_rate == 1e-4);
  CHECK(c.plan.test_fraction == 0.5);
  CHECK(c.plan.preprocess.zscore);
  CHECK(c.plan.preprocess.trim_to_multiple_of_4);
  CHECK(c.plan.label_coding == LabelCoding::kBipolar);
  CHECK(c.plan.ablation == Ablation::kNoBam);
  CHECK(c.plan.head_epochs == 5);
  CHECK(c.plan.head_learning_rate == 0.5);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK(ParseError("[data]\nsource = synth\nsorce = x\n").find("data.sorce") !=
        std::string::npos);
  CHECK(ParseError("[data]\nsource = synth\n[optimizer]\nlr = 1\n")
            .find("optimizer") != std::string::npos);
  CHECK(ParseError("seed = 3\n[data]\nsource = synth\n").find("seed") !=
        std::string::npos);
}

TEST_CASE("missing required keys are reported") {
  CHECK(ParseError("[run]\nseed = 1\n").find("data.source") != std::string::npos);
  CHECK(ParseError("[data]\nsource = bundle\n").find("data.bundle") !=
        std::string::npos);
}

TEST_CASE("malformed values name the key") {
  CHECK(ParseError("[data]\nsource = synth\n[run]\nseed = -1\n").find("run.seed") !=
        std::string::npos);
  CHECK(ParseError("[data]\nsource = synth\n[model]\ntau = fast\n")
            .find("model.tau") != std::string::npos);
  CHECK(ParseError("[data]\nsource = synth\n[model]\nencoder = 3-128\n")
            .find("model.encoder") != std::string::npos);
  CHECK(ParseError("[data]\nsource = synth\n[model]\nreset = none\n")
            .find("subtract") != std::string::npos);
  CHECK(ParseError("[data]\nsource = csv\n").find("synth | bundle") !=
        std::string::npos);
  CHECK(ParseError("[data]\nsource = synth\n[train]\nbatch = 0\n") != "");
  CHECK(ParseError("[data]\nsource = synth\n[train]\nablation = no-lif\n") != "");
  CHECK(ParseError("[data\nsource = synth\n").find("INI") != std::string::npos);
}

TEST_CASE("resolved config round-trips through the parser") {
  RunConfig c = Parse(R"(
[run]
seed = 9
[data]
source = synth
[model]
encoder = 1x16,1x32,1x32
lambda_mix = 0.25
[train]
epochs = 3
)");
  c.out = oracle::WorkDir("resolved");
  c.Resolve();
  c.WriteResolved();
  const RunConfig back = RunConfig::FromFile(c.out / "resolved_config.ini");
  std::ostringstream a, b;
  c.WriteIni(a);
  back.WriteIni(b);
  CHECK(a.str() == b.str());
  CHECK(back.checkpoint == c.out / "codec.ckpt");
  CHECK(back.synth_seed == 9u);
  CHECK(back.codec.lambda_mix == 0.25);
}

TEST_CASE("command-line overrides win over the file") {
  const auto dir = oracle::WorkDir("overrides");
  {
    std::ofstream f(dir / "run.ini");
    f << "[run]\nseed = 1\nout = first\n[data]\nsource = synth\n";
  }
  CommandOptions opt;
  opt.config = dir / "run.ini";
  RunConfig c = LoadRunConfig(opt);
  CHECK(c.seed == 1);
  CHECK(c.plan.seed == 1);
  CHECK(c.out == "first");
  CHECK(c.memory == std::filesystem::path("first") / "memory.bam");

  opt.out = dir / "second";
  opt.seed = 8;
  opt.ablation = "no-spiking";
  c = LoadRunConfig(opt);
  CHECK(c.seed == 8);
  CHECK(c.plan.seed == 8);
  CHECK(c.ResolvedSynth().seed == 8);
  CHECK(c.out == dir / "second");
  CHECK(c.checkpoint == dir / "second" / "codec.ckpt");
  CHECK(c.plan.ablation == Ablation::kNoSpiking);

  opt.config = dir / "absent.ini";
  CHECK_THROWS_AS(LoadRunConfig(opt), ConfigError);
}

TEST_CASE("errors map to distinct exit codes") {
  CHECK(ExitCodeFor(ConfigError("x")) == 2);
  CHECK(ExitCodeFor(InputTooShortError("x")) == 2);
  CHECK(ExitCodeFor(DataError("x")) == 3);
  CHECK(ExitCodeFor(NumericError("x")) == 4);
  CHECK(ExitCodeFor(CheckpointError("x")) == 5);
  CHECK(ExitCodeFor(std::logic_error("x")) == 1);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"synth_benchmark.ini", "bci_iv_2a.ini",
                           "bci_iii_iva.ini"}) {
    CAPTURE(name);
    CHECK_NOTHROW(RunConfig::FromFile(
        std::filesystem::path(AMMTEEG_CONFIG_DIR) / name));
  }
}
