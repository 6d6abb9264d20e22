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

#ifndef AMMTEEG_RUN_CONFIG_H_
#define AMMTEEG_RUN_CONFIG_H_

// INI run configuration. Sections and keys:
//
//   [run]    seed, out, checkpoint, memory
//   [data]   source (synth|bundle), bundle, trim_to_header_length
//   [synth]  tasks, classes, channels, length, trials_per_class,
//            sample_rate, snr_db, seed
//   [model]  encoder, decoder, kernel, neurons, tau, threshold, reset,
//            recurrence, pooling, lambda_mix, precision, init
//   [train]  epochs, batch, learning_rate, test_fraction, zscore,
//            trim_to_multiple_of_4, label_coding, ablation, head_epochs,
//            head_learning_rate
//
// data.source is required, and data.bundle too when the source is a bundle.
// Everything else has a default. Unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ammteeg/codec.h"
#include "ammteeg/data.h"
#include "ammteeg/pipeline.h"

namespace ammteeg {

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  std::filesystem::path checkpoint;  // defaults to <out>/codec.ckpt
  std::filesystem::path memory;      // defaults to <out>/memory.bam

  std::string data_source = "synth";
  std::filesystem::path bundle;
  BundleOptions bundle_options;
  SynthSpec synth;
  std::optional<std::uint64_t> synth_seed;  // run seed when unset

  CodecConfig codec;
  TrainPlan plan;

  static RunConfig Parse(std::istream& in);
  static RunConfig FromFile(const std::filesystem::path& path);

  // Fills derived defaults after command-line overrides.
  void Resolve();
  SynthSpec ResolvedSynth() const;
  std::filesystem::path HeadsPath() const { return out / "heads.ckpt"; }

  // Every key with its effective value.
  void WriteIni(std::ostream& out) const;
  void WriteResolved() const;
};

// Synthesized in memory or read from the bundle, per data.source.
Dataset LoadDataset(const RunConfig& config);

}  // namespace ammteeg

#endif  // AMMTEEG_RUN_CONFIG_H_
