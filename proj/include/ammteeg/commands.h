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

#ifndef AMMTEEG_COMMANDS_H_
#define AMMTEEG_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ammteeg/pipeline.h"
#include "ammteeg/run_config.h"

namespace ammteeg {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitCheckpoint = 5,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> task;
  std::optional<std::size_t> label;
  std::optional<std::string> ablation;
};

// Parses the config file and applies the command-line overrides.
RunConfig LoadRunConfig(const CommandOptions& options);

// Writes <bundle>.
void CmdSynth(const RunConfig& config);
// Writes <checkpoint>, training_curve.csv and <memory> (heads.ckpt for the
// no-bam variant).
void CmdTrain(const RunConfig& config);
// Writes report.csv and report.txt.
EvalReport CmdEval(const RunConfig& config);
// Writes waveform_<task>_<class>.csv/.svg, raster_<task>_<class>.csv and
// erp_<task>.csv/.svg; every task and class unless restricted.
void CmdReconstruct(const RunConfig& config,
                    const std::optional<std::string>& task,
                    const std::optional<std::size_t>& label);
// Writes report_<ablation>.csv and report_<ablation>.txt.
EvalReport CmdAblate(const RunConfig& config, Ablation ablation);

int ExitCodeFor(const std::exception& e);

// Keeps large training buffers on the heap instead of fresh mappings per
// batch. No-op outside glibc.
void ConfigureAllocator();

// Runs one subcommand, reporting failures as a single JSON line on `err`.
int RunCommand(const std::string& command, const CommandOptions& options,
               std::ostream& err);

}  // namespace ammteeg

#endif  // AMMTEEG_COMMANDS_H_
