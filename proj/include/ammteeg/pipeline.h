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

#ifndef AMMTEEG_PIPELINE_H_
#define AMMTEEG_PIPELINE_H_

// Two-phase multi-task training and evaluation.
//
// Phase 1 trains the shared codec on the pooled training trials of every
// task with the joint reconstruction + classification loss. Phase 2 freezes
// it, encodes each task's training trials and stores them in one
// associative memory per task.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ammteeg/bam.h"
#include "ammteeg/codec.h"
#include "ammteeg/data.h"
#include "ammteeg/errors.h"

namespace ammteeg {

enum class Ablation {
  kNone,
  kNoSpiking,  // LIF population replaced by tanh
  kNoBam,      // associative memories replaced by trained linear heads
};

const char* AblationName(Ablation ablation);
// Accepts "none", "no-spiking" and "no-bam".
Ablation ParseAblation(const std::string& name);

struct TrainPlan {
  std::size_t epochs = 100;
  std::size_t batch = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  PreprocessConfig preprocess;
  LabelCoding label_coding = LabelCoding::kOneHot;
  Ablation ablation = Ablation::kNone;
  std::size_t head_epochs = 60;
  double head_learning_rate = 1e-2;

  void Validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double reconstruction = 0.0;
  double classification = 0.0;
  double total = 0.0;
};

void WriteTrainingCurveCsv(std::ostream& out,
                           const std::vector<EpochRecord>& curve);

struct Phase1Result {
  std::shared_ptr<CodecModel> model;
  std::vector<EpochRecord> curve;
};

// Raised when the joint loss stops being finite; carries the parameters as
// they were at the start of the failing epoch.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& message,
                  std::shared_ptr<const CodecModel> last_good,
                  std::vector<EpochRecord> curve)
      : NumericError(message),
        last_good_(std::move(last_good)),
        curve_(std::move(curve)) {}

  const CodecModel& last_good() const { return *last_good_; }
  const std::vector<EpochRecord>& curve() const { return curve_; }

 private:
  std::shared_ptr<const CodecModel> last_good_;
  std::vector<EpochRecord> curve_;
};

// Codec shape taken from the dataset; everything else from `base`.
CodecConfig ConfigForDataset(CodecConfig base, const Dataset& dataset,
                             Ablation ablation = Ablation::kNone);

// Trains on the train split of every task. The model seed and the shuffling
// order both derive from plan.seed.
Phase1Result TrainPhase1(const Dataset& dataset, const CodecConfig& config,
                         const TrainPlan& plan);

// Hidden activations of the given trials, sign-thresholded to +-1.
std::vector<BipolarPattern> EncodePatterns(
    const CodecModel& model, const Dataset& dataset,
    const std::vector<std::size_t>& indices);

// One memory per task from its training trials. Throws DataError when a
// task lacks training trials for some class.
TaskRegistry TrainPhase2(const CodecModel& model, const Dataset& dataset,
                         LabelCoding coding = LabelCoding::kOneHot);

struct TaskResult {
  std::string task_id;
  std::size_t trials = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t ties = 0;

  friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

struct EvalReport {
  std::string variant;
  std::vector<std::string> class_names;
  std::vector<TaskResult> tasks;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over tasks

  // Recomputes mean and std from the per-task accuracies.
  void Aggregate();

  // One row per task with accuracy, ties and confusion cells, then AVG and
  // STD rows.
  void WriteCsv(std::ostream& out) const;
  void WriteText(std::ostream& out) const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Classifies the test split of every task held in the registry.
EvalReport Evaluate(const CodecModel& model, const TaskRegistry& registry,
                    const Dataset& dataset, Split split = Split::kTest);

// Per-task dense classifier on the bipolarized hidden patterns.
struct LinearHeads {
  std::map<std::string, LayerParams> heads;
  std::map<std::string, double> train_accuracy;
};

LinearHeads TrainLinearHeads(const CodecModel& model, const Dataset& dataset,
                             const TrainPlan& plan);
EvalReport EvaluateHeads(const CodecModel& model, const LinearHeads& heads,
                         const Dataset& dataset, Split split = Split::kTest);

// invert_label -> spike train -> decoder. Returns [C x ModelLength()].
Tensor ReconstructClassWaveform(const CodecModel& model,
                                const TaskRegistry& registry,
                                const std::string& task_id,
                                std::size_t label);

// Splits and preprocessing exactly as the pipeline applies them.
Dataset PrepareDataset(const Dataset& raw, const TrainPlan& plan);

struct PipelineResult {
  Dataset dataset;  // prepared
  Phase1Result phase1;
  TaskRegistry registry;  // empty for the no-bam variant
  std::optional<LinearHeads> heads;
  EvalReport report;
};

PipelineResult RunPipeline(const Dataset& raw, const CodecConfig& base,
                           const TrainPlan& plan);

// RunPipeline with plan.ablation forced to `ablation`, which must not be
// kNone.
EvalReport RunAblation(const Dataset& raw, const CodecConfig& base,
                       TrainPlan plan, Ablation ablation);

}  // namespace ammteeg

#endif  // AMMTEEG_PIPELINE_H_
