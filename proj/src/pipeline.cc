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

#include "ammteeg/pipeline.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ammteeg/optimizer.h"
#include "ammteeg/tape.h"

namespace ammteeg {
namespace {

constexpr std::size_t kEncodeChunk = 32;

Tensor StackTrials(const Dataset& dataset,
                   std::span<const std::size_t> indices) {
  const std::size_t per = dataset.channels * dataset.length;
  Tensor batch(Shape{indices.size(), dataset.channels, dataset.length});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::vector<float>& s = dataset.trials[indices[b]].samples;
    std::copy(s.begin(), s.end(), batch.values().begin() + b * per);
  }
  return batch;
}

bool ParametersFinite(const CodecModel& model) {
  for (const LayerParams* p : model.Parameters()) {
    if (!p->weight.AllFinite() || !p->bias.AllFinite()) return false;
  }
  return true;
}

std::vector<std::size_t> Labels(const Dataset& dataset,
                                std::span<const std::size_t> indices) {
  std::vector<std::size_t> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) labels.push_back(dataset.trials[i].label);
  return labels;
}

void RequireEveryClass(const Dataset& dataset, const std::string& task,
                       std::span<const std::size_t> indices,
                       const char* what) {
  std::vector<std::size_t> counts(dataset.classes(), 0);
  for (std::size_t i : indices) ++counts[dataset.trials[i].label];
  std::string missing;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      missing += (missing.empty() ? "" : ", ") + dataset.class_names[k];
    }
  }
  if (!missing.empty()) {
    throw DataError("task '" + task + "' has no " + what +
                    " trials for class(es): " + missing);
  }
}

Tensor PatternMatrix(const std::vector<BipolarPattern>& patterns,
                     std::span<const std::size_t> rows) {
  const std::size_t n = patterns.front().size();
  Tensor out(Shape{rows.size(), n});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const BipolarPattern& p = patterns[rows[r]];
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = p[j];
  }
  return out;
}

std::size_t ArgmaxRow(const Tensor& logits, std::size_t row, bool* tied) {
  const std::size_t k = logits.dim(1);
  std::size_t best = 0;
  for (std::size_t j = 1; j < k; ++j) {
    if (logits.at(row, j) > logits.at(row, best)) best = j;
  }
  *tied = false;
  for (std::size_t j = 0; j < k; ++j) {
    if (j != best && logits.at(row, j) == logits.at(row, best)) *tied = true;
  }
  return best;
}

TaskResult EmptyResult(const std::string& task, std::size_t classes) {
  TaskResult r;
  r.task_id = task;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  return r;
}

void Record(TaskResult& r, std::size_t truth, std::size_t predicted,
            bool tied) {
  ++r.trials;
  if (truth == predicted) ++r.correct;
  if (tied) ++r.ties;
  ++r.confusion[truth][predicted];
}

}  // namespace

const char* AblationName(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone:
      return "none";
    case Ablation::kNoSpiking:
      return "no-spiking";
    case Ablation::kNoBam:
      return "no-bam";
  }
  return "unknown";
}

Ablation ParseAblation(const std::string& name) {
  if (name == "none") return Ablation::kNone;
  if (name == "no-spiking") return Ablation::kNoSpiking;
  if (name == "no-bam") return Ablation::kNoBam;
  throw ConfigError("unknown ablation '" + name +
                    "' (expected none, no-spiking or no-bam)");
}

void TrainPlan::Validate() const {
  if (batch == 0) throw ConfigError("train: batch size must be positive");
  if (!(learning_rate > 0.0) || !(head_learning_rate > 0.0)) {
    throw ConfigError("train: learning rates must be positive");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("train: test fraction must lie in [0, 1)");
  }
}

void WriteTrainingCurveCsv(std::ostream& out,
                           const std::vector<EpochRecord>& curve) {
  out << "epoch,reconstruction,classification,total\n";
  for (const EpochRecord& r : curve) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", r.epoch,
                       r.reconstruction, r.classification, r.total);
  }
}

CodecConfig ConfigForDataset(CodecConfig base, const Dataset& dataset,
                             Ablation ablation) {
  base.channels = dataset.channels;
  base.length = dataset.length;
  base.classes = dataset.classes();
  if (ablation == Ablation::kNoSpiking) base.hidden = HiddenUnit::kTanh;
  return base;
}

Phase1Result TrainPhase1(const Dataset& dataset, const CodecConfig& config,
                         const TrainPlan& plan) {
  plan.Validate();
  config.Validate();
  if (dataset.channels != config.channels ||
      dataset.length != config.length ||
      dataset.classes() != config.classes) {
    throw ConfigError(fmt::format(
        "phase 1: dataset is {} channels x {} samples with {} classes, the "
        "codec expects {} x {} with {}",
        dataset.channels, dataset.length, dataset.classes(), config.channels,
        config.length, config.classes));
  }
  std::vector<std::size_t> order = dataset.Select(Split::kTrain);
  if (order.empty()) throw DataError("phase 1: no training trials");

  Phase1Result result;
  result.model = std::make_shared<CodecModel>(config, plan.seed);
  CodecModel& model = *result.model;
  Adam adam(model.Parameters(), AdamConfig{.learning_rate = plan.learning_rate});
  std::mt19937_64 shuffle_rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);

  for (std::size_t epoch = 1; epoch <= plan.epochs; ++epoch) {
    auto last_good = std::make_shared<const CodecModel>(model);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord record;
    record.epoch = epoch;
    double rate = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += plan.batch) {
        const std::size_t count = std::min(plan.batch, order.size() - start);
        const std::span<const std::size_t> idx(order.data() + start, count);
        const std::vector<std::size_t> labels = Labels(dataset, idx);
        const CodecModel::Loss loss =
            model.AccumulateGradients(StackTrials(dataset, idx), labels);
        adam.Step();
        const double w = static_cast<double>(count);
        record.reconstruction += w * loss.reconstruction;
        record.classification += w * loss.classification;
        record.total += w * loss.total;
        rate += w * loss.spike_rate;
      }
      if (!ParametersFinite(model)) {
        throw NumericError("parameters became non-finite");
      }
    } catch (const NumericError& e) {
      throw DivergenceError(
          fmt::format("phase 1 diverged in epoch {}: {}", epoch, e.what()),
          std::move(last_good), result.curve);
    }
    const double n = static_cast<double>(order.size());
    record.reconstruction /= n;
    record.classification /= n;
    record.total /= n;
    result.curve.push_back(record);
    spdlog::info("epoch {}/{}: loss {:.6f} (reconstruction {:.6f}, "
                 "classification {:.6f}, spike rate {:.4f})",
                 epoch, plan.epochs, record.total, record.reconstruction,
                 record.classification, rate / n);
  }
  for (LayerParams* p : model.Parameters()) {
    p->weight.DropGrad();
    p->bias.DropGrad();
  }
  return result;
}

std::vector<BipolarPattern> EncodePatterns(
    const CodecModel& model, const Dataset& dataset,
    const std::vector<std::size_t>& indices) {
  std::vector<BipolarPattern> out;
  out.reserve(indices.size());
  for (std::size_t start = 0; start < indices.size(); start += kEncodeChunk) {
    const std::size_t count = std::min(kEncodeChunk, indices.size() - start);
    const std::span<const std::size_t> idx(indices.data() + start, count);
    const Tensor spikes = model.Encode(StackTrials(dataset, idx)).spikes;
    const std::size_t per = spikes.size() / count;
    for (std::size_t b = 0; b < count; ++b) {
      out.push_back(
          BipolarPattern::FromSigns(spikes.data().subspan(b * per, per)));
    }
  }
  return out;
}

TaskRegistry TrainPhase2(const CodecModel& model, const Dataset& dataset,
                         LabelCoding coding) {
  const std::uint64_t before = model.EncoderFingerprint();
  TaskRegistry registry;
  for (const std::string& task : dataset.Tasks()) {
    const std::vector<std::size_t> train = dataset.Select(task, Split::kTrain);
    RequireEveryClass(dataset, task, train, "training");
    const std::vector<BipolarPattern> patterns =
        EncodePatterns(model, dataset, train);
    std::vector<PatternPair> pairs;
    pairs.reserve(train.size());
    for (std::size_t j = 0; j < train.size(); ++j) {
      pairs.push_back({patterns[j],
                       LabelPattern::Encode(dataset.trials[train[j]].label,
                                            dataset.classes(), coding)});
    }
    registry.Put(StorePairs(pairs, task, coding));
  }
  if (model.EncoderFingerprint() != before) {
    throw std::logic_error("phase 2 modified the frozen encoder");
  }
  return registry;
}

void EvalReport::Aggregate() {
  if (tasks.empty()) {
    mean = 0.0;
    std = 0.0;
    return;
  }
  const double n = static_cast<double>(tasks.size());
  double sum = 0.0;
  for (const TaskResult& t : tasks) sum += t.accuracy;
  mean = sum / n;
  double sq = 0.0;
  for (const TaskResult& t : tasks) sq += (t.accuracy - mean) * (t.accuracy - mean);
  std = std::sqrt(sq / n);
}

void EvalReport::WriteCsv(std::ostream& out) const {
  const std::size_t k = class_names.size();
  out << "task,trials,correct,accuracy,ties";
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) out << ",cm_" << i << "_" << j;
  }
  out << "\n";
  for (const TaskResult& t : tasks) {
    out << fmt::format("{},{},{},{:.17g},{}", t.task_id, t.trials, t.correct,
                       t.accuracy, t.ties);
    for (const auto& row : t.confusion) {
      for (std::size_t c : row) out << "," << c;
    }
    out << "\n";
  }
  const std::string blanks(k * k, ',');
  out << fmt::format("AVG,,,{:.17g},{}\n", mean, blanks);
  out << fmt::format("STD,,,{:.17g},{}\n", std, blanks);
}

void EvalReport::WriteText(std::ostream& out) const {
  out << fmt::format("variant: {}\n", variant.empty() ? "full" : variant);
  out << fmt::format("{:<12}{:>10}{:>10}{:>8}\n", "task", "accuracy",
                     "trials", "ties");
  for (const TaskResult& t : tasks) {
    out << fmt::format("{:<12}{:>10.3f}{:>10}{:>8}\n", t.task_id, t.accuracy,
                       t.trials, t.ties);
  }
  out << fmt::format("{:<12}{:>10.3f}\n", "AVG", mean);
  out << fmt::format("{:<12}{:>10.3f}\n", "STD", std);
}

EvalReport Evaluate(const CodecModel& model, const TaskRegistry& registry,
                    const Dataset& dataset, Split split) {
  EvalReport report;
  report.variant = model.config().hidden == HiddenUnit::kTanh ? "no-spiking"
                                                               : "full";
  report.class_names = dataset.class_names;
  for (const std::string& task : dataset.Tasks()) {
    if (!registry.Contains(task)) continue;
    const std::vector<std::size_t> idx = dataset.Select(task, split);
    if (idx.empty()) {
      throw DataError("task '" + task + "' has no " + SplitName(split) +
                      " trials to evaluate");
    }
    const AMMatrix& memory = registry.At(task);
    const std::vector<BipolarPattern> patterns =
        EncodePatterns(model, dataset, idx);
    TaskResult r = EmptyResult(task, dataset.classes());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Classification c = Classify(memory, patterns[j]);
      Record(r, dataset.trials[idx[j]].label, c.label, c.tied);
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.trials);
    report.tasks.push_back(std::move(r));
  }
  report.Aggregate();
  return report;
}

LinearHeads TrainLinearHeads(const CodecModel& model, const Dataset& dataset,
                             const TrainPlan& plan) {
  plan.Validate();
  LinearHeads out;
  const std::vector<std::string> tasks = dataset.Tasks();
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::string& task = tasks[t];
    const std::vector<std::size_t> train = dataset.Select(task, Split::kTrain);
    RequireEveryClass(dataset, task, train, "training");
    const std::vector<BipolarPattern> patterns =
        EncodePatterns(model, dataset, train);
    const std::vector<std::size_t> labels = Labels(dataset, train);

    LayerParams head =
        LayerParams::FullyConnected(patterns.front().size(), dataset.classes());
    std::mt19937_64 rng(plan.seed + 0x51ed2701ULL * (t + 1));
    InitializeUniform(head, rng);
    Adam adam({&head}, AdamConfig{.learning_rate = plan.head_learning_rate});

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < plan.head_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += plan.batch) {
        const std::size_t count = std::min(plan.batch, order.size() - start);
        const std::span<const std::size_t> rows(order.data() + start, count);
        const Tensor x = PatternMatrix(patterns, rows);
        std::vector<std::size_t> y;
        for (std::size_t r : rows) y.push_back(labels[r]);
        const LossValue ce =
            SoftmaxCrossEntropy(FullyConnectedForward(x, head), y);
        AccumulateGrads(head, FullyConnectedBackward(ce.grad, x, head));
        adam.Step();
      }
    }
    head.weight.DropGrad();
    head.bias.DropGrad();

    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), 0);
    const Tensor logits = FullyConnectedForward(PatternMatrix(patterns, all), head);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < all.size(); ++r) {
      bool tied = false;
      if (ArgmaxRow(logits, r, &tied) == labels[r]) ++correct;
    }
    out.train_accuracy[task] =
        static_cast<double>(correct) / static_cast<double>(all.size());
    out.heads.emplace(task, std::move(head));
  }
  return out;
}

EvalReport EvaluateHeads(const CodecModel& model, const LinearHeads& heads,
                         const Dataset& dataset, Split split) {
  EvalReport report;
  report.variant = "no-bam";
  report.class_names = dataset.class_names;
  for (const std::string& task : dataset.Tasks()) {
    const auto it = heads.heads.find(task);
    if (it == heads.heads.end()) continue;
    const std::vector<std::size_t> idx = dataset.Select(task, split);
    if (idx.empty()) {
      throw DataError("task '" + task + "' has no " + SplitName(split) +
                      " trials to evaluate");
    }
    const std::vector<BipolarPattern> patterns =
        EncodePatterns(model, dataset, idx);
    std::vector<std::size_t> rows(idx.size());
    std::iota(rows.begin(), rows.end(), 0);
    const Tensor logits =
        FullyConnectedForward(PatternMatrix(patterns, rows), it->second);
    TaskResult r = EmptyResult(task, dataset.classes());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      bool tied = false;
      const std::size_t predicted = ArgmaxRow(logits, j, &tied);
      Record(r, dataset.trials[idx[j]].label, predicted, tied);
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.trials);
    report.tasks.push_back(std::move(r));
  }
  report.Aggregate();
  return report;
}

Tensor ReconstructClassWaveform(const CodecModel& model,
                                const TaskRegistry& registry,
                                const std::string& task_id,
                                std::size_t label) {
  const AMMatrix& memory = registry.At(task_id);
  const CodecConfig& cfg = model.config();
  if (label >= memory.rows) {
    throw ConfigError("class " + std::to_string(label) + " outside the " +
                      std::to_string(memory.rows) + " classes of task '" +
                      task_id + "'");
  }
  if (memory.cols != cfg.SpikeFeatures()) {
    throw ConfigError("memory of task '" + task_id + "' has " +
                      std::to_string(memory.cols) +
                      " columns, the codec emits " +
                      std::to_string(cfg.SpikeFeatures()) + " spike features");
  }
  const BipolarPattern pattern = InvertLabel(memory, label);
  Tensor hidden;
  if (cfg.hidden == HiddenUnit::kSpiking) {
    hidden = SpikesFromPattern(pattern, cfg.lif.neurons, cfg.HiddenSteps())
                 .ToTensor();
  } else {
    hidden = Tensor(Shape{cfg.lif.neurons, cfg.HiddenSteps()});
    for (std::size_t i = 0; i < pattern.size(); ++i) hidden[i] = pattern[i];
  }
  return model.Decode(hidden);
}

Dataset PrepareDataset(const Dataset& raw, const TrainPlan& plan) {
  raw.Validate();
  Dataset dataset = raw;
  AssignSplits(dataset, plan.test_fraction, plan.seed);
  return Preprocess(dataset, plan.preprocess);
}

PipelineResult RunPipeline(const Dataset& raw, const CodecConfig& base,
                           const TrainPlan& plan) {
  plan.Validate();
  PipelineResult result;
  result.dataset = PrepareDataset(raw, plan);
  const CodecConfig config =
      ConfigForDataset(base, result.dataset, plan.ablation);
  spdlog::info("phase 1: {} training trials, {} tasks, variant {}",
               result.dataset.Select(Split::kTrain).size(),
               result.dataset.Tasks().size(), AblationName(plan.ablation));
  result.phase1 = TrainPhase1(result.dataset, config, plan);
  const CodecModel& model = *result.phase1.model;
  if (plan.ablation == Ablation::kNoBam) {
    result.heads = TrainLinearHeads(model, result.dataset, plan);
    result.report = EvaluateHeads(model, *result.heads, result.dataset);
  } else {
    result.registry = TrainPhase2(model, result.dataset, plan.label_coding);
    result.report = Evaluate(model, result.registry, result.dataset);
  }
  return result;
}

EvalReport RunAblation(const Dataset& raw, const CodecConfig& base,
                       TrainPlan plan, Ablation ablation) {
  if (ablation == Ablation::kNone) {
    throw ConfigError("run_ablation needs no-spiking or no-bam");
  }
  plan.ablation = ablation;
  return RunPipeline(raw, base, plan).report;
}

}  // namespace ammteeg
