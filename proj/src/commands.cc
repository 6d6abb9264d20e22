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

#include "ammteeg/commands.h"

#include <climits>
#include <filesystem>
#include <fstream>
#include <ostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "json.hpp"
#include <spdlog/spdlog.h>

#include "ammteeg/checkpoint.h"
#include "ammteeg/errors.h"
#include "ammteeg/export.h"

namespace ammteeg {
namespace {

std::ofstream OpenOutput(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

struct Loaded {
  Dataset dataset;
  CodecConfig codec;
};

Loaded Prepare(const RunConfig& config) {
  Loaded l;
  l.dataset = PrepareDataset(LoadDataset(config), config.plan);
  l.codec = ConfigForDataset(config.codec, l.dataset, config.plan.ablation);
  return l;
}

CodecModel LoadModel(const RunConfig& config, const CodecConfig& codec) {
  CodecModel model(codec, config.seed);
  model.Load(config.checkpoint);
  return model;
}

void WriteReport(const EvalReport& report, const std::filesystem::path& csv,
                 const std::filesystem::path& txt) {
  std::ofstream a = OpenOutput(csv);
  report.WriteCsv(a);
  std::ofstream b = OpenOutput(txt);
  report.WriteText(b);
}

LinearHeads LoadHeads(const RunConfig& config, const Dataset& dataset) {
  std::vector<LayerParams> layers = LoadCheckpoint(config.HeadsPath());
  const std::vector<std::string> tasks = dataset.Tasks();
  if (layers.size() != tasks.size()) {
    throw ConfigError("heads checkpoint holds " +
                      std::to_string(layers.size()) + " heads for " +
                      std::to_string(tasks.size()) + " tasks");
  }
  LinearHeads heads;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    heads.heads.emplace(tasks[t], std::move(layers[t]));
  }
  return heads;
}

}  // namespace

RunConfig LoadRunConfig(const CommandOptions& options) {
  RunConfig config = RunConfig::FromFile(options.config);
  if (options.out) config.out = *options.out;
  if (options.seed) config.seed = *options.seed;
  if (options.ablation) config.plan.ablation = ParseAblation(*options.ablation);
  config.Resolve();
  return config;
}

void CmdSynth(const RunConfig& config) {
  config.WriteResolved();
  const Dataset dataset = SynthGenerate(config.ResolvedSynth());
  SaveBundle(config.bundle, dataset);
  spdlog::info("wrote {} trials to {}", dataset.trials.size(),
               config.bundle.string());
}

void CmdTrain(const RunConfig& config) {
  config.WriteResolved();
  const Loaded l = Prepare(config);
  Phase1Result phase1;
  try {
    phase1 = TrainPhase1(l.dataset, l.codec, config.plan);
  } catch (const DivergenceError& e) {
    e.last_good().Save(config.checkpoint);
    std::ofstream curve = OpenOutput(config.out / "training_curve.csv");
    WriteTrainingCurveCsv(curve, e.curve());
    spdlog::error("saved last good parameters to {}",
                  config.checkpoint.string());
    throw;
  }
  phase1.model->Save(config.checkpoint);
  {
    std::ofstream curve = OpenOutput(config.out / "training_curve.csv");
    WriteTrainingCurveCsv(curve, phase1.curve);
  }
  if (config.plan.ablation == Ablation::kNoBam) {
    const LinearHeads heads =
        TrainLinearHeads(*phase1.model, l.dataset, config.plan);
    std::vector<const LayerParams*> layers;
    for (const std::string& task : l.dataset.Tasks()) {
      layers.push_back(&heads.heads.at(task));
    }
    SaveCheckpoint(config.HeadsPath(), layers);
  } else {
    TrainPhase2(*phase1.model, l.dataset, config.plan.label_coding)
        .Save(config.memory);
  }
}

EvalReport CmdEval(const RunConfig& config) {
  config.WriteResolved();
  const Loaded l = Prepare(config);
  const CodecModel model = LoadModel(config, l.codec);
  EvalReport report;
  if (config.plan.ablation == Ablation::kNoBam) {
    report = EvaluateHeads(model, LoadHeads(config, l.dataset), l.dataset);
  } else {
    report = Evaluate(model, TaskRegistry::Load(config.memory), l.dataset);
  }
  WriteReport(report, config.out / "report.csv", config.out / "report.txt");
  return report;
}

void CmdReconstruct(const RunConfig& config,
                    const std::optional<std::string>& task,
                    const std::optional<std::size_t>& label) {
  config.WriteResolved();
  if (config.plan.ablation == Ablation::kNoBam) {
    throw ConfigError("reconstruct needs associative memories; the no-bam "
                      "variant has none");
  }
  const Loaded l = Prepare(config);
  const CodecModel model = LoadModel(config, l.codec);
  const TaskRegistry registry = TaskRegistry::Load(config.memory);
  const CodecConfig& cc = model.config();

  std::vector<std::string> tasks;
  if (task) {
    registry.At(*task);
    tasks.push_back(*task);
  } else {
    tasks = registry.Tasks();
  }
  if (label && *label >= l.dataset.classes()) {
    throw ConfigError("class " + std::to_string(*label) + " outside the " +
                      std::to_string(l.dataset.classes()) + " classes");
  }

  std::ofstream similarity = OpenOutput(config.out / "similarity.csv");
  similarity << "task,class,erp_class,correlation\n";
  for (const std::string& t : tasks) {
    const Erp erp = ComputeErp(l.dataset, t);
    {
      std::ofstream csv = OpenOutput(config.out / ("erp_" + t + ".csv"));
      WriteErpCsv(csv, erp);
      std::vector<PlotSeries> series;
      for (std::size_t k = 0; k < erp.means.size(); ++k) {
        PlotSeries s = ChannelSeries(erp.means[k]).front();
        s.name = l.dataset.class_names[k] + " ch0";
        series.push_back(std::move(s));
      }
      std::ofstream svg = OpenOutput(config.out / ("erp_" + t + ".svg"));
      WriteLinePlotSvg(svg, "ERP, task " + t, series);
    }
    for (std::size_t k = 0; k < l.dataset.classes(); ++k) {
      if (label && k != *label) continue;
      const Tensor waveform = ReconstructClassWaveform(model, registry, t, k);
      const std::string stem = t + "_" + std::to_string(k);
      std::ofstream csv = OpenOutput(config.out / ("waveform_" + stem + ".csv"));
      WriteWaveformCsv(csv, waveform);
      std::ofstream svg = OpenOutput(config.out / ("waveform_" + stem + ".svg"));
      WriteLinePlotSvg(svg, "Reconstructed waveform, task " + t + ", " +
                                l.dataset.class_names[k],
                       ChannelSeries(waveform));
      if (cc.hidden == HiddenUnit::kSpiking) {
        std::ofstream raster =
            OpenOutput(config.out / ("raster_" + stem + ".csv"));
        WriteSpikeRasterCsv(
            raster, SpikesFromPattern(InvertLabel(registry.At(t), k),
                                      cc.lif.neurons, cc.HiddenSteps()));
      }
      for (std::size_t j = 0; j < erp.means.size(); ++j) {
        const Tensor target = model.TrimToModel(erp.means[j]);
        similarity << t << "," << k << "," << j << ","
                   << fmt::format("{:.17g}", PearsonCorrelation(
                                                 waveform.data(), target.data()))
                   << "\n";
      }
    }
  }
}

EvalReport CmdAblate(const RunConfig& config, Ablation ablation) {
  config.WriteResolved();
  const EvalReport report =
      RunAblation(LoadDataset(config), config.codec, config.plan, ablation);
  const std::string name = AblationName(ablation);
  WriteReport(report, config.out / ("report_" + name + ".csv"),
              config.out / ("report_" + name + ".txt"));
  return report;
}

void ConfigureAllocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, INT_MAX);
  mallopt(M_TRIM_THRESHOLD, INT_MAX);
#endif
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const CheckpointError*>(&e)) return kExitCheckpoint;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const UsageError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    return kExitData;
  }
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitInternal;
}

namespace {

const char* ErrorKind(int code) {
  switch (code) {
    case kExitConfig:
      return "config";
    case kExitData:
      return "data";
    case kExitNumeric:
      return "numeric";
    case kExitCheckpoint:
      return "checkpoint";
    default:
      return "internal";
  }
}

}  // namespace

int RunCommand(const std::string& command, const CommandOptions& options,
               std::ostream& err) {
  try {
    const RunConfig config = LoadRunConfig(options);
    if (command == "synth") {
      CmdSynth(config);
    } else if (command == "train") {
      CmdTrain(config);
    } else if (command == "eval") {
      CmdEval(config);
    } else if (command == "reconstruct") {
      CmdReconstruct(config, options.task, options.label);
    } else if (command == "ablate") {
      if (!options.ablation) throw UsageError("ablate needs --ablation");
      const Ablation a = ParseAblation(*options.ablation);
      if (a == Ablation::kNone) {
        throw UsageError("ablate needs --ablation no-spiking or no-bam");
      }
      CmdAblate(config, a);
    } else {
      throw UsageError("unknown command '" + command + "'");
    }
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = ExitCodeFor(e);
    nlohmann::json j = {{"command", command},
                        {"error", ErrorKind(code)},
                        {"exit_code", code},
                        {"message", e.what()}};
    err << j.dump() << std::endl;
    return code;
  }
}

}  // namespace ammteeg
