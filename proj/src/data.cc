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

#include "ammteeg/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "ammteeg/errors.h"
#include "binary_io.h"

namespace ammteeg {
namespace {

constexpr char kBundleMagic[8] = {'A', 'M', 'M', 'T', 'B', 'N', 'D', 'L'};

std::string TrialName(const EEGTrial& trial) {
  return "trial '" + trial.trial_id + "' of task '" + trial.task_id + "'";
}

std::mt19937_64 Stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)};
  return std::mt19937_64(seq);
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kUnassigned:
      return "unassigned";
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Tensor EEGTrial::ToTensor() const {
  return Tensor({channels, length},
                std::vector<double>(samples.begin(), samples.end()));
}

std::vector<std::string> Dataset::Tasks() const {
  std::vector<std::string> tasks;
  std::set<std::string> seen;
  for (const EEGTrial& trial : trials) {
    if (seen.insert(trial.task_id).second) tasks.push_back(trial.task_id);
  }
  return tasks;
}

std::vector<std::size_t> Dataset::Select(const std::string& task_id,
                                         std::optional<Split> split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].task_id != task_id) continue;
    if (split && trials[i].split != *split) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::Select(std::optional<Split> split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!split || trials[i].split == *split) out.push_back(i);
  }
  return out;
}

void Dataset::Validate() const {
  if (channels == 0 || length == 0) {
    throw DataError("dataset has zero channels or zero length");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw DataError("dataset sample rate must be positive");
  }
  if (class_names.empty()) throw DataError("dataset declares no classes");
  for (const EEGTrial& trial : trials) {
    if (trial.channels != channels) {
      throw DataError(TrialName(trial) + " has " +
                      std::to_string(trial.channels) + " channels, expected " +
                      std::to_string(channels));
    }
    if (trial.length != length) {
      throw DataError(TrialName(trial) + " has " +
                      std::to_string(trial.length) + " samples, expected " +
                      std::to_string(length));
    }
    if (trial.sample_rate != sample_rate) {
      throw DataError(TrialName(trial) + " has a different sample rate");
    }
    if (trial.samples.size() != channels * length) {
      throw DataError(TrialName(trial) + " has a truncated sample matrix");
    }
    if (trial.label >= class_names.size()) {
      throw DataError(TrialName(trial) + " has label " +
                      std::to_string(trial.label) + " outside " +
                      std::to_string(class_names.size()) + " classes");
    }
    for (float v : trial.samples) {
      if (!std::isfinite(v)) {
        throw DataError(TrialName(trial) + " contains non-finite samples");
      }
    }
  }
}

void WriteBundle(std::ostream& out, const Dataset& dataset) {
  out.write(kBundleMagic, sizeof(kBundleMagic));
  binary::WriteUInt(out, kBundleVersion);
  binary::WriteUInt<std::uint64_t>(out, dataset.channels);
  binary::WriteUInt<std::uint64_t>(out, dataset.length);
  binary::WriteF64(out, dataset.sample_rate);
  binary::WriteUInt<std::uint32_t>(
      out, static_cast<std::uint32_t>(dataset.class_names.size()));
  for (const std::string& name : dataset.class_names) {
    binary::WriteString(out, name);
  }
  binary::WriteString(out, dataset.provenance);
  binary::WriteUInt<std::uint64_t>(out, dataset.trials.size());
  for (const EEGTrial& trial : dataset.trials) {
    binary::WriteString(out, trial.task_id);
    binary::WriteString(out, trial.trial_id);
    binary::WriteUInt<std::uint32_t>(out,
                                     static_cast<std::uint32_t>(trial.label));
    binary::WriteUInt<std::uint8_t>(out, static_cast<std::uint8_t>(trial.split));
    binary::WriteUInt<std::uint64_t>(out, trial.channels);
    binary::WriteUInt<std::uint64_t>(out, trial.length);
    for (float v : trial.samples) binary::WriteF32(out, v);
  }
}

Dataset ReadBundle(std::istream& in, const BundleOptions& options) {
  binary::Reader<DataError> reader(in, "trial bundle");
  char magic[sizeof(kBundleMagic)];
  reader.ReadBytes(magic, sizeof(magic), "magic");
  if (!std::equal(magic, magic + sizeof(magic), kBundleMagic)) {
    reader.Fail("bad magic, not a trial bundle");
  }
  const auto version = reader.ReadUInt<std::uint32_t>("version");
  if (version != kBundleVersion) {
    reader.Fail("unsupported bundle version " + std::to_string(version));
  }
  Dataset dataset;
  dataset.channels = reader.ReadUInt<std::uint64_t>("channel count");
  dataset.length = reader.ReadUInt<std::uint64_t>("trial length");
  dataset.sample_rate = reader.ReadF64("sample rate");
  if (dataset.channels == 0 || dataset.length == 0 ||
      dataset.channels * dataset.length > (1ULL << 28)) {
    reader.Fail("implausible trial shape in header");
  }
  const auto classes = reader.ReadUInt<std::uint32_t>("class count");
  if (classes == 0 || classes > 4096) reader.Fail("implausible class count");
  for (std::uint32_t k = 0; k < classes; ++k) {
    dataset.class_names.push_back(reader.ReadString("class name"));
  }
  dataset.provenance = reader.ReadString("provenance", 1u << 20);
  const auto count = reader.ReadUInt<std::uint64_t>("trial count");
  for (std::uint64_t i = 0; i < count; ++i) {
    EEGTrial trial;
    trial.task_id = reader.ReadString("task id");
    trial.trial_id = reader.ReadString("trial id");
    trial.label = reader.ReadUInt<std::uint32_t>("label");
    const auto split = reader.ReadUInt<std::uint8_t>("split");
    if (split > 2) reader.Fail(TrialName(trial) + " has an unknown split");
    trial.split = static_cast<Split>(split);
    trial.channels = reader.ReadUInt<std::uint64_t>("trial channel count");
    trial.length = reader.ReadUInt<std::uint64_t>("trial length");
    trial.sample_rate = dataset.sample_rate;
    if (trial.channels != dataset.channels) {
      reader.Fail(TrialName(trial) + " has " + std::to_string(trial.channels) +
                  " channels, header declares " +
                  std::to_string(dataset.channels));
    }
    if (trial.length > (1ULL << 28) / std::max<std::size_t>(trial.channels, 1)) {
      reader.Fail(TrialName(trial) + " has an implausible length");
    }
    trial.samples.resize(trial.channels * trial.length);
    for (float& v : trial.samples) v = reader.ReadF32("samples");
    if (trial.length != dataset.length) {
      if (!options.trim_to_header_length || trial.length < dataset.length) {
        reader.Fail(TrialName(trial) + " has " + std::to_string(trial.length) +
                    " samples, header declares " +
                    std::to_string(dataset.length));
      }
      std::vector<float> cut(trial.channels * dataset.length);
      for (std::size_t c = 0; c < trial.channels; ++c) {
        std::copy_n(trial.samples.begin() + c * trial.length, dataset.length,
                    cut.begin() + c * dataset.length);
      }
      trial.samples = std::move(cut);
      trial.length = dataset.length;
    }
    dataset.trials.push_back(std::move(trial));
  }
  if (!reader.AtEnd()) reader.Fail("trailing bytes after last trial");
  dataset.Validate();
  return dataset;
}

void SaveBundle(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write bundle " + path.string());
  WriteBundle(out, dataset);
  if (!out) throw DataError("failed writing bundle " + path.string());
}

Dataset LoadBundle(const std::filesystem::path& path,
                   const BundleOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle " + path.string());
  return ReadBundle(in, options);
}

void SynthSpec::Validate() const {
  if (tasks == 0 || classes == 0 || channels == 0 || length == 0 ||
      trials_per_class == 0) {
    throw ConfigError("synthetic spec counts must be positive");
  }
  if (!(sample_rate > 0.0)) {
    throw ConfigError("synthetic sample rate must be positive");
  }
  if (std::isnan(snr_db)) throw ConfigError("synthetic SNR is NaN");
}

std::vector<std::array<double, 2>> DesignedFrequencies(const SynthSpec& spec) {
  // Classes sit on a ladder starting at 6 Hz with the second tone half a
  // rung above the first, kept below 40% of the sample rate.
  const double low = 6.0;
  const double top = 0.4 * spec.sample_rate;
  const double rung =
      std::min(4.0, (top - low) / static_cast<double>(spec.classes));
  std::vector<std::array<double, 2>> out(spec.classes);
  for (std::size_t k = 0; k < spec.classes; ++k) {
    const double f = low + rung * static_cast<double>(k);
    out[k] = {f, f + rung / 2.0};
  }
  return out;
}

Dataset SynthGenerate(const SynthSpec& spec) {
  spec.Validate();
  const auto freqs = DesignedFrequencies(spec);
  const std::size_t c = spec.channels;
  const std::size_t len = spec.length;
  const double two_pi = 2.0 * std::numbers::pi;

  Dataset dataset;
  dataset.channels = c;
  dataset.length = len;
  dataset.sample_rate = spec.sample_rate;
  for (std::size_t k = 0; k < spec.classes; ++k) {
    dataset.class_names.push_back("class" + std::to_string(k));
  }
  dataset.provenance = "synthetic: tasks=" + std::to_string(spec.tasks) +
                       " classes=" + std::to_string(spec.classes) +
                       " channels=" + std::to_string(c) +
                       " length=" + std::to_string(len) +
                       " snr_db=" + std::to_string(spec.snr_db) +
                       " seed=" + std::to_string(spec.seed);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, two_pi);
  for (std::size_t task = 0; task < spec.tasks; ++task) {
    std::mt19937_64 task_rng = Stream(spec.seed, task, 0, 0);
    std::vector<double> mixing(c * 2);
    for (double& m : mixing) m = gauss(task_rng);

    std::vector<std::vector<double>> clean(spec.classes);
    std::vector<double> noise_std(spec.classes, 0.0);
    for (std::size_t k = 0; k < spec.classes; ++k) {
      const double p0 = phase(task_rng);
      const double p1 = phase(task_rng);
      std::vector<double>& wave = clean[k];
      wave.resize(c * len);
      double power = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double time = static_cast<double>(t) / spec.sample_rate;
        const double s0 = std::sin(two_pi * freqs[k][0] * time + p0);
        const double s1 = std::sin(two_pi * freqs[k][1] * time + p1);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double v = mixing[ch * 2] * s0 + mixing[ch * 2 + 1] * s1;
          wave[ch * len + t] = v;
          power += v * v;
        }
      }
      power /= static_cast<double>(c * len);
      if (std::isfinite(spec.snr_db)) {
        noise_std[k] = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
      }
    }

    const std::string task_id = "task" + std::to_string(task + 1);
    for (std::size_t i = 0; i < spec.trials_per_class; ++i) {
      for (std::size_t k = 0; k < spec.classes; ++k) {
        std::mt19937_64 noise_rng = Stream(spec.seed, task, k + 1, i + 1);
        EEGTrial trial;
        trial.task_id = task_id;
        trial.trial_id = task_id + "-c" + std::to_string(k) + "-" +
                         std::to_string(i);
        trial.label = k;
        trial.channels = c;
        trial.length = len;
        trial.sample_rate = spec.sample_rate;
        trial.samples.resize(c * len);
        for (std::size_t j = 0; j < c * len; ++j) {
          double v = clean[k][j];
          if (noise_std[k] > 0.0) v += noise_std[k] * gauss(noise_rng);
          trial.samples[j] = static_cast<float>(v);
        }
        dataset.trials.push_back(std::move(trial));
      }
    }
  }
  return dataset;
}

void AssignSplits(Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in [0, 1)");
  }
  const std::vector<std::string> tasks = dataset.Tasks();
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t k = 0; k < dataset.classes(); ++k) {
      std::vector<std::size_t> pool;
      for (std::size_t i : dataset.Select(tasks[t], Split::kUnassigned)) {
        if (dataset.trials[i].label == k) pool.push_back(i);
      }
      if (pool.empty()) continue;
      std::mt19937_64 rng = Stream(seed, t, k, 0x5911);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::size_t n_test = static_cast<std::size_t>(
          std::floor(test_fraction * static_cast<double>(pool.size()) + 0.5));
      n_test = std::min(n_test, pool.size() - 1);
      for (std::size_t j = 0; j < pool.size(); ++j) {
        dataset.trials[pool[j]].split = j < n_test ? Split::kTest : Split::kTrain;
      }
    }
  }
}

Erp ComputeErp(const Dataset& dataset, const std::string& task_id,
               std::optional<Split> split) {
  const std::size_t classes = dataset.classes();
  Erp erp;
  erp.task_id = task_id;
  erp.counts.assign(classes, 0);
  std::vector<std::vector<double>> sums(
      classes, std::vector<double>(dataset.channels * dataset.length, 0.0));
  for (std::size_t i : dataset.Select(task_id, split)) {
    const EEGTrial& trial = dataset.trials[i];
    std::vector<double>& sum = sums[trial.label];
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += trial.samples[j];
    ++erp.counts[trial.label];
  }
  std::string missing;
  for (std::size_t k = 0; k < classes; ++k) {
    if (erp.counts[k] == 0) {
      missing += (missing.empty() ? "" : ", ") + dataset.class_names[k];
    }
  }
  if (!missing.empty()) {
    throw DataError("task '" + task_id + "' has no trials for class(es): " +
                    missing);
  }
  for (std::size_t k = 0; k < classes; ++k) {
    const double n = static_cast<double>(erp.counts[k]);
    for (double& v : sums[k]) v /= n;
    erp.means.emplace_back(Shape{dataset.channels, dataset.length},
                           std::move(sums[k]));
  }
  return erp;
}

Normalizer Normalizer::Fit(const Dataset& dataset) {
  const std::vector<std::size_t> fit = dataset.Select(Split::kTrain);
  if (fit.empty()) {
    throw DataError("z-score normalization needs trials in the train split");
  }
  const std::size_t c = dataset.channels;
  const std::size_t len = dataset.length;
  Normalizer norm;
  norm.mean.assign(c, 0.0);
  norm.scale.assign(c, 0.0);
  const double n = static_cast<double>(fit.size() * len);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t i : fit) {
      for (std::size_t t = 0; t < len; ++t) sum += dataset.trials[i].at(ch, t);
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t i : fit) {
      for (std::size_t t = 0; t < len; ++t) {
        const double d = dataset.trials[i].at(ch, t) - mean;
        sq += d * d;
      }
    }
    const double var = sq / n;
    norm.mean[ch] = mean;
    if (var > 0.0) {
      norm.scale[ch] = 1.0 / std::sqrt(var);
    } else {
      spdlog::warn("channel {} has zero variance on the train split; "
                   "replacing it with zeros",
                   ch);
    }
  }
  return norm;
}

void Normalizer::Apply(Dataset& dataset) const {
  if (mean.size() != dataset.channels || scale.size() != dataset.channels) {
    throw ConfigError("normalizer fitted for " + std::to_string(mean.size()) +
                      " channels applied to " +
                      std::to_string(dataset.channels));
  }
  for (EEGTrial& trial : dataset.trials) {
    for (std::size_t ch = 0; ch < trial.channels; ++ch) {
      float* row = trial.samples.data() + ch * trial.length;
      for (std::size_t t = 0; t < trial.length; ++t) {
        row[t] = static_cast<float>((row[t] - mean[ch]) * scale[ch]);
      }
    }
  }
}

Dataset Preprocess(const Dataset& dataset, const PreprocessConfig& config) {
  Dataset out = dataset;
  if (config.trim_to_multiple_of_4 && out.length % 4 != 0) {
    const std::size_t keep = out.length - out.length % 4;
    if (keep == 0) throw DataError("trials shorter than 4 samples");
    for (EEGTrial& trial : out.trials) {
      std::vector<float> cut(trial.channels * keep);
      for (std::size_t ch = 0; ch < trial.channels; ++ch) {
        std::copy_n(trial.samples.begin() + ch * trial.length, keep,
                    cut.begin() + ch * keep);
      }
      trial.samples = std::move(cut);
      trial.length = keep;
    }
    out.length = keep;
  }
  if (config.zscore) Normalizer::Fit(out).Apply(out);
  return out;
}

}  // namespace ammteeg
