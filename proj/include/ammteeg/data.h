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

#ifndef AMMTEEG_DATA_H_
#define AMMTEEG_DATA_H_

// Labelled multichannel trials, the trial-bundle file format, the synthetic
// generator, preprocessing and event-related potentials.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ammteeg/tensor.h"

namespace ammteeg {

enum class Split : std::uint8_t {
  kUnassigned = 0,
  kTrain = 1,
  kTest = 2,
};

const char* SplitName(Split split);

struct EEGTrial {
  std::string task_id;
  std::string trial_id;
  std::size_t label = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  double sample_rate = 0.0;
  std::vector<float> samples;  // row-major channels x length
  Split split = Split::kUnassigned;

  float at(std::size_t channel, std::size_t t) const {
    return samples[channel * length + t];
  }
  // [channels x length] in double precision.
  Tensor ToTensor() const;

  friend bool operator==(const EEGTrial&, const EEGTrial&) = default;
};

struct Dataset {
  std::size_t channels = 0;
  std::size_t length = 0;
  double sample_rate = 0.0;
  std::vector<std::string> class_names;
  std::string provenance;
  std::vector<EEGTrial> trials;

  std::size_t classes() const { return class_names.size(); }
  // Task ids in order of first appearance.
  std::vector<std::string> Tasks() const;
  // Indices of the trials of `task_id`, optionally restricted to a split.
  std::vector<std::size_t> Select(const std::string& task_id,
                                  std::optional<Split> split = {}) const;
  std::vector<std::size_t> Select(std::optional<Split> split) const;

  // Throws DataError naming the first offending trial.
  void Validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Trial bundle, little-endian:
//   "AMMTBNDL", u32 version,
//   u64 channels, u64 length, f64 sample_rate,
//   u32 class count, class names, provenance string,
//   u64 trial count, then per trial:
//     task_id, trial_id, u32 label, u8 split, u64 channels, u64 length,
//     f32 samples[channels * length] row-major.
// Strings are a u32 byte length followed by the bytes.
inline constexpr std::uint32_t kBundleVersion = 1;

struct BundleOptions {
  // Trials longer than the header length are cut to it instead of being
  // rejected.
  bool trim_to_header_length = false;
};

void WriteBundle(std::ostream& out, const Dataset& dataset);
Dataset ReadBundle(std::istream& in, const BundleOptions& options = {});
void SaveBundle(const std::filesystem::path& path, const Dataset& dataset);
Dataset LoadBundle(const std::filesystem::path& path,
                   const BundleOptions& options = {});

struct SynthSpec {
  std::size_t tasks = 3;
  std::size_t classes = 4;
  std::size_t channels = 8;
  std::size_t length = 256;
  std::size_t trials_per_class = 80;
  double sample_rate = 128.0;
  // Infinity disables the noise.
  double snr_db = 5.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Two frequencies (Hz) per class, distinct across classes.
std::vector<std::array<double, 2>> DesignedFrequencies(const SynthSpec& spec);

// Class k of task t is the sum of two sinusoids at the designed frequencies
// with phases fixed per (task, class), mixed onto the channels through a
// Gaussian matrix drawn per task, plus white Gaussian noise at the requested
// SNR relative to the mean power of the clean waveform.
Dataset SynthGenerate(const SynthSpec& spec);

// Marks a stratified `test_fraction` of every (task, class) as test and the
// rest as train. Trials that already carry a split keep it.
void AssignSplits(Dataset& dataset, double test_fraction, std::uint64_t seed);

struct Erp {
  std::string task_id;
  std::vector<Tensor> means;  // per class, [channels x length]
  std::vector<std::size_t> counts;
};

// Per-class trial mean of one task. Throws DataError listing every class
// without trials.
Erp ComputeErp(const Dataset& dataset, const std::string& task_id,
               std::optional<Split> split = {});

struct PreprocessConfig {
  bool zscore = false;
  bool trim_to_multiple_of_4 = false;
};

// Per-channel affine map fitted on the training split.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1/std, 0 for constant channels

  static Normalizer Fit(const Dataset& dataset);
  void Apply(Dataset& dataset) const;
};

Dataset Preprocess(const Dataset& dataset, const PreprocessConfig& config);

}  // namespace ammteeg

#endif  // AMMTEEG_DATA_H_
