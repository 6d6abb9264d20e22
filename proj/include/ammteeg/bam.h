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

#ifndef AMMTEEG_BAM_H_
#define AMMTEEG_BAM_H_

// Bidirectional associative memory between flattened spike patterns (length
// n) and class patterns (length m). Storage is the Hebbian outer-product sum
// W = sum_j y_j x_j^T; retrieval alternates y = sgn(W x) and x = sgn(W^T y)
// with sgn(v) = +1 for v > 0 and -1 for v <= 0.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ammteeg/lif.h"

namespace ammteeg {

// Vector with entries in {-1, +1}.
class BipolarPattern {
 public:
  BipolarPattern() = default;
  explicit BipolarPattern(std::vector<std::int8_t> values);

  // Sign of each value with sgn(0) = -1.
  static BipolarPattern FromSigns(std::span<const double> values);

  std::size_t size() const { return values_.size(); }
  std::int8_t operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }

  friend bool operator==(const BipolarPattern&,
                         const BipolarPattern&) = default;

 private:
  std::vector<std::int8_t> values_;
};

// Flattens neuron-major and maps 0 -> -1, 1 -> +1.
BipolarPattern BipolarizeSpikes(const SpikeTrain& spikes);
// Inverse of BipolarizeSpikes: -1 -> 0, +1 -> 1.
SpikeTrain SpikesFromPattern(const BipolarPattern& pattern,
                             std::size_t neurons, std::size_t steps);

// How class labels become output patterns.
enum class LabelCoding {
  kOneHot,   // 1 for the class, 0 elsewhere
  kBipolar,  // +1 for the class, -1 elsewhere
};

// Class-side pattern with entries in {-1, 0, +1}. Every BipolarPattern is a
// valid LabelPattern.
class LabelPattern {
 public:
  LabelPattern() = default;
  explicit LabelPattern(std::vector<std::int8_t> values);
  LabelPattern(const BipolarPattern& pattern);  // NOLINT: implicit widening

  static LabelPattern Encode(std::size_t label, std::size_t classes,
                             LabelCoding coding);

  std::size_t size() const { return values_.size(); }
  std::int8_t operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }

  friend bool operator==(const LabelPattern&, const LabelPattern&) = default;

 private:
  std::vector<std::int8_t> values_;
};

struct PatternPair {
  BipolarPattern input;
  LabelPattern output;
};

// Associative memory matrix of one task: m rows (classes), n columns.
struct AMMatrix {
  std::string task_id;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // row-major m x n
  std::size_t stored_pairs = 0;
  LabelCoding coding = LabelCoding::kOneHot;

  static AMMatrix Zero(std::string task_id, std::size_t rows,
                       std::size_t cols,
                       LabelCoding coding = LabelCoding::kOneHot);

  double at(std::size_t r, std::size_t c) const {
    return weights[r * cols + c];
  }
  friend bool operator==(const AMMatrix&, const AMMatrix&) = default;
};

// W = sum_j y_j x_j^T. Throws ConfigError on an empty list or ragged
// pattern lengths.
AMMatrix StorePairs(std::span<const PatternPair> pairs,
                    std::string task_id = {},
                    LabelCoding coding = LabelCoding::kOneHot);

// Pre-sign class scores W x.
std::vector<double> ClassScores(const AMMatrix& memory,
                                const BipolarPattern& x);
// y = sgn(W x).
BipolarPattern RetrieveForward(const AMMatrix& memory, const BipolarPattern& x);
// x = sgn(W^T y).
BipolarPattern RetrieveBackward(const AMMatrix& memory, const LabelPattern& y);
// E = -y^T W x.
double Energy(const AMMatrix& memory, const BipolarPattern& x,
              const LabelPattern& y);

// Output-layer update used while iterating.
enum class OutputRule {
  kSign,           // y = sgn(W x)
  kWinnerTakeAll,  // y = label pattern of argmax(W x), ties to lowest index
};

struct FixpointResult {
  BipolarPattern x;
  LabelPattern y;
  // Energy after every half-step, starting with the first forward update.
  std::vector<double> energies;
  // Full forward/backward rounds performed.
  std::size_t iterations = 0;
  // Rounds after which neither layer changed any more.
  std::size_t rounds_to_fixpoint = 0;
  bool converged = false;
  // A state revisit that is not a fixed point.
  bool cycle_detected = false;
};

FixpointResult IterateToFixpoint(const AMMatrix& memory,
                                 const BipolarPattern& x0,
                                 OutputRule rule = OutputRule::kSign,
                                 std::size_t max_iterations = 64);

// argmax is the decision rule; kArgmin reproduces the printed variant of it
// for debugging.
enum class DecisionRule { kArgmax, kArgmin };

struct Classification {
  std::size_t label = 0;
  bool tied = false;  // several classes shared the winning score
  std::vector<double> scores;
};

Classification Classify(const AMMatrix& memory, const BipolarPattern& x,
                        DecisionRule rule = DecisionRule::kArgmax);

// sgn(W^T y_label) with y_label encoded in the matrix's own label coding.
BipolarPattern InvertLabel(const AMMatrix& memory, std::size_t label);

// One memory per task.
class TaskRegistry {
 public:
  void Put(AMMatrix memory);
  bool Contains(const std::string& task_id) const;
  // Throws ConfigError for unknown tasks.
  const AMMatrix& At(const std::string& task_id) const;
  std::vector<std::string> Tasks() const;
  std::size_t size() const { return memories_.size(); }

  // "AMMTBAM\0", u32 version, u32 task count, then per task: string task_id,
  // u32 label coding, u64 stored pair count, u64 m, u64 n, f64 weights[m*n]
  // row-major. Strings are a u32 byte length followed by the bytes.
  void Write(std::ostream& out) const;
  static TaskRegistry Read(std::istream& in);
  void Save(const std::filesystem::path& path) const;
  static TaskRegistry Load(const std::filesystem::path& path);

  friend bool operator==(const TaskRegistry&, const TaskRegistry&) = default;

 private:
  std::map<std::string, AMMatrix> memories_;
};

inline constexpr std::uint32_t kMemoryFormatVersion = 1;

}  // namespace ammteeg

#endif  // AMMTEEG_BAM_H_
