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

#include "ammteeg/bam.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include "ammteeg/errors.h"
#include "binary_io.h"

namespace ammteeg {
namespace {

constexpr char kMemoryMagic[8] = {'A', 'M', 'M', 'T', 'B', 'A', 'M', '\0'};

std::int8_t Sign(double v) { return v > 0.0 ? 1 : -1; }

void CheckColumns(const AMMatrix& m, std::size_t n, const char* op) {
  if (n != m.cols) {
    throw ConfigError(std::string(op) + ": pattern of length " +
                      std::to_string(n) + " for a memory with " +
                      std::to_string(m.cols) + " columns");
  }
}

void CheckRows(const AMMatrix& m, std::size_t n, const char* op) {
  if (n != m.rows) {
    throw ConfigError(std::string(op) + ": pattern of length " +
                      std::to_string(n) + " for a memory with " +
                      std::to_string(m.rows) + " rows");
  }
}

// W^T y.
std::vector<double> Backward(const AMMatrix& m, const LabelPattern& y) {
  std::vector<double> out(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (y[r] == 0) continue;
    const double* row = m.weights.data() + r * m.cols;
    const double s = y[r];
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += s * row[c];
  }
  return out;
}

std::size_t Argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

}  // namespace

BipolarPattern::BipolarPattern(std::vector<std::int8_t> values)
    : values_(std::move(values)) {
  for (std::int8_t v : values_) {
    if (v != 1 && v != -1) {
      throw ConfigError("bipolar patterns hold only -1 and +1");
    }
  }
}

BipolarPattern BipolarPattern::FromSigns(std::span<const double> values) {
  std::vector<std::int8_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), Sign);
  return BipolarPattern(std::move(out));
}

BipolarPattern BipolarizeSpikes(const SpikeTrain& spikes) {
  std::vector<std::int8_t> out(spikes.values().size());
  std::transform(spikes.values().begin(), spikes.values().end(), out.begin(),
                 [](std::uint8_t s) -> std::int8_t { return s ? 1 : -1; });
  return BipolarPattern(std::move(out));
}

SpikeTrain SpikesFromPattern(const BipolarPattern& pattern,
                             std::size_t neurons, std::size_t steps) {
  if (pattern.size() != neurons * steps) {
    throw ConfigError("pattern of length " + std::to_string(pattern.size()) +
                      " cannot fill a " + std::to_string(neurons) + "x" +
                      std::to_string(steps) + " spike train");
  }
  std::vector<std::uint8_t> spikes(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    spikes[i] = pattern[i] > 0 ? 1 : 0;
  }
  return SpikeTrain(neurons, steps, std::move(spikes));
}

LabelPattern::LabelPattern(std::vector<std::int8_t> values)
    : values_(std::move(values)) {
  for (std::int8_t v : values_) {
    if (v < -1 || v > 1) {
      throw ConfigError("label patterns hold only -1, 0 and +1");
    }
  }
}

LabelPattern::LabelPattern(const BipolarPattern& pattern)
    : values_(pattern.values().begin(), pattern.values().end()) {}

LabelPattern LabelPattern::Encode(std::size_t label, std::size_t classes,
                                  LabelCoding coding) {
  if (label >= classes) {
    throw ConfigError("label " + std::to_string(label) + " outside " +
                      std::to_string(classes) + " classes");
  }
  const std::int8_t off = coding == LabelCoding::kOneHot ? 0 : -1;
  std::vector<std::int8_t> values(classes, off);
  values[label] = 1;
  return LabelPattern(std::move(values));
}

AMMatrix AMMatrix::Zero(std::string task_id, std::size_t rows,
                        std::size_t cols, LabelCoding coding) {
  AMMatrix m;
  m.task_id = std::move(task_id);
  m.rows = rows;
  m.cols = cols;
  m.weights.assign(rows * cols, 0.0);
  m.coding = coding;
  return m;
}

AMMatrix StorePairs(std::span<const PatternPair> pairs, std::string task_id,
                    LabelCoding coding) {
  if (pairs.empty()) throw ConfigError("store_pairs: no pattern pairs");
  const std::size_t n = pairs.front().input.size();
  const std::size_t m = pairs.front().output.size();
  if (n == 0 || m == 0) throw ConfigError("store_pairs: empty patterns");
  AMMatrix memory = AMMatrix::Zero(std::move(task_id), m, n, coding);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const PatternPair& pair = pairs[j];
    if (pair.input.size() != n || pair.output.size() != m) {
      throw ConfigError("store_pairs: pair " + std::to_string(j) +
                        " has lengths (" + std::to_string(pair.input.size()) +
                        ", " + std::to_string(pair.output.size()) +
                        "), expected (" + std::to_string(n) + ", " +
                        std::to_string(m) + ")");
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (pair.output[r] == 0) continue;
      double* row = memory.weights.data() + r * n;
      const double y = pair.output[r];
      for (std::size_t c = 0; c < n; ++c) row[c] += y * pair.input[c];
    }
  }
  memory.stored_pairs = pairs.size();
  return memory;
}

std::vector<double> ClassScores(const AMMatrix& memory,
                                const BipolarPattern& x) {
  CheckColumns(memory, x.size(), "class_scores");
  std::vector<double> scores(memory.rows, 0.0);
  for (std::size_t r = 0; r < memory.rows; ++r) {
    const double* row = memory.weights.data() + r * memory.cols;
    double sum = 0.0;
    for (std::size_t c = 0; c < memory.cols; ++c) sum += row[c] * x[c];
    scores[r] = sum;
  }
  return scores;
}

BipolarPattern RetrieveForward(const AMMatrix& memory,
                               const BipolarPattern& x) {
  return BipolarPattern::FromSigns(ClassScores(memory, x));
}

BipolarPattern RetrieveBackward(const AMMatrix& memory,
                                const LabelPattern& y) {
  CheckRows(memory, y.size(), "retrieve_backward");
  return BipolarPattern::FromSigns(Backward(memory, y));
}

double Energy(const AMMatrix& memory, const BipolarPattern& x,
              const LabelPattern& y) {
  CheckRows(memory, y.size(), "energy");
  const std::vector<double> scores = ClassScores(memory, x);
  double e = 0.0;
  for (std::size_t r = 0; r < memory.rows; ++r) e -= y[r] * scores[r];
  return e;
}

FixpointResult IterateToFixpoint(const AMMatrix& memory,
                                 const BipolarPattern& x0, OutputRule rule,
                                 std::size_t max_iterations) {
  CheckColumns(memory, x0.size(), "iterate_to_fixpoint");
  FixpointResult result;
  result.x = x0;
  std::set<std::pair<std::vector<std::int8_t>, std::vector<std::int8_t>>> seen;

  for (std::size_t round = 1; round <= max_iterations; ++round) {
    const std::vector<double> scores = ClassScores(memory, result.x);
    LabelPattern y;
    if (rule == OutputRule::kSign) {
      y = BipolarPattern::FromSigns(scores);
    } else {
      y = LabelPattern::Encode(Argmax(scores), memory.rows, memory.coding);
    }
    double e = 0.0;
    for (std::size_t r = 0; r < memory.rows; ++r) e -= y[r] * scores[r];
    result.energies.push_back(e);

    BipolarPattern x = RetrieveBackward(memory, y);
    result.energies.push_back(Energy(memory, x, y));
    result.iterations = round;

    if (round > 1 && x == result.x && y == result.y) {
      result.converged = true;
      result.rounds_to_fixpoint = round - 1;
      return result;
    }
    auto key = std::make_pair(
        std::vector<std::int8_t>(x.values().begin(), x.values().end()),
        std::vector<std::int8_t>(y.values().begin(), y.values().end()));
    if (!seen.insert(std::move(key)).second) {
      result.cycle_detected = true;
      result.x = std::move(x);
      result.y = std::move(y);
      return result;
    }
    result.x = std::move(x);
    result.y = std::move(y);
  }
  return result;
}

Classification Classify(const AMMatrix& memory, const BipolarPattern& x,
                        DecisionRule rule) {
  Classification c;
  c.scores = ClassScores(memory, x);
  if (c.scores.empty()) throw ConfigError("classify: memory has no classes");
  std::size_t best = 0;
  for (std::size_t r = 1; r < c.scores.size(); ++r) {
    const bool better = rule == DecisionRule::kArgmax
                            ? c.scores[r] > c.scores[best]
                            : c.scores[r] < c.scores[best];
    if (better) best = r;
  }
  c.label = best;
  for (std::size_t r = 0; r < c.scores.size(); ++r) {
    if (r != best && c.scores[r] == c.scores[best]) c.tied = true;
  }
  return c;
}

BipolarPattern InvertLabel(const AMMatrix& memory, std::size_t label) {
  return RetrieveBackward(
      memory, LabelPattern::Encode(label, memory.rows, memory.coding));
}

void TaskRegistry::Put(AMMatrix memory) {
  std::string key = memory.task_id;
  memories_.insert_or_assign(std::move(key), std::move(memory));
}

bool TaskRegistry::Contains(const std::string& task_id) const {
  return memories_.count(task_id) > 0;
}

const AMMatrix& TaskRegistry::At(const std::string& task_id) const {
  const auto it = memories_.find(task_id);
  if (it == memories_.end()) {
    throw ConfigError("no associative memory for task '" + task_id + "'");
  }
  return it->second;
}

std::vector<std::string> TaskRegistry::Tasks() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : memories_) out.push_back(id);
  return out;
}

void TaskRegistry::Write(std::ostream& out) const {
  out.write(kMemoryMagic, sizeof(kMemoryMagic));
  binary::WriteUInt(out, kMemoryFormatVersion);
  binary::WriteUInt<std::uint32_t>(out,
                                   static_cast<std::uint32_t>(memories_.size()));
  for (const auto& [id, m] : memories_) {
    binary::WriteString(out, id);
    binary::WriteUInt(out, static_cast<std::uint32_t>(m.coding));
    binary::WriteUInt<std::uint64_t>(out, m.stored_pairs);
    binary::WriteUInt<std::uint64_t>(out, m.rows);
    binary::WriteUInt<std::uint64_t>(out, m.cols);
    for (double w : m.weights) binary::WriteF64(out, w);
  }
}

TaskRegistry TaskRegistry::Read(std::istream& in) {
  binary::Reader<CheckpointError> reader(in, "memory file");
  char magic[sizeof(kMemoryMagic)];
  reader.ReadBytes(magic, sizeof(magic), "magic");
  if (!std::equal(magic, magic + sizeof(magic), kMemoryMagic)) {
    reader.Fail("bad magic, not an associative memory file");
  }
  const auto version = reader.ReadUInt<std::uint32_t>("version");
  if (version != kMemoryFormatVersion) {
    reader.Fail("unsupported format version " + std::to_string(version));
  }
  const auto count = reader.ReadUInt<std::uint32_t>("task count");
  TaskRegistry registry;
  for (std::uint32_t i = 0; i < count; ++i) {
    AMMatrix m;
    m.task_id = reader.ReadString("task id");
    const auto coding = reader.ReadUInt<std::uint32_t>("label coding");
    if (coding > 1) reader.Fail("unknown label coding");
    m.coding = static_cast<LabelCoding>(coding);
    m.stored_pairs = reader.ReadUInt<std::uint64_t>("stored pair count");
    m.rows = reader.ReadUInt<std::uint64_t>("rows");
    m.cols = reader.ReadUInt<std::uint64_t>("cols");
    if (m.rows == 0 || m.cols == 0 || m.rows * m.cols > (1ULL << 32)) {
      reader.Fail("implausible matrix shape");
    }
    m.weights.resize(m.rows * m.cols);
    for (double& w : m.weights) w = reader.ReadF64("weights");
    if (registry.Contains(m.task_id)) reader.Fail("duplicate task " + m.task_id);
    registry.Put(std::move(m));
  }
  if (!reader.AtEnd()) reader.Fail("trailing bytes after last task");
  return registry;
}

void TaskRegistry::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  Write(out);
  if (!out) throw CheckpointError("failed writing " + path.string());
}

TaskRegistry TaskRegistry::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open memory file " + path.string());
  return Read(in);
}

}  // namespace ammteeg
