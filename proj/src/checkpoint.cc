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

#include "ammteeg/checkpoint.h"

#include <fstream>
#include <string>

#include "ammteeg/errors.h"
#include "binary_io.h"

namespace ammteeg {
namespace {

constexpr std::uint32_t kTensorsPerLayer = 2;
constexpr std::uint32_t kMaxRank = 8;

void WriteTensor(std::ostream& out, const Tensor& t) {
  binary::WriteUInt<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) binary::WriteUInt<std::uint64_t>(out, d);
  for (double v : t.data()) binary::WriteF64(out, v);
}

Tensor ReadTensor(binary::Reader<CheckpointError>& reader) {
  const auto rank = reader.ReadUInt<std::uint32_t>("tensor rank");
  if (rank == 0 || rank > kMaxRank) reader.Fail("invalid tensor rank");
  Shape shape(rank);
  std::uint64_t total = 1;
  for (auto& d : shape) {
    d = reader.ReadUInt<std::uint64_t>("tensor dimension");
    if (d == 0 || d > (1ULL << 32)) reader.Fail("invalid tensor dimension");
    total *= d;
    if (total > (1ULL << 32)) reader.Fail("tensor too large");
  }
  std::vector<double> values(total);
  for (double& v : values) v = reader.ReadF64("tensor values");
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

void WriteCheckpoint(std::ostream& out,
                     std::span<const LayerParams* const> layers) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  binary::WriteUInt(out, kCheckpointVersion);
  binary::WriteUInt<std::uint32_t>(out,
                                   static_cast<std::uint32_t>(layers.size()));
  for (const LayerParams* layer : layers) {
    binary::WriteUInt(out, static_cast<std::uint32_t>(layer->kind));
    for (std::size_t h : {layer->in_channels, layer->out_channels,
                          layer->kernel, layer->stride, layer->padding}) {
      binary::WriteUInt<std::uint64_t>(out, h);
    }
    binary::WriteUInt(out, kTensorsPerLayer);
    WriteTensor(out, layer->weight);
    WriteTensor(out, layer->bias);
  }
}

std::vector<LayerParams> ReadCheckpoint(std::istream& in) {
  binary::Reader<CheckpointError> reader(in, "checkpoint");
  char magic[sizeof(kCheckpointMagic)];
  reader.ReadBytes(magic, sizeof(magic), "magic");
  if (std::string(magic, sizeof(magic)) !=
      std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    reader.Fail("bad magic, not a parameter checkpoint");
  }
  const auto version = reader.ReadUInt<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    reader.Fail("unsupported format version " + std::to_string(version) +
                " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = reader.ReadUInt<std::uint32_t>("layer count");
  std::vector<LayerParams> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerParams p;
    const auto kind = reader.ReadUInt<std::uint32_t>("layer kind");
    if (kind < 1 || kind > 3) {
      reader.Fail("unknown layer kind " + std::to_string(kind));
    }
    p.kind = static_cast<LayerKind>(kind);
    p.in_channels = reader.ReadUInt<std::uint64_t>("in_channels");
    p.out_channels = reader.ReadUInt<std::uint64_t>("out_channels");
    p.kernel = reader.ReadUInt<std::uint64_t>("kernel");
    p.stride = reader.ReadUInt<std::uint64_t>("stride");
    p.padding = reader.ReadUInt<std::uint64_t>("padding");
    if (reader.ReadUInt<std::uint32_t>("tensor count") != kTensorsPerLayer) {
      reader.Fail("layer " + std::to_string(i) + " has unexpected tensors");
    }
    p.weight = ReadTensor(reader);
    p.bias = ReadTensor(reader);
    try {
      p.Validate();
    } catch (const ConfigError& e) {
      reader.Fail("layer " + std::to_string(i) + ": " + e.what());
    }
    layers.push_back(std::move(p));
  }
  if (!reader.AtEnd()) reader.Fail("trailing bytes after last layer");
  return layers;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    std::span<const LayerParams* const> layers) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  WriteCheckpoint(out, layers);
  if (!out) throw CheckpointError("failed writing " + path.string());
}

std::vector<LayerParams> LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace ammteeg
