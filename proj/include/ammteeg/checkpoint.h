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

#ifndef AMMTEEG_CHECKPOINT_H_
#define AMMTEEG_CHECKPOINT_H_

// Parameter checkpoint layout (all integers little-endian):
//
//   char[8]  magic "AMMTCKPT"
//   u32      format version (1)
//   u32      layer count
//   per layer:
//     u32    kind tag (1 conv1d, 2 conv_transpose1d, 3 fully_connected)
//     u64    in_channels, out_channels, kernel, stride, padding
//     u32    tensor count (2: weight, bias)
//     per tensor: u32 rank, u64 dims[rank], f64 values[product(dims)]

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ammteeg/ops.h"

namespace ammteeg {

inline constexpr char kCheckpointMagic[8] = {'A', 'M', 'M', 'T',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(std::ostream& out,
                     std::span<const LayerParams* const> layers);
std::vector<LayerParams> ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::filesystem::path& path,
                    std::span<const LayerParams* const> layers);
std::vector<LayerParams> LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ammteeg

#endif  // AMMTEEG_CHECKPOINT_H_
