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

#ifndef AMMTEEG_CODEC_H_
#define AMMTEEG_CODEC_H_

// Convolutional encoder -> spiking population -> convolutional decoder, plus
// the auxiliary classifier that reads the flattened spike train.
//
//   input [C x T]
//   encoder block 1 (depth x conv5 + ReLU)      -> [128 x T]
//   pool /2                                      -> [128 x T/2]
//   encoder block 2                              -> [256 x T/2]
//   pool /2                                      -> [256 x T/4]
//   encoder block 3                              -> [256 x T/4]   hidden
//   fully connected per step                     -> [200 x T/4]   currents
//   LIF population                               -> [200 x T/4]   spikes
//   fully connected per step                     -> [256 x T/4]
//   decoder block 1                              -> [128 x T/4]
//   transposed conv (k8, s2, p3)                 -> [128 x T/2]
//   decoder block 2                              -> [128 x T/2]
//   transposed conv (k8, s2, p3)                 -> [128 x T]
//   decoder block 3, last conv without ReLU      -> [C x T]
//
// Spikes are flattened neuron-major ([neuron][step]) for the auxiliary
// classifier.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ammteeg/lif.h"
#include "ammteeg/ops.h"
#include "ammteeg/tape.h"
#include "ammteeg/tensor.h"

namespace ammteeg {

enum class HiddenUnit {
  kSpiking,  // LIF population
  kTanh,     // spiking layer removed, tanh of the currents instead
};

enum class WeightInit {
  kHeUniform,     // +-sqrt(6 / fan_in), zero bias
  kFanInUniform,  // weights and bias in +-sqrt(1 / fan_in)
};

struct ConvBlockSpec {
  std::size_t depth = 1;  // stacked conv + ReLU layers
  std::size_t width = 1;  // output channels; 0 means "input channel count"
};

struct CodecConfig {
  std::size_t channels = 22;
  std::size_t length = 750;
  std::size_t classes = 4;
  std::size_t kernel = 5;
  std::vector<ConvBlockSpec> encoder = {{3, 128}, {5, 256}, {5, 256}};
  std::vector<ConvBlockSpec> decoder = {{3, 128}, {5, 128}, {5, 0}};
  std::size_t upsample_kernel = 8;
  std::size_t upsample_stride = 2;
  std::size_t upsample_padding = 3;
  LifConfig lif;
  HiddenUnit hidden = HiddenUnit::kSpiking;
  PoolMode pooling = PoolMode::kAverage;
  double lambda_mix = 0.1;
  ComputePrecision precision = ComputePrecision::kFloat64;
  // Encoder, dense and decoder layers. The auxiliary classifier always uses
  // the fan-in bound.
  WeightInit init = WeightInit::kHeUniform;

  void Validate() const;

  // Length actually modelled: trailing samples beyond a multiple of 4 are
  // trimmed so both poolings are exact.
  std::size_t ModelLength() const { return length - length % 4; }
  std::size_t TrimmedSamples() const { return length % 4; }
  std::size_t HiddenSteps() const { return ModelLength() / 4; }
  std::size_t LatentChannels() const { return encoder.back().width; }
  std::size_t SpikeFeatures() const { return lif.neurons * HiddenSteps(); }
};

class CodecModel {
 public:
  CodecModel(CodecConfig config, std::uint64_t seed);

  const CodecConfig& config() const { return config_; }

  struct Encoding {
    Tensor hidden;    // encoder output
    Tensor currents;  // input of the hidden population
    Tensor spikes;    // {0,1} for the LIF population, (-1,1) for tanh
  };

  // x: [C x T] or [B x C x T] with the configured C and T.
  Encoding Encode(const Tensor& x) const;
  // spikes: [neurons x T/4] or batched; returns [C x ModelLength()].
  Tensor Decode(const Tensor& spikes) const;
  // Returns [classes] or [B x classes].
  Tensor AuxLogits(const Tensor& spikes) const;

  // Input trimmed to ModelLength(); the reconstruction target.
  Tensor TrimToModel(const Tensor& x) const;

  struct Loss {
    double reconstruction = 0.0;
    double classification = 0.0;
    double total = 0.0;
    // Mean hidden activation over the batch.
    double spike_rate = 0.0;
  };

  // Joint loss of a batch without touching gradients.
  Loss EvaluateLoss(const Tensor& batch,
                    std::span<const std::size_t> labels) const;
  // Forward and backward pass; parameter gradients are accumulated.
  Loss AccumulateGradients(const Tensor& batch,
                           std::span<const std::size_t> labels);

  std::vector<LayerParams*> Parameters();
  std::vector<const LayerParams*> Parameters() const;
  // Convolutional encoder plus the current-injecting dense layer.
  std::vector<const LayerParams*> EncoderParameters() const;
  LayerParams& aux_classifier() { return aux_; }
  const LayerParams& aux_classifier() const { return aux_; }

  // FNV-1a over the raw bytes of the parameter values.
  std::uint64_t EncoderFingerprint() const;
  std::uint64_t Fingerprint() const;

  void Save(const std::filesystem::path& path) const;
  // Throws ConfigError when the stored shapes do not fit this config and
  // CheckpointError for unreadable files.
  void Load(const std::filesystem::path& path);
  void SetParameters(std::vector<LayerParams> layers);

 private:
  struct Forward {
    Encoding encoding;
    LifTrace trace;
    Tensor reconstruction;
    Tensor logits;
  };

  Tensor RunEncoder(const Tensor& x, Tape* tape);
  Tensor RunDecoder(const Tensor& spikes, Tape* tape);
  Tensor RunAux(const Tensor& spikes, Tape* tape);
  Tensor HiddenActivation(const Tensor& currents, LifTrace* trace) const;
  Loss Combine(const Tensor& batch, const Tensor& reconstruction,
               const Tensor& logits, std::span<const std::size_t> labels,
               LossValue* mse, LossValue* ce) const;
  // Inference reuses the recording code paths without a tape, which never
  // mutates parameters.
  CodecModel& Mutable() const { return const_cast<CodecModel&>(*this); }

  CodecConfig config_;
  std::vector<LayerParams> encoder_;
  std::vector<std::size_t> pool_after_;  // encoder layer indices
  LayerParams current_in_;
  LayerParams current_out_;
  std::vector<LayerParams> decoder_;
  std::vector<bool> decoder_relu_;
  LayerParams aux_;
};

}  // namespace ammteeg

#endif  // AMMTEEG_CODEC_H_
