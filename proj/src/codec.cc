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

#include "ammteeg/codec.h"

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "ammteeg/checkpoint.h"
#include "ammteeg/errors.h"

namespace ammteeg {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void HashTensor(const Tensor& t, std::uint64_t& h) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.data().data());
  for (std::size_t i = 0; i < t.size() * sizeof(double); ++i) {
    h = (h ^ bytes[i]) * kFnvPrime;
  }
}

std::uint64_t HashLayers(const std::vector<const LayerParams*>& layers) {
  std::uint64_t h = kFnvOffset;
  for (const LayerParams* p : layers) {
    HashTensor(p->weight, h);
    HashTensor(p->bias, h);
  }
  return h;
}

// Flattens [B x n x T] to [B x n*T] (neuron-major); [n x T] to [n*T].
Tensor FlattenSpikes(const Tensor& spikes) {
  if (spikes.rank() == 2) return spikes.Reshaped({spikes.size()});
  return spikes.Reshaped({spikes.dim(0), spikes.dim(1) * spikes.dim(2)});
}

double MeanValue(const Tensor& t) {
  if (t.size() == 0) return 0.0;
  double sum = 0.0;
  for (double v : t.data()) sum += v;
  return sum / static_cast<double>(t.size());
}

}  // namespace

void CodecConfig::Validate() const {
  if (channels == 0) throw ConfigError("codec: channel count must be positive");
  if (classes == 0) throw ConfigError("codec: class count must be positive");
  if (length < 4) {
    throw InputTooShortError("codec: trials need at least 4 samples, got " +
                             std::to_string(length));
  }
  if (kernel % 2 == 0) {
    throw ConfigError("codec: conv kernel must be odd for same padding");
  }
  if (encoder.size() != 3 || decoder.size() != 3) {
    throw ConfigError("codec: expected three encoder and three decoder blocks");
  }
  for (const auto& b : encoder) {
    if (b.depth == 0 || b.width == 0) {
      throw ConfigError("codec: encoder blocks need positive depth and width");
    }
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    if (decoder[i].depth == 0) {
      throw ConfigError("codec: decoder blocks need positive depth");
    }
    if (decoder[i].width == 0 && i + 1 != decoder.size()) {
      throw ConfigError("codec: only the last decoder block may use width 0");
    }
  }
  if ((upsample_kernel - 2 * upsample_padding) != upsample_stride ||
      upsample_stride != 2) {
    throw ConfigError(
        "codec: transposed convolutions must exactly double the length "
        "(kernel - 2 * padding == stride == 2)");
  }
  if (!(lambda_mix >= 0.0)) {
    throw ConfigError("codec: lambda_mix must be non-negative");
  }
  lif.Validate();
}

CodecModel::CodecModel(CodecConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.Validate();
  std::mt19937_64 rng(seed);
  const std::size_t k = config_.kernel;

  std::size_t in = config_.channels;
  for (std::size_t b = 0; b < config_.encoder.size(); ++b) {
    for (std::size_t d = 0; d < config_.encoder[b].depth; ++d) {
      encoder_.push_back(LayerParams::Conv1dSame(in, config_.encoder[b].width, k));
      in = config_.encoder[b].width;
    }
    if (b + 1 < config_.encoder.size()) pool_after_.push_back(encoder_.size() - 1);
  }
  current_in_ = LayerParams::FullyConnected(in, config_.lif.neurons);
  current_out_ = LayerParams::FullyConnected(config_.lif.neurons, in);

  for (std::size_t b = 0; b < config_.decoder.size(); ++b) {
    if (b > 0) {
      decoder_.push_back(LayerParams::ConvTranspose1d(
          in, in, config_.upsample_kernel, config_.upsample_stride,
          config_.upsample_padding));
      decoder_relu_.push_back(false);
    }
    const std::size_t width = config_.decoder[b].width == 0
                                  ? config_.channels
                                  : config_.decoder[b].width;
    for (std::size_t d = 0; d < config_.decoder[b].depth; ++d) {
      const bool last_of_block = d + 1 == config_.decoder[b].depth;
      const std::size_t out = last_of_block ? width : in;
      decoder_.push_back(LayerParams::Conv1dSame(in, out, k));
      decoder_relu_.push_back(true);
      in = out;
    }
  }
  decoder_relu_.back() = false;  // signed reconstruction
  aux_ = LayerParams::FullyConnected(config_.SpikeFeatures(), config_.classes);

  for (LayerParams* p : Parameters()) {
    if (p == &aux_ || config_.init == WeightInit::kFanInUniform) {
      InitializeUniform(*p, rng);
    } else {
      InitializeHeUniform(*p, rng);
    }
  }
}

std::vector<LayerParams*> CodecModel::Parameters() {
  std::vector<LayerParams*> out;
  for (auto& p : encoder_) out.push_back(&p);
  out.push_back(&current_in_);
  out.push_back(&current_out_);
  for (auto& p : decoder_) out.push_back(&p);
  out.push_back(&aux_);
  return out;
}

std::vector<const LayerParams*> CodecModel::Parameters() const {
  std::vector<const LayerParams*> out;
  for (LayerParams* p : Mutable().Parameters()) out.push_back(p);
  return out;
}

std::vector<const LayerParams*> CodecModel::EncoderParameters() const {
  std::vector<const LayerParams*> out;
  for (const auto& p : encoder_) out.push_back(&p);
  out.push_back(&current_in_);
  return out;
}

std::uint64_t CodecModel::EncoderFingerprint() const {
  return HashLayers(EncoderParameters());
}

std::uint64_t CodecModel::Fingerprint() const {
  return HashLayers(Parameters());
}

Tensor CodecModel::TrimToModel(const Tensor& x) const {
  const bool batched = x.rank() == 3;
  if (x.rank() != 2 && !batched) {
    throw ConfigError("codec: input must be [C x T] or [B x C x T], got " +
                      ShapeToString(x.shape()));
  }
  const std::size_t c = x.dim(batched ? 1 : 0);
  const std::size_t t = x.dim(batched ? 2 : 1);
  if (c != config_.channels || t != config_.length) {
    throw ConfigError("codec: input " + ShapeToString(x.shape()) +
                      " does not match the configured [" +
                      std::to_string(config_.channels) + "x" +
                      std::to_string(config_.length) + "]");
  }
  const std::size_t keep = config_.ModelLength();
  if (keep == t) return x;
  const std::size_t rows = batched ? x.dim(0) * c : c;
  Shape shape = batched ? Shape{x.dim(0), c, keep} : Shape{c, keep};
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < keep; ++i) out[r * keep + i] = x[r * t + i];
  }
  return out;
}

Tensor CodecModel::RunEncoder(const Tensor& x, Tape* tape) {
  Tensor h = x;
  std::size_t next_pool = 0;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    h = ApplyRelu(ApplyConv1d(encoder_[i], h, tape, config_.precision), tape);
    if (next_pool < pool_after_.size() && pool_after_[next_pool] == i) {
      h = ApplyPool1d(h, config_.pooling, tape);
      ++next_pool;
    }
  }
  return h;
}

Tensor CodecModel::RunDecoder(const Tensor& spikes, Tape* tape) {
  Tensor h = ApplyFullyConnected(current_out_, spikes, tape, config_.precision);
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    if (decoder_[i].kind == LayerKind::kConvTranspose1d) {
      h = ApplyConvTranspose1d(decoder_[i], h, tape, config_.precision);
    } else {
      h = ApplyConv1d(decoder_[i], h, tape, config_.precision);
    }
    if (decoder_relu_[i]) h = ApplyRelu(h, tape);
  }
  return h;
}

Tensor CodecModel::RunAux(const Tensor& spikes, Tape* tape) {
  return ApplyFullyConnected(aux_, FlattenSpikes(spikes), tape,
                             config_.precision);
}

Tensor CodecModel::HiddenActivation(const Tensor& currents,
                                    LifTrace* trace) const {
  if (config_.hidden == HiddenUnit::kTanh) return Tanh(currents);
  if (trace == nullptr) return LifForward(currents, config_.lif).spikes;
  *trace = LifForward(currents, config_.lif);
  return trace->spikes;
}

CodecModel::Encoding CodecModel::Encode(const Tensor& x) const {
  const bool single = x.rank() == 2;
  Tensor batch = TrimToModel(x);
  if (single) batch = batch.Reshaped({1, batch.dim(0), batch.dim(1)});
  Encoding e;
  e.hidden = Mutable().RunEncoder(batch, nullptr);
  e.currents = FullyConnectedForward(e.hidden, current_in_, config_.precision);
  e.spikes = HiddenActivation(e.currents, nullptr);
  if (single) {
    e.hidden = e.hidden.Reshaped({e.hidden.dim(1), e.hidden.dim(2)});
    e.currents = e.currents.Reshaped({e.currents.dim(1), e.currents.dim(2)});
    e.spikes = e.spikes.Reshaped({e.spikes.dim(1), e.spikes.dim(2)});
  }
  return e;
}

Tensor CodecModel::Decode(const Tensor& spikes) const {
  const bool batched = spikes.rank() == 3;
  if ((spikes.rank() != 2 && !batched) ||
      spikes.dim(batched ? 1 : 0) != config_.lif.neurons ||
      spikes.dim(batched ? 2 : 1) != config_.HiddenSteps()) {
    throw ConfigError("codec: spike input " + ShapeToString(spikes.shape()) +
                      " does not match [" +
                      std::to_string(config_.lif.neurons) + "x" +
                      std::to_string(config_.HiddenSteps()) + "]");
  }
  if (!batched) {
    const Tensor out = Mutable().RunDecoder(
        spikes.Reshaped({1, spikes.dim(0), spikes.dim(1)}), nullptr);
    return out.Reshaped({out.dim(1), out.dim(2)});
  }
  return Mutable().RunDecoder(spikes, nullptr);
}

Tensor CodecModel::AuxLogits(const Tensor& spikes) const {
  return Mutable().RunAux(spikes, nullptr);
}

CodecModel::Loss CodecModel::Combine(const Tensor& batch,
                                     const Tensor& reconstruction,
                                     const Tensor& logits,
                                     std::span<const std::size_t> labels,
                                     LossValue* mse, LossValue* ce) const {
  *mse = MeanSquaredError(reconstruction, TrimToModel(batch));
  *ce = SoftmaxCrossEntropy(logits, labels);
  Loss loss;
  loss.reconstruction = mse->value;
  loss.classification = ce->value;
  loss.total = mse->value + config_.lambda_mix * ce->value;
  if (!std::isfinite(loss.total)) throw NumericError("joint loss is not finite");
  return loss;
}

CodecModel::Loss CodecModel::EvaluateLoss(
    const Tensor& batch, std::span<const std::size_t> labels) const {
  const Encoding e = Encode(batch);
  LossValue mse, ce;
  Loss loss = Combine(batch, Decode(e.spikes), AuxLogits(e.spikes), labels,
                      &mse, &ce);
  loss.spike_rate = MeanValue(e.spikes);
  return loss;
}

CodecModel::Loss CodecModel::AccumulateGradients(
    const Tensor& batch, std::span<const std::size_t> labels) {
  Tape encoder_tape, decoder_tape, aux_tape;
  const Tensor hidden = RunEncoder(TrimToModel(batch), &encoder_tape);
  const Tensor currents = ApplyFullyConnected(current_in_, hidden,
                                              &encoder_tape, config_.precision);
  LifTrace trace;
  const Tensor spikes = HiddenActivation(currents, &trace);
  const Tensor reconstruction = RunDecoder(spikes, &decoder_tape);
  const Tensor logits = RunAux(spikes, &aux_tape);

  LossValue mse, ce;
  Loss loss = Combine(batch, reconstruction, logits, labels, &mse, &ce);
  loss.spike_rate = MeanValue(spikes);

  for (double& g : ce.grad.data()) g *= config_.lambda_mix;
  Tensor spike_grad = decoder_tape.Backpropagate(std::move(mse.grad));
  const Tensor aux_grad = aux_tape.Backpropagate(std::move(ce.grad));
  for (std::size_t i = 0; i < spike_grad.size(); ++i) {
    spike_grad[i] += aux_grad[i];
  }
  const Tensor current_grad =
      config_.hidden == HiddenUnit::kSpiking
          ? LifBackward(spike_grad, trace, config_.lif)
          : TanhBackward(spike_grad, spikes);
  encoder_tape.Backpropagate(current_grad);
  return loss;
}

void CodecModel::Save(const std::filesystem::path& path) const {
  const auto layers = Parameters();
  SaveCheckpoint(path, layers);
}

void CodecModel::Load(const std::filesystem::path& path) {
  SetParameters(LoadCheckpoint(path));
}

void CodecModel::SetParameters(std::vector<LayerParams> layers) {
  std::vector<LayerParams*> mine = Parameters();
  if (layers.size() != mine.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(layers.size()) +
                      " layers, the configured model has " +
                      std::to_string(mine.size()));
  }
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const LayerParams& have = *mine[i];
    const LayerParams& got = layers[i];
    if (got.kind != have.kind || got.weight.shape() != have.weight.shape() ||
        got.bias.shape() != have.bias.shape() || got.stride != have.stride ||
        got.padding != have.padding) {
      throw ConfigError("checkpoint layer " + std::to_string(i) + " (" +
                        LayerKindName(got.kind) + " " +
                        ShapeToString(got.weight.shape()) +
                        ") does not fit the configured " +
                        LayerKindName(have.kind) + " " +
                        ShapeToString(have.weight.shape()));
    }
  }
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i] = std::move(layers[i]);
}

}  // namespace ammteeg
