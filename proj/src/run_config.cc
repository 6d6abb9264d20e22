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

#include "ammteeg/run_config.h"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "ammteeg/errors.h"

namespace ammteeg {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed", "out", "checkpoint", "memory"}},
      {"data", {"source", "bundle", "trim_to_header_length"}},
      {"synth",
       {"tasks", "classes", "channels", "length", "trials_per_class",
        "sample_rate", "snr_db", "seed"}},
      {"model",
       {"encoder", "decoder", "kernel", "neurons", "tau", "threshold", "reset",
        "recurrence", "pooling", "lambda_mix", "precision", "init"}},
      {"train",
       {"epochs", "batch", "learning_rate", "test_fraction", "zscore",
        "trim_to_multiple_of_4", "label_coding", "ablation", "head_epochs",
        "head_learning_rate"}},
  };
  return keys;
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value,
                           const std::string& expected) {
  throw ConfigError("config key " + key + " = '" + value + "': expected " +
                    expected);
}

template <typename Int>
Int ParseInt(const std::string& key, const std::string& s) {
  Int v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    BadValue(key, s, "a non-negative integer");
  }
  return v;
}

double ParseDouble(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    BadValue(key, s, "a number");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  BadValue(key, s, "true or false");
}

template <typename Enum>
Enum ParseEnum(const std::string& key, const std::string& s,
               const std::map<std::string, Enum>& names) {
  const auto it = names.find(s);
  if (it != names.end()) return it->second;
  std::string expected;
  for (const auto& [name, _] : names) {
    expected += (expected.empty() ? "" : " | ") + name;
  }
  BadValue(key, s, expected);
}

template <typename Enum>
std::string EnumName(Enum value, const std::map<std::string, Enum>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

const std::map<std::string, ResetMode> kResetNames = {
    {"subtract", ResetMode::kSubtract}, {"zero", ResetMode::kZero}};
const std::map<std::string, SurrogateRecurrence> kRecurrenceNames = {
    {"printed", SurrogateRecurrence::kPrinted},
    {"exact", SurrogateRecurrence::kExact}};
const std::map<std::string, PoolMode> kPoolNames = {
    {"average", PoolMode::kAverage}, {"max", PoolMode::kMax}};
const std::map<std::string, WeightInit> kInitNames = {
    {"he-uniform", WeightInit::kHeUniform},
    {"fan-in-uniform", WeightInit::kFanInUniform}};
const std::map<std::string, ComputePrecision> kPrecisionNames = {
    {"float64", ComputePrecision::kFloat64},
    {"float32", ComputePrecision::kFloat32}};
const std::map<std::string, LabelCoding> kCodingNames = {
    {"one-hot", LabelCoding::kOneHot}, {"bipolar", LabelCoding::kBipolar}};

// "3x128,5x256,5x0"
std::vector<ConvBlockSpec> ParseBlocks(const std::string& key,
                                       const std::string& s) {
  std::vector<ConvBlockSpec> blocks;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) BadValue(key, s, "DEPTHxWIDTH,... blocks");
    ConvBlockSpec b;
    b.depth = ParseInt<std::size_t>(key, item.substr(0, x));
    b.width = ParseInt<std::size_t>(key, item.substr(x + 1));
    blocks.push_back(b);
  }
  if (blocks.empty()) BadValue(key, s, "DEPTHxWIDTH,... blocks");
  return blocks;
}

std::string FormatBlocks(const std::vector<ConvBlockSpec>& blocks) {
  std::string out;
  for (const ConvBlockSpec& b : blocks) {
    out += fmt::format("{}{}x{}", out.empty() ? "" : ",", b.depth, b.width);
  }
  return out;
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name)
      : tree_(tree.get_child_optional(name)), name_(std::move(name)) {}

  std::optional<std::string> Get(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }
  std::string Key(const std::string& key) const { return name_ + "." + key; }

  template <typename Fn>
  void With(const std::string& key, Fn fn) const {
    if (auto v = Get(key)) fn(Key(key), *v);
  }

 private:
  boost::optional<const pt::ptree&> tree_;
  std::string name_;
};

}  // namespace

RunConfig RunConfig::Parse(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config is not valid INI: ") + e.what());
  }
  const auto& known = KnownKeys();
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end() || body.empty()) {
      throw ConfigError("unknown config section or top-level key '" + section +
                        "'");
    }
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) {
        throw ConfigError("unknown config key " + section + "." + key);
      }
    }
  }

  RunConfig c;
  const Section run(tree, "run");
  run.With("seed", [&](auto k, auto v) { c.seed = ParseInt<std::uint64_t>(k, v); });
  run.With("out", [&](auto, auto v) { c.out = v; });
  run.With("checkpoint", [&](auto, auto v) { c.checkpoint = v; });
  run.With("memory", [&](auto, auto v) { c.memory = v; });

  const Section data(tree, "data");
  const auto source = data.Get("source");
  if (!source) throw ConfigError("missing required config key data.source");
  if (*source != "synth" && *source != "bundle") {
    BadValue("data.source", *source, "synth | bundle");
  }
  c.data_source = *source;
  data.With("bundle", [&](auto, auto v) { c.bundle = v; });
  data.With("trim_to_header_length", [&](auto k, auto v) {
    c.bundle_options.trim_to_header_length = ParseBool(k, v);
  });
  if (c.data_source == "bundle" && c.bundle.empty()) {
    throw ConfigError("missing required config key data.bundle");
  }

  const Section synth(tree, "synth");
  synth.With("tasks", [&](auto k, auto v) { c.synth.tasks = ParseInt<std::size_t>(k, v); });
  synth.With("classes", [&](auto k, auto v) { c.synth.classes = ParseInt<std::size_t>(k, v); });
  synth.With("channels", [&](auto k, auto v) { c.synth.channels = ParseInt<std::size_t>(k, v); });
  synth.With("length", [&](auto k, auto v) { c.synth.length = ParseInt<std::size_t>(k, v); });
  synth.With("trials_per_class", [&](auto k, auto v) {
    c.synth.trials_per_class = ParseInt<std::size_t>(k, v);
  });
  synth.With("sample_rate", [&](auto k, auto v) { c.synth.sample_rate = ParseDouble(k, v); });
  synth.With("snr_db", [&](auto k, auto v) { c.synth.snr_db = ParseDouble(k, v); });
  synth.With("seed", [&](auto k, auto v) { c.synth_seed = ParseInt<std::uint64_t>(k, v); });

  const Section model(tree, "model");
  model.With("encoder", [&](auto k, auto v) { c.codec.encoder = ParseBlocks(k, v); });
  model.With("decoder", [&](auto k, auto v) { c.codec.decoder = ParseBlocks(k, v); });
  model.With("kernel", [&](auto k, auto v) { c.codec.kernel = ParseInt<std::size_t>(k, v); });
  model.With("neurons", [&](auto k, auto v) { c.codec.lif.neurons = ParseInt<std::size_t>(k, v); });
  model.With("tau", [&](auto k, auto v) { c.codec.lif.tau = ParseDouble(k, v); });
  model.With("threshold", [&](auto k, auto v) { c.codec.lif.threshold = ParseDouble(k, v); });
  model.With("reset", [&](auto k, auto v) { c.codec.lif.reset = ParseEnum(k, v, kResetNames); });
  model.With("recurrence", [&](auto k, auto v) {
    c.codec.lif.recurrence = ParseEnum(k, v, kRecurrenceNames);
  });
  model.With("pooling", [&](auto k, auto v) { c.codec.pooling = ParseEnum(k, v, kPoolNames); });
  model.With("init", [&](auto k, auto v) { c.codec.init = ParseEnum(k, v, kInitNames); });
  model.With("lambda_mix", [&](auto k, auto v) { c.codec.lambda_mix = ParseDouble(k, v); });
  model.With("precision", [&](auto k, auto v) {
    c.codec.precision = ParseEnum(k, v, kPrecisionNames);
  });

  const Section train(tree, "train");
  train.With("epochs", [&](auto k, auto v) { c.plan.epochs = ParseInt<std::size_t>(k, v); });
  train.With("batch", [&](auto k, auto v) { c.plan.batch = ParseInt<std::size_t>(k, v); });
  train.With("learning_rate", [&](auto k, auto v) { c.plan.learning_rate = ParseDouble(k, v); });
  train.With("test_fraction", [&](auto k, auto v) { c.plan.test_fraction = ParseDouble(k, v); });
  train.With("zscore", [&](auto k, auto v) { c.plan.preprocess.zscore = ParseBool(k, v); });
  train.With("trim_to_multiple_of_4", [&](auto k, auto v) {
    c.plan.preprocess.trim_to_multiple_of_4 = ParseBool(k, v);
  });
  train.With("label_coding", [&](auto k, auto v) {
    c.plan.label_coding = ParseEnum(k, v, kCodingNames);
  });
  train.With("ablation", [&](auto, auto v) { c.plan.ablation = ParseAblation(v); });
  train.With("head_epochs", [&](auto k, auto v) { c.plan.head_epochs = ParseInt<std::size_t>(k, v); });
  train.With("head_learning_rate", [&](auto k, auto v) {
    c.plan.head_learning_rate = ParseDouble(k, v);
  });

  c.plan.Validate();
  return c;
}

RunConfig RunConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return Parse(in);
}

void RunConfig::Resolve() {
  plan.seed = seed;
  if (checkpoint.empty()) checkpoint = out / "codec.ckpt";
  if (memory.empty()) memory = out / "memory.bam";
  if (bundle.empty()) bundle = out / "data.bundle";
}

SynthSpec RunConfig::ResolvedSynth() const {
  SynthSpec s = synth;
  s.seed = synth_seed.value_or(seed);
  return s;
}

void RunConfig::WriteIni(std::ostream& os) const {
  const SynthSpec s = ResolvedSynth();
  os << "[run]\n"
     << fmt::format("seed = {}\nout = {}\ncheckpoint = {}\nmemory = {}\n\n",
                    seed, out.string(), checkpoint.string(), memory.string());
  os << "[data]\n"
     << fmt::format("source = {}\nbundle = {}\ntrim_to_header_length = {}\n\n",
                    data_source, bundle.string(),
                    bundle_options.trim_to_header_length);
  os << "[synth]\n"
     << fmt::format(
            "tasks = {}\nclasses = {}\nchannels = {}\nlength = {}\n"
            "trials_per_class = {}\nsample_rate = {}\nsnr_db = {}\nseed = {}\n\n",
            s.tasks, s.classes, s.channels, s.length, s.trials_per_class,
            s.sample_rate, s.snr_db, s.seed);
  os << "[model]\n"
     << fmt::format(
            "encoder = {}\ndecoder = {}\nkernel = {}\nneurons = {}\ntau = {}\n"
            "threshold = {}\nreset = {}\nrecurrence = {}\npooling = {}\n"
            "lambda_mix = {}\nprecision = {}\ninit = {}\n\n",
            FormatBlocks(codec.encoder), FormatBlocks(codec.decoder),
            codec.kernel, codec.lif.neurons, codec.lif.tau,
            codec.lif.threshold, EnumName(codec.lif.reset, kResetNames),
            EnumName(codec.lif.recurrence, kRecurrenceNames),
            EnumName(codec.pooling, kPoolNames), codec.lambda_mix,
            EnumName(codec.precision, kPrecisionNames),
            EnumName(codec.init, kInitNames));
  os << "[train]\n"
     << fmt::format(
            "epochs = {}\nbatch = {}\nlearning_rate = {}\ntest_fraction = {}\n"
            "zscore = {}\ntrim_to_multiple_of_4 = {}\nlabel_coding = {}\n"
            "ablation = {}\nhead_epochs = {}\nhead_learning_rate = {}\n",
            plan.epochs, plan.batch, plan.learning_rate, plan.test_fraction,
            plan.preprocess.zscore, plan.preprocess.trim_to_multiple_of_4,
            EnumName(plan.label_coding, kCodingNames),
            AblationName(plan.ablation), plan.head_epochs,
            plan.head_learning_rate);
}

void RunConfig::WriteResolved() const {
  std::filesystem::create_directories(out);
  std::ofstream os(out / "resolved_config.ini", std::ios::trunc);
  if (!os) throw ConfigError("cannot write into output directory " + out.string());
  WriteIni(os);
}

Dataset LoadDataset(const RunConfig& config) {
  if (config.data_source == "synth") return SynthGenerate(config.ResolvedSynth());
  return LoadBundle(config.bundle, config.bundle_options);
}

}  // namespace ammteeg
