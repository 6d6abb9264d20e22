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

// ammteeg: synthesize data, train, evaluate, reconstruct class waveforms and
// run ablations from one INI config.

#include <iostream>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "ammteeg/commands.h"

int main(int argc, char** argv) {
  ammteeg::ConfigureAllocator();
  spdlog::set_default_logger(spdlog::stderr_color_mt("ammteeg"));

  CLI::App app{"Multi-task EEG classification with a spiking autoencoder and "
               "associative memories"};
  app.require_subcommand(1);

  ammteeg::CommandOptions options;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string task;
  std::size_t label = 0;
  std::string ablation;

  struct Spec {
    const char* name;
    const char* help;
    bool task_and_class;
    bool ablation;
  };
  const Spec specs[] = {
      {"synth", "Write the synthetic trial bundle", false, false},
      {"train", "Train both phases and save the checkpoints", false, true},
      {"eval", "Evaluate saved checkpoints on the test split", false, true},
      {"reconstruct", "Export class waveforms, spike rasters and ERPs", true,
       false},
      {"ablate", "Run a full ablation variant", false, true},
  };
  std::vector<CLI::App*> subs;
  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "INI run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides run.out)");
    sub->add_option("--seed", seed, "Seed (overrides run.seed)");
    if (s.task_and_class) {
      sub->add_option("--task", task, "Task id");
      sub->add_option("--class", label, "Class index");
    }
    if (s.ablation) {
      sub->add_option("--ablation", ablation, "none | no-spiking | no-bam")
          ->check(CLI::IsMember({"none", "no-spiking", "no-bam"}));
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ammteeg::kExitConfig;
  }

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    options.config = config;
    if (sub->count("--out")) options.out = out;
    if (sub->count("--seed")) options.seed = seed;
    if (sub->get_option_no_throw("--task") && sub->count("--task")) {
      options.task = task;
    }
    if (sub->get_option_no_throw("--class") && sub->count("--class")) {
      options.label = label;
    }
    if (sub->get_option_no_throw("--ablation") && sub->count("--ablation")) {
      options.ablation = ablation;
    }
    return ammteeg::RunCommand(sub->get_name(), options, std::cerr);
  }
  return ammteeg::kExitConfig;
}
