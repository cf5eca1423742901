// Copyright 2026 The CompNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// compnet: synthesize data, learn dictionaries, train and evaluate
// compositional models of feature activations.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "compnet/config.hpp"
#include "compnet/error.hpp"
#include "compnet/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> family;
  std::optional<std::string> out;
  std::optional<int> k;
  std::optional<double> s;
  std::optional<double> delta;
  std::optional<double> pi;
  std::optional<int> mixtures;
  std::optional<double> threshold;
  std::optional<std::string> manifest;
  std::optional<std::string> dictionary;
  std::optional<std::string> models;
  std::optional<std::string> features;
};

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "Top-level seed");
  cmd->add_option("--family", o.family, "Model family: dict or vmf");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--k", o.k, "Dictionary size K");
  cmd->add_option("--s", o.s, "vMF concentration S");
  cmd->add_option("--delta", o.delta, "Binarization threshold");
  cmd->add_option("--pi", o.pi, "Visibility prior");
  cmd->add_option("--m-mixtures", o.mixtures, "Mixture components per class");
  cmd->add_option("--threshold", o.threshold, "Occlusion score threshold");
  cmd->add_option("--manifest", o.manifest, "Dataset manifest");
  cmd->add_option("--dictionary", o.dictionary, "Dictionary file");
  cmd->add_option("--models", o.models, "Model directory");
  cmd->add_option("--features", o.features, "Feature map (CFMP)");
}

compnet::RunConfig resolve(const Overrides& o) {
  compnet::RunConfig c = o.config.empty() ? compnet::RunConfig{} : compnet::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.family) c.family = compnet::parse_family(*o.family);
  if (o.out) c.out = *o.out;
  if (o.k) c.components = *o.k;
  if (o.s) c.concentration = *o.s;
  if (o.delta) c.delta = *o.delta;
  if (o.pi) c.pi = *o.pi;
  if (o.mixtures) c.mixtures = *o.mixtures;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.manifest) c.manifest = *o.manifest;
  if (o.dictionary) c.dictionary = *o.dictionary;
  if (o.models) c.models = *o.models;
  if (o.features) c.features = *o.features;
  c.validate();
  return c;
}

int exit_code(compnet::ErrorCode code) {
  switch (code) {
    case compnet::ErrorCode::InvalidConfig:
    case compnet::ErrorCode::InvalidPrior:
      return 2;
    case compnet::ErrorCode::Numerical:
      return 4;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional generative models for occluded-object classification"};
  app.require_subcommand(1);
  Overrides o;
  using Command = void (*)(const compnet::RunConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"synth", compnet::cmd_synth},       {"learn-dict", compnet::cmd_learn_dict},
      {"train", compnet::cmd_train},       {"classify", compnet::cmd_classify},
      {"localize", compnet::cmd_localize}, {"eval", compnet::cmd_eval},
  };
  const char* help[] = {"Generate a synthetic dataset",       "Learn a vMF dictionary from training features",
                        "Train one model per class",          "Classify one feature map",
                        "Localize the occluder in one map",   "Accuracy table, ROC curves and score maps"};
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    add_flags(sub, o);
    subs.emplace_back(sub, commands[i].second);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    const auto config = resolve(o);
    for (const auto& [sub, run] : subs) {
      if (sub->parsed()) run(config, std::cout);
    }
  } catch (const compnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
