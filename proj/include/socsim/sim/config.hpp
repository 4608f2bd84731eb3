#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"

namespace socsim {

// Full run configuration. Defaults reproduce the reference experimental
// settings: K = 14 on a two-clique caveman graph, T = 5000, |C| = 6,
// |D| = 100, lambda = 0.1, beta = 1.0, tau = 0.3, five Adam iterations per
// step at 1e-5 with batch 256, buffers of 7000.
struct SimConfig {
  std::uint64_t seed = 0;
  std::string condition = "with_creation";  // or "without_creation"
  long steps = 5000;

  int n_cliques = 2;
  int clique_size = 7;

  int creations_per_step = 6;    // |C^k|
  int comm_memory_samples = 100; // |D^k|

  int buffer_capacity = 7000;
  double buffer_init_radius = 2.0;
  double buffer_init_std = 0.25;

  int hidden_width = 64;
  int hidden_layers = 2;

  long snapshot_interval = 50;
  long full_buffer_interval = 500;
  int snapshot_buffer_samples = 1000;
  int rsa_log_samples = 50;

  HyperParams hyper;

  int agent_count() const { return n_cliques * clique_size; }
  bool with_creation() const { return condition == "with_creation"; }
  std::vector<int> hidden_dims() const {
    return std::vector<int>(hidden_layers, hidden_width);
  }

  void validate() const {
    require(condition == "with_creation" || condition == "without_creation",
            "config: condition must be with_creation or without_creation");
    require(steps >= 1, "config: steps must be >= 1");
    require(n_cliques >= 2 && clique_size >= 2, "config: invalid topology");
    require(creations_per_step >= 1, "config: creations_per_step must be >= 1");
    require(comm_memory_samples >= 1, "config: comm_memory_samples must be >= 1");
    require(buffer_capacity >= 1, "config: buffer_capacity must be >= 1");
    require(buffer_init_std > 0 && buffer_init_radius >= 0,
            "config: invalid buffer layout");
    require(hidden_width >= 1 && hidden_layers >= 1, "config: invalid architecture");
    require(snapshot_interval >= 1 && full_buffer_interval >= 1,
            "config: snapshot intervals must be >= 1");
    require(snapshot_buffer_samples >= 2 && rsa_log_samples >= 2,
            "config: snapshot/rsa sample counts must be >= 2");
    require(buffer_capacity >= hyper.pretrain_batch,
            "config: buffer must hold at least one pretraining batch");
    hyper.validate();
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"seed", seed},
        {"condition", condition},
        {"steps", steps},
        {"n_cliques", n_cliques},
        {"clique_size", clique_size},
        {"creations_per_step", creations_per_step},
        {"comm_memory_samples", comm_memory_samples},
        {"buffer_capacity", buffer_capacity},
        {"buffer_init_radius", buffer_init_radius},
        {"buffer_init_std", buffer_init_std},
        {"hidden_width", hidden_width},
        {"hidden_layers", hidden_layers},
        {"snapshot_interval", snapshot_interval},
        {"full_buffer_interval", full_buffer_interval},
        {"snapshot_buffer_samples", snapshot_buffer_samples},
        {"rsa_log_samples", rsa_log_samples},
        {"lambda", hyper.lambda},
        {"beta", hyper.beta},
        {"tau", hyper.tau},
        {"model_update_iters", hyper.model_update_iters},
        {"model_update_lr", hyper.model_update_lr},
        {"model_update_batch", hyper.model_update_batch},
        {"creation_steps", hyper.creation_steps},
        {"creation_lr", hyper.creation_lr},
        {"mc_samples", hyper.mc_samples},
        {"pretrain_epochs", hyper.pretrain_epochs},
        {"pretrain_lr", hyper.pretrain_lr},
        {"pretrain_batch", hyper.pretrain_batch},
    };
  }

  // Unknown keys are rejected so typos cannot silently fall back to defaults.
  static SimConfig from_json(const nlohmann::json& j) {
    SimConfig c;
    const nlohmann::json defaults = c.to_json();
    for (const auto& [key, value] : j.items()) {
      if (!defaults.contains(key))
        throw std::invalid_argument("config: unknown key '" + key + "'");
      (void)value;
    }
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("seed", c.seed);
    get("condition", c.condition);
    get("steps", c.steps);
    get("n_cliques", c.n_cliques);
    get("clique_size", c.clique_size);
    get("creations_per_step", c.creations_per_step);
    get("comm_memory_samples", c.comm_memory_samples);
    get("buffer_capacity", c.buffer_capacity);
    get("buffer_init_radius", c.buffer_init_radius);
    get("buffer_init_std", c.buffer_init_std);
    get("hidden_width", c.hidden_width);
    get("hidden_layers", c.hidden_layers);
    get("snapshot_interval", c.snapshot_interval);
    get("full_buffer_interval", c.full_buffer_interval);
    get("snapshot_buffer_samples", c.snapshot_buffer_samples);
    get("rsa_log_samples", c.rsa_log_samples);
    get("lambda", c.hyper.lambda);
    get("beta", c.hyper.beta);
    get("tau", c.hyper.tau);
    get("model_update_iters", c.hyper.model_update_iters);
    get("model_update_lr", c.hyper.model_update_lr);
    get("model_update_batch", c.hyper.model_update_batch);
    get("creation_steps", c.hyper.creation_steps);
    get("creation_lr", c.hyper.creation_lr);
    get("mc_samples", c.hyper.mc_samples);
    get("pretrain_epochs", c.hyper.pretrain_epochs);
    get("pretrain_lr", c.hyper.pretrain_lr);
    get("pretrain_batch", c.hyper.pretrain_batch);
    return c;
  }

  static SimConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: invalid JSON in " + path.string() +
                                  ": " + e.what());
    }
    return from_json(j);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    require(out.good(), "config: cannot write " + path.string());
    out << to_json().dump(2) << "\n";
  }
};

}  // namespace socsim
