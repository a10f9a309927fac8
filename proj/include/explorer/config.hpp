#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "explorer/env.hpp"
#include "explorer/model.hpp"
#include "explorer/sac.hpp"

namespace explorer {

// Flat key=value run configuration. Unknown keys are rejected; save/parse
// round-trips losslessly (doubles written at full precision).
struct RunConfig {
  // trainer
  double gamma = 1.0;
  int batch_size = 64;
  int buffer_capacity = 2500;
  int warmup_steps = 1000;
  int max_episode_steps = 128;
  double target_entropy_scale = 0.01;
  double lr_policy = 1e-5;
  double lr_critic = 1e-5;
  double lr_alpha = 1e-4;
  int target_sync_interval = 64;
  int iterations_per_episode = 8;
  int num_envs = 16;
  uint64_t seed = 1;
  double alpha_init = 0.1;
  int twin_q = 0;
  int64_t total_env_steps = 50000;
  int checkpoint_interval_rounds = 50;
  int threads = 0;

  // model
  int d_model = 128;
  int heads = 8;
  int encoder_layers = 6;
  int ff_mult = 4;
  double pointer_clip = 10.0;
  double utility_norm = 0.0;  // 0 -> 4 * sensor_range

  // environment
  int map_width = 640;
  int map_height = 480;
  int sensor_range = 80;
  int lattice_dim = 30;
  int knn = 20;
  double utility_threshold = 5.0;
  double visit_radius = 0.0;  // 0 -> one lattice spacing

  // evaluation
  int eval_episode_cap = 512;
  std::string eval_completion = "coverage99";  // or zero_utility
  std::string eval_seeds;                      // comma-separated, optional
  double planner_utility_threshold = 5.0;
  double utility_lambda = 0.0;  // 0 -> score halves every 20 lattice spacings

  // rarefaction
  int rarefy = 0;
  double d_th_lattice = 12.0;
  int sparse_knn = 10;

  EnvConfig env_config() const;
  ModelConfig model_config() const;
  TrainerConfig trainer_config() const;
  double resolved_utility_norm() const;
  std::vector<uint64_t> eval_seed_list() const;

  // Throws std::runtime_error naming the offending field.
  void validate() const;

  std::string serialize() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace explorer
