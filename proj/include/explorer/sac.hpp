#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "explorer/env.hpp"
#include "explorer/model.hpp"
#include "explorer/replay.hpp"
#include "explorer/rng.hpp"

namespace explorer {

// Privileged: the critic reads the ground-truth graph; Ablation: the critic
// reads the same informative graph as the policy.
enum class CriticMode { Privileged, Ablation };

struct TrainerConfig {
  double gamma = 1.0;
  int batch_size = 64;
  int buffer_capacity = 2500;
  int warmup_steps = 1000;
  int max_episode_steps = 128;
  double target_entropy_scale = 0.01;  // H_bar = scale * log(k)
  double lr_policy = 1e-5;
  double lr_critic = 1e-5;
  double lr_alpha = 1e-4;
  int target_sync_interval = 64;
  int iterations_per_episode = 8;
  int num_envs = 16;
  uint64_t seed = 1;
  double alpha_init = 0.1;
  bool twin_q = false;
  int64_t total_env_steps = 50000;
  int checkpoint_interval_rounds = 50;
  int threads = 0;  // 0 -> default_thread_count()
};

struct LossReport {
  double j_q = 0.0;
  double j_pi = 0.0;
  double j_alpha = 0.0;
  double alpha = 0.0;
  double grad_var = 0.0;  // variance of the critic batch-gradient entries
};

// Discrete-SAC soft state value, exact over the action set:
// V = sum_a pi_a * (q_a - alpha * log pi_a).
double soft_value(const Matrix& probs, const Matrix& log_probs, const Matrix& q_values,
                  double alpha);

using MapSource = std::function<std::shared_ptr<const GroundTruthMap>(uint64_t episode_index)>;

// Reads a checkpoint's model header and policy tensor block only (for
// evaluation); rejects shape mismatches.
NetworkParams load_policy_from_checkpoint(const std::string& dir);

inline constexpr char kMetricsHeader[] =
    "step,episode,reward_mean,len_mean,J_Q,J_pi,J_alpha,alpha,grad_var";

// Discrete soft actor-critic with auto-tuned temperature and a privileged
// ground-truth critic. All action expectations are closed-form over the
// neighbor set; gradients are exact (tape) and reduced in sample order, so
// results are independent of the thread count.
class SacTrainer {
 public:
  SacTrainer(TrainerConfig config, EnvConfig env_config, ModelConfig model_config,
             CriticMode mode, double utility_norm);

  // One gradient step each for critic, policy and temperature from the
  // given batch; hard target sync every target_sync_interval updates.
  LossReport update(const std::vector<const Transition*>& batch);

  // Rounds of (num_envs episodes -> buffer -> iterations_per_episode * num_envs
  // updates) until the env-step budget is reached. Appends one metrics row
  // per round to <out_dir>/metrics.csv and checkpoints periodically.
  void train(const MapSource& maps, const std::string& out_dir);

  void save_checkpoint(const std::string& dir) const;
  void load_checkpoint(const std::string& dir);

  NetworkParams& policy() { return policy_; }
  const NetworkParams& policy() const { return policy_; }
  NetworkParams& critic() { return critic1_; }
  NetworkParams& target_critic() { return target1_; }
  double alpha() const;
  double target_entropy() const { return target_entropy_; }
  CriticMode mode() const { return mode_; }
  ReplayBuffer& buffer() { return buffer_; }
  int64_t env_steps() const { return env_steps_; }
  int64_t episodes() const { return episodes_; }
  int64_t updates() const { return updates_; }
  const EnvConfig& env_config() const { return env_config_; }
  const TrainerConfig& config() const { return config_; }
  double utility_norm() const { return utility_norm_; }

 private:
  struct SampleResult;

  size_t param_offset(const Param& p) const;
  void process_sample(const Transition& t, std::vector<double>& grad_sink, SampleResult& out);
  void apply_adam(const std::vector<double>& grads);
  void sync_targets();

  TrainerConfig config_;
  EnvConfig env_config_;
  ModelConfig model_config_;
  CriticMode mode_;
  double utility_norm_;
  double target_entropy_;
  int threads_;

  NetworkParams policy_;
  NetworkParams critic1_;
  NetworkParams critic2_;  // twin-Q extension (config flag, default off)
  NetworkParams target1_;
  NetworkParams target2_;
  Param log_alpha_;

  // Flat gradient layout: policy block, critic1 block, optional critic2.
  std::vector<Param*> flat_params_;
  std::vector<double> lr_by_param_;
  std::unordered_map<const Param*, size_t> param_offsets_;
  size_t total_param_count_ = 0;
  size_t critic_offset_ = 0;
  size_t critic_count_ = 0;

  ReplayBuffer buffer_;
  Rng train_rng_;

  int64_t env_steps_ = 0;
  int64_t episodes_ = 0;
  int64_t updates_ = 0;

  std::vector<std::vector<double>> sample_grads_;  // reused per update
};

}  // namespace explorer
