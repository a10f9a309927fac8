#include "explorer/sac.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "explorer/kernels.hpp"
#include "explorer/parallel.hpp"
#include "explorer/rollout.hpp"

namespace explorer {

double soft_value(const Matrix& probs, const Matrix& log_probs, const Matrix& q_values,
                  double alpha) {
  assert(probs.size() == log_probs.size() && probs.size() == q_values.size());
  double v = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    v += probs.data()[i] * (q_values.data()[i] - alpha * log_probs.data()[i]);
  }
  return v;
}

namespace {

void adam_step(Param& p, const double* g, double lr, int64_t t) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (size_t i = 0; i < p.value.size(); ++i) {
    double& m = p.m.data()[i];
    double& v = p.v.data()[i];
    m = b1 * m + (1.0 - b1) * g[i];
    v = b2 * v + (1.0 - b2) * g[i] * g[i];
    p.value.data()[i] -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
  }
}

Matrix column_to_row(const Matrix& col) {
  Matrix row(1, col.rows());
  for (int i = 0; i < col.rows(); ++i) row.data()[i] = col(i, 0);
  return row;
}

Matrix elementwise_min(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::min(a.data()[i], b.data()[i]);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

NetworkParams load_policy_from_checkpoint(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.txt");
  std::ifstream bin(dir + "/weights.bin", std::ios::binary);
  if (!manifest || !bin) throw std::runtime_error("cannot read checkpoint: " + dir);

  ModelConfig mc;
  std::string key, str;
  int64_t i64;
  auto read_kv = [&](const std::string& name, auto& out) {
    if (!(manifest >> key >> out) || key != name) {
      throw std::runtime_error("checkpoint manifest: expected key " + name);
    }
  };
  read_kv("version", i64);
  read_kv("d", mc.d);
  read_kv("heads", mc.heads);
  read_kv("encoder_layers", mc.encoder_layers);
  read_kv("ff_mult", mc.ff_mult);
  read_kv("pointer_clip", mc.pointer_clip);
  read_kv("mode", str);
  read_kv("twin_q", i64);
  read_kv("env_steps", i64);
  read_kv("episodes", i64);
  read_kv("updates", i64);
  std::mt19937_64 dummy;
  read_kv("rng_train", dummy);
  double d;
  read_kv("log_alpha_m", d);
  read_kv("log_alpha_v", d);
  read_kv("log_alpha", d);

  NetworkParams policy(mc, HeadKind::Policy, "policy");
  read_tensor_block(policy, manifest, bin);
  return policy;
}

struct SacTrainer::SampleResult {
  double j_q = 0.0;
  double j_pi = 0.0;
  double entropy_term = 0.0;  // sum_a pi_a log pi_a on the current obs
};

SacTrainer::SacTrainer(TrainerConfig config, EnvConfig env_config, ModelConfig model_config,
                       CriticMode mode, double utility_norm)
    : config_(config),
      env_config_(env_config),
      model_config_(model_config),
      mode_(mode),
      utility_norm_(utility_norm),
      target_entropy_(config.target_entropy_scale * std::log(static_cast<double>(env_config.knn))),
      threads_(config.threads > 0 ? config.threads : default_thread_count()),
      policy_(model_config, HeadKind::Policy, "policy"),
      critic1_(model_config, HeadKind::Critic, "critic1"),
      target1_(model_config, HeadKind::Critic, "target1"),
      log_alpha_("alpha.log", 1, 1),
      buffer_(static_cast<size_t>(config.buffer_capacity)),
      train_rng_(mix_seed(config.seed, 0x7EA1)) {
  Rng init_rng(mix_seed(config_.seed, 0x1217));
  policy_.init_xavier(init_rng);
  critic1_.init_xavier(init_rng);
  if (config_.twin_q) {
    critic2_ = NetworkParams(model_config, HeadKind::Critic, "critic2");
    critic2_.init_xavier(init_rng);
    target2_ = NetworkParams(model_config, HeadKind::Critic, "target2");
    target2_.copy_values_from(critic2_);
  }
  target1_.copy_values_from(critic1_);
  log_alpha_.value(0, 0) = std::log(config_.alpha_init);

  policy_.for_each([this](Param& p) {
    flat_params_.push_back(&p);
    lr_by_param_.push_back(config_.lr_policy);
  });
  critic_offset_ = 0;
  for (Param* p : flat_params_) critic_offset_ += p->value.size();
  critic1_.for_each([this](Param& p) {
    flat_params_.push_back(&p);
    lr_by_param_.push_back(config_.lr_critic);
  });
  if (config_.twin_q) {
    critic2_.for_each([this](Param& p) {
      flat_params_.push_back(&p);
      lr_by_param_.push_back(config_.lr_critic);
    });
  }
  total_param_count_ = 0;
  for (Param* p : flat_params_) {
    param_offsets_.emplace(p, total_param_count_);
    total_param_count_ += p->value.size();
  }
  // grad_var covers the first critic's block only.
  critic_count_ = 0;
  critic1_.for_each([this](const Param& p) { critic_count_ += p.value.size(); });
}

size_t SacTrainer::param_offset(const Param& p) const {
  const auto it = param_offsets_.find(&p);
  assert(it != param_offsets_.end());
  return it->second;
}

double SacTrainer::alpha() const { return std::exp(log_alpha_.value(0, 0)); }

void SacTrainer::process_sample(const Transition& t, std::vector<double>& grad_sink,
                                SampleResult& out) {
  const double alpha_now = alpha();
  const double inv_batch = 1.0 / static_cast<double>(config_.batch_size);
  const bool privileged = mode_ == CriticMode::Privileged;

  // Soft target value from the next state.
  double y = t.reward;
  if (!t.done) {
    const FeatureGraph fg_next = make_policy_input(*t.next_obs, utility_norm_);
    Tape tn;
    const PolicyRefs pr = policy_forward(tn, policy_, fg_next);
    const FeatureGraph fg_next_critic = privileged
                                            ? make_critic_input(*t.next_gt, utility_norm_)
                                            : make_critic_input(*t.next_obs, utility_norm_);
    const auto& next_nodes = privileged ? t.next_gt_neighbors : t.next_obs_neighbors;
    Matrix q_next = critic_values(target1_, fg_next_critic, next_nodes);
    if (config_.twin_q) {
      q_next = elementwise_min(q_next, critic_values(target2_, fg_next_critic, next_nodes));
    }
    y += config_.gamma *
         soft_value(tn.value(pr.probs), tn.value(pr.log_probs), column_to_row(q_next), alpha_now);
  }

  const FeatureGraph fg_critic = privileged ? make_critic_input(*t.gt, utility_norm_)
                                            : make_critic_input(*t.obs, utility_norm_);
  const auto& act_nodes = privileged ? t.gt_neighbors : t.obs_neighbors;

  // Critic step: J_Q = E[1/2 (Q(o_t,a_t) - y)^2].
  Matrix y_mat(1, 1);
  y_mat(0, 0) = y;
  Matrix q_for_policy;
  {
    Tape tc;
    const Tape::Ref q_ref = critic_forward(tc, critic1_, fg_critic, act_nodes);
    q_for_policy = column_to_row(tc.value(q_ref));
    const Tape::Ref q_sel = tc.gather_rows(q_ref, {t.action});
    const Tape::Ref j_q = tc.scale(tc.square(tc.sub(q_sel, tc.constant(y_mat))), 0.5);
    out.j_q = tc.value(j_q)(0, 0);
    tc.backward(j_q, inv_batch);
    tc.visit_param_grads([this, &grad_sink](Param& p, const Matrix& g) {
      const size_t off = param_offset(p);
      kernels::active().add(static_cast<int>(g.size()), g.data(), grad_sink.data() + off);
    });
  }
  if (config_.twin_q) {
    Tape tc2;
    const Tape::Ref q_ref = critic_forward(tc2, critic2_, fg_critic, act_nodes);
    q_for_policy = elementwise_min(q_for_policy, column_to_row(tc2.value(q_ref)));
    const Tape::Ref q_sel = tc2.gather_rows(q_ref, {t.action});
    const Tape::Ref j_q = tc2.scale(tc2.square(tc2.sub(q_sel, tc2.constant(y_mat))), 0.5);
    out.j_q = 0.5 * (out.j_q + tc2.value(j_q)(0, 0));
    tc2.backward(j_q, inv_batch);
    tc2.visit_param_grads([this, &grad_sink](Param& p, const Matrix& g) {
      const size_t off = param_offset(p);
      kernels::active().add(static_cast<int>(g.size()), g.data(), grad_sink.data() + off);
    });
  }

  // Policy step: J_pi = E[sum_a pi_a (alpha log pi_a - Q_a)], Q detached.
  {
    const FeatureGraph fg_obs = make_policy_input(*t.obs, utility_norm_);
    Tape tp;
    const PolicyRefs refs = policy_forward(tp, policy_, fg_obs);
    const Tape::Ref term =
        tp.sub(tp.scale(refs.log_probs, alpha_now), tp.constant(q_for_policy));
    const Tape::Ref j_pi = tp.sum(tp.hadamard(refs.probs, term));
    out.j_pi = tp.value(j_pi)(0, 0);
    const Matrix& probs = tp.value(refs.probs);
    const Matrix& log_probs = tp.value(refs.log_probs);
    out.entropy_term = kernels::active().dot(probs.cols(), probs.data(), log_probs.data());
    tp.backward(j_pi, inv_batch);
    tp.visit_param_grads([this, &grad_sink](Param& p, const Matrix& g) {
      const size_t off = param_offset(p);
      kernels::active().add(static_cast<int>(g.size()), g.data(), grad_sink.data() + off);
    });
  }
}

LossReport SacTrainer::update(const std::vector<const Transition*>& batch) {
  const int b = static_cast<int>(batch.size());
  assert(b > 0);
  if (sample_grads_.size() != static_cast<size_t>(b)) {
    sample_grads_.assign(b, std::vector<double>(total_param_count_, 0.0));
  }
  std::vector<SampleResult> results(b);
  parallel_for(b, threads_, [&](int i) {
    std::fill(sample_grads_[i].begin(), sample_grads_[i].end(), 0.0);
    process_sample(*batch[i], sample_grads_[i], results[i]);
  });

  // Deterministic reduction in sample order.
  std::vector<double> grads(total_param_count_, 0.0);
  for (int i = 0; i < b; ++i) {
    kernels::active().add(static_cast<int>(total_param_count_), sample_grads_[i].data(),
                          grads.data());
  }

  LossReport report;
  double entropy_mean = 0.0;
  for (const SampleResult& r : results) {
    report.j_q += r.j_q;
    report.j_pi += r.j_pi;
    entropy_mean += r.entropy_term;
  }
  report.j_q /= b;
  report.j_pi /= b;
  entropy_mean /= b;

  // Variance of the critic gradient entries (ablation diagnostic).
  {
    const double* g = grads.data() + critic_offset_;
    const size_t n = critic_count_;
    const double mean = kernels::active().sum(static_cast<int>(n), g) / static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) var += (g[i] - mean) * (g[i] - mean);
    report.grad_var = var / static_cast<double>(n);
  }

  const double alpha_now = alpha();
  report.alpha = alpha_now;
  report.j_alpha = -alpha_now * (entropy_mean + target_entropy_);

  ++updates_;
  apply_adam(grads);
  // d J(alpha) / d log alpha = -alpha * (E[log pi] + H_bar).
  const double g_log_alpha = -alpha_now * (entropy_mean + target_entropy_);
  adam_step(log_alpha_, &g_log_alpha, config_.lr_alpha, updates_);

  if (updates_ % config_.target_sync_interval == 0) sync_targets();
  return report;
}

void SacTrainer::apply_adam(const std::vector<double>& grads) {
  size_t off = 0;
  for (size_t i = 0; i < flat_params_.size(); ++i) {
    Param& p = *flat_params_[i];
    adam_step(p, grads.data() + off, lr_by_param_[i], updates_);
    off += p.value.size();
  }
  assert(off == total_param_count_);
}

void SacTrainer::sync_targets() {
  target1_.copy_values_from(critic1_);
  if (config_.twin_q) target2_.copy_values_from(critic2_);
}

void SacTrainer::train(const MapSource& maps, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string metrics_path = out_dir + "/metrics.csv";
  const bool fresh = !fs::exists(metrics_path);
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw std::runtime_error("cannot open metrics file: " + metrics_path);
  if (fresh) metrics << kMetricsHeader << '\n';

  int64_t rounds = 0;
  while (env_steps_ < config_.total_env_steps) {
    const int n_envs = config_.num_envs;
    std::vector<EpisodeResult> results(n_envs);
    const int64_t episode_base = episodes_;
    parallel_for(n_envs, threads_, [&](int e) {
      const uint64_t ep = static_cast<uint64_t>(episode_base) + e;
      auto map = maps(ep);
      Environment env(map, env_config_);
      Rng rng(mix_seed(config_.seed, 0xE9150000ULL + ep));
      env.reset_random(rng);
      results[e] = collect_episode(policy_, env, rng, config_.max_episode_steps, utility_norm_);
    });

    double reward_sum = 0.0;
    int64_t step_sum = 0;
    for (EpisodeResult& r : results) {
      for (Transition& t : r.transitions) buffer_.push(std::move(t));
      reward_sum += r.reward_sum;
      step_sum += r.length;
    }
    episodes_ += n_envs;
    env_steps_ += step_sum;
    ++rounds;

    LossReport mean{};
    int n_updates = 0;
    if (buffer_.size() >= static_cast<size_t>(config_.warmup_steps)) {
      n_updates = config_.iterations_per_episode * n_envs;
      for (int u = 0; u < n_updates; ++u) {
        const int bsz = std::min<int>(config_.batch_size, static_cast<int>(buffer_.size()));
        const LossReport rep = update(buffer_.sample(train_rng_, bsz));
        mean.j_q += rep.j_q;
        mean.j_pi += rep.j_pi;
        mean.j_alpha += rep.j_alpha;
        mean.alpha += rep.alpha;
        mean.grad_var += rep.grad_var;
      }
      mean.j_q /= n_updates;
      mean.j_pi /= n_updates;
      mean.j_alpha /= n_updates;
      mean.alpha /= n_updates;
      mean.grad_var /= n_updates;
    } else {
      mean.alpha = alpha();
    }

    metrics << env_steps_ << ',' << episodes_ << ','
            << format_double(step_sum > 0 ? reward_sum / static_cast<double>(step_sum) : 0.0)
            << ','
            << format_double(static_cast<double>(step_sum) / n_envs) << ','
            << format_double(mean.j_q) << ',' << format_double(mean.j_pi) << ','
            << format_double(mean.j_alpha) << ',' << format_double(mean.alpha) << ','
            << format_double(mean.grad_var) << '\n';
    metrics.flush();

    if (config_.checkpoint_interval_rounds > 0 && rounds % config_.checkpoint_interval_rounds == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%08lld", static_cast<long long>(episodes_));
      save_checkpoint(out_dir + "/" + name);
    }
  }
  save_checkpoint(out_dir + "/ckpt_final");
}

void SacTrainer::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(dir + "/manifest.txt");
  std::ofstream bin(dir + "/weights.bin", std::ios::binary);
  if (!manifest || !bin) throw std::runtime_error("cannot write checkpoint: " + dir);

  manifest << "version 1\n";
  manifest << "d " << model_config_.d << '\n';
  manifest << "heads " << model_config_.heads << '\n';
  manifest << "encoder_layers " << model_config_.encoder_layers << '\n';
  manifest << "ff_mult " << model_config_.ff_mult << '\n';
  manifest << "pointer_clip " << format_double(model_config_.pointer_clip) << '\n';
  manifest << "mode " << (mode_ == CriticMode::Privileged ? "privileged" : "ablation") << '\n';
  manifest << "twin_q " << (config_.twin_q ? 1 : 0) << '\n';
  manifest << "env_steps " << env_steps_ << '\n';
  manifest << "episodes " << episodes_ << '\n';
  manifest << "updates " << updates_ << '\n';
  {
    std::ostringstream state;
    state << const_cast<SacTrainer*>(this)->train_rng_.engine();
    manifest << "rng_train " << state.str() << '\n';
  }
  manifest << "log_alpha_m " << format_exact(log_alpha_.m(0, 0)) << '\n';
  manifest << "log_alpha_v " << format_exact(log_alpha_.v(0, 0)) << '\n';
  manifest << "log_alpha " << format_exact(log_alpha_.value(0, 0)) << '\n';

  write_tensor_block(policy_, manifest, bin);
  write_tensor_block(critic1_, manifest, bin);
  write_tensor_block(target1_, manifest, bin);
  if (config_.twin_q) {
    write_tensor_block(critic2_, manifest, bin);
    write_tensor_block(target2_, manifest, bin);
  }
}

void SacTrainer::load_checkpoint(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.txt");
  std::ifstream bin(dir + "/weights.bin", std::ios::binary);
  if (!manifest || !bin) throw std::runtime_error("cannot read checkpoint: " + dir);

  std::string key;
  auto expect_int = [&](const std::string& name, int64_t expected) {
    int64_t v;
    if (!(manifest >> key >> v) || key != name) {
      throw std::runtime_error("checkpoint manifest: expected key " + name);
    }
    if (expected >= 0 && v != expected) {
      throw std::runtime_error("checkpoint mismatch for " + name + ": file has " +
                               std::to_string(v) + ", runtime has " + std::to_string(expected));
    }
    return v;
  };
  expect_int("version", 1);
  expect_int("d", model_config_.d);
  expect_int("heads", model_config_.heads);
  expect_int("encoder_layers", model_config_.encoder_layers);
  expect_int("ff_mult", model_config_.ff_mult);
  double pointer_clip;
  manifest >> key >> pointer_clip;
  std::string mode_str;
  manifest >> key >> mode_str;
  if (key != "mode") throw std::runtime_error("checkpoint manifest: expected mode");
  mode_ = mode_str == "privileged" ? CriticMode::Privileged : CriticMode::Ablation;
  const int64_t twin = expect_int("twin_q", config_.twin_q ? 1 : 0);
  (void)twin;
  env_steps_ = expect_int("env_steps", -1);
  episodes_ = expect_int("episodes", -1);
  updates_ = expect_int("updates", -1);
  manifest >> key;
  if (key != "rng_train") throw std::runtime_error("checkpoint manifest: expected rng_train");
  manifest >> train_rng_.engine();
  double la_m, la_v, la;
  manifest >> key >> la_m >> key >> la_v >> key >> la;
  log_alpha_.m(0, 0) = la_m;
  log_alpha_.v(0, 0) = la_v;
  log_alpha_.value(0, 0) = la;

  read_tensor_block(policy_, manifest, bin);
  read_tensor_block(critic1_, manifest, bin);
  read_tensor_block(target1_, manifest, bin);
  if (config_.twin_q) {
    read_tensor_block(critic2_, manifest, bin);
    read_tensor_block(target2_, manifest, bin);
  }
}

}  // namespace explorer
