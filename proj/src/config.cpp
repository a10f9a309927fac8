#include "explorer/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace explorer {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
void parse_into(T& out, const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  ss >> out;
  if (ss.fail()) throw std::runtime_error("config: bad value for " + key + ": " + text);
  std::string rest;
  if (ss >> rest) throw std::runtime_error("config: trailing junk for " + key + ": " + text);
}

// Ordered field table; serialization follows this order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const auto* table = [] {
    auto* t = new std::vector<std::pair<std::string, Field>>;
    auto add_num = [t](const std::string& key, auto member) {
      t->push_back({key,
                    {[member](const RunConfig& c) {
                       using M = std::decay_t<decltype(c.*member)>;
                       if constexpr (std::is_same_v<M, double>) {
                         return fmt_double(c.*member);
                       } else {
                         return std::to_string(c.*member);
                       }
                     },
                     [member, key](RunConfig& c, const std::string& v) {
                       parse_into(c.*member, v, key);
                     }}});
    };
    auto add_str = [t](const std::string& key, std::string RunConfig::* member) {
      t->push_back({key,
                    {[member](const RunConfig& c) { return c.*member; },
                     [member](RunConfig& c, const std::string& v) { c.*member = v; }}});
    };

    add_num("gamma", &RunConfig::gamma);
    add_num("batch_size", &RunConfig::batch_size);
    add_num("buffer_capacity", &RunConfig::buffer_capacity);
    add_num("warmup_steps", &RunConfig::warmup_steps);
    add_num("max_episode_steps", &RunConfig::max_episode_steps);
    add_num("target_entropy_scale", &RunConfig::target_entropy_scale);
    add_num("lr_policy", &RunConfig::lr_policy);
    add_num("lr_critic", &RunConfig::lr_critic);
    add_num("lr_alpha", &RunConfig::lr_alpha);
    add_num("target_sync_interval", &RunConfig::target_sync_interval);
    add_num("iterations_per_episode", &RunConfig::iterations_per_episode);
    add_num("num_envs", &RunConfig::num_envs);
    add_num("seed", &RunConfig::seed);
    add_num("alpha_init", &RunConfig::alpha_init);
    add_num("twin_q", &RunConfig::twin_q);
    add_num("total_env_steps", &RunConfig::total_env_steps);
    add_num("checkpoint_interval_rounds", &RunConfig::checkpoint_interval_rounds);
    add_num("threads", &RunConfig::threads);
    add_num("d_model", &RunConfig::d_model);
    add_num("heads", &RunConfig::heads);
    add_num("encoder_layers", &RunConfig::encoder_layers);
    add_num("ff_mult", &RunConfig::ff_mult);
    add_num("pointer_clip", &RunConfig::pointer_clip);
    add_num("utility_norm", &RunConfig::utility_norm);
    add_num("map_width", &RunConfig::map_width);
    add_num("map_height", &RunConfig::map_height);
    add_num("sensor_range", &RunConfig::sensor_range);
    add_num("lattice_dim", &RunConfig::lattice_dim);
    add_num("knn", &RunConfig::knn);
    add_num("utility_threshold", &RunConfig::utility_threshold);
    add_num("visit_radius", &RunConfig::visit_radius);
    add_num("eval_episode_cap", &RunConfig::eval_episode_cap);
    add_str("eval_completion", &RunConfig::eval_completion);
    add_str("eval_seeds", &RunConfig::eval_seeds);
    add_num("planner_utility_threshold", &RunConfig::planner_utility_threshold);
    add_num("utility_lambda", &RunConfig::utility_lambda);
    add_num("rarefy", &RunConfig::rarefy);
    add_num("d_th_lattice", &RunConfig::d_th_lattice);
    add_num("sparse_knn", &RunConfig::sparse_knn);
    return t;
  }();
  return *table;
}

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::runtime_error("config: field " + field + " " + what);
}

}  // namespace

EnvConfig RunConfig::env_config() const {
  EnvConfig e;
  e.sensor_range = sensor_range;
  e.lattice_dim = lattice_dim;
  e.knn = knn;
  e.utility_threshold = utility_threshold;
  e.completion = CompletionMode::ZeroUtility;
  e.visit_radius = visit_radius;
  return e;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.d = d_model;
  m.heads = heads;
  m.encoder_layers = encoder_layers;
  m.ff_mult = ff_mult;
  m.pointer_clip = pointer_clip;
  return m;
}

TrainerConfig RunConfig::trainer_config() const {
  TrainerConfig t;
  t.gamma = gamma;
  t.batch_size = batch_size;
  t.buffer_capacity = buffer_capacity;
  t.warmup_steps = warmup_steps;
  t.max_episode_steps = max_episode_steps;
  t.target_entropy_scale = target_entropy_scale;
  t.lr_policy = lr_policy;
  t.lr_critic = lr_critic;
  t.lr_alpha = lr_alpha;
  t.target_sync_interval = target_sync_interval;
  t.iterations_per_episode = iterations_per_episode;
  t.num_envs = num_envs;
  t.seed = seed;
  t.alpha_init = alpha_init;
  t.twin_q = twin_q != 0;
  t.total_env_steps = total_env_steps;
  t.checkpoint_interval_rounds = checkpoint_interval_rounds;
  t.threads = threads;
  return t;
}

double RunConfig::resolved_utility_norm() const {
  return utility_norm > 0.0 ? utility_norm : 4.0 * sensor_range;
}

std::vector<uint64_t> RunConfig::eval_seed_list() const {
  std::vector<uint64_t> out;
  std::istringstream ss(eval_seeds);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoull(item));
  }
  return out;
}

void RunConfig::validate() const {
  check(gamma > 0.0 && gamma <= 1.0, "gamma", "must be in (0, 1]");
  check(batch_size > 0, "batch_size", "must be positive");
  check(buffer_capacity > 0, "buffer_capacity", "must be positive");
  check(warmup_steps > 0, "warmup_steps", "must be positive");
  check(max_episode_steps > 0, "max_episode_steps", "must be positive");
  check(target_entropy_scale > 0.0, "target_entropy_scale", "must be positive");
  check(lr_policy > 0.0, "lr_policy", "must be positive");
  check(lr_critic > 0.0, "lr_critic", "must be positive");
  check(lr_alpha > 0.0, "lr_alpha", "must be positive");
  check(target_sync_interval > 0, "target_sync_interval", "must be positive");
  check(iterations_per_episode > 0, "iterations_per_episode", "must be positive");
  check(num_envs > 0, "num_envs", "must be positive");
  check(alpha_init > 0.0, "alpha_init", "must be positive");
  check(twin_q == 0 || twin_q == 1, "twin_q", "must be 0 or 1");
  check(total_env_steps > 0, "total_env_steps", "must be positive");
  check(threads >= 0, "threads", "must be >= 0");
  check(d_model > 0 && heads > 0 && d_model % heads == 0, "d_model",
        "must be positive and divisible by heads");
  check(encoder_layers > 0, "encoder_layers", "must be positive");
  check(ff_mult > 0, "ff_mult", "must be positive");
  check(pointer_clip > 0.0, "pointer_clip", "must be positive");
  check(utility_norm >= 0.0, "utility_norm", "must be >= 0");
  check(map_width >= 32 && map_height >= 32, "map_width", "map dimensions must be >= 32");
  check(sensor_range > 0, "sensor_range", "must be positive");
  check(lattice_dim >= 2, "lattice_dim", "must be >= 2");
  check(knn > 0, "knn", "must be positive");
  check(utility_threshold >= 0.0, "utility_threshold", "must be >= 0");
  check(visit_radius >= 0.0, "visit_radius", "must be >= 0");
  check(eval_episode_cap > 0, "eval_episode_cap", "must be positive");
  check(eval_completion == "coverage99" || eval_completion == "zero_utility", "eval_completion",
        "must be coverage99 or zero_utility");
  check(planner_utility_threshold >= 0.0, "planner_utility_threshold", "must be >= 0");
  check(utility_lambda >= 0.0, "utility_lambda", "must be >= 0");
  check(rarefy == 0 || rarefy == 1, "rarefy", "must be 0 or 1");
  check(d_th_lattice > 0.0, "d_th_lattice", "must be positive");
  check(sparse_knn > 0, "sparse_knn", "must be positive");
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) {
    out << key << " = " << field.get(*this) << '\n';
  }
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, const Field*> by_key;
  for (const auto& [key, field] : fields()) by_key.emplace(key, &field);

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const size_t b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key = strip(stripped.substr(0, eq));
    const std::string value = strip(stripped.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw std::runtime_error("config: unknown key " + key);
    it->second->set(cfg, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << serialize();
}

}  // namespace explorer
