#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "explorer/config.hpp"
#include "explorer/evalrun.hpp"
#include "explorer/render.hpp"
#include "explorer/rollout.hpp"
#include "explorer/sac.hpp"

namespace fs = std::filesystem;
using namespace explorer;

namespace {

RunConfig load_config_or_default(const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig() : RunConfig::load(path);
  cfg.validate();
  return cfg;
}

int cmd_generate(int n, uint64_t seed, int width, int height, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream manifest(out_dir + "/manifest.txt", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + out_dir);
  for (int i = 0; i < n; ++i) {
    const uint64_t map_seed = seed + static_cast<uint64_t>(i);
    const GroundTruthMap map = generate_map(map_seed, width, height);
    char name[48];
    std::snprintf(name, sizeof(name), "map_%llu.txt", static_cast<unsigned long long>(map_seed));
    save_map(map, out_dir + "/" + name);
    manifest << name << ' ' << map_seed << '\n';
  }
  std::cout << "wrote " << n << " maps to " << out_dir << "\n";
  return 0;
}

std::vector<GroundTruthMap> load_map_set(const std::string& maps_dir) {
  std::vector<GroundTruthMap> maps;
  std::ifstream manifest(maps_dir + "/manifest.txt");
  if (!manifest) throw std::runtime_error("no manifest.txt in " + maps_dir);
  std::string name;
  uint64_t seed;
  while (manifest >> name >> seed) {
    maps.push_back(load_map(maps_dir + "/" + name));
  }
  if (maps.empty()) throw std::runtime_error("manifest lists no maps: " + maps_dir);
  return maps;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& mode_str, const std::string& resume) {
  const RunConfig cfg = load_config_or_default(config_path);
  const CriticMode mode = mode_str == "ablation" ? CriticMode::Ablation : CriticMode::Privileged;

  SacTrainer trainer(cfg.trainer_config(), cfg.env_config(), cfg.model_config(), mode,
                     cfg.resolved_utility_norm());
  if (!resume.empty()) trainer.load_checkpoint(resume);

  const int w = cfg.map_width, h = cfg.map_height;
  const uint64_t seed = cfg.seed;
  const MapSource maps = [w, h, seed](uint64_t episode) {
    return std::make_shared<const GroundTruthMap>(
        generate_map(mix_seed(seed, 0x3A9D0000ULL + episode), w, h));
  };
  fs::create_directories(out_dir);
  cfg.save(out_dir + "/config.txt");
  trainer.train(maps, out_dir);
  std::cout << "trained " << trainer.env_steps() << " env steps over " << trainer.episodes()
            << " episodes (" << trainer.updates() << " updates); checkpoints in " << out_dir
            << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& planner,
             const std::string& checkpoint, const std::string& maps_dir, bool rarefy_flag,
             const std::string& out_csv, const std::string& log_dir, bool dump_attention) {
  RunConfig cfg = load_config_or_default(config_path);
  if (rarefy_flag) cfg.rarefy = 1;
  const PlannerKind kind = planner_from_string(planner);

  std::unique_ptr<NetworkParams> policy;
  if (kind == PlannerKind::Drl) {
    if (checkpoint.empty()) throw std::runtime_error("--checkpoint is required for drl");
    policy = std::make_unique<NetworkParams>(load_policy_from_checkpoint(checkpoint));
  }

  const std::vector<GroundTruthMap> maps = load_map_set(maps_dir);
  std::optional<EpisodeLogRequest> log;
  if (!log_dir.empty()) log = EpisodeLogRequest{log_dir, dump_attention};

  const auto records = run_eval(kind, maps, cfg, policy.get(), log);
  write_eval_csv(records, out_csv);
  const EvalSummary s = summarize(records);
  std::cout << planner << ": distance " << s.distance_cell() << " over " << s.total << " maps, "
            << s.completed << " completed\n";
  return 0;
}

int cmd_render(const std::string& log_path, const std::string& out_path, bool attention) {
  render_episode_log(log_path, out_path, attention);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D grid-world autonomous exploration: training, evaluation, rendering"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a benchmark map set");
  int gen_n = 100, gen_w = 640, gen_h = 480;
  uint64_t gen_seed = 1;
  std::string gen_out = "maps";
  gen->add_option("--n", gen_n, "Number of maps");
  gen->add_option("--seed", gen_seed, "First map seed");
  gen->add_option("--width", gen_w, "Map width (cells)");
  gen->add_option("--height", gen_h, "Map height (cells)");
  gen->add_option("--out", gen_out, "Output directory");

  // train
  auto* train = app.add_subcommand("train", "Train the attention policy with discrete SAC");
  std::string train_config, train_out = "run", train_mode = "privileged", train_resume;
  train->add_option("--config", train_config, "Run config file");
  train->add_option("--out-dir", train_out, "Output directory");
  train->add_option("--mode", train_mode, "privileged|ablation")
      ->check(CLI::IsMember({"privileged", "ablation"}));
  train->add_option("--resume", train_resume, "Checkpoint directory to resume from");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a planner over a map set");
  std::string eval_config, eval_planner = "drl", eval_ckpt, eval_maps = "maps",
              eval_out = "eval.csv", eval_log;
  bool eval_rarefy = false, eval_attention = false;
  eval->add_option("--config", eval_config, "Run config file");
  eval->add_option("--planner", eval_planner, "drl|nearest|utility|random")
      ->check(CLI::IsMember({"drl", "nearest", "utility", "random"}));
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint directory (drl)");
  eval->add_option("--maps", eval_maps, "Map set directory (with manifest.txt)");
  eval->add_flag("--rarefy", eval_rarefy, "Rarefy the informative graph before each decision");
  eval->add_option("--out", eval_out, "Output CSV path");
  eval->add_option("--log-dir", eval_log, "Write per-map episode logs here");
  eval->add_flag("--dump-attention", eval_attention, "Include decoder attention in episode logs");

  // render
  auto* render = app.add_subcommand("render", "Render an episode log to a PPM image");
  std::string render_log, render_out = "episode.ppm";
  bool render_attention = false;
  render->add_option("--episode-log", render_log, "Episode log file")->required();
  render->add_option("--out", render_out, "Output image path");
  render->add_flag("--attention", render_attention, "Overlay decoder attention weights");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_n, gen_seed, gen_w, gen_h, gen_out);
    if (train->parsed()) return cmd_train(train_config, train_out, train_mode, train_resume);
    if (eval->parsed()) {
      return cmd_eval(eval_config, eval_planner, eval_ckpt, eval_maps, eval_rarefy, eval_out,
                      eval_log, eval_attention);
    }
    if (render->parsed()) return cmd_render(render_log, render_out, render_attention);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
