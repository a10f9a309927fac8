#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "explorer/config.hpp"
#include "explorer/env.hpp"
#include "explorer/model.hpp"

namespace explorer {

enum class PlannerKind { Drl, Nearest, Utility, Random };

PlannerKind planner_from_string(const std::string& name);
std::string planner_name(PlannerKind kind);

struct EvalRecord {
  std::string planner;
  uint64_t map_seed = 0;
  double distance = 0.0;  // cells traveled (at completion or at the cap)
  int decisions = 0;
  double coverage = 0.0;
  double ms_per_decision = 0.0;  // wall clock; written to the timing sidecar
};

struct EvalSummary {
  double mean_distance = 0.0;
  double std_distance = 0.0;
  int completed = 0;
  int total = 0;
  // Table-style "mean(±std)" row.
  std::string distance_cell() const;
};

struct EpisodeLogRequest {
  std::string directory;     // one log file per map
  bool dump_attention = false;
};

// Runs one planner over the given maps; identical (map, start) pairs across
// planners for a fixed RunConfig. policy may be null for classical planners.
std::vector<EvalRecord> run_eval(PlannerKind kind, const std::vector<GroundTruthMap>& maps,
                                 const RunConfig& config, const NetworkParams* policy,
                                 const std::optional<EpisodeLogRequest>& log = std::nullopt);

EvalSummary summarize(const std::vector<EvalRecord>& records);

// Deterministic CSV (planner,map_seed,distance,decisions,coverage); the
// nondeterministic per-decision timing goes to <path>.timing.csv.
void write_eval_csv(const std::vector<EvalRecord>& records, const std::string& path);

}  // namespace explorer
