#pragma once

#include <vector>

#include "explorer/env.hpp"
#include "explorer/model.hpp"
#include "explorer/replay.hpp"

namespace explorer {

struct EpisodeResult {
  std::vector<Transition> transitions;
  double reward_sum = 0.0;
  int length = 0;
  bool completed = false;  // environment-terminal (not the step cap)
  bool aborted = false;    // robot ended with no neighbors
};

// Samples an action index from probabilities (argmax for greedy evaluation;
// ties go to the lowest index).
int select_action(const Matrix& probs, Rng& rng, bool argmax);

// Runs one episode of up to max_steps decisions on an already-reset
// environment, snapshotting both graph views per step. done marks
// environment completion; cap-truncated episodes bootstrap (done stays
// false). A robot with no neighbors aborts the episode.
EpisodeResult collect_episode(const NetworkParams& policy, Environment& env, Rng& rng,
                              int max_steps, double utility_norm, bool argmax = false);

}  // namespace explorer
