#pragma once

#include <deque>
#include <memory>
#include <vector>

#include "explorer/graph.hpp"
#include "explorer/rng.hpp"

namespace explorer {

// One replay record. Graph snapshots are shared between consecutive
// transitions of an episode (next of t is obs of t+1). The neighbor lists
// give the action set at each step, aligned between the observation graph
// and the ground-truth graph.
struct Transition {
  std::shared_ptr<const InformativeGraph> obs;
  std::shared_ptr<const GroundTruthGraph> gt;
  std::shared_ptr<const InformativeGraph> next_obs;
  std::shared_ptr<const GroundTruthGraph> next_gt;
  int action = 0;  // index into the neighbor lists
  double reward = 0.0;
  bool done = false;
  std::vector<int> obs_neighbors;
  std::vector<int> gt_neighbors;
  std::vector<int> next_obs_neighbors;
  std::vector<int> next_gt_neighbors;
};

// FIFO buffer with uniform without-replacement batch sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    if (data_.size() == capacity_) data_.pop_front();
    data_.push_back(std::move(t));
  }

  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return data_[i]; }

  std::vector<const Transition*> sample(Rng& rng, int batch) const;

 private:
  size_t capacity_;
  std::deque<Transition> data_;
};

}  // namespace explorer
