#include "explorer/replay.hpp"

#include <numeric>
#include <stdexcept>

namespace explorer {

std::vector<const Transition*> ReplayBuffer::sample(Rng& rng, int batch) const {
  if (batch <= 0 || static_cast<size_t>(batch) > data_.size()) {
    throw std::invalid_argument("ReplayBuffer::sample: bad batch size");
  }
  std::vector<int> idx(data_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Transition*> out;
  out.reserve(batch);
  // Partial Fisher-Yates: first `batch` draws are uniform without replacement.
  for (int i = 0; i < batch; ++i) {
    const int j = i + rng.uniform_int(static_cast<int>(idx.size()) - i);
    std::swap(idx[i], idx[j]);
    out.push_back(&data_[idx[i]]);
  }
  return out;
}

}  // namespace explorer
