#pragma once

#include <string>

namespace explorer {

// Renders an episode log (final belief, trajectory overlay, optional
// per-head decoder attention circles) to a binary PPM. Deterministic: the
// same log yields identical bytes. Throws on malformed logs or when a head's
// attention weights do not sum to 1.
void render_episode_log(const std::string& log_path, const std::string& out_path,
                        bool draw_attention);

}  // namespace explorer
