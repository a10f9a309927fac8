#include "explorer/render.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "explorer/grid.hpp"
#include "explorer/visibility.hpp"

namespace explorer {

namespace {

constexpr int kScale = 3;

struct Image {
  int w = 0, h = 0;
  std::vector<uint8_t> px;  // rgb

  Image(int width, int height) : w(width), h(height), px(static_cast<size_t>(w) * h * 3, 0) {}

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const size_t i = (static_cast<size_t>(y) * w + x) * 3;
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }

  void fill_cell(int cx, int cy, uint8_t r, uint8_t g, uint8_t b) {
    for (int dy = 0; dy < kScale; ++dy) {
      for (int dx = 0; dx < kScale; ++dx) set(cx * kScale + dx, cy * kScale + dy, r, g, b);
    }
  }

  void circle(int cx, int cy, double radius, uint8_t r, uint8_t g, uint8_t b) {
    const int lo = static_cast<int>(std::floor(radius)) + 1;
    for (int dy = -lo; dy <= lo; ++dy) {
      for (int dx = -lo; dx <= lo; ++dx) {
        const double d = std::sqrt(static_cast<double>(dx * dx + dy * dy));
        if (d <= radius && d >= radius - 1.5) set(cx + dx, cy + dy, r, g, b);
      }
    }
  }
};

}  // namespace

void render_episode_log(const std::string& log_path, const std::string& out_path,
                        bool draw_attention) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open episode log: " + log_path);

  std::string tag;
  int w = 0, h = 0;
  if (!(in >> tag >> w >> h) || tag != "map" || w <= 0 || h <= 0) {
    throw std::runtime_error("episode log: bad map header");
  }
  if (!(in >> tag) || tag != "belief") throw std::runtime_error("episode log: missing belief");
  in.ignore();
  BeliefMap belief(w, h);
  std::string line;
  for (int y = 0; y < h; ++y) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) < w) {
      throw std::runtime_error("episode log: belief row truncated");
    }
    for (int x = 0; x < w; ++x) {
      belief.set(x, y, line[x] == '.' ? Cell::Free : line[x] == '#' ? Cell::Occupied : Cell::Unknown);
    }
  }
  size_t traj_len = 0;
  if (!(in >> tag >> traj_len) || tag != "trajectory") {
    throw std::runtime_error("episode log: missing trajectory");
  }
  std::vector<Coord> traj(traj_len);
  for (auto& c : traj) {
    if (!(in >> c.x >> c.y)) throw std::runtime_error("episode log: trajectory truncated");
  }

  int n_heads = 0;
  size_t n_nodes = 0;
  std::vector<Coord> att_nodes;
  std::vector<std::vector<double>> att;  // [head][node]
  if (in >> tag && tag == "attention") {
    if (!(in >> n_heads >> n_nodes)) throw std::runtime_error("episode log: bad attention header");
    att.assign(n_heads, std::vector<double>(n_nodes, 0.0));
    att_nodes.resize(n_nodes);
    for (size_t i = 0; i < n_nodes; ++i) {
      if (!(in >> att_nodes[i].x >> att_nodes[i].y)) {
        throw std::runtime_error("episode log: attention row truncated");
      }
      for (int hh = 0; hh < n_heads; ++hh) {
        if (!(in >> att[hh][i])) throw std::runtime_error("episode log: attention weight missing");
      }
    }
    for (int hh = 0; hh < n_heads; ++hh) {
      double s = 0.0;
      for (const double v : att[hh]) s += v;
      if (std::abs(s - 1.0) > 1e-6) {
        throw std::runtime_error("episode log: attention head " + std::to_string(hh) +
                                 " weights sum to " + std::to_string(s));
      }
    }
  }

  Image img(w * kScale, h * kScale);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      switch (belief.at(x, y)) {
        case Cell::Free: img.fill_cell(x, y, 245, 245, 245); break;
        case Cell::Occupied: img.fill_cell(x, y, 30, 30, 30); break;
        case Cell::Unknown: img.fill_cell(x, y, 140, 140, 140); break;
      }
    }
  }

  if (draw_attention && !att.empty()) {
    static constexpr std::array<std::array<uint8_t, 3>, 3> colors = {
        {{230, 120, 20}, {20, 150, 230}, {150, 30, 200}}};
    const int shown = std::min<int>(n_heads, 3);
    for (int hh = 0; hh < shown; ++hh) {
      for (size_t i = 0; i < n_nodes; ++i) {
        const double radius = std::sqrt(att[hh][i]) * 10.0 * kScale;
        if (radius < 1.0) continue;
        img.circle(att_nodes[i].x * kScale + kScale / 2, att_nodes[i].y * kScale + kScale / 2,
                   radius, colors[hh][0], colors[hh][1], colors[hh][2]);
      }
    }
  }

  for (size_t i = 0; i + 1 < traj.size(); ++i) {
    trace_segment(traj[i], traj[i + 1],
                  [&](Coord c) { img.fill_cell(c.x, c.y, 200, 40, 40); });
  }
  if (!traj.empty()) {
    img.fill_cell(traj.front().x, traj.front().y, 40, 170, 60);
    img.fill_cell(traj.back().x, traj.back().y, 40, 60, 200);
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + out_path);
  out << "P6\n" << img.w << ' ' << img.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
}

}  // namespace explorer
