#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "explorer/grid.hpp"
#include "explorer/rng.hpp"

using namespace explorer;

TEST_CASE("generate_map rejects dimensions below minimum") {
  CHECK_THROWS_AS(generate_map(1, 31, 64), std::invalid_argument);
  CHECK_THROWS_AS(generate_map(1, 64, 16), std::invalid_argument);
}

TEST_CASE("generate_map is deterministic for a fixed seed") {
  const GroundTruthMap a = generate_map(7, 96, 64);
  const GroundTruthMap b = generate_map(7, 96, 64);
  CHECK(a == b);
}

TEST_CASE("generated maps have the right shape and seed") {
  const GroundTruthMap m = generate_map(7, 640, 480);
  CHECK(m.width() == 640);
  CHECK(m.height() == 480);
  CHECK(m.seed() == 7);
}

TEST_CASE("free region is 4-connected and free fraction in range") {
  // Flood-fill oracle over a spread of sizes and seeds.
  const int dims[][2] = {{32, 32}, {64, 48}, {128, 96}, {160, 120}, {320, 240}, {640, 480}};
  for (const auto& d : dims) {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      const GroundTruthMap m = generate_map(seed, d[0], d[1]);
      CHECK(free_region_connected(m));
      const double frac = static_cast<double>(m.free_count()) / (d[0] * d[1]);
      CHECK(frac >= 0.15);
      CHECK(frac <= 0.6);
    }
  }
}

TEST_CASE("boundary ring is occupied") {
  const GroundTruthMap m = generate_map(3, 80, 64);
  for (int x = 0; x < m.width(); ++x) {
    CHECK(m.at(x, 0) == Cell::Occupied);
    CHECK(m.at(x, m.height() - 1) == Cell::Occupied);
  }
  for (int y = 0; y < m.height(); ++y) {
    CHECK(m.at(0, y) == Cell::Occupied);
    CHECK(m.at(m.width() - 1, y) == Cell::Occupied);
  }
}

TEST_CASE("map text format round-trips bit-exactly") {
  const GroundTruthMap m = generate_map(42, 64, 48);
  std::ostringstream out;
  save_map(m, out);
  std::istringstream in(out.str());
  const GroundTruthMap back = load_map(in);
  CHECK(back == m);

  std::ostringstream out2;
  save_map(back, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("load_map rejects malformed input") {
  std::istringstream bad_header("x y z\n");
  CHECK_THROWS(load_map(bad_header));
  std::istringstream truncated("4 4 1\n####\n#..#\n");
  CHECK_THROWS(load_map(truncated));
  std::istringstream bad_char("4 2 1\n####\n#ab#\n");
  CHECK_THROWS(load_map(bad_char));
}
