#ifndef WULFF_TESTS_HELPERS_HPP_
#define WULFF_TESTS_HELPERS_HPP_

#include <random>

#include "wulff/grid.hpp"

namespace testutil {

// Union of a few random disks near the center of the grid.
inline wulff::SetMask random_blob(const wulff::GridGeometry& g, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.35 * scale, 0.35 * scale);
  std::uniform_real_distribution<double> rad(0.15 * scale, 0.4 * scale);
  std::vector<std::pair<wulff::Vec2, double>> disks;
  const int n = 2 + static_cast<int>(rng() % 3);
  for (int k = 0; k < n; ++k) disks.push_back({{pos(rng), pos(rng)}, rad(rng)});
  return wulff::mask_from(g, [&](wulff::Vec2 x) {
    for (const auto& [c, r] : disks) {
      if ((x - c).norm() <= r) return true;
    }
    return false;
  });
}

}  // namespace testutil

#endif  // WULFF_TESTS_HELPERS_HPP_
