#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "occugrid/geometry.hpp"
#include "occugrid/occupancy_grid.hpp"

namespace occugrid {

struct VoxelCountGrid {
  std::array<int, 3> dims{};
  std::vector<std::uint32_t> counts;  // X*Y*Z, x slowest

  std::size_t flat_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
  std::uint32_t at(int i, int j, int k) const { return counts[flat_index(i, j, k)]; }
};

inline VoxelCountGrid voxelize_points(const VoxelGridSpec& spec,
                                      const PointCloud& cloud) {
  spec.validate();
  VoxelCountGrid g;
  g.dims = spec.dims;
  g.counts.assign(spec.cell_count(), 0);
  for (const Vec3& p : cloud.points) {
    auto idx = voxel_index_of(spec, p);
    if (idx) ++g.counts[g.flat_index((*idx)[0], (*idx)[1], (*idx)[2])];
  }
  return g;
}

// Parametric (Amanatides-Woo) traversal of the clipped segment [from, to].
// A cell is reported only when the segment spends more than the tie slack
// inside it, so face-grazing contacts stay out.
inline std::vector<std::array<int, 3>> traverse_ray(const VoxelGridSpec& spec,
                                                    const Vec3& from,
                                                    const Vec3& to) {
  constexpr double kTieSlack = 1e-12;
  spec.validate();
  auto clipped = clip_segment_to_grid(spec, from, to);
  if (!clipped) return {};

  const Vec3 dir = to - from;
  const double t_end = clipped->t_exit;
  double t = clipped->t_enter;

  std::array<int, 3> cur;
  std::array<int, 3> step{};
  Vec3 t_max{}, t_delta{};
  const double inf = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    double f = std::floor((clipped->a[k] - spec.origin[k]) / spec.voxel_size[k]);
    cur[k] = std::clamp(static_cast<int>(f), 0, spec.dims[k] - 1);
    if (dir[k] > 0.0) {
      step[k] = 1;
      t_delta[k] = spec.voxel_size[k] / dir[k];
      t_max[k] = (spec.origin[k] + (cur[k] + 1) * spec.voxel_size[k] - from[k]) / dir[k];
    } else if (dir[k] < 0.0) {
      step[k] = -1;
      t_delta[k] = -spec.voxel_size[k] / dir[k];
      t_max[k] = (spec.origin[k] + cur[k] * spec.voxel_size[k] - from[k]) / dir[k];
    } else {
      step[k] = 0;
      t_delta[k] = inf;
      t_max[k] = inf;
    }
  }

  std::vector<std::array<int, 3>> visited;
  visited.push_back(cur);
  for (;;) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (!(t_max[axis] < t_end - kTieSlack)) break;
    cur[axis] += step[axis];
    if (cur[axis] < 0 || cur[axis] >= spec.dims[axis]) break;
    t = t_max[axis];
    t_max[axis] += t_delta[axis];
    visited.push_back(cur);
  }
  (void)t;
  return visited;
}

// Rays carve free space from each point toward the camera, excluding the
// voxel holding the point itself. Status merge is max over {-1, 0, 1}, so
// occupied (applied last from the counts) always wins.
inline OccupancyLabelGrid generate_voxel_labels(const VoxelGridSpec& spec,
                                                const PointCloud& cloud,
                                                const Vec3& cam_origin_lidar,
                                                int threads = 1) {
  spec.validate();
  if (threads < 1) threads = 1;

  std::vector<std::uint8_t> free_mask(spec.cell_count(), 0);
  auto carve_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const Vec3& p = cloud.points[n];
      auto source = voxel_index_of(spec, p);
      for (const auto& cell : traverse_ray(spec, p, cam_origin_lidar)) {
        if (source && cell == *source) continue;
        std::size_t fi = (static_cast<std::size_t>(cell[0]) * spec.dims[1] + cell[1]) *
                             spec.dims[2] + cell[2];
        std::atomic_ref<std::uint8_t>(free_mask[fi]).store(1, std::memory_order_relaxed);
      }
    }
  };

  const std::size_t n = cloud.size();
  if (threads == 1 || n < 2) {
    carve_range(0, n);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (int tix = 0; tix < threads; ++tix) {
      std::size_t begin = std::min(n, tix * chunk);
      std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(carve_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  auto counts = voxelize_points(spec, cloud);
  auto grid = OccupancyLabelGrid::unknown(Space::VOXEL, spec.dims);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    if (counts.counts[i] > 0)
      grid.values[i] = kOccupied;
    else if (free_mask[i])
      grid.values[i] = kFree;
  }
  return grid;
}

}  // namespace occugrid
