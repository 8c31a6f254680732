#pragma once

#include <limits>
#include <vector>

#include "occugrid/geometry.hpp"
#include "occugrid/occupancy_grid.hpp"

namespace occugrid {

// Project every point at full image resolution keeping the per-pixel minimum
// depth, reduce each s x s block to its minimum valid depth, then bin.
// Pixels without a valid in-range point get -1.
inline IndexMap build_index_map(const Calibration& calib, const PointCloud& cloud,
                                const FrustumGridSpec& spec) {
  spec.validate();
  calib.validate();

  const int iw = spec.image_width();
  const int ih = spec.image_height();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> min_depth(static_cast<std::size_t>(iw) * ih, inf);

  auto cam = lidar_to_camera(calib, cloud);
  auto proj = project_to_image(calib, cam, iw, ih);
  for (const ImagePoint& ip : proj) {
    if (!ip.valid) continue;
    int u = static_cast<int>(ip.u);
    int v = static_cast<int>(ip.v);
    double& d = min_depth[static_cast<std::size_t>(v) * iw + u];
    if (ip.depth < d) d = ip.depth;
  }

  IndexMap ind;
  ind.height = spec.height;
  ind.width = spec.width;
  ind.grid.assign(static_cast<std::size_t>(spec.height) * spec.width, -1);
  const int s = spec.downsample;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      double block_min = inf;
      for (int dv = 0; dv < s; ++dv)
        for (int du = 0; du < s; ++du) {
          double d = min_depth[static_cast<std::size_t>(r * s + dv) * iw + c * s + du];
          if (d < block_min) block_min = d;
        }
      if (block_min == inf) continue;
      auto bin = depth_to_bin(spec, block_min);
      if (bin) ind.at(r, c) = *bin;
    }
  }
  return ind;
}

// Along each valid pixel ray: free before the surface bin, occupied at it,
// unknown behind; invalid pixels are fully unknown.
inline OccupancyLabelGrid generate_frustum_labels(const IndexMap& ind,
                                                  const FrustumGridSpec& spec) {
  spec.validate();
  if (ind.height != spec.height || ind.width != spec.width)
    throw ArgumentError("generate_frustum_labels: index map shape mismatch");

  auto grid = OccupancyLabelGrid::unknown(
      Space::FRUSTUM, {spec.height, spec.width, spec.depth_bins});
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) {
      int surface = ind.at(r, c);
      if (surface < 0) continue;
      for (int d = 0; d < surface; ++d) grid.at(r, c, d) = kFree;
      grid.at(r, c, surface) = kOccupied;
    }
  return grid;
}

}  // namespace occugrid
