#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "occugrid/geometry.hpp"

namespace occugrid {

// H_F x W_F x D (x C) real values over a frustum grid, row slowest.
struct FrustumField {
  FrustumGridSpec spec;
  int channels = 1;
  std::vector<double> values;  // height*width*depth_bins*channels

  std::size_t flat_index(int row, int col, int bin, int ch = 0) const {
    return ((static_cast<std::size_t>(row) * spec.width + col) * spec.depth_bins +
            bin) * channels + ch;
  }
  double at(int row, int col, int bin, int ch = 0) const {
    return values[flat_index(row, col, bin, ch)];
  }
  double& at(int row, int col, int bin, int ch = 0) {
    return values[flat_index(row, col, bin, ch)];
  }

  static FrustumField zeros(const FrustumGridSpec& spec, int channels = 1) {
    FrustumField f;
    f.spec = spec;
    f.channels = channels;
    f.values.assign(static_cast<std::size_t>(spec.height) * spec.width *
                        spec.depth_bins * channels, 0.0);
    return f;
  }
};

// Continuous depth-bin coordinate: piecewise linear between bin centers, so
// integer b lands exactly on the center of bin b.
inline double depth_to_continuous_bin(const FrustumGridSpec& spec, double depth) {
  if (spec.depth_bins == 1) return 0.0;
  auto binned = depth_to_bin(spec, depth);
  int b = binned ? *binned : (depth < spec.depth_min ? 0 : spec.depth_bins - 1);
  int lo = b, hi = b + 1;
  if (depth < bin_to_depth(spec, b) || hi >= spec.depth_bins) {
    lo = std::max(0, b - 1);
    hi = lo + 1;
  }
  double c_lo = bin_to_depth(spec, lo);
  double c_hi = bin_to_depth(spec, hi);
  return lo + (depth - c_lo) / (c_hi - c_lo);
}

struct FrustumCoord {
  double col = 0.0;
  double row = 0.0;
  double bin = 0.0;
  bool valid = false;
};

struct VoxelFrustumCoords {
  std::array<int, 3> dims{};  // X, Y, Z
  std::vector<FrustumCoord> coords;  // x slowest

  const FrustumCoord& at(int x, int y, int z) const {
    return coords[(static_cast<std::size_t>(x) * dims[1] + y) * dims[2] + z];
  }
};

// Project every voxel center into the frustum grid: image plane over stride s
// for (col, row), continuous bin coordinate for depth. Invalid when behind
// the camera, off the image, or outside the depth range.
inline VoxelFrustumCoords voxel_to_frustum_coords(const Calibration& calib,
                                                  const FrustumGridSpec& fspec,
                                                  const VoxelGridSpec& vspec) {
  fspec.validate();
  vspec.validate();
  calib.validate();

  VoxelFrustumCoords out;
  out.dims = vspec.dims;
  out.coords.resize(vspec.cell_count());

  Mat44 m = matmul(calib.rect, calib.lidar_to_cam);
  const int iw = fspec.image_width();
  const int ih = fspec.image_height();
  std::size_t n = 0;
  for (int x = 0; x < vspec.dims[0]; ++x)
    for (int y = 0; y < vspec.dims[1]; ++y)
      for (int z = 0; z < vspec.dims[2]; ++z, ++n) {
        Vec3 cam = apply_rigid(m, vspec.voxel_center(x, y, z));
        FrustumCoord& fc = out.coords[n];
        const Mat34& k = calib.intrinsic;
        double hu = k[0][0] * cam[0] + k[0][1] * cam[1] + k[0][2] * cam[2] + k[0][3];
        double hv = k[1][0] * cam[0] + k[1][1] * cam[1] + k[1][2] * cam[2] + k[1][3];
        double hw = k[2][0] * cam[0] + k[2][1] * cam[1] + k[2][2] * cam[2] + k[2][3];
        if (!(hw > 0.0) || !(cam[2] > 0.0)) continue;
        double u = hu / hw;
        double v = hv / hw;
        double d = cam[2];
        if (u < 0.0 || u >= iw || v < 0.0 || v >= ih) continue;
        if (d < fspec.depth_min || d >= fspec.depth_max) continue;
        fc.col = u / fspec.downsample;
        fc.row = v / fspec.downsample;
        fc.bin = depth_to_continuous_bin(fspec, d);
        fc.valid = true;
      }
  return out;
}

// Trilinear sample over (col, row, bin); clamp-to-edge borders; invalid
// coordinates produce exactly 0.
inline std::vector<double> sample_frustum_to_voxel(const FrustumField& field,
                                                   const VoxelFrustumCoords& coords) {
  const FrustumGridSpec& spec = field.spec;
  const int C = field.channels;
  if (field.values.size() != static_cast<std::size_t>(spec.height) * spec.width *
                                 spec.depth_bins * C)
    throw ArgumentError("sample_frustum_to_voxel: field shape mismatch");
  std::vector<double> out(coords.coords.size() * C, 0.0);

  auto clamped = [](double f, int lo, int hi) { return std::clamp(f, double(lo), double(hi)); };

  for (std::size_t n = 0; n < coords.coords.size(); ++n) {
    const FrustumCoord& fc = coords.coords[n];
    if (!fc.valid) continue;

    double cc = clamped(fc.col, 0, spec.width - 1);
    double rr = clamped(fc.row, 0, spec.height - 1);
    double bb = clamped(fc.bin, 0, spec.depth_bins - 1);
    int c0 = std::min(static_cast<int>(cc), spec.width - 1);
    int r0 = std::min(static_cast<int>(rr), spec.height - 1);
    int b0 = std::min(static_cast<int>(bb), spec.depth_bins - 1);
    int c1 = std::min(c0 + 1, spec.width - 1);
    int r1 = std::min(r0 + 1, spec.height - 1);
    int b1 = std::min(b0 + 1, spec.depth_bins - 1);
    double fc_ = cc - c0, fr = rr - r0, fb = bb - b0;

    for (int ch = 0; ch < C; ++ch) {
      double v000 = field.at(r0, c0, b0, ch), v001 = field.at(r0, c0, b1, ch);
      double v010 = field.at(r0, c1, b0, ch), v011 = field.at(r0, c1, b1, ch);
      double v100 = field.at(r1, c0, b0, ch), v101 = field.at(r1, c0, b1, ch);
      double v110 = field.at(r1, c1, b0, ch), v111 = field.at(r1, c1, b1, ch);
      double v00 = v000 * (1 - fb) + v001 * fb;
      double v01 = v010 * (1 - fb) + v011 * fb;
      double v10 = v100 * (1 - fb) + v101 * fb;
      double v11 = v110 * (1 - fb) + v111 * fb;
      double v0 = v00 * (1 - fc_) + v01 * fc_;
      double v1 = v10 * (1 - fc_) + v11 * fc_;
      out[n * C + ch] = v0 * (1 - fr) + v1 * fr;
    }
  }
  return out;
}

}  // namespace occugrid
