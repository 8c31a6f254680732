#pragma once

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "occugrid/geometry.hpp"
#include "occugrid/io_formats.hpp"
#include "occugrid/occupancy_grid.hpp"

namespace occugrid {

// Axis-aligned slab; points are sampled on the camera-facing face of its
// thinnest axis.
struct Slab {
  Vec3 min{};
  Vec3 max{};
  double density = 100.0;  // points per square meter
};

struct SyntheticScene {
  std::vector<Slab> slabs;
  Vec3 camera{0.0, 0.0, 0.0};  // camera center, LiDAR frame
  std::uint64_t seed = 0;
  double focal = 560.0;
  int image_width = 1280;
  int image_height = 384;
};

inline SyntheticScene scene_from_config(const Config& cfg) {
  SyntheticScene s;
  if (cfg.has("scene.camera")) s.camera = cfg.get_vec3("scene.camera");
  if (cfg.has("scene.seed")) s.seed = static_cast<std::uint64_t>(cfg.get_int("scene.seed"));
  if (cfg.has("scene.focal")) s.focal = cfg.get_double("scene.focal");
  if (cfg.has("scene.image_width")) s.image_width = cfg.get_int("scene.image_width");
  if (cfg.has("scene.image_height")) s.image_height = cfg.get_int("scene.image_height");
  auto it = cfg.entries.find("scene.slab");
  if (it != cfg.entries.end()) {
    for (const std::string& line : it->second) {
      std::istringstream iss(line);
      Slab sl;
      if (!(iss >> sl.min[0] >> sl.min[1] >> sl.min[2] >> sl.max[0] >> sl.max[1] >>
            sl.max[2] >> sl.density))
        throw ParseError("config: scene.slab needs 7 numbers");
      if (!(sl.density > 0.0)) throw ParseError("config: scene.slab density must be > 0");
      s.slabs.push_back(sl);
    }
  }
  return s;
}

namespace detail {

// scalar slab test: does segment [a,b] hit the box strictly before t_hi?
inline bool segment_hits_box(const Vec3& a, const Vec3& b, const Vec3& lo,
                             const Vec3& hi, double t_lo, double t_hi) {
  double t0 = t_lo, t1 = t_hi;
  for (int k = 0; k < 3; ++k) {
    double d = b[k] - a[k];
    if (d == 0.0) {
      if (a[k] < lo[k] || a[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - a[k]) / d;
    double tb = (hi[k] - a[k]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace detail

// KITTI-style LiDAR->camera axis mapping with the camera at scene.camera:
// cam_x = -y, cam_y = -z, cam_z = +x (relative to the camera center).
inline Calibration scene_calibration(const SyntheticScene& scene) {
  Calibration c;
  c.intrinsic = {{{scene.focal, 0.0, scene.image_width / 2.0, 0.0},
                  {0.0, scene.focal, scene.image_height / 2.0, 0.0},
                  {0.0, 0.0, 1.0, 0.0}}};
  c.rect = identity44();
  Mat44 t = identity44();
  double r[3][3] = {{0, -1, 0}, {0, 0, -1}, {1, 0, 0}};
  for (int i = 0; i < 3; ++i) {
    double ti = 0.0;
    for (int j = 0; j < 3; ++j) {
      t[i][j] = r[i][j];
      ti -= r[i][j] * scene.camera[j];
    }
    t[i][3] = ti;
  }
  c.lidar_to_cam = t;
  c.validate();
  return c;
}

// Deterministic surface sampling with per-ray self-occlusion: a sample
// survives only if no other slab blocks the segment camera->point.
inline std::pair<PointCloud, Calibration> generate_scene(const SyntheticScene& scene) {
  std::mt19937_64 rng(scene.seed);
  PointCloud cloud;
  for (std::size_t si = 0; si < scene.slabs.size(); ++si) {
    const Slab& sl = scene.slabs[si];
    Vec3 extent = sl.max - sl.min;
    int thin = 0;
    for (int k = 1; k < 3; ++k)
      if (extent[k] < extent[thin]) thin = k;
    int u = (thin + 1) % 3, v = (thin + 2) % 3;
    double center = 0.5 * (sl.min[thin] + sl.max[thin]);
    double face = scene.camera[thin] < center ? sl.min[thin] : sl.max[thin];
    double area = extent[u] * extent[v];
    auto count = static_cast<std::size_t>(std::llround(area * sl.density));
    std::uniform_real_distribution<double> du(sl.min[u], sl.max[u]);
    std::uniform_real_distribution<double> dv(sl.min[v], sl.max[v]);
    for (std::size_t n = 0; n < count; ++n) {
      Vec3 p;
      p[thin] = face;
      p[u] = du(rng);
      p[v] = dv(rng);
      bool blocked = false;
      for (std::size_t sj = 0; sj < scene.slabs.size() && !blocked; ++sj) {
        if (sj == si) continue;
        blocked = detail::segment_hits_box(scene.camera, p, scene.slabs[sj].min,
                                           scene.slabs[sj].max, 1e-9, 1.0 - 1e-6);
      }
      if (!blocked) cloud.points.push_back(p);
    }
  }
  cloud.intensity.assign(cloud.size(), 0.0f);
  return {cloud, scene_calibration(scene)};
}

struct OracleRayCells {
  std::set<std::array<int, 3>> cells;      // cells with at least one interior sample
  std::set<std::array<int, 3>> ambiguous;  // only face-grazing samples; excluded
                                           // from equality checks
};

// Dense sampling oracle for ray traversal. Besides the uniform samples, probe
// samples are placed just either side of every grid-plane crossing so that
// corner-cut cells with tiny chords are at least marked ambiguous instead of
// silently missed.
inline OracleRayCells oracle_ray_cells(const VoxelGridSpec& spec, const Vec3& from,
                                       const Vec3& to, std::size_t samples) {
  constexpr double kGrazeBand = 1e-7;
  OracleRayCells out;
  Vec3 dir = to - from;
  double len = norm(dir);

  std::vector<double> ts;
  ts.reserve(samples + 64);
  for (std::size_t i = 0; i < samples; ++i)
    ts.push_back(samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1));
  if (len > 0.0) {
    double h = 1e-8 / len;  // spatial offset 1e-8, inside the grazing band
    for (int k = 0; k < 3; ++k) {
      if (dir[k] == 0.0) continue;
      for (int plane = 0; plane <= spec.dims[k]; ++plane) {
        double t = (spec.origin[k] + plane * spec.voxel_size[k] - from[k]) / dir[k];
        if (t > 0.0 && t < 1.0) {
          ts.push_back(std::max(0.0, t - h));
          ts.push_back(std::min(1.0, t + h));
        }
      }
    }
  }

  std::set<std::array<int, 3>> grazing_only;
  for (double t : ts) {
    Vec3 p = from + t * dir;
    auto idx = voxel_index_of(spec, p);
    if (!idx) continue;
    double face_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      double frac = (p[k] - spec.origin[k]) / spec.voxel_size[k] - (*idx)[k];
      face_dist = std::min(face_dist, std::min(frac, 1.0 - frac) * spec.voxel_size[k]);
    }
    if (face_dist < kGrazeBand)
      grazing_only.insert(*idx);
    else
      out.cells.insert(*idx);
  }
  for (const auto& c : grazing_only)
    if (!out.cells.count(c)) out.ambiguous.insert(c);
  return out;
}

// Direct scalar re-implementation of the frustum labeling pipeline; shares no
// code with the production path (projection and binning are redone inline,
// binning by linear edge scan rather than closed form).
inline OccupancyLabelGrid oracle_frustum_labels(const Calibration& calib,
                                                const PointCloud& cloud,
                                                const FrustumGridSpec& fspec) {
  const int iw = fspec.width * fspec.downsample;
  const int ih = fspec.height * fspec.downsample;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> full(static_cast<std::size_t>(iw) * ih, inf);

  for (const Vec3& p : cloud.points) {
    // rect * lidar_to_cam, written out
    double c0 = 0, c1 = 0, c2 = 0;
    double hp[4] = {p[0], p[1], p[2], 1.0};
    double mid[4];
    for (int i = 0; i < 4; ++i) {
      mid[i] = 0.0;
      for (int j = 0; j < 4; ++j) mid[i] += calib.lidar_to_cam[i][j] * hp[j];
    }
    for (int j = 0; j < 4; ++j) {
      c0 += calib.rect[0][j] * mid[j];
      c1 += calib.rect[1][j] * mid[j];
      c2 += calib.rect[2][j] * mid[j];
    }
    double hu = calib.intrinsic[0][0] * c0 + calib.intrinsic[0][1] * c1 +
                calib.intrinsic[0][2] * c2 + calib.intrinsic[0][3];
    double hv = calib.intrinsic[1][0] * c0 + calib.intrinsic[1][1] * c1 +
                calib.intrinsic[1][2] * c2 + calib.intrinsic[1][3];
    double hw = calib.intrinsic[2][0] * c0 + calib.intrinsic[2][1] * c1 +
                calib.intrinsic[2][2] * c2 + calib.intrinsic[2][3];
    if (!(hw > 0.0) || !(c2 > 0.0)) continue;
    double u = hu / hw, v = hv / hw;
    if (u < 0.0 || u >= iw || v < 0.0 || v >= ih) continue;
    std::size_t pix = static_cast<std::size_t>(std::floor(v)) * iw +
                      static_cast<std::size_t>(std::floor(u));
    if (c2 < full[pix]) full[pix] = c2;
  }

  // bin edges, then labels by per-pixel scan
  std::vector<double> edges(fspec.depth_bins + 1);
  for (int i = 0; i <= fspec.depth_bins; ++i) {
    if (fspec.discretization == DepthDiscretization::UNIFORM)
      edges[i] = fspec.depth_min + (fspec.depth_max - fspec.depth_min) * i / fspec.depth_bins;
    else {
      double delta = 2.0 * (fspec.depth_max - fspec.depth_min) /
                     (static_cast<double>(fspec.depth_bins) * (fspec.depth_bins + 1));
      edges[i] = fspec.depth_min + delta * 0.5 * static_cast<double>(i) * (i + 1);
    }
  }

  auto grid = OccupancyLabelGrid::unknown(
      Space::FRUSTUM, {fspec.height, fspec.width, fspec.depth_bins});
  const int s = fspec.downsample;
  for (int r = 0; r < fspec.height; ++r)
    for (int c = 0; c < fspec.width; ++c) {
      double dmin = inf;
      for (int dv = 0; dv < s; ++dv)
        for (int du = 0; du < s; ++du)
          dmin = std::min(dmin, full[static_cast<std::size_t>(r * s + dv) * iw + c * s + du]);
      if (dmin == inf || dmin < fspec.depth_min || dmin >= fspec.depth_max) continue;
      int bin = -1;
      for (int i = 0; i < fspec.depth_bins; ++i)
        if (dmin >= edges[i] && dmin < edges[i + 1]) {
          bin = i;
          break;
        }
      if (bin < 0) continue;
      for (int d = 0; d < bin; ++d) grid.at(r, c, d) = kFree;
      grid.at(r, c, bin) = kOccupied;
    }
  return grid;
}

}  // namespace occugrid
