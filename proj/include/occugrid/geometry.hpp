#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace occugrid {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& v) {
  return {s * v[0], s * v[1], s * v[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Row-major fixed-size matrices; enough linear algebra for rigid
// transforms and pinhole projection, nothing more.
using Mat34 = std::array<std::array<double, 4>, 3>;
using Mat44 = std::array<std::array<double, 4>, 4>;

inline Mat44 identity44() {
  Mat44 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat44 matmul(const Mat44& a, const Mat44& b) {
  Mat44 r{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Vec3 apply_rigid(const Mat44& m, const Vec3& p) {
  Vec3 r;
  for (int i = 0; i < 3; ++i)
    r[i] = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
  return r;
}

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensity;  // optional; empty or size() == points.size()

  std::size_t size() const { return points.size(); }
};

struct Calibration {
  Mat34 intrinsic{};          // P2, pixels
  Mat44 rect = identity44();  // R0_rect padded to 4x4
  Mat44 lidar_to_cam = identity44();

  // camera center expressed in the LiDAR frame
  Vec3 camera_origin_in_lidar() const {
    Mat44 m = matmul(rect, lidar_to_cam);
    Vec3 t = {m[0][3], m[1][3], m[2][3]};
    Vec3 o;
    for (int i = 0; i < 3; ++i)
      o[i] = -(m[0][i] * t[0] + m[1][i] * t[1] + m[2][i] * t[2]);
    return o;
  }

  void validate() const {
    if (!(intrinsic[0][0] > 0.0) || !(intrinsic[1][1] > 0.0))
      throw ArgumentError("calibration: non-positive focal length");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double dotv = rect[i][0] * rect[j][0] + rect[i][1] * rect[j][1] +
                      rect[i][2] * rect[j][2];
        double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(dotv - want) > 1e-6)
          throw ArgumentError("calibration: rect not orthonormal");
      }
    const Mat44& t = lidar_to_cam;
    if (t[3][0] != 0.0 || t[3][1] != 0.0 || t[3][2] != 0.0 || t[3][3] != 1.0)
      throw ArgumentError("calibration: lidar_to_cam bottom row not (0,0,0,1)");
  }
};

namespace detail {

inline std::vector<double> parse_calib_values(const std::string& key,
                                              const std::string& rest,
                                              std::size_t expected) {
  std::istringstream iss(rest);
  std::vector<double> vals;
  double v;
  while (iss >> v) vals.push_back(v);
  if (vals.size() != expected)
    throw ParseError("calibration line " + key + ": expected " +
                     std::to_string(expected) + " entries, got " +
                     std::to_string(vals.size()));
  for (double x : vals)
    if (!std::isfinite(x))
      throw ParseError("calibration line " + key + ": non-finite entry");
  return vals;
}

}  // namespace detail

// KITTI calib .txt: lines "P2: ...", "R0_rect: ...", "Tr_velo_to_cam: ...".
// Projection of a LiDAR point x is intrinsic * rect * lidar_to_cam * x.
inline Calibration parse_kitti_calib(const std::string& text) {
  std::optional<std::vector<double>> p2, r0, tr;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::string rest = line.substr(colon + 1);
    if (key == "P2")
      p2 = detail::parse_calib_values(key, rest, 12);
    else if (key == "R0_rect")
      r0 = detail::parse_calib_values(key, rest, 9);
    else if (key == "Tr_velo_to_cam")
      tr = detail::parse_calib_values(key, rest, 12);
  }
  if (!p2) throw ParseError("calibration: missing key P2");
  if (!r0) throw ParseError("calibration: missing key R0_rect");
  if (!tr) throw ParseError("calibration: missing key Tr_velo_to_cam");

  Calibration c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) c.intrinsic[i][j] = (*p2)[i * 4 + j];
  c.rect = identity44();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.rect[i][j] = (*r0)[i * 3 + j];
  c.lidar_to_cam = identity44();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) c.lidar_to_cam[i][j] = (*tr)[i * 4 + j];
  c.validate();
  return c;
}

inline std::vector<Vec3> lidar_to_camera(const Calibration& calib,
                                         const PointCloud& cloud) {
  Mat44 m = matmul(calib.rect, calib.lidar_to_cam);
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.push_back(apply_rigid(m, p));
  return out;
}

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;
};

// (u,v) from perspective division of intrinsic*[x;1]; valid iff depth > 0
// and the pixel lands inside [0,width) x [0,height).
inline std::vector<ImagePoint> project_to_image(const Calibration& calib,
                                                const std::vector<Vec3>& cam_points,
                                                int image_width,
                                                int image_height) {
  std::vector<ImagePoint> out;
  out.reserve(cam_points.size());
  for (const Vec3& p : cam_points) {
    const Mat34& k = calib.intrinsic;
    double hu = k[0][0] * p[0] + k[0][1] * p[1] + k[0][2] * p[2] + k[0][3];
    double hv = k[1][0] * p[0] + k[1][1] * p[1] + k[1][2] * p[2] + k[1][3];
    double hw = k[2][0] * p[0] + k[2][1] * p[1] + k[2][2] * p[2] + k[2][3];
    ImagePoint ip;
    ip.depth = p[2];
    if (hw > 0.0) {
      ip.u = hu / hw;
      ip.v = hv / hw;
      ip.valid = ip.depth > 0.0 && ip.u >= 0.0 && ip.u < image_width &&
                 ip.v >= 0.0 && ip.v < image_height;
    }
    out.push_back(ip);
  }
  return out;
}

enum class DepthDiscretization { UNIFORM, LID };

struct FrustumGridSpec {
  int width = 0;        // W_F, feature columns
  int height = 0;       // H_F, feature rows
  int depth_bins = 80;  // D
  int downsample = 4;   // stride s from image to feature resolution
  double depth_min = 2.0;
  double depth_max = 46.8;
  DepthDiscretization discretization = DepthDiscretization::LID;

  int image_width() const { return width * downsample; }
  int image_height() const { return height * downsample; }

  void validate() const {
    if (!(depth_min < depth_max))
      throw ArgumentError("frustum spec: depth_min must be < depth_max");
    if (depth_bins < 1 || downsample < 1 || width < 1 || height < 1)
      throw ArgumentError("frustum spec: non-positive dimension");
  }

  // LID bin width grows linearly: delta, 2*delta, 3*delta, ...
  double lid_delta() const {
    return 2.0 * (depth_max - depth_min) /
           (static_cast<double>(depth_bins) * (depth_bins + 1));
  }

  // lower edge of bin i; edge(depth_bins) == depth_max
  double bin_edge(int i) const {
    if (discretization == DepthDiscretization::UNIFORM)
      return depth_min + (depth_max - depth_min) * i / depth_bins;
    return depth_min + lid_delta() * 0.5 * static_cast<double>(i) * (i + 1);
  }
};

// half-open [depth_min, depth_max); nullopt when outside
inline std::optional<int> depth_to_bin(const FrustumGridSpec& spec, double depth) {
  if (!(depth >= spec.depth_min) || !(depth < spec.depth_max)) return std::nullopt;
  int bin;
  if (spec.discretization == DepthDiscretization::UNIFORM) {
    bin = static_cast<int>(std::floor((depth - spec.depth_min) * spec.depth_bins /
                                      (spec.depth_max - spec.depth_min)));
  } else {
    double delta = spec.lid_delta();
    bin = static_cast<int>(
        std::floor(-0.5 + 0.5 * std::sqrt(1.0 + 8.0 * (depth - spec.depth_min) / delta)));
  }
  if (bin < 0) bin = 0;
  if (bin >= spec.depth_bins) bin = spec.depth_bins - 1;
  return bin;
}

inline double bin_to_depth(const FrustumGridSpec& spec, int bin) {
  if (bin < 0 || bin >= spec.depth_bins)
    throw ArgumentError("bin_to_depth: bin " + std::to_string(bin) +
                        " outside [0, " + std::to_string(spec.depth_bins) + ")");
  return 0.5 * (spec.bin_edge(bin) + spec.bin_edge(bin + 1));
}

struct VoxelGridSpec {
  Vec3 origin{};      // lower corner of the detection range
  Vec3 voxel_size{};  // meters
  std::array<int, 3> dims{};  // X, Y, Z

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  Vec3 upper_corner() const {
    return {origin[0] + dims[0] * voxel_size[0],
            origin[1] + dims[1] * voxel_size[1],
            origin[2] + dims[2] * voxel_size[2]};
  }

  Vec3 voxel_center(int i, int j, int k) const {
    return {origin[0] + (i + 0.5) * voxel_size[0],
            origin[1] + (j + 0.5) * voxel_size[1],
            origin[2] + (k + 0.5) * voxel_size[2]};
  }

  void validate() const {
    for (int k = 0; k < 3; ++k) {
      if (!(voxel_size[k] > 0.0))
        throw ArgumentError("voxel spec: voxel_size must be positive");
      if (dims[k] < 1) throw ArgumentError("voxel spec: dims must be >= 1");
    }
  }

  static VoxelGridSpec from_range(const Vec3& lower, const Vec3& upper,
                                  const Vec3& voxel_size) {
    VoxelGridSpec s;
    s.origin = lower;
    s.voxel_size = voxel_size;
    for (int k = 0; k < 3; ++k) {
      double extent = upper[k] - lower[k];
      double n = extent / voxel_size[k];
      int dim = static_cast<int>(std::llround(n));
      if (dim < 1 || std::abs(dim * voxel_size[k] - extent) > 1e-9)
        throw ArgumentError("voxel spec: range not divisible by voxel size");
      s.dims[k] = dim;
    }
    s.validate();
    return s;
  }
};

// floor((p - origin) / voxel_size), half-open cells; nullopt when out of range
inline std::optional<std::array<int, 3>> voxel_index_of(const VoxelGridSpec& spec,
                                                        const Vec3& p) {
  std::array<int, 3> idx;
  for (int k = 0; k < 3; ++k) {
    double f = std::floor((p[k] - spec.origin[k]) / spec.voxel_size[k]);
    if (f < 0.0 || f >= static_cast<double>(spec.dims[k])) return std::nullopt;
    idx[k] = static_cast<int>(f);
  }
  return idx;
}

struct ClippedSegment {
  Vec3 a{};
  Vec3 b{};
  double t_enter = 0.0;  // parameters along the original segment, in [0,1]
  double t_exit = 0.0;
};

// Slab clip of [a,b] against the grid's axis-aligned box.
inline std::optional<ClippedSegment> clip_segment_to_grid(const VoxelGridSpec& spec,
                                                          const Vec3& a,
                                                          const Vec3& b) {
  Vec3 upper = spec.upper_corner();
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 3; ++k) {
    double d = b[k] - a[k];
    if (d == 0.0) {
      if (a[k] < spec.origin[k] || a[k] > upper[k]) return std::nullopt;
      continue;
    }
    double ta = (spec.origin[k] - a[k]) / d;
    double tb = (upper[k] - a[k]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  ClippedSegment s;
  s.t_enter = t0;
  s.t_exit = t1;
  s.a = a + t0 * (b - a);
  s.b = a + t1 * (b - a);
  return s;
}

}  // namespace occugrid
