#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "occugrid/sampler.hpp"

using namespace occugrid;

namespace {

FrustumGridSpec cube_spec(int n, DepthDiscretization mode = DepthDiscretization::UNIFORM) {
  FrustumGridSpec spec;
  spec.width = n;
  spec.height = n;
  spec.depth_bins = n;
  spec.downsample = 1;
  spec.depth_min = 2.0;
  spec.depth_max = 10.0;
  spec.discretization = mode;
  return spec;
}

// scalar 8-corner reference, test-local
double corner_interp(const FrustumField& f, double col, double row, double bin, int ch) {
  const auto& s = f.spec;
  auto cl = [](double v, int hi) { return std::clamp(v, 0.0, double(hi)); };
  col = cl(col, s.width - 1);
  row = cl(row, s.height - 1);
  bin = cl(bin, s.depth_bins - 1);
  int c0 = std::min((int)col, s.width - 1), c1 = std::min(c0 + 1, s.width - 1);
  int r0 = std::min((int)row, s.height - 1), r1 = std::min(r0 + 1, s.height - 1);
  int b0 = std::min((int)bin, s.depth_bins - 1), b1 = std::min(b0 + 1, s.depth_bins - 1);
  double fc = col - c0, fr = row - r0, fb = bin - b0;
  double acc = 0.0;
  for (int dc = 0; dc < 2; ++dc)
    for (int dr = 0; dr < 2; ++dr)
      for (int db = 0; db < 2; ++db) {
        double w = (dc ? fc : 1 - fc) * (dr ? fr : 1 - fr) * (db ? fb : 1 - fb);
        acc += w * f.at(dr ? r1 : r0, dc ? c1 : c0, db ? b1 : b0, ch);
      }
  return acc;
}

VoxelFrustumCoords single_coord(double col, double row, double bin, bool valid = true) {
  VoxelFrustumCoords c;
  c.dims = {1, 1, 1};
  c.coords.push_back({col, row, bin, valid});
  return c;
}

}  // namespace

TEST_CASE("voxel_to_frustum_coords: principal-ray voxel maps to (c_u/s, c_v/s, bin)") {
  FrustumGridSpec fspec;
  fspec.width = 32;
  fspec.height = 16;
  fspec.depth_bins = 8;
  fspec.downsample = 4;
  fspec.depth_min = 2.0;
  fspec.depth_max = 10.0;
  fspec.discretization = DepthDiscretization::UNIFORM;

  Calibration calib;
  double cu = fspec.image_width() / 2.0, cv = fspec.image_height() / 2.0;
  calib.intrinsic = {{{100.0, 0, cu, 0}, {0, 100.0, cv, 0}, {0, 0, 1, 0}}};

  // one voxel whose center lies on the principal ray at the center of bin 2
  double depth = bin_to_depth(fspec, 2);
  VoxelGridSpec vspec;
  vspec.origin = {-0.05, -0.05, depth - 0.05};
  vspec.voxel_size = {0.1, 0.1, 0.1};
  vspec.dims = {1, 1, 1};

  auto coords = voxel_to_frustum_coords(calib, fspec, vspec);
  const auto& fc = coords.at(0, 0, 0);
  REQUIRE(fc.valid);
  CHECK(fc.col == doctest::Approx(cu / 4).epsilon(1e-12));
  CHECK(fc.row == doctest::Approx(cv / 4).epsilon(1e-12));
  CHECK(fc.bin == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("voxel_to_frustum_coords: voxel behind camera is invalid") {
  FrustumGridSpec fspec = cube_spec(8);
  Calibration calib;
  calib.intrinsic = {{{10.0, 0, 4.0, 0}, {0, 10.0, 4.0, 0}, {0, 0, 1, 0}}};
  VoxelGridSpec vspec;
  vspec.origin = {0, 0, -5.0};
  vspec.voxel_size = {1, 1, 1};
  vspec.dims = {1, 1, 1};
  auto coords = voxel_to_frustum_coords(calib, fspec, vspec);
  CHECK_FALSE(coords.at(0, 0, 0).valid);
}

TEST_CASE("voxel_to_frustum_coords validity matches a per-voxel scalar oracle") {
  FrustumGridSpec fspec;
  fspec.width = 64;
  fspec.height = 24;
  fspec.depth_bins = 20;
  fspec.downsample = 4;
  fspec.depth_min = 2.0;
  fspec.depth_max = 40.0;
  fspec.discretization = DepthDiscretization::LID;

  Calibration calib;
  calib.intrinsic = {{{200.0, 0, 128.0, 0}, {0, 200.0, 48.0, 0}, {0, 0, 1, 0}}};

  auto vspec = VoxelGridSpec::from_range({-8, -8, 0}, {8, 8, 48}, {1, 1, 1});
  auto coords = voxel_to_frustum_coords(calib, fspec, vspec);

  std::size_t valid = 0, expect_valid = 0;
  for (int x = 0; x < vspec.dims[0]; ++x)
    for (int y = 0; y < vspec.dims[1]; ++y)
      for (int z = 0; z < vspec.dims[2]; ++z) {
        if (coords.at(x, y, z).valid) ++valid;
        double cx = -8 + x + 0.5, cy = -8 + y + 0.5, cz = z + 0.5;
        if (cz <= 0) continue;
        double u = 200.0 * cx / cz + 128.0;
        double v = 200.0 * cy / cz + 48.0;
        if (u >= 0 && u < 256 && v >= 0 && v < 96 && cz >= 2.0 && cz < 40.0)
          ++expect_valid;
      }
  CHECK(valid == expect_valid);
}

TEST_CASE("constant field samples to the constant at every valid voxel") {
  auto spec = cube_spec(4);
  auto field = FrustumField::zeros(spec);
  for (auto& v : field.values) v = 7.25;
  auto out = sample_frustum_to_voxel(field, single_coord(1.3, 2.7, 0.6));
  CHECK(out[0] == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("invalid coordinates produce exactly 0") {
  auto spec = cube_spec(4);
  auto field = FrustumField::zeros(spec);
  for (auto& v : field.values) v = 3.0;
  auto out = sample_frustum_to_voxel(field, single_coord(1.0, 1.0, 1.0, false));
  CHECK(out[0] == 0.0);
}

TEST_CASE("depth-ramp field reproduces the continuous bin coordinate") {
  for (auto mode : {DepthDiscretization::UNIFORM, DepthDiscretization::LID}) {
    auto spec = cube_spec(8, mode);
    auto field = FrustumField::zeros(spec);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        for (int b = 0; b < 8; ++b) field.at(r, c, b) = b;

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(bin_to_depth(spec, 0), bin_to_depth(spec, 7));
    for (int i = 0; i < 50; ++i) {
      double depth = d(rng);
      double cb = depth_to_continuous_bin(spec, depth);
      auto out = sample_frustum_to_voxel(field, single_coord(3.0, 3.0, cb));
      CHECK(std::abs(out[0] - cb) < 1e-9);
    }
  }
}

TEST_CASE("continuous bin coordinate hits integers at bin centers") {
  for (auto mode : {DepthDiscretization::UNIFORM, DepthDiscretization::LID}) {
    auto spec = cube_spec(8, mode);
    for (int b = 0; b < 8; ++b)
      CHECK(depth_to_continuous_bin(spec, bin_to_depth(spec, b)) ==
            doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("random field matches the scalar 8-corner oracle") {
  auto spec = cube_spec(8);
  auto field = FrustumField::zeros(spec, 3);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0), coord(-0.5, 8.5);
  for (auto& v : field.values) v = u(rng);
  for (int i = 0; i < 100; ++i) {
    double col = coord(rng), row = coord(rng), bin = coord(rng);
    VoxelFrustumCoords c;
    c.dims = {1, 1, 1};
    c.coords.push_back({col, row, bin, true});
    auto out = sample_frustum_to_voxel(field, c);
    for (int ch = 0; ch < 3; ++ch) {
      double expect = corner_interp(field, col, row, bin, ch);
      CHECK(std::abs(out[ch] - expect) < 1e-12);
    }
  }
}

TEST_CASE("linearity and monotone bounds") {
  auto spec = cube_spec(6);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0), coord(0.0, 5.0);
  auto fa = FrustumField::zeros(spec);
  auto fb = FrustumField::zeros(spec);
  for (auto& v : fa.values) v = u(rng);
  for (auto& v : fb.values) v = u(rng);
  double alpha = 0.7, beta = -1.3;
  auto fc = FrustumField::zeros(spec);
  for (std::size_t i = 0; i < fc.values.size(); ++i)
    fc.values[i] = alpha * fa.values[i] + beta * fb.values[i];

  for (int i = 0; i < 50; ++i) {
    auto c = single_coord(coord(rng), coord(rng), coord(rng));
    double sa = sample_frustum_to_voxel(fa, c)[0];
    double sb = sample_frustum_to_voxel(fb, c)[0];
    double sc = sample_frustum_to_voxel(fc, c)[0];
    CHECK(std::abs(sc - (alpha * sa + beta * sb)) < 1e-9);

    // within [min, max] of the 8 source corners
    int c0 = (int)c.coords[0].col, r0 = (int)c.coords[0].row, b0 = (int)c.coords[0].bin;
    double lo = 1e300, hi = -1e300;
    for (int dc = 0; dc < 2; ++dc)
      for (int dr = 0; dr < 2; ++dr)
        for (int db = 0; db < 2; ++db) {
          double v = fa.at(std::min(r0 + dr, 5), std::min(c0 + dc, 5), std::min(b0 + db, 5));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
    CHECK(sa >= lo - 1e-12);
    CHECK(sa <= hi + 1e-12);
  }
}

TEST_CASE("shape mismatch raises an argument error") {
  auto spec = cube_spec(4);
  FrustumField bad;
  bad.spec = spec;
  bad.channels = 1;
  bad.values.assign(10, 0.0);  // wrong size
  CHECK_THROWS_AS(sample_frustum_to_voxel(bad, single_coord(1, 1, 1)), ArgumentError);
}
