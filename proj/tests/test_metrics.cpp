#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qmrisim/metrics.hpp"

using namespace qmrisim;

namespace {

Volume mask(const Grid3D& g, std::initializer_list<Index3> on) {
  Volume m = newVolume(g, 0.0f, VolumeKind::Mask);
  for (const Index3& p : on) m(p.x(), p.y(), p.z()) = 1.0f;
  return m;
}

// log10(255) * 20, from the 50-digit oracle.
constexpr double kPsnr255 = 48.1308036086791034124291780572;

}  // namespace

TEST_CASE("PSNR closed forms") {
  const Grid3D g(Index3(4, 3, 2));
  const Volume ref = newVolume(g, 0.0f);
  CHECK(psnr(ref, newVolume(g, 0.1f), 1.0) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(std::abs(psnr(ref, newVolume(g, 1.0f), 255.0) - kPsnr255) < 1e-9);
  CHECK(std::isinf(psnr(ref, ref, 1.0)));
  CHECK(psnr(ref, ref, 1.0) > 0);
  CHECK_THROWS_AS(psnr(ref, newVolume(Grid3D(Index3(4, 3, 1)), 0.0f), 1.0), Error);
  CHECK_THROWS_AS(psnr(ref, ref, 0.0), Error);
}

TEST_CASE("PSNR decreases as error grows") {
  const Grid3D g(Index3(5, 5, 5));
  const Volume ref = newVolume(g, 0.0f);
  double prev = INFINITY;
  for (float e = 0.01f; e < 3.0f; e *= 1.4f) {
    const double p = psnr(ref, newVolume(g, e), 2.0);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("dynamic range") {
  Volume v = newVolume(Grid3D(Index3(3, 1, 1)), 0.0f);
  v.data() << -1.5f, 0.5f, 2.0f;
  CHECK(dynamicRange(v) == 3.5);
}

TEST_CASE("Dice") {
  const Grid3D g(Index3(10, 10, 2));
  Volume a = newVolume(g, 0.0f, VolumeKind::Mask), b = a;
  CHECK(dice(a, b) == 1.0);
  // |A| = |B| = 100 with 50 shared voxels.
  for (int n = 0; n < 100; ++n) a[n] = 1.0f;
  for (int n = 50; n < 150; ++n) b[n] = 1.0f;
  CHECK(dice(a, b) == 0.5);
  CHECK(dice(a, a) == 1.0);
  Volume c = newVolume(g, 0.0f, VolumeKind::Mask);
  for (int n = 150; n < 200; ++n) c[n] = 1.0f;
  CHECK(dice(a, c) == 0.0);
  Volume notMask = newVolume(g, 0.0f);
  notMask[0] = 2.0f;
  CHECK_THROWS_AS(dice(notMask, a), Error);
}

TEST_CASE("multiclass Dice") {
  const Grid3D g(Index3(4, 4, 1));
  Volume truth = newVolume(g, 0.0f), pred = newVolume(g, 0.0f);
  for (int n = 0; n < 8; ++n) truth[n] = 1.0f;
  auto per = multiclassDice(truth, pred, {0, 1});
  CHECK(per[1] == 0.0);
  CHECK(per[0] == doctest::Approx(2.0 * 8 / (8 + 16)));
  per = multiclassDice(truth, truth, {0, 1, 5});
  CHECK(per[0] == 1.0);
  CHECK(per[1] == 1.0);
  CHECK(per[5] == 1.0);

  RngState rng(1);
  for (int t = 0; t < 20; ++t) {
    Volume y = newVolume(Grid3D(Index3(6, 5, 4)), 0.0f), yh = y;
    for (std::int64_t n = 0; n < y.size(); ++n) {
      y[n] = float(rng.uniformInt(0, 2));
      yh[n] = float(rng.uniformInt(0, 2));
    }
    const auto got = multiclassDice(y, yh, {0, 1, 2});
    for (int label : {0, 1, 2}) {
      Volume my = newVolume(y.grid(), 0.0f, VolumeKind::Mask), mh = my;
      for (std::int64_t n = 0; n < y.size(); ++n) {
        my[n] = y[n] == float(label) ? 1.0f : 0.0f;
        mh[n] = yh[n] == float(label) ? 1.0f : 0.0f;
      }
      CHECK(got.at(label) == oracle::dice(my, mh));
    }
  }
}

TEST_CASE("HD95 fixtures") {
  const Grid3D unit(Index3(8, 8, 8));
  CHECK(hd95(mask(unit, {{1, 2, 3}}), mask(unit, {{4, 2, 3}})) == 3.0);
  const Grid3D aniso(Index3(4, 4, 4), Eigen::Vector3d(1, 1, 2));
  CHECK(hd95(mask(aniso, {{1, 1, 1}}), mask(aniso, {{1, 1, 2}})) == 2.0);
  const Volume m = mask(unit, {{1, 1, 1}, {2, 1, 1}, {2, 2, 1}});
  CHECK(hd95(m, m) == 0.0);
  CHECK_THROWS_AS(hd95(m, newVolume(unit, 0.0f, VolumeKind::Mask)), Error);
}

TEST_CASE("boundary voxels use 6-connectivity") {
  const Grid3D g(Index3(5, 5, 5));
  Volume cube = newVolume(g, 0.0f, VolumeKind::Mask);
  for (int k = 1; k < 4; ++k)
    for (int j = 1; j < 4; ++j)
      for (int i = 1; i < 4; ++i) cube(i, j, k) = 1.0f;
  CHECK(boundaryVoxels(cube).size() == 26);
  CHECK(boundaryVoxels(newVolume(g, 1.0f, VolumeKind::Mask)).size() == std::size_t(125 - 27));
}

TEST_CASE("random masks agree with the brute-force oracles") {
  RngState rng(2);
  const double spacings[] = {0.5, 1.0, 2.0, 1.5, 0.75};
  int compared = 0;
  for (int t = 0; t < 100; ++t) {
    const Index3 shape(rng.uniformInt(1, 16), rng.uniformInt(1, 16), rng.uniformInt(1, 16));
    const Eigen::Vector3d sp(spacings[rng.uniformInt(0, 4)], spacings[rng.uniformInt(0, 4)],
                             spacings[rng.uniformInt(0, 4)]);
    const Grid3D g(shape, sp);
    const Volume a = oracle::randomMask(rng, g), b = oracle::randomMask(rng, g);
    REQUIRE(dice(a, b) == oracle::dice(a, b));
    CHECK(dice(a, b) == dice(b, a));
    if ((a.data() == 0.0f).all() || (b.data() == 0.0f).all()) continue;
    REQUIRE(hd95(a, b) == oracle::hd95(a, b));
    CHECK(hd95(a, b) == hd95(b, a));
    ++compared;
  }
  CHECK(compared > 90);
}

TEST_CASE("percentile interpolates linearly") {
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3.0);
  CHECK(percentile({0, 10}, 95) == doctest::Approx(9.5));
  CHECK(percentile({7}, 95) == 7.0);
  CHECK(percentile({5, 1, 3}, 100) == 5.0);
}
