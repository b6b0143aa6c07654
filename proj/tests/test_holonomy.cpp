#include "doctest.h"
#include "helpers.hpp"
#include "qembed/holonomy.hpp"

using namespace qt;

namespace {
Vec angle_point(double a) { return v2(std::cos(a), std::sin(a)); }
}  // namespace

TEST_CASE("canonical decomposition examples") {
  auto dec = canonical_decomposition({Mat::Identity(3, 3)});
  REQUIRE(dec.blocks.size() == 1);
  CHECK(dec.blocks[0].dim() == 3);

  Mat D(2, 2);
  D << 1, 0, 0, -1;
  dec = canonical_decomposition({D});
  REQUIRE(dec.blocks.size() == 2);
  CHECK(dec.blocks[0].dim() == 1);
  CHECK(std::abs(dec.blocks[0].basis(0, 0)) == doctest::Approx(1));
  CHECK(dec.blocks[1].kind == BlockKind::Reflection);
  CHECK(std::abs(dec.blocks[1].basis(1, 0)) == doctest::Approx(1));

  dec = canonical_decomposition({rot(2 * kPi / 5)});
  REQUIRE(dec.blocks.size() == 2);
  CHECK(dec.blocks[0].dim() == 0);
  CHECK(dec.blocks[1].kind == BlockKind::Rotation);
  CHECK(dec.blocks[1].dim() == 2);
  CHECK(dec.blocks[1].angles[0] == doctest::Approx(2 * kPi / 5).epsilon(1e-12));
}

TEST_CASE("canonical decomposition rejects bad input") {
  Mat A(2, 2);
  A << 1, 1, 0, 1;
  CHECK_THROWS_AS(canonical_decomposition({A}), InputError);
  Mat R3 = Mat::Identity(3, 3), S3 = Mat::Identity(3, 3);
  R3.block(0, 0, 2, 2) = rot(0.5);
  S3.block(1, 1, 2, 2) = rot(0.5);
  CHECK_THROWS_AS(canonical_decomposition({R3, S3}), InputError);
}

TEST_CASE("reconstruction on conjugated block tuples") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(5));
    Mat G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = rng.normal();
    const Mat O = Eigen::HouseholderQR<Mat>(G).householderQ();
    std::vector<int> sizes;
    for (int rem = d; rem > 0;) {
      const int s = (rem >= 2 && rng.uniform() < 0.6) ? 2 : 1;
      sizes.push_back(s);
      rem -= s;
    }
    std::vector<Mat> mats;
    const int m = 1 + static_cast<int>(rng.index(3));
    for (int i = 0; i < m; ++i) {
      Mat Bm = Mat::Zero(d, d);
      int o = 0;
      for (int s : sizes) {
        if (s == 2)
          Bm.block(o, o, 2, 2) = rot(rng.uniform(-kPi, kPi));
        else
          Bm(o, o) = rng.uniform() < 0.5 ? 1 : -1;
        o += s;
      }
      mats.push_back(O * Bm * O.transpose());
    }
    const auto dec = canonical_decomposition(mats);
    CHECK(dec.reconstruction_error(mats) < 1e-8);
    CHECK(dec.invariance_error(mats) < 1e-9);
    int total = 0;
    for (const auto& b : dec.blocks) total += b.dim();
    CHECK(total == d);
  }
}

TEST_CASE("euclidean_fixed_point examples") {
  CHECK(euclidean_fixed_point({v2(1, 0), v2(-1, 0)}).norm() < 1e-15);
  CHECK((euclidean_fixed_point({v2(0.3, 0.4)}) - v2(0.3, 0.4)).norm() == 0.0);
  std::vector<Vec> orbit;
  for (int k = 0; k < 4; ++k) orbit.push_back(rot(k * kPi / 2) * v2(1, 2));
  const Vec c = euclidean_fixed_point(orbit);
  CHECK(c.norm() < 1e-12);
  for (int k = 0; k < 4; ++k) CHECK((rot(k * kPi / 2) * c - c).norm() < 1e-9);
  std::vector<Vec> shuffled{orbit[2], orbit[0], orbit[3], orbit[1]};
  CHECK((euclidean_fixed_point(shuffled) - c).norm() < 1e-9);
  CHECK_THROWS_AS(euclidean_fixed_point({}), InputError);
}

TEST_CASE("karcher_mean_sphere examples") {
  auto k = karcher_mean_sphere({angle_point(0.3), angle_point(-0.3)}, 1.0);
  CHECK(std::abs(std::atan2(k.mean[1], k.mean[0])) < 1e-12);
  k = karcher_mean_sphere({angle_point(0.7)}, 1.0);
  CHECK((k.mean - angle_point(0.7)).norm() < 1e-12);
  k = karcher_mean_sphere({angle_point(0.1), angle_point(0.2), angle_point(0.3)}, 1.0);
  CHECK(std::atan2(k.mean[1], k.mean[0]) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK_THROWS_AS(karcher_mean_sphere({angle_point(0), angle_point(2.0)}, 1.0), InputError);
}

TEST_CASE("karcher mean is equivariant") {
  std::vector<Vec> pts;
  Rng rng(5);
  for (int i = 0; i < 6; ++i) {
    Vec v(3);
    v << 1.0, 0.2 * rng.normal(), 0.2 * rng.normal();
    pts.push_back(2.0 * v.normalized());
  }
  Mat G(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = rng.normal();
  const Mat U = Eigen::HouseholderQR<Mat>(G).householderQ();
  std::vector<Vec> moved;
  for (const auto& p : pts) moved.push_back(U * p);
  const double tol = 1e-12;
  const Vec a = karcher_mean_sphere(pts, 2.0, tol).mean, b = karcher_mean_sphere(moved, 2.0, tol).mean;
  CHECK((U * a - b).norm() <= 10 * tol * 2.0 + 1e-12);
}

TEST_CASE("invariant_circle examples") {
  auto dec = canonical_decomposition({rot(0.9)});
  auto c = invariant_circle(dec, 1, v2(1, 0));
  CHECK(c.radius == doctest::Approx(1));
  for (int i = 0; i < 16; ++i) CHECK(std::abs(c.point(0.4 * i).norm() - 1.0) < 1e-12);

  Mat H = Mat::Zero(4, 4);
  H.block(0, 0, 2, 2) = rot(0.7);
  H.block(2, 2, 2, 2) = rot(0.7);
  dec = canonical_decomposition({H});
  c = invariant_circle(dec, 1, Vec::Unit(4, 0));
  CHECK((c.u1 - Vec::Unit(4, 0)).norm() < 1e-9);
  CHECK((c.u2.cwiseAbs() - Vec::Unit(4, 1)).norm() < 1e-9);
  // rotated samples stay on the circle
  for (int i = 0; i < 16; ++i) {
    const Vec x = H * c.point(2 * kPi * i / 16);
    const double t = std::atan2(x.dot(c.u2), x.dot(c.u1));
    CHECK((x - c.point(t)).norm() < 1e-9);
  }
  CHECK_THROWS_AS(invariant_circle(dec, 1, Vec::Zero(4)), InputError);
}
