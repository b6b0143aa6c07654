#include "doctest.h"
#include "helpers.hpp"
#include "qembed/pipelines.hpp"

using namespace qt;

TEST_CASE("lens(1,1) is the round sphere") {
  const auto s3 = make_lens(1, 1);
  CHECK(s3->distance(Vec::Unit(4, 0), -Vec::Unit(4, 0)) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK_THROWS_AS(make_lens(6, 3), InputError);
}

TEST_CASE("lens oracle equals brute force over the group") {
  for (auto [p, q] : std::vector<std::pair<int, int>>{{5, 2}, {7, 3}}) {
    const auto L = make_lens(p, q);
    Mat R = Mat::Zero(4, 4);
    R.block(0, 0, 2, 2) = rot(2 * kPi / p);
    R.block(2, 2, 2, 2) = rot(2 * kPi * q / p);
    Rng rng(static_cast<std::uint64_t>(p));
    for (int i = 0; i < 100; ++i) {
      const Vec a = L->sample(rng), b = L->sample(rng);
      double best = kInf;
      Vec gb = b;
      for (int k = 0; k < p; ++k) {
        best = std::min(best, std::acos(std::clamp(a.dot(gb), -1.0, 1.0)));
        gb = R * gb;
      }
      CHECK(L->distance(a, b) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("holonomy bundle with theta = 0 is a product") {
  const auto E = make_holonomy_bundle(0.0, 2, 2 * kPi, 3);
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const Vec a = E->sample(rng), b = E->sample(rng);
    double dx = std::fmod(std::abs(a[0] - b[0]), 2 * kPi);
    dx = std::min(dx, 2 * kPi - dx);
    const double expect = std::sqrt(dx * dx + (a.tail(2) - b.tail(2)).squaredNorm());
    CHECK(E->distance(a, b) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("holonomy bundle distance against direct lift scan") {
  const auto E = make_holonomy_bundle(1.0, 2, 2 * kPi, 4);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec a = E->sample(rng), b = E->sample(rng);
    double best = kInf;
    for (int t = -60; t <= 60; ++t) {
      Vec g(3);
      g[0] = b[0] + 2 * kPi * t;
      g.tail(2) = rot(1.0 * t) * b.tail(2);
      best = std::min(best, (a - g).norm());
    }
    CHECK(E->distance(a, b) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("cone metric formula") {
  const double alpha = 0.5;
  const auto link = circle(2 * kPi * std::sin(alpha));
  ConeSpace cone(link, 2.0);
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec a = cone.sample(rng), b = cone.sample(rng);
    const double phi = link->distance(a.tail(1), b.tail(1));
    const double expect = std::sqrt(std::max(0.0, a[0] * a[0] + b[0] * b[0] - 2 * a[0] * b[0] * std::cos(phi)));
    CHECK(cone.distance(a, b) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("lens chart metric ratio examples") {
  CHECK(lens_metric_ratio(1, 0.0, Eigen::Vector3d(0, 1, 0)) == doctest::Approx(1.0));
  CHECK(lens_metric_ratio(1, kPi / 3 - 1e-15, Eigen::Vector3d(0, 1, 0)) == doctest::Approx(0.25));
  CHECK(lens_metric_ratio(1, kPi / 6, Eigen::Vector3d(0, 0, 1)) == doctest::Approx(0.25 / std::pow(kPi / 6, 2)).epsilon(1e-12));
  CHECK(lens_metric_ratio(1, kPi / 6, Eigen::Vector3d(0, 0, 1)) == doctest::Approx(0.9119).epsilon(1e-4));
  for (int j : {1, 2}) CHECK(lens_chart_certificate(j, 1000, 4).pass);
}

TEST_CASE("lens chart map domain") {
  Vec inside(4), outside(4);
  inside << std::cos(0.4), 0, std::sin(0.4), 0;
  outside << std::cos(1.3), 0, std::sin(1.3), 0;
  const Vec m = lens_chart_map(1, inside);
  CHECK(std::hypot(m[1], m[2]) == doctest::Approx(0.4));
  CHECK_THROWS_AS(lens_chart_map(1, outside), InputError);
  CHECK_NOTHROW(lens_chart_map(2, outside));
  CHECK_THROWS_AS(lens_chart_map(2, inside), InputError);
}

TEST_CASE("ellipsoid map examples") {
  for (double N : {1.0, 10.0}) {
    Vec e(3), n(3), s(3);
    e << 1, 0, 0;
    n << 0, 0, 1 / N;
    s << 0, 0, -1 / N;
    CHECK((ellipsoid_map(N, e) - e).norm() < 1e-15);
    Vec ne(3);
    ne << 0, 0, 1 / N + 1;
    CHECK((ellipsoid_map(N, n) - ne).norm() < 1e-15);
    CHECK((ellipsoid_map(N, s) - s).norm() < 1e-15);
  }
  Vec off(3);
  off << 1, 1, 0;
  CHECK_THROWS_AS(ellipsoid_map(2.0, off), InputError);
}

TEST_CASE("ellipsoid mesh oracle on the unit sphere") {
  EllipsoidSpace S(1.0, 4, 50);
  CHECK(S.mesh_error(4) < 0.2);
  Rng rng(1);
  const Vec a = S.sample(rng), b = S.sample(rng);
  CHECK(S.distance(a, b) == doctest::Approx(S.distance(b, a)));
  CHECK(S.distance(a, a) == 0.0);
}

TEST_CASE("annulus metric change stays within factor 10") {
  for (double th : {2 * kPi / 7, 1.0}) {
    const auto E = make_holonomy_bundle(th, 2, 2 * kPi, 4);
    for (int k = 1; k <= 4; ++k) CHECK(annulus_metric_change(*E, k, 500, 7).within(10.0));
  }
}
