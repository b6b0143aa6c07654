#include "doctest.h"
#include "helpers.hpp"

using namespace qt;

TEST_CASE("act on points") {
  const Vec x = v2(0.3, 0.7);
  CHECK((act(AffineIsometry::identity(2), x) - x).norm() == 0.0);
  CHECK((act(AffineIsometry::translation(v2(1, 0)), x) - v2(1.3, 0.7)).norm() < 1e-15);
  CHECK((act(AffineIsometry::rotation2(kPi / 2), v2(1, 0)) - v2(0, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(act(AffineIsometry::identity(2), Vec::Zero(3)), InputError);
}

TEST_CASE("compose and inverse") {
  const auto t = compose(AffineIsometry::translation(v2(1, 0)), AffineIsometry::translation(v2(0, 1)));
  CHECK(t.same_action(AffineIsometry::translation(v2(1, 1))));
  const AffineIsometry g(rot(0.4), v2(0.2, -1.1));
  CHECK(compose(g, inverse(g)).same_action(AffineIsometry::identity(2)));
  CHECK(compose(AffineIsometry::rotation2(kPi / 2), AffineIsometry::rotation2(kPi / 2)).same_action(AffineIsometry::rotation2(kPi)));
  // compose acts as g1 after g2
  const AffineIsometry h(rot(-1.3), v2(0.5, 0.5));
  const Vec x = v2(0.1, 2.0);
  CHECK((compose(g, h).act(x) - g.act(h.act(x))).norm() < 1e-9);
}

TEST_CASE("enumerate_ball examples") {
  const auto line = circle(1.0);
  const GroupBall b = line->enumerate_ball(v1(0), 2.5);
  std::vector<double> shifts;
  for (const auto& g : b.elements) shifts.push_back(g.translation()[0]);
  std::sort(shifts.begin(), shifts.end());
  REQUIRE(shifts.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(shifts[static_cast<std::size_t>(i)] == doctest::Approx(i - 2));
  CHECK(torus()->enumerate_ball(Vec::Zero(2), 1.0).elements.size() == 5);
  const auto lens = make_lens(5, 2);
  CHECK(lens->enumerate_ball(Vec::Unit(4, 0), kPi).elements.size() == 5);
}

TEST_CASE("enumeration cap") {
  auto sp = std::make_shared<QuotientSpace>(Ambient::euclidean(1), std::vector<AffineIsometry>{AffineIsometry::translation(v1(1e-3))},
                                            Vec::Zero(1), 100);
  CHECK_THROWS_AS(sp->enumerate_ball(v1(0), 10.0), InvariantError);
}

TEST_CASE("quotient_distance examples") {
  CHECK(circle()->distance(v1(0), v1(0.9)) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(torus()->distance(Vec::Zero(2), v2(0.5, 0.5)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(make_lens(2, 1)->distance(Vec::Unit(4, 0), Vec::Unit(4, 2)) == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("quotient distance invariance and oracle equivalence") {
  const auto sp = torus(1.0, 3.0);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec p = sp->sample(rng), q = sp->sample(rng);
    const double d = sp->distance(p, q);
    const double e = sp->quotient_distance(p, q);
    CHECK(e == doctest::Approx(d).epsilon(1e-12));
    CHECK(brute_distance(*sp, p, q, 4.0 * sp->ambient().distance(p, q)) == e);
    const auto ball = sp->enumerate_ball(q, 5.0);
    const auto& g = ball.elements[rng.index(ball.elements.size())];
    CHECK(std::abs(sp->distance(g.act(p), q) - d) < 1e-9);
  }
}

TEST_CASE("local_group examples") {
  CHECK(local_group(*circle(), v1(0), 0.05).trivial());
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = 1;
  B(1, 1) = 10;
  const auto sp = make_flat_torus(B);
  const LocalGroup lg = local_group(*sp, Vec::Zero(2), 0.25);
  CHECK_FALSE(lg.trivial());
  // every generator lies in <(1,0)>
  for (const auto& g : lg.generating_ball.elements) {
    CHECK(std::abs(g.translation()[1]) < 1e-12);
    CHECK(std::abs(g.translation()[0] - std::round(g.translation()[0])) < 1e-12);
  }
  bool has_unit = false;
  for (const auto& g : lg.generating_ball.elements) has_unit = has_unit || std::abs(std::abs(g.translation()[0]) - 1.0) < 1e-12;
  CHECK(has_unit);
  // isometry on B(p, r)
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Vec a = sp->perturb(Vec::Zero(2), 0.25 * rng.uniform(), rng);
    const Vec b = sp->perturb(Vec::Zero(2), 0.25 * rng.uniform(), rng);
    CHECK(std::abs(sp->distance(a, b) - lg.space->distance(a, b)) < 1e-9);
  }
}

TEST_CASE("build_net examples") {
  const auto c = circle();
  std::vector<Vec> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(v1(0.01 * i));
  CHECK(build_net(c, grid, 0.3).points.size() == 3);
  CHECK(build_net(c, grid, 0.6).points.size() == 1);
  const auto t = torus();
  const Net n = build_net(t, t->grid(0.01), 0.6);
  CHECK(n.points.size() >= 2);
  CHECK(n.points.size() <= 4);
  CHECK_THROWS_AS(build_net(c, {}, 0.3), InputError);
}

TEST_CASE("net invariants: separation and covering") {
  const auto t = torus(1.0, 3.0);
  const double h = 0.02;
  const Net n = build_net(t, t->grid(h), 0.2);
  for (std::size_t i = 0; i < n.points.size(); ++i)
    for (std::size_t j = i + 1; j < n.points.size(); ++j) CHECK(t->distance(n.points[i], n.points[j]) > 0.2);
  Rng rng(4);
  const double cover = 0.2 + t->grid_cover(h);
  for (int i = 0; i < 200; ++i) {
    const Vec x = t->sample(rng);
    double best = kInf;
    for (const auto& q : n.points) best = std::min(best, t->distance(x, q));
    CHECK(best <= cover);
  }
}

TEST_CASE("spec round trip through JSON") {
  const auto sp = torus(1.0, 3.0);
  const SpacePtr back = construct_space(sp->spec());
  CHECK(back->spec().dump() == sp->spec().dump());
  json core = json::parse(R"({"ambient": {"kind": "euclidean", "n": 1}, "generators": [{"translation": [1.0]}]})");
  CHECK_NOTHROW(construct_space(core));
  CHECK_THROWS_AS(construct_space(json{{"kind", "nope"}}), InputError);
}
