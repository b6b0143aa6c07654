#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"
#include "qembed/audit.hpp"
#include "qembed/pipelines.hpp"

using namespace qt;

TEST_CASE("audit: isometric inclusion has distortion 1") {
  const auto box = make_euclidean_box(Vec::Zero(2), Vec::Ones(2));
  const auto r = empirical_distortion(*box, *identity_embedding(2), 1000, 1);
  CHECK(r.distortion == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pass);
}

TEST_CASE("audit: round circle") {
  const auto c = circle(2 * kPi);
  const EmbPtr f = circle_embedding(2 * kPi);
  const auto r = empirical_distortion(*c, *f, 20000, 42);
  CHECK(r.max_expansion <= 1.0 + 1e-12);
  CHECK(r.max_contraction <= kPi / 2 + 1e-9);
  CHECK(r.max_contraction > 1.55);
  CHECK(r.distortion == doctest::Approx(std::sqrt(r.max_expansion * r.max_contraction)));
  CHECK(r.pass);
}

TEST_CASE("audit: cone over a three-point link") {
  Mat D(3, 3);
  D << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
  const auto link = std::make_shared<FiniteSpace>(D);
  const EmbPtr f = finite_embedding(*link);
  const EmbPtr g = cone_embed(f, *link, Vec::Zero(1));
  ConeSpace cone(link, 1.0);
  const auto r = empirical_distortion(cone, *g, 5000, 42);
  CHECK(r.distortion <= 20 * f->claimed());
}

TEST_CASE("audit: degenerate pairs only") {
  const auto pt = std::make_shared<FiniteSpace>(Mat::Zero(1, 1));
  CHECK_THROWS_AS(empirical_distortion(*pt, *finite_embedding(*pt), 10, 1), InvariantError);
}

TEST_CASE("audit: determinism across runs and thread counts") {
  const auto E = make_holonomy_bundle(1.0, 2, 2 * kPi, 3);
  const EmbPtr G = bundle_embedding(*E);
  const std::string a = empirical_distortion(*E, *G, 3000, 9, 1).to_json().dump();
  const std::string b = empirical_distortion(*E, *G, 3000, 9, 4).to_json().dump();
  const std::string c = empirical_distortion(*E, *G, 3000, 9, 3).to_json().dump();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("audit: monotone in pair count") {
  const auto t = torus(1.0, 3.0);
  const EmbPtr f = torus_embedding(*t);
  double prev = 0.0;
  for (std::size_t n : {10u, 100u, 1000u, 5000u}) {
    const double d = empirical_distortion(*t, *f, n, 5).distortion;
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("worker count honours QE_THREADS") {
  setenv("QE_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("QE_THREADS", "junk", 1);
  CHECK(worker_count() >= 1);
  unsetenv("QE_THREADS");
}

TEST_CASE("estimate_doubling examples") {
  const auto seg = make_euclidean_box(v1(0), v1(1));
  CHECK(estimate_doubling(*seg, 0.01, 0.5).D <= 3);
  CHECK(estimate_doubling(*torus(), 0.01, 0.4).D <= 9);
  const auto pt = std::make_shared<FiniteSpace>(Mat::Zero(1, 1));
  CHECK(estimate_doubling(*pt, 0.1, 1.0).D == 1);
  CHECK_THROWS_AS(estimate_doubling(*seg, 0.5, 0.1), InputError);
}

TEST_CASE("serialization: mcshane net map is bit-identical on the net") {
  const auto t = torus();
  const Net net = build_net(t, t->grid(0.05), 0.2);
  Mat vals(static_cast<int>(net.points.size()), 3);
  Rng rng(3);
  for (int i = 0; i < vals.rows(); ++i) vals.row(i) << rng.uniform(), rng.uniform(), rng.uniform();
  const EmbPtr f = mcshane_extend({net, vals, net_ratio_range(net, vals).first});
  const SpacePtr sp = t;
  const LoadedEmbedding back = deserialize_embedding(serialize_embedding(f, sp));
  for (const auto& p : net.points) CHECK(back.embedding->eval(p) == f->eval(p));
  CHECK(back.space->spec().dump() == sp->spec().dump());
}

TEST_CASE("serialization: composite trees agree on probes") {
  const auto link = circle(2.0);
  const EmbPtr ce = cone_embed(circle_embedding(2.0), *link, v1(0.3));
  auto cs = std::make_shared<ConeSpace>(link, 1.0);
  const auto box = make_euclidean_box(v1(0), v1(1));
  auto P = std::make_shared<ProductSpace>(std::vector<SpacePtr>{cs, box});
  const EmbPtr pe = product_embed(ce, 2, identity_embedding(1), 1);
  const SpacePtr ps = P;
  const std::string bytes = serialize_embedding(pe, ps);
  const LoadedEmbedding back = deserialize_embedding(bytes);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec x = P->sample(rng);
    CHECK((back.embedding->eval(x) - pe->eval(x)).norm() <= 1e-12);
  }
  CHECK(serialize_embedding(back.embedding, back.space) == bytes);

  const auto E = make_holonomy_bundle(2 * kPi / 7, 2, 2 * kPi, 3);
  const EmbPtr G = bundle_embedding(*E);
  const SpacePtr es = E;
  const LoadedEmbedding bg = deserialize_embedding(serialize_embedding(G, es));
  for (int i = 0; i < 100; ++i) {
    const Vec x = E->sample(rng);
    CHECK((bg.embedding->eval(x) - G->eval(x)).norm() <= 1e-12);
  }
  CHECK(bg.space->distance(Vec::Zero(3), Vec::Ones(3)) == E->distance(Vec::Zero(3), Vec::Ones(3)));
}

TEST_CASE("serialization: bad bytes") {
  const auto c = circle();
  const SpacePtr sp = c;
  const std::string bytes = serialize_embedding(circle_embedding(1.0), sp);
  CHECK_THROWS_AS(deserialize_embedding(bytes.substr(0, bytes.size() / 2)), InputError);
  json j = json::parse(bytes);
  j["version"] = 99;
  CHECK_THROWS_AS(deserialize_embedding(j.dump()), InputError);
  j = json::parse(bytes);
  j["root"]["op"] = "mystery";
  CHECK_THROWS_AS(deserialize_embedding(j.dump()), InputError);
}
