#include "doctest.h"
#include "helpers.hpp"
#include "qembed/audit.hpp"
#include "qembed/pipelines.hpp"

using namespace qt;

namespace {

EmbPtr with_claim(EmbPtr f, double L) {
  std::const_pointer_cast<Embedding>(f)->set_bounds(Bounds::certified(L, 1.0 / L, "test"));  // f is freshly built
  return f;
}

Net line_net(const std::vector<double>& xs) {
  Net n;
  n.host = make_euclidean_box(v1(-1), v1(3));
  for (double x : xs) n.points.push_back(v1(x));
  return n;
}

// circle of circumference 1 covered by A = [0, 1/2] and B = [1/2, 1]
struct CirclePatch {
  SpacePtr host;
  EmbPtr F;
  double L = 1.0;
};
CirclePatch circle_patch() {
  CirclePatch cp;
  const auto c = circle();
  cp.host = c;
  Net A, B;
  A.host = B.host = c;
  Mat va(251, 1), vb(251, 1);
  for (int i = 0; i <= 250; ++i) {
    const double s = 0.002 * i;
    A.points.push_back(v1(s));
    B.points.push_back(v1(0.5 + s));
    va(i, 0) = s;
    vb(i, 0) = s;
  }
  const EmbPtr f = mcshane_extend({A, va, 1.0});
  const EmbPtr g = mcshane_extend({B, vb, 1.0});
  const EmbPtr dA = std::make_shared<DistMinNode>(c, A.points);
  cp.F = patch_two(f, g, dA, 1.0);
  return cp;
}

}  // namespace

TEST_CASE("mcshane examples") {
  Mat vals(2, 1);
  vals << 0, 1;
  const EmbPtr f = mcshane_extend({line_net({0, 1}), vals, 1.0});
  CHECK(f->eval(v1(0.5))[0] == doctest::Approx(0.5));
  CHECK(f->eval(v1(2.0))[0] == doctest::Approx(2.0));
  Mat cst = Mat::Constant(2, 1, 0.7);
  const EmbPtr g = mcshane_extend({line_net({0, 1}), cst, 1.0});
  // constant data: the extension is 0.7 plus L times the distance to the net
  for (double x : {-0.5, 0.2, 0.9, 2.5}) CHECK(g->eval(v1(x))[0] == doctest::Approx(0.7 + std::min(std::abs(x), std::abs(x - 1))));
  CHECK_THROWS_AS(mcshane_extend({line_net({}), Mat(0, 1), 1.0}), InputError);
}

TEST_CASE("mcshane agrees with the net and respects sqrt(N) L") {
  const auto t = torus();
  const Net net = build_net(t, t->grid(0.02), 0.1);
  const EmbPtr h = torus_circles_embedding(Mat::Identity(2, 2));
  Mat vals(static_cast<int>(net.points.size()), 4);
  for (std::size_t i = 0; i < net.points.size(); ++i) vals.row(static_cast<int>(i)) = h->eval(net.points[i]).transpose();
  const double L = net_ratio_range(net, vals).first;
  const EmbPtr f = mcshane_extend({net, vals, L});
  for (std::size_t i = 0; i < net.points.size(); ++i) CHECK(f->eval(net.points[i]) == Vec(vals.row(static_cast<int>(i)).transpose()));
  const DistortionReport r = empirical_distortion(*t, *f, 2000, 42);
  CHECK(r.max_expansion <= 2.0 * L * (1 + 1e-6));
}

TEST_CASE("product examples") {
  const auto box = make_euclidean_box(v1(0), v1(1));
  auto P = std::make_shared<ProductSpace>(std::vector<SpacePtr>{box, box});
  const EmbPtr id = product_embed(identity_embedding(1), 1, identity_embedding(1), 1);
  CHECK(empirical_distortion(*P, *id, 500, 1).distortion == doctest::Approx(1.0));
  CHECK(id->claimed() == doctest::Approx(std::sqrt(2.0)));

  const EmbPtr fg = product_embed(with_claim(identity_embedding(1), 2), 1, with_claim(identity_embedding(1), 3), 1);
  CHECK(fg->claimed() == doctest::Approx(3 * std::sqrt(2.0)));

  const auto c = circle();
  auto CI = std::make_shared<ProductSpace>(std::vector<SpacePtr>{c, box});
  const EmbPtr ce = circle_embedding(1.0);
  const EmbPtr pe = product_embed(ce, 1, identity_embedding(1), 1);
  const auto r = empirical_distortion(*CI, *pe, 3000, 42);
  CHECK(r.distortion <= std::sqrt(2.0) * ce->claimed() * (1 + 1e-6));
}

TEST_CASE("cone examples") {
  const auto link = circle(2 * kPi / 3);
  const EmbPtr f = circle_embedding(2 * kPi / 3);
  const EmbPtr g = cone_embed(f, *link, v1(0.0));
  CHECK(g->claimed() == doctest::Approx(20 * f->claimed()));
  for (double x : {0.0, 0.5, 1.7}) {
    Vec p(2);
    p << 0.0, x;
    CHECK(g->eval(p).norm() == 0.0);
  }
  ConeSpace cone(link, 1.0);
  CHECK(empirical_distortion(cone, *g, 3000, 42).distortion <= g->claimed());

  // one-point link: a ray
  const auto pt = std::make_shared<FiniteSpace>(Mat::Zero(1, 1));
  const EmbPtr fp = finite_embedding(*pt);
  const EmbPtr ray = cone_embed(fp, *pt, Vec::Zero(1));
  ConeSpace rs(pt, 1.0);
  CHECK(empirical_distortion(rs, *ray, 500, 3).distortion == doctest::Approx(1.0));

  const auto big = circle(8.0);
  CHECK_THROWS_AS(cone_embed(circle_embedding(8.0), *big, v1(0.0)), InputError);
}

TEST_CASE("patch examples") {
  const auto box = make_euclidean_box(v1(0), v1(1));
  std::vector<Vec> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(v1(0.001 * i));
  const EmbPtr F = patch_two(identity_embedding(1), identity_embedding(1), std::make_shared<DistMinNode>(box, grid), 1.0);
  CHECK(empirical_distortion(*box, *F, 1000, 2).distortion <= 10.0);

  const CirclePatch cp = circle_patch();
  CHECK(cp.F->claimed() == doctest::Approx(10.0));
  CHECK(empirical_distortion(*cp.host, *cp.F, 3000, 42).distortion <= 10.0);
}

TEST_CASE("patch first case lower bound") {
  const CirclePatch cp = circle_patch();
  Rng rng(21);
  int checked = 0;
  for (int i = 0; i < 4000 && checked < 300; ++i) {
    const Vec x = v1(0.5 * rng.uniform());
    const Vec y = v1(rng.uniform());
    const double ys = y[0];
    const double dA = ys <= 0.5 ? 0.0 : std::min(ys - 0.5, 1.0 - ys);
    const double d = cp.host->distance(x, y);
    if (!(d > 0) || 10.0 * cp.L * cp.L * dA > d) continue;
    CHECK((cp.F->eval(x) - cp.F->eval(y)).norm() >= d / (2 * cp.L) - 1e-12);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("construction tree bookkeeping") {
  const EmbPtr f = with_claim(identity_embedding(1), 2.5), g = with_claim(identity_embedding(1), 1.5);
  const EmbPtr p = product_embed(f, 1, g, 1);
  CHECK(p->claimed() == doctest::Approx(std::sqrt(2.0) * std::max(f->claimed(), g->claimed())).epsilon(1e-15));
  const auto link = circle(2.0);
  const EmbPtr ce = circle_embedding(2.0);
  CHECK(cone_embed(ce, *link, v1(0))->claimed() == doctest::Approx(20 * ce->claimed()).epsilon(1e-15));
  const CirclePatch cp = circle_patch();
  const double L = cp.F->params().at("L").get<double>();
  CHECK(cp.F->claimed() == doctest::Approx(10 * L * L).epsilon(1e-15));
  // annulus: sqrt(U / l) of its own constants
  const auto E = make_holonomy_bundle(2 * kPi / 7, 2, 2 * kPi, 2);
  const EmbPtr G = bundle_embedding(*E);
  CHECK(G->claimed() == doctest::Approx(std::sqrt(G->bounds().upper / G->bounds().lower)).epsilon(1e-15));
}

TEST_CASE("doubling: degenerate single ball") {
  const auto seg = make_euclidean_box(v1(0), v1(0.05));
  DoublingOptions opt;
  opt.r = 1.0;
  for (int i = 0; i <= 50; ++i) opt.samples.push_back(v1(0.001 * i));
  opt.sample_cover = 0.0005;
  const SpacePtr host = seg;
  TentInfo info;
  const EmbPtr G = doubling_embed(
      host, opt, [host](const Vec& q) { return LocalChart{std::make_shared<LocalLiftNode>(host, q, Bounds::certified(1, 1, "lift")), 1.0, 1.0}; },
      &info);
  CHECK(info.net_size == 1);
  CHECK(G->target_dim() == 2);
  CHECK(empirical_distortion(*seg, *G, 500, 5).distortion <= 3.0);
}

TEST_CASE("doubling rejects a coarse sampler") {
  const auto c = circle();
  DoublingOptions opt;
  opt.r = 0.1;
  opt.samples = {v1(0), v1(0.5)};
  opt.sample_cover = 0.25;
  const SpacePtr host = c;
  CHECK_THROWS_AS(doubling_embed(host, opt, [host](const Vec& q) { return LocalChart{std::make_shared<LocalLiftNode>(host, q, Bounds::certified(1, 1, "")), 1, 1}; }),
                  InputError);
}

TEST_CASE("doubling on the circle: coloring and lower-bound cases") {
  const auto c = circle();
  const double r = 0.1;
  TentInfo info;
  const EmbPtr G = torus_doubling(c, r, &info);
  CHECK(info.min_class_separation > 4 * r);
  const EmbPtr tent = G->children()[0];
  const json tp = tent->params();
  std::vector<Vec> centers;
  for (const auto& x : tp.at("centers")) centers.push_back(vec_from_json(x));
  const std::vector<int> classes = tp.at("classes").get<std::vector<int>>();
  const int N = info.N;
  Rng rng(8);
  int near = 0, far = 0;
  for (int i = 0; i < 400; ++i) {
    const Vec a = c->sample(rng);
    const Vec b = i % 2 ? c->perturb(a, r * rng.uniform(), rng) : c->sample(rng);
    const double d = c->distance(a, b);
    if (!(d > 1e-9)) continue;
    const Vec Ga = G->eval(a), Gb = G->eval(b);
    if (d < r / 2) {
      std::size_t q = 0;
      for (std::size_t j = 1; j < centers.size(); ++j)
        if (c->distance(a, centers[j]) < c->distance(a, centers[q])) q = j;
      const int k = classes[q];
      CHECK((Ga.segment(k * N, N) - Gb.segment(k * N, N)).norm() >= info.lambda_loc * d - 1e-12);
      ++near;
    } else {
      const int off = info.K * N;
      CHECK((Ga.tail(Ga.size() - off) - Gb.tail(Gb.size() - off)).norm() >= d / 2 - 1e-12);
      ++far;
    }
  }
  CHECK(near > 50);
  CHECK(far > 50);
  CHECK(empirical_distortion(*c, *G, 2000, 42).pass);
}

TEST_CASE("doubling on the flat torus, r = 0.2") {
  const auto t = torus();
  const EmbPtr G = torus_doubling(t, 0.2);
  const auto r = empirical_distortion(*t, *G, 300, 42);
  CHECK(std::isfinite(r.distortion));
  CHECK(r.pass);
}

TEST_CASE("annulus: radial coordinate and same-annulus lower bound") {
  const auto E = make_holonomy_bundle(2 * kPi / 7, 2, 2 * kPi, 4);
  const EmbPtr G = bundle_embedding(*E);
  const double D = E->base_diameter();
  Vec x(3), y(3);
  x << 0.3, 0, 0;
  y << 1.1, 10 * D, 0;
  CHECK((G->eval(x) - G->eval(y)).norm() >= 10 * D);
  CHECK(G->eval(y)[0] == doctest::Approx(10 * D));

  const auto pieces = bundle_pieces(*E);
  // offsets of F_0..F_3 after the radial coordinate
  std::vector<int> off(4), dim(4);
  int o = 1;
  for (int s = 0; s < 4; ++s) {
    off[static_cast<std::size_t>(s)] = o;
    dim[static_cast<std::size_t>(s)] = G->children()[static_cast<std::size_t>(s + 1)]->target_dim();
    o += dim[static_cast<std::size_t>(s)];
  }
  Rng rng(12);
  int checked = 0;
  for (int i = 0; i < 4000; ++i) {
    const int j = static_cast<int>(rng.index(5));
    const auto [a, b] = E->annulus(j);
    auto draw = [&] {
      const double rad = a + (b - a) * rng.uniform();
      const double phi = 2 * kPi * rng.uniform();
      Vec p(3);
      p << 2 * kPi * rng.uniform(), rad * std::cos(phi), rad * std::sin(phi);
      return p;
    };
    const Vec p = draw(), q = draw();
    const double d = E->distance(p, q);
    const double dr = std::abs(p.tail(2).norm() - q.tail(2).norm());
    if (!(d > 1e-9) || d < 4 * dr) continue;
    const auto& pc = pieces[static_cast<std::size_t>(j)];
    const int s = j % 4;
    const Vec gp = G->eval(p), gq = G->eval(q);
    const double img = (gp.segment(off[static_cast<std::size_t>(s)], dim[static_cast<std::size_t>(s)]) -
                        gq.segment(off[static_cast<std::size_t>(s)], dim[static_cast<std::size_t>(s)]))
                           .norm();
    CHECK(img >= pc.lower / pc.upper_ext * d - 1e-12);
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("annulus requires every k") {
  const auto E = make_holonomy_bundle(1.0, 2, 2 * kPi, 3);
  auto pieces = bundle_pieces(*E);
  pieces.erase(pieces.begin() + 2);
  CHECK_THROWS_AS(annulus_embed(std::make_shared<FiberNormNode>(1, 2), pieces), InputError);
}

TEST_CASE("gh transfer on the thin torus") {
  const ThinTorus tt = thin_torus_gh(0.01);
  CHECK(tt.info.kappa > 0);
  const auto r = empirical_distortion(*tt.space, *tt.embedding, 1000, 42);
  CHECK(r.pass);
  const GhDefect g = thin_torus_projection_defect(0.01, 100, 3);
  CHECK(g.fiber_diameter <= 0.01);
  CHECK(g.max_defect <= 2 * 0.01);
}

TEST_CASE("gh transfer rejects a bad net map") {
  const auto t = torus(1.0, 0.01);
  GhOptions opt;
  opt.h_net = build_net(t, t->grid(0.004), 0.012);
  Rng rng(1);
  opt.h_values = Mat(static_cast<int>(opt.h_net.points.size()), 2);
  for (int i = 0; i < opt.h_values.rows(); ++i) opt.h_values.row(i) << rng.uniform(), rng.uniform();
  opt.h_distortion = 1.0;
  opt.local.r = 0.25;
  opt.local.samples = t->grid(0.004);
  opt.local.sample_cover = t->grid_cover(0.004);
  const SpacePtr host = t;
  CHECK_THROWS_AS(gh_transfer(host, opt, [host](const Vec& q) { return LocalChart{std::make_shared<LocalLiftNode>(host, q, Bounds::certified(1, 1, "")), 1, 1}; }),
                  InvariantError);
}
