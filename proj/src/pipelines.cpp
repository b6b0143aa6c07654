#include "qembed/pipelines.hpp"

#include <algorithm>
#include <cmath>

#include "qembed/lattice.hpp"

namespace qe {

namespace {

double wrap_pi(double a) {
  double w = std::remainder(a, 2 * kPi);
  if (w <= -kPi) w += 2 * kPi;
  return w;
}

// lattice of the flat surrogate on T_k, LLL-reduced
Mat annulus_lattice(double c, double theta_w, double rho) {
  Mat T(2, 2);
  T << c, 0.0, rho * theta_w, 2 * kPi * rho;
  return lll_reduce(T).basis;
}

Mat translation_basis(const QuotientSpace& sp) {
  if (!sp.is_lattice()) throw InputError("space is not a lattice quotient");
  const int n = sp.dim();
  const auto& gens = sp.generators();
  if (static_cast<int>(gens.size()) != n) throw InputError("lattice quotient must have full rank");
  Mat T(n, n);
  for (int i = 0; i < n; ++i) T.col(i) = gens[static_cast<std::size_t>(i)].translation();
  if (Eigen::FullPivLU<Mat>(T).rank() < n) throw InputError("lattice quotient must have full rank");
  return T;
}

double shortest_vector(const Mat& B) { return short_basis(B, StratParams::for_dimension(static_cast<int>(B.rows()))).norms[0]; }

// finest grid with r/10 + cover <= r/8
std::pair<std::vector<Vec>, double> dense_grid(const QuotientSpace& sp, double r) {
  double h = r / 40.0;
  for (int it = 0; it < 60 && sp.grid_cover(h) > r / 40.0; ++it) h *= 0.9;
  return {sp.grid(h), sp.grid_cover(h)};
}

}  // namespace

// ---------------------------------------------------------------- bundles

std::vector<AnnulusPiece> bundle_pieces(const HolonomyBundleSpace& space) {
  if (space.holonomy().rows() != 2) throw InputError("annulus pipeline: fiber dimension must be 2");
  const double c = space.circumference();
  const double tw = wrap_pi(space.theta());
  const double D = space.base_diameter();
  std::vector<AnnulusPiece> out;
  {
    AnnulusPiece p;
    p.k = 0;
    p.a = 0.0;
    p.b = 2 * D;
    p.tau = 0.5 * D;
    const double av = std::abs(tw) * 2.5 * D / c;
    const double lam = 0.5 * (av + std::sqrt(av * av + 4.0));
    p.upper_ext = lam;
    p.lower = (2.0 / kPi) / lam;
    p.chart = std::make_shared<UntwistCircleNode>(c, tw / c, Bounds::certified(lam, p.lower, "untwisted circle x fiber on the central tube"));
    p.x0 = Vec::Zero(3);
    p.M = 3.5 * D;
    out.push_back(p);
  }
  for (int k = 1; k <= space.k_max(); ++k) {
    const double rho = std::ldexp(D, k);
    AnnulusPiece p;
    p.k = k;
    p.a = 0.5 * rho;
    p.b = 2.0 * rho;
    p.tau = 0.25 * rho;
    const TorusCircles tc = torus_circles(annulus_lattice(c, tw, rho));
    const double s = 1.0 / tc.info.E;
    p.upper_ext = 2 * kPi;
    p.lower = 0.5 / (tc.info.C * tc.info.E);
    p.chart = std::make_shared<AnnulusChartNode>(rho, tc.W, s * tc.radii,
                                                 Bounds::certified(p.upper_ext, p.lower, "radius x flat torus circles on an annulus"));
    p.x0 = Vec::Zero(3);
    p.x0[1] = rho;
    p.M = 3 * rho + p.tau + D;
    out.push_back(p);
  }
  return out;
}

EmbPtr bundle_embedding(const HolonomyBundleSpace& space) {
  return annulus_embed(std::make_shared<FiberNormNode>(1, 2), bundle_pieces(space));
}

json MetricChange::to_json() const {
  return {{"k", k}, {"pairs", pairs}, {"min_ratio", min_ratio}, {"max_ratio", max_ratio}, {"within_10", within(10.0)}};
}

MetricChange annulus_metric_change(const HolonomyBundleSpace& space, int k, int pairs, std::uint64_t seed) {
  if (k < 1 || k > space.k_max()) throw InputError("metric change: annulus index must be in 1..k_max");
  if (space.holonomy().rows() != 2) throw InputError("metric change: fiber dimension must be 2");
  const double c = space.circumference();
  const double tw = wrap_pi(space.theta());
  const auto [a, b] = space.annulus(k);
  const double rho = std::ldexp(space.base_diameter(), k);
  const LatticeEnumerator en(annulus_lattice(c, tw, rho));
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
  auto inside = [&](double r) { return r > a && r < b; };
  auto draw = [&]() {
    double r = 0.0;
    do r = a + (b - a) * rng.uniform();
    while (!inside(r));
    const double phi = 2 * kPi * rng.uniform();
    Vec x(3);
    x << c * rng.uniform(), r * std::cos(phi), r * std::sin(phi);
    return x;
  };
  MetricChange mc;
  mc.k = k;
  for (int i = 0; i < pairs; ++i) {
    const Vec x = draw();
    Vec y;
    if (i % 2 == 0) {
      y = draw();
    } else {
      const double s = rho * std::exp2(-6.0 * rng.uniform());
      for (int t = 0; t < 32; ++t) {
        Vec cand = x;
        for (int j = 0; j < 3; ++j) cand[j] += s * rng.normal() / std::sqrt(3.0);
        if (inside(cand.tail(2).norm())) {
          y = cand;
          break;
        }
      }
      if (y.size() == 0) y = draw();
    }
    const double d = space.distance(x, y);
    if (!(d > 1e-12)) continue;
    const double dr = x.tail(2).norm() - y.tail(2).norm();
    const double dphi = std::atan2(x[2], x[1]) - std::atan2(y[2], y[1]);
    Vec v(2);
    v << x[0] - y[0], rho * dphi;
    const double df = std::sqrt(dr * dr + en.dist2(v));
    mc.min_ratio = std::min(mc.min_ratio, df / d);
    mc.max_ratio = std::max(mc.max_ratio, df / d);
    ++mc.pairs;
  }
  return mc;
}

// ---------------------------------------------------------------- lens

LensEmbedding lens_embedding(int p, int q) {
  const SpacePtr space = make_lens(p, q);
  const int s = lens_inverse(p, q);
  const double zone_limit = 5 * kPi / 12;
  const double tau = kPi / 12;
  const double zone_factor = 4.0 * (1.0 / std::cos(zone_limit)) / (1.0 / std::cos(kPi / 3));
  const double ext_factor = 1.0 + (kPi / 2) / tau;
  const double D = kPi / p;
  const int kmax = std::max(0, static_cast<int>(std::ceil(std::log2(zone_limit / D) - 1e-12)) - 1);
  LensEmbedding out;
  out.space = space;
  out.k_max = kmax;
  std::vector<EmbPtr> ext;
  double L = 1.0;
  json charts = json::array();
  for (int j = 1; j <= 2; ++j) {
    const double theta = 2 * kPi * (j == 1 ? q : s) / p;
    const auto bundle = make_holonomy_bundle(theta, 2, 2 * kPi / p, kmax);
    const EmbPtr Fb = bundle_embedding(*bundle);
    const double Ub = Fb->bounds().upper, lb = Fb->bounds().lower;
    const EmbPtr chart = std::make_shared<LensChartNode>(j, zone_limit, Bounds{zone_factor, 0.25, kInf, "lens chart into the holonomy bundle"});
    const double U = 4.0 * Ub, lo = lb / 4.0;
    const EmbPtr h = pipe(chart, Fb, Bounds::certified(U, lo, "bundle embedding after the chart, factor 4 on the chart domain"));
    const double sc = 1.0 / std::sqrt(U * lo);
    const double Lj = std::sqrt(U / lo);
    const double lip_ext = ext_factor * sc * Ub * zone_factor;
    Vec x0 = Vec::Zero(4);
    x0[j == 1 ? 0 : 2] = 1.0;
    const EmbPtr hn = std::make_shared<AffineNode>(h, sc, -sc * h->eval(x0));
    Bounds eb;
    eb.upper = lip_ext;
    eb.provenance = "chart map cut off at distance pi/12 from its domain";
    ext.push_back(std::make_shared<CutoffSumNode>(std::make_shared<LensRegionDistNode>(j), std::vector<CutoffPiece>{{0.0, 0.0, tau}},
                                                  std::vector<EmbPtr>{hn}, hn->target_dim(), eb));
    L = std::max({L, Lj, lip_ext});
    charts.push_back({{"chart", j}, {"theta", theta}, {"bundle_claimed", Fb->claimed()}, {"L_chart", Lj}, {"lip_ext", lip_ext}});
  }
  out.L = L;
  out.embedding = patch_two(ext[0], ext[1], std::make_shared<LensRegionDistNode>(1), L);
  out.info = {{"p", p}, {"q", q}, {"s", s}, {"k_max", kmax}, {"L", L}, {"charts", charts}};
  return out;
}

// ---------------------------------------------------------------- tori

EmbPtr torus_embedding(const QuotientSpace& torus) { return torus_circles_embedding(lll_reduce(translation_basis(torus)).basis); }

EmbPtr torus_doubling(const std::shared_ptr<const QuotientSpace>& torus, double r, TentInfo* info) {
  const double lam1 = shortest_vector(translation_basis(*torus));
  if (!(r > 0) || r > lam1 / 5.0 + 1e-12) throw InputError("torus doubling: r must lie in (0, shortest/5]");
  auto [samples, cover] = dense_grid(*torus, r);
  DoublingOptions opt;
  opt.r = r;
  opt.samples = std::move(samples);
  opt.sample_cover = cover;
  const SpacePtr host = torus;
  LocalEmbedder local = [host](const Vec& q) {
    return LocalChart{std::make_shared<LocalLiftNode>(host, q, Bounds::certified(1.0, 1.0, "isometric local lift")), 1.0, 1.0};
  };
  return doubling_embed(host, opt, local, info);
}

ThinTorus thin_torus_gh(double delta, double rho, double eta) {
  if (!(delta > 0) || delta > 0.05) throw InputError("thin torus: delta must lie in (0, 0.05]");
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = 1.0;
  B(1, 1) = delta;
  const auto host = make_flat_torus(B);
  const EmbPtr h = circle_embedding(1.0);
  auto [samples, cover] = dense_grid(*host, rho);
  GhOptions opt;
  opt.h_net = build_net(host, samples, eta);
  opt.h_cover = eta + cover;
  opt.h_values.resize(static_cast<int>(opt.h_net.points.size()), h->target_dim());
  for (std::size_t i = 0; i < opt.h_net.points.size(); ++i)
    opt.h_values.row(static_cast<int>(i)) = h->eval(opt.h_net.points[i].head(1)).transpose();
  opt.h_distortion = h->claimed();
  opt.local.r = rho;
  opt.local.samples = std::move(samples);
  opt.local.sample_cover = cover;
  const SpacePtr hs = host;
  const EmbPtr fiber = circle_embedding(delta);
  LocalEmbedder local = [hs, fiber](const Vec& q) {
    const EmbPtr lift = std::make_shared<LocalLiftNode>(hs, q, Bounds::certified(1.0, 1.0, "local lift"));
    const EmbPtr xpart = pipe(lift, std::make_shared<CoordsNode>(0, 1), Bounds{1.0, 0.0, kInf, "base coordinate of the lift"});
    const EmbPtr ypart = pipe(std::make_shared<CoordsNode>(1, 1), fiber, fiber->bounds());
    const Bounds b = Bounds::certified(1.0, 2.0 / kPi, "lifted base coordinate x fiber circle");
    return LocalChart{std::make_shared<ConcatNode>("local_chart", std::vector<EmbPtr>{xpart, ypart}, b), 1.0, 2.0 / kPi};
  };
  ThinTorus out;
  out.space = host;
  out.delta = delta;
  out.embedding = gh_transfer(host, opt, local, &out.info);
  return out;
}

json GhDefect::to_json() const {
  return {{"delta", delta}, {"fiber_diameter", fiber_diameter}, {"max_defect", max_defect}, {"pairs", pairs}, {"pass", pass()}};
}

GhDefect thin_torus_projection_defect(double delta, int pairs, std::uint64_t seed) {
  if (!(delta > 0)) throw InputError("thin torus: delta must be positive");
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = 1.0;
  B(1, 1) = delta;
  const auto X = make_flat_torus(B);
  const auto Y = make_flat_torus(Mat::Constant(1, 1, 1.0));
  GhDefect g;
  g.delta = delta;
  // fiber diameter over sampled fibers
  Rng rng(mix_seed(seed, 0xF1BE));
  for (int f = 0; f < 16; ++f) {
    const double x = rng.uniform();
    for (int i = 0; i < 33; ++i)
      for (int j = i + 1; j < 33; ++j) {
        Vec a(2), b(2);
        a << x, delta * i / 32.0;
        b << x, delta * j / 32.0;
        g.fiber_diameter = std::max(g.fiber_diameter, X->distance(a, b));
      }
  }
  for (int i = 0; i < pairs; ++i) {
    const auto [a, b] = X->sample_pair(seed, static_cast<std::uint64_t>(i));
    const double dy = Y->distance(a.head(1), b.head(1));
    g.max_defect = std::max(g.max_defect, std::abs(X->distance(a, b) - dy));
    ++g.pairs;
  }
  return g;
}

// ---------------------------------------------------------------- dispatch

EmbPtr embed_auto(const SpacePtr& space, const std::string& method) {
  static const std::vector<std::string> methods{"auto", "doubling", "annulus", "cone", "product", "patch"};
  if (std::find(methods.begin(), methods.end(), method) == methods.end()) throw InputError("unknown method: " + method);
  const json spec = space->spec();
  const std::string kind = spec.contains("kind") ? spec.at("kind").get<std::string>() : std::string("quotient");
  auto need = [&](std::initializer_list<const char*> ok) {
    for (const char* m : ok)
      if (method == m) return;
    throw InputError("method '" + method + "' does not apply to space kind '" + kind + "'");
  };
  if (const auto* hb = dynamic_cast<const HolonomyBundleSpace*>(space.get())) {
    need({"auto", "annulus"});
    return bundle_embedding(*hb);
  }
  if (const auto* cs = dynamic_cast<const ConeSpace*>(space.get())) {
    need({"auto", "cone"});
    Rng rng(0xC0DE);
    return cone_embed(embed_auto(cs->link()), *cs->link(), cs->link()->sample(rng));
  }
  if (const auto* ps = dynamic_cast<const ProductSpace*>(space.get())) {
    need({"auto", "product"});
    const auto& fs = ps->factors();
    EmbPtr acc = embed_auto(fs[0]);
    int dim = fs[0]->dim();
    for (std::size_t i = 1; i < fs.size(); ++i) {
      acc = product_embed(acc, dim, embed_auto(fs[i]), fs[i]->dim());
      dim += fs[i]->dim();
    }
    return acc;
  }
  if (const auto* fs = dynamic_cast<const FiniteSpace*>(space.get())) {
    need({"auto"});
    return finite_embedding(*fs);
  }
  if (const auto* es = dynamic_cast<const EllipsoidSpace*>(space.get())) {
    need({"auto"});
    Bounds b;
    b.provenance = "displayed ellipsoid map; constant measured by audit, not claimed";
    return std::make_shared<EllipsoidMapNode>(es->N(), b);
  }
  const auto qs = std::dynamic_pointer_cast<const QuotientSpace>(space);
  if (!qs) throw InputError("no embedding method for space kind '" + kind + "'");
  if (kind == "lens") {
    need({"auto", "patch"});
    return lens_embedding(spec.at("p").get<int>(), spec.at("q").get<int>()).embedding;
  }
  if (kind == "euclidean") {
    need({"auto"});
    return identity_embedding(qs->dim());
  }
  if (qs->is_lattice() && static_cast<int>(qs->generators().size()) == qs->dim() && qs->ambient().kind == AmbientKind::Euclidean) {
    need({"auto", "doubling"});
    if (method == "doubling") return torus_doubling(qs, shortest_vector(translation_basis(*qs)) / 5.0);
    return torus_embedding(*qs);
  }
  throw InputError("no embedding method for space kind '" + kind + "'");
}

}  // namespace qe
