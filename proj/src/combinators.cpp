#include "qembed/combinators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qe {

namespace {

constexpr double kTentLip = 11.0 / 3.0;

double sigma_max(const Mat& M) { return Eigen::JacobiSVD<Mat>(M).singularValues()[0]; }

std::string fmt(const char* label, double x) {
  std::ostringstream os;
  os.precision(6);
  os << label << "=" << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- primitives

TorusCircles torus_circles(const Mat& B) {
  const int n = static_cast<int>(B.rows());
  if (B.cols() != n || n == 0) throw InputError("torus_circles: basis must be square");
  Eigen::FullPivLU<Mat> lu(B);
  if (!lu.isInvertible()) throw InputError("torus_circles: degenerate basis");
  TorusCircles tc;
  tc.W = lu.inverse();
  tc.radii.resize(n);
  Mat What = tc.W, Bhat = B;
  for (int i = 0; i < n; ++i) {
    const double wn = tc.W.row(i).norm();
    tc.radii[i] = 1.0 / (2 * kPi * wn);
    What.row(i) /= wn;
    Bhat.col(i) *= wn;
  }
  tc.info.E = sigma_max(What);
  tc.info.C = 0.5 * kPi * sigma_max(Bhat);
  return tc;
}

EmbPtr torus_circles_embedding(const Mat& B) {
  const TorusCircles tc = torus_circles(B);
  return std::make_shared<TorusCirclesNode>(
      tc.W, tc.radii,
      Bounds::certified(tc.info.E, 1.0 / tc.info.C,
                        "one circle per dual vector; " + fmt("E", tc.info.E) + ", " + fmt("C", tc.info.C)));
}

EmbPtr circle_embedding(double c) {
  if (!(c > 0)) throw InputError("circle: circumference must be positive");
  return torus_circles_embedding(Mat::Constant(1, 1, c));
}

EmbPtr identity_embedding(int dim) { return std::make_shared<CoordsNode>(0, dim); }

EmbPtr finite_embedding(const FiniteSpace& space) {
  const Mat& D = space.matrix();
  const int m = space.size();
  double hi = 0.0, lo = kInf;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double r = (D.row(i) - D.row(j)).norm() / D(i, j);
      hi = std::max(hi, r);
      lo = std::min(lo, r);
    }
  if (m == 1) hi = lo = 1.0;
  return std::make_shared<TableNode>(D, Bounds::certified(hi, lo, "distance-row embedding, exact constants on all pairs"));
}

// ---------------------------------------------------------------- McShane

std::pair<double, double> net_ratio_range(const Net& net, const Mat& values) {
  if (static_cast<std::size_t>(values.rows()) != net.points.size()) throw InputError("net function: values/net mismatch");
  double hi = 0.0, lo = kInf;
  for (std::size_t a = 0; a < net.points.size(); ++a)
    for (std::size_t b = a + 1; b < net.points.size(); ++b) {
      const double d = net.host->distance(net.points[a], net.points[b]);
      if (d <= 0) throw InvariantError("net function: coincident net points");
      const double r = (values.row(static_cast<int>(a)) - values.row(static_cast<int>(b))).norm() / d;
      hi = std::max(hi, r);
      lo = std::min(lo, r);
    }
  if (net.points.size() < 2) lo = hi;
  return {hi, lo};
}

EmbPtr mcshane_extend(const NetFunction& f) {
  if (f.net.points.empty()) throw InputError("mcshane_extend: empty net");
  if (!f.net.host) throw InputError("mcshane_extend: net has no host");
  const double N = static_cast<double>(f.values.cols());
  // a relative 1e-12 margin keeps the net values exact under rounding
  const double L = f.L * (1.0 + 1e-12);
  Bounds b;
  b.upper = std::sqrt(N) * L;
  b.lower = 0.0;
  b.claimed = kInf;
  b.provenance = "inf-convolution extension, sqrt(N) L with " + fmt("L", L);
  return std::make_shared<McShaneNode>(f.net.host, f.net.points, f.values, L, b);
}

// ---------------------------------------------------------------- helpers

EmbPtr normalize_at(const EmbPtr& f, const Vec& x0, double U) {
  if (!(U > 0) || !std::isfinite(U)) throw InputError("normalize_at: bad Lipschitz constant");
  return std::make_shared<AffineNode>(f, 1.0 / U, -f->eval(x0) / U);
}

EmbPtr balance(const EmbPtr& f) {
  const Bounds& b = f->bounds();
  if (!std::isfinite(b.upper) || !(b.lower > 0)) return f;
  return std::make_shared<AffineNode>(f, 1.0 / std::sqrt(b.upper * b.lower), Vec::Zero(f->target_dim()));
}

EmbPtr restrict_coords(const EmbPtr& f, int offset, int len) {
  return std::make_shared<PipeNode>(std::make_shared<CoordsNode>(offset, len), f, f->bounds());
}

EmbPtr pipe(const EmbPtr& first, const EmbPtr& second, const Bounds& b) { return std::make_shared<PipeNode>(first, second, b); }

// ---------------------------------------------------------------- combinators

EmbPtr product_embed(const EmbPtr& f, int dim_x, const EmbPtr& g, int dim_y) {
  const EmbPtr fb = balance(restrict_coords(f, 0, dim_x));
  const EmbPtr gb = balance(restrict_coords(g, dim_x, dim_y));
  Bounds b;
  b.upper = std::max(fb->bounds().upper, gb->bounds().upper);
  b.lower = std::min(fb->bounds().lower, gb->bounds().lower);
  b.claimed = std::sqrt(2.0) * std::max(f->claimed(), g->claimed());
  b.provenance = "product of two embeddings, sqrt(2) max(L_f, L_g)";
  return std::make_shared<ConcatNode>("product", std::vector<EmbPtr>{fb, gb}, b);
}

EmbPtr cone_embed(const EmbPtr& f, const MetricSpace& link, const Vec& x0) {
  const double diam = estimate_diameter(link);
  if (diam > kPi + 1e-9) throw InputError("cone_embed: link diameter exceeds pi");
  const double L = std::max(1.0, f->claimed());
  if (!std::isfinite(L)) throw InputError("cone_embed: link embedding has no finite distortion bound");
  const Bounds& fb = f->bounds();
  const double s = (std::isfinite(fb.upper) && fb.lower > 0) ? 1.0 / std::sqrt(fb.upper * fb.lower) : 1.0;
  const Vec shift = -s * f->eval(x0);
  Bounds b;
  b.claimed = 20.0 * L;
  b.provenance = "cone (t, x) -> (L t, t f(x)), 20 L with " + fmt("L", L);
  return std::make_shared<ConeNode>(f, L, s, shift, b);
}

EmbPtr patch_two(const EmbPtr& f_ext, const EmbPtr& g_ext, const EmbPtr& dist_A, double L) {
  if (!(L >= 1.0) || !std::isfinite(L)) throw InputError("patch_two: L must be finite and >= 1");
  Bounds b;
  b.upper = 3.0 * L;
  b.lower = 1.0 / (10.0 * L * L);
  b.claimed = 10.0 * L * L;
  b.provenance = "two-set patch (f, g, d(., A)), 10 L^2 with " + fmt("L", L);
  return std::make_shared<ConcatNode>("patch", std::vector<EmbPtr>{f_ext, g_ext, dist_A}, b, json{{"L", L}});
}

json TentInfo::to_json() const {
  return {{"net_size", net_size}, {"classes", K},       {"chart_dim", N},
          {"lambda_loc", lambda_loc}, {"min_class_separation", std::isfinite(min_class_separation) ? json(min_class_separation) : json(nullptr)},
          {"net_eps", net_eps},   {"cover", cover}};
}

EmbPtr tent_part(const SpacePtr& host, const DoublingOptions& opt, const LocalEmbedder& local, TentInfo& info) {
  const double r = opt.r;
  if (!(r > 0)) throw InputError("tent: radius must be positive");
  info.net_eps = r / 10.0;
  info.cover = info.net_eps + opt.sample_cover;
  if (info.cover > r / 8.0 + 1e-15) throw InputError("tent: sampler too coarse for an r/8 cover");
  const Net net = build_net(host, opt.samples, info.net_eps, opt.max_net);
  const std::size_t m = net.points.size();
  info.net_size = m;
  // greedy coloring in net order: same class => separation > 4r
  std::vector<int> cls(m, -1);
  int K = 0;
  std::vector<char> used;
  for (std::size_t i = 0; i < m; ++i) {
    used.assign(static_cast<std::size_t>(K) + 1, 0);
    for (std::size_t j = 0; j < i; ++j)
      if (host->distance(net.points[i], net.points[j]) <= 4.0 * r) used[static_cast<std::size_t>(cls[j])] = 1;
    int c = 0;
    while (used[static_cast<std::size_t>(c)]) ++c;
    cls[i] = c;
    K = std::max(K, c + 1);
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (cls[i] == cls[j]) info.min_class_separation = std::min(info.min_class_separation, host->distance(net.points[i], net.points[j]));
  info.K = K;
  std::vector<EmbPtr> charts;
  info.lambda_loc = kInf;
  for (const auto& q : net.points) {
    const LocalChart lc = local(q);
    if (!(lc.lower > 0) || !(lc.upper >= lc.lower) || !std::isfinite(lc.upper))
      throw InvariantError("tent: local embedder returned invalid constants");
    charts.push_back(normalize_at(lc.chart, q, lc.upper));
    info.lambda_loc = std::min(info.lambda_loc, lc.lower / lc.upper);
  }
  info.N = charts[0]->target_dim();
  Bounds b;
  b.upper = std::sqrt(static_cast<double>(K)) * kTentLip;
  b.provenance = "glued normalized local charts, 11/3-Lipschitz per class";
  return std::make_shared<TentGlueNode>(host, net.points, cls, K, r, charts, b);
}

EmbPtr doubling_embed(const SpacePtr& host, const DoublingOptions& opt, const LocalEmbedder& local, TentInfo* out) {
  TentInfo info;
  const EmbPtr tent = tent_part(host, opt, local, info);
  std::vector<Vec> centers;
  {
    const json p = tent->params();
    for (const auto& c : p.at("centers")) centers.push_back(vec_from_json(c));
  }
  const double Q = static_cast<double>(centers.size());
  const EmbPtr F = std::make_shared<DistNetNode>(host, centers, Bounds{std::sqrt(Q), 0.0, kInf, "net distance vector"});
  const double U = std::sqrt(info.K * kTentLip * kTentLip + Q);
  const double lo = std::min(info.lambda_loc, 0.5);
  Bounds b = Bounds::certified(U, lo, "doubling: (g_1..g_K, d(., q_i)); upper sqrt(K (11/3)^2 + |Q|), lower min(lambda_loc, 1/2); " +
                                          fmt("K", info.K) + ", " + fmt("|Q|", Q));
  if (out) *out = info;
  return std::make_shared<ConcatNode>("doubling", std::vector<EmbPtr>{tent, F}, b, json{{"r", opt.r}, {"tent", info.to_json()}});
}

EmbPtr annulus_embed(const EmbPtr& radial, const std::vector<AnnulusPiece>& pieces) {
  if (pieces.empty()) throw InputError("annulus_embed: no pieces");
  int kmax = 0;
  for (const auto& p : pieces) kmax = std::max(kmax, p.k);
  for (int k = 0; k <= kmax; ++k)
    if (std::none_of(pieces.begin(), pieces.end(), [k](const AnnulusPiece& p) { return p.k == k; }))
      throw InputError("annulus_embed: missing annulus embedder for k = " + std::to_string(k));
  std::vector<EmbPtr> children{radial};
  double sum_lip2 = 1.0;
  double lower = 0.25;
  json info = json::array();
  for (int s = 0; s < 4; ++s) {
    std::vector<CutoffPiece> cp;
    std::vector<EmbPtr> charts;
    int dim = 1;
    double lip = 0.0;
    for (const auto& p : pieces) {
      if (p.k % 4 != s) continue;
      charts.push_back(normalize_at(p.chart, p.x0, p.upper_ext));
      cp.push_back({p.a, p.b, p.tau});
      dim = std::max(dim, p.chart->target_dim());
      const double l = 1.0 + p.M / p.tau;
      lip = std::max(lip, l);
      lower = std::min(lower, p.lower / p.upper_ext);
      info.push_back({{"k", p.k}, {"a", p.a}, {"b", p.b}, {"tau", p.tau}, {"upper_ext", p.upper_ext}, {"lower", p.lower}, {"M", p.M}, {"lip", l}});
    }
    if (charts.empty()) continue;
    Bounds b;
    b.upper = lip;
    b.provenance = "cut-off sum of normalized annulus maps";
    children.push_back(std::make_shared<CutoffSumNode>(radial, cp, charts, dim, b));
    sum_lip2 += lip * lip;
  }
  const double U = std::sqrt(sum_lip2);
  Bounds b = Bounds::certified(U, lower, "annulus decomposition (r, F_0..F_3); upper sqrt(1 + sum Lip(F_s)^2), lower min(1/4, min_k lower_k/upper_k)");
  return std::make_shared<ConcatNode>("annulus", children, b, json{{"pieces", info}});
}

json GhInfo::to_json() const {
  return {{"L_H", L_H}, {"lambda_H", lambda_H}, {"kappa", kappa}, {"tent", tent.to_json()}};
}

EmbPtr gh_transfer(const SpacePtr& host, const GhOptions& opt, const LocalEmbedder& local, GhInfo* out) {
  GhInfo info;
  const auto [hi, lo] = net_ratio_range(opt.h_net, opt.h_values);
  info.L_H = hi;
  info.lambda_H = lo;
  if (!(lo > 0) || std::sqrt(hi / lo) > 2.0 * opt.h_distortion + 1e-12)
    throw InvariantError("gh_transfer: net map fails the 2-bi-Lipschitz audit on the net");
  const double m = static_cast<double>(opt.h_values.cols());
  NetFunction nf{opt.h_net, opt.h_values, hi};
  const EmbPtr H = mcshane_extend(nf);
  const EmbPtr tent = tent_part(host, opt.local, local, info.tent);
  const double rho = opt.local.r;
  const double eta = opt.h_cover;
  info.kappa = lo - 2.0 * eta * (lo + std::sqrt(m) * hi) / (rho / 2.0);
  if (!(info.kappa > 0)) throw InvariantError("gh_transfer: transfer net too coarse for the local scale");
  const double U = std::sqrt(m * hi * hi + info.tent.K * kTentLip * kTentLip);
  const double lower = std::min(info.tent.lambda_loc, info.kappa);
  Bounds b = Bounds::certified(U, lower, "GH transfer (H, g_1..g_K); upper sqrt(m L_H^2 + K (11/3)^2), lower min(lambda_loc, kappa); implementation-derived");
  if (out) *out = info;
  return std::make_shared<ConcatNode>("gh_transfer", std::vector<EmbPtr>{H, tent}, b, info.to_json());
}

}  // namespace qe
