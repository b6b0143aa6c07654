#include "qembed/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qembed/models.hpp"

namespace qe {

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double num_or(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

json rows_json(const Mat& m) {
  json r = json::array();
  for (int i = 0; i < m.rows(); ++i) r.push_back(vec_to_json(m.row(i).transpose()));
  return r;
}
Mat rows_from(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of rows");
  if (j.empty()) return Mat(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Mat m(static_cast<int>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vec v = vec_from_json(j[i]);
    if (v.size() != cols) throw InputError("ragged matrix");
    m.row(static_cast<int>(i)) = v.transpose();
  }
  return m;
}
json points_json(const std::vector<Vec>& p) {
  json r = json::array();
  for (const auto& v : p) r.push_back(vec_to_json(v));
  return r;
}
std::vector<Vec> points_from(const json& j) {
  std::vector<Vec> p;
  for (const auto& x : j) p.push_back(vec_from_json(x));
  return p;
}

void need_dim(const Vec& x, int n, const char* who) {
  if (x.size() < n) throw InputError(std::string(who) + ": input dimension too small");
}

}  // namespace

// ---------------------------------------------------------------- bounds

json Bounds::to_json() const {
  json j;
  j["upper"] = num(upper);
  j["lower"] = num(lower);
  j["claimed"] = num(claimed);
  j["provenance"] = provenance;
  return j;
}

Bounds Bounds::from_json(const json& j) {
  Bounds b;
  b.upper = num_or(j.at("upper"), kInf);
  b.lower = num_or(j.at("lower"), 0.0);
  b.claimed = num_or(j.at("claimed"), kInf);
  b.provenance = j.at("provenance").get<std::string>();
  return b;
}

Bounds Bounds::certified(double upper, double lower, std::string provenance) {
  Bounds b;
  b.upper = upper;
  b.lower = lower;
  b.claimed = lower > 0 ? std::sqrt(upper / lower) : kInf;
  b.provenance = std::move(provenance);
  return b;
}

json Embedding::to_json() const {
  json j;
  j["op"] = op();
  j["bounds"] = bounds_.to_json();
  j["params"] = params();
  json ch = json::array();
  for (const auto& c : children_) ch.push_back(c->to_json());
  j["children"] = ch;
  return j;
}

// ---------------------------------------------------------------- nodes

CoordsNode::CoordsNode(int offset, int len)
    : Embedding(Bounds::certified(1.0, 1.0, "coordinate projection"), {}), offset_(offset), len_(len) {
  if (offset < 0 || len < 1) throw InputError("coords: bad range");
}
Vec CoordsNode::eval(const Vec& x) const {
  need_dim(x, offset_ + len_, "coords");
  return x.segment(offset_, len_);
}
json CoordsNode::params() const { return {{"offset", offset_}, {"len", len_}}; }

static Bounds scaled(const Bounds& b, double s) {
  Bounds o = b;
  o.upper = b.upper * s;
  o.lower = b.lower * s;
  return o;
}

AffineNode::AffineNode(EmbPtr f, double scale, Vec shift)
    : Embedding(scaled(f->bounds(), scale), {f}), scale_(scale), shift_(std::move(shift)) {
  if (!(scale > 0)) throw InputError("affine: scale must be positive");
  if (shift_.size() != f->target_dim()) throw InputError("affine: shift dimension mismatch");
}
Vec AffineNode::eval(const Vec& x) const { return scale_ * children_[0]->eval(x) + shift_; }
json AffineNode::params() const { return {{"scale", scale_}, {"shift", vec_to_json(shift_)}}; }

ConcatNode::ConcatNode(std::string tag, std::vector<EmbPtr> children, Bounds b, json info)
    : Embedding(std::move(b), std::move(children)), tag_(std::move(tag)), info_(std::move(info)) {
  if (children_.empty()) throw InputError("concat: no children");
  for (const auto& c : children_) dim_ += c->target_dim();
}
Vec ConcatNode::eval(const Vec& x) const {
  Vec out(dim_);
  int o = 0;
  for (const auto& c : children_) {
    const Vec v = c->eval(x);
    out.segment(o, v.size()) = v;
    o += static_cast<int>(v.size());
  }
  return out;
}

PipeNode::PipeNode(EmbPtr first, EmbPtr second, Bounds b) : Embedding(std::move(b), {first, second}) {}

TorusCirclesNode::TorusCirclesNode(Mat W, Vec radii, Bounds b)
    : Embedding(std::move(b), {}), W_(std::move(W)), radii_(std::move(radii)) {
  if (W_.rows() != radii_.size() || W_.rows() == 0) throw InputError("torus_circles: shape mismatch");
}
Vec TorusCirclesNode::eval(const Vec& x) const {
  need_dim(x, static_cast<int>(W_.cols()), "torus_circles");
  const Vec u = W_ * x.head(W_.cols());
  Vec out(2 * u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double a = 2 * kPi * (u[i] - std::floor(u[i]));
    out[2 * i] = radii_[i] * std::cos(a);
    out[2 * i + 1] = radii_[i] * std::sin(a);
  }
  return out;
}
json TorusCirclesNode::params() const { return {{"W", rows_json(W_)}, {"radii", vec_to_json(radii_)}}; }

McShaneNode::McShaneNode(SpacePtr host, std::vector<Vec> points, Mat values, double L, Bounds b)
    : Embedding(std::move(b), {}), host_(std::move(host)), points_(std::move(points)), values_(std::move(values)), L_(L) {
  if (points_.empty()) throw InputError("mcshane: empty net");
  if (static_cast<std::size_t>(values_.rows()) != points_.size()) throw InputError("mcshane: values/net mismatch");
  if (!(L_ >= 0)) throw InputError("mcshane: bad Lipschitz constant");
}
Vec McShaneNode::eval(const Vec& x) const {
  const int N = static_cast<int>(values_.cols());
  Vec out = Vec::Constant(N, kInf);
  for (std::size_t a = 0; a < points_.size(); ++a) {
    const double t = L_ * host_->distance(x, points_[a]);
    for (int j = 0; j < N; ++j) out[j] = std::min(out[j], values_(static_cast<int>(a), j) + t);
  }
  return out;
}
json McShaneNode::params() const {
  return {{"space", host_->spec()}, {"L", L_}, {"points", points_json(points_)}, {"values", rows_json(values_)}};
}

DistNetNode::DistNetNode(SpacePtr host, std::vector<Vec> points, Bounds b)
    : Embedding(std::move(b), {}), host_(std::move(host)), points_(std::move(points)) {
  if (points_.empty()) throw InputError("dist_net: empty net");
}
Vec DistNetNode::eval(const Vec& x) const {
  Vec out(static_cast<int>(points_.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) out[static_cast<int>(i)] = host_->distance(x, points_[i]);
  return out;
}
json DistNetNode::params() const { return {{"space", host_->spec()}, {"points", points_json(points_)}}; }

DistMinNode::DistMinNode(SpacePtr host, std::vector<Vec> points)
    : Embedding(Bounds{1.0, 0.0, kInf, "distance to a set"}, {}), host_(std::move(host)), points_(std::move(points)) {
  if (points_.empty()) throw InputError("dist_min: empty set");
}
Vec DistMinNode::eval(const Vec& x) const {
  double m = kInf;
  for (const auto& p : points_) m = std::min(m, host_->distance(x, p));
  return Vec::Constant(1, m);
}
json DistMinNode::params() const { return {{"space", host_->spec()}, {"points", points_json(points_)}}; }

LocalLiftNode::LocalLiftNode(SpacePtr host, Vec q, Bounds b)
    : Embedding(std::move(b), {}), host_(std::move(host)), quot_(dynamic_cast<const QuotientSpace*>(host_.get())), q_(std::move(q)) {
  if (!quot_) throw InputError("local_lift: host must be a quotient space");
}
Vec LocalLiftNode::eval(const Vec& x) const {
  if (auto hb = dynamic_cast<const HolonomyBundleSpace*>(quot_)) return hb->closest_lift(q_, x) - q_;
  return quot_->closest_lift(q_, x) - q_;
}
json LocalLiftNode::params() const { return {{"space", host_->spec()}, {"q", vec_to_json(q_)}}; }

TentGlueNode::TentGlueNode(SpacePtr host, std::vector<Vec> centers, std::vector<int> classes, int K, double r,
                           std::vector<EmbPtr> charts, Bounds b)
    : Embedding(std::move(b), std::move(charts)), host_(std::move(host)), centers_(std::move(centers)),
      classes_(std::move(classes)), K_(K), r_(r) {
  if (centers_.empty() || centers_.size() != classes_.size() || centers_.size() != children_.size())
    throw InputError("tent_glue: centers, classes and charts must align");
  N_ = children_[0]->target_dim();
  for (const auto& c : children_)
    if (c->target_dim() != N_) throw InputError("tent_glue: charts must share a target dimension");
  for (int k : classes_)
    if (k < 0 || k >= K_) throw InputError("tent_glue: class out of range");
  if (!(r_ > 0)) throw InputError("tent_glue: radius must be positive");
}
Vec TentGlueNode::eval(const Vec& x) const {
  Vec out = Vec::Zero(K_ * N_);
  const double ramp = 3.0 * r_ / 8.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const double t = host_->distance(x, centers_[i]);
    if (t >= r_) continue;
    const double w = std::min(1.0, (r_ - t) / ramp);
    out.segment(classes_[i] * N_, N_) += w * children_[i]->eval(x);
  }
  return out;
}
json TentGlueNode::params() const {
  return {{"space", host_->spec()}, {"r", r_}, {"K", K_}, {"centers", points_json(centers_)}, {"classes", classes_}};
}

CutoffSumNode::CutoffSumNode(EmbPtr radial, std::vector<CutoffPiece> pieces, std::vector<EmbPtr> charts, int dim, Bounds b)
    : Embedding(std::move(b), {}), pieces_(std::move(pieces)), dim_(dim) {
  if (pieces_.size() != charts.size()) throw InputError("cutoff_sum: pieces and charts must align");
  children_.push_back(std::move(radial));
  for (auto& c : charts) {
    if (c->target_dim() > dim_) throw InputError("cutoff_sum: chart wider than output");
    children_.push_back(std::move(c));
  }
  for (const auto& p : pieces_)
    if (!(p.tau > 0) || p.b < p.a) throw InputError("cutoff_sum: bad piece");
}
Vec CutoffSumNode::eval(const Vec& x) const {
  Vec out = Vec::Zero(dim_);
  const double r = children_[0]->eval(x)[0];
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    const double dist = std::max({0.0, p.a - r, r - p.b});
    if (dist >= p.tau) continue;
    const double phi = 1.0 - dist / p.tau;
    const Vec v = children_[i + 1]->eval(x);
    out.head(v.size()) += phi * v;
  }
  return out;
}
json CutoffSumNode::params() const {
  json ps = json::array();
  for (const auto& p : pieces_) ps.push_back({{"a", p.a}, {"b", p.b}, {"tau", p.tau}});
  return {{"dim", dim_}, {"pieces", ps}};
}

FiberNormNode::FiberNormNode(int n, int d) : Embedding(Bounds{1.0, 0.0, kInf, "distance to the zero section"}, {}), n_(n), d_(d) {}
Vec FiberNormNode::eval(const Vec& x) const {
  need_dim(x, n_ + d_, "fiber_norm");
  return Vec::Constant(1, x.segment(n_, d_).norm());
}
json FiberNormNode::params() const { return {{"n", n_}, {"d", d_}}; }

UntwistCircleNode::UntwistCircleNode(double c, double alpha, Bounds b) : Embedding(std::move(b), {}), c_(c), alpha_(alpha) {}
Vec UntwistCircleNode::eval(const Vec& x) const {
  need_dim(x, 3, "untwist_circle");
  Vec out(4);
  const double t = 2 * kPi * x[0] / c_;
  const double rad = c_ / (2 * kPi);
  out[0] = rad * std::cos(t);
  out[1] = rad * std::sin(t);
  const double a = -alpha_ * x[0];
  out[2] = std::cos(a) * x[1] - std::sin(a) * x[2];
  out[3] = std::sin(a) * x[1] + std::cos(a) * x[2];
  return out;
}
json UntwistCircleNode::params() const { return {{"c", c_}, {"alpha", alpha_}}; }

AnnulusChartNode::AnnulusChartNode(double rho, Mat W, Vec radii, Bounds b)
    : Embedding(std::move(b), {}), rho_(rho), W_(std::move(W)), radii_(std::move(radii)) {
  if (W_.cols() != 2 || W_.rows() != radii_.size()) throw InputError("annulus_chart: shape mismatch");
}
Vec AnnulusChartNode::eval(const Vec& x) const {
  need_dim(x, 3, "annulus_chart");
  Vec out(target_dim());
  out[0] = std::hypot(x[1], x[2]);
  const Eigen::Vector2d v(x[0], rho_ * std::atan2(x[2], x[1]));
  const Vec u = W_ * v;
  for (int i = 0; i < u.size(); ++i) {
    const double a = 2 * kPi * (u[i] - std::floor(u[i]));
    out[1 + 2 * i] = radii_[i] * std::cos(a);
    out[2 + 2 * i] = radii_[i] * std::sin(a);
  }
  return out;
}
json AnnulusChartNode::params() const { return {{"rho", rho_}, {"W", rows_json(W_)}, {"radii", vec_to_json(radii_)}}; }

LensChartNode::LensChartNode(int j, double limit, Bounds b) : Embedding(std::move(b), {}), j_(j), limit_(limit) {
  if (j != 1 && j != 2) throw InputError("lens_chart: chart must be 1 or 2");
}
Vec LensChartNode::eval(const Vec& x) const {
  // outside the chart domain the value is irrelevant (weighted by zero); clamp to the limit
  const Eigen::Vector3d c = lens_coordinates(x);
  const double a = j_ == 1 ? c[0] : kPi / 2 - c[0];
  if (a < limit_) return lens_chart_point(j_, x, limit_);
  Vec out(3);
  const double base = j_ == 1 ? c[1] : c[2], ang = j_ == 1 ? c[2] : c[1];
  out << base, limit_ * std::cos(ang), limit_ * std::sin(ang);
  return out;
}
json LensChartNode::params() const { return {{"chart", j_}, {"limit", limit_}}; }

LensRegionDistNode::LensRegionDistNode(int j) : Embedding(Bounds{1.0, 0.0, kInf, "distance to a chart domain"}, {}), j_(j) {
  if (j != 1 && j != 2) throw InputError("lens_region_dist: chart must be 1 or 2");
}
Vec LensRegionDistNode::eval(const Vec& x) const { return Vec::Constant(1, lens_region_distance(j_, x)); }
json LensRegionDistNode::params() const { return {{"chart", j_}}; }

ConeNode::ConeNode(EmbPtr f, double L, double scale, Vec shift, Bounds b)
    : Embedding(std::move(b), {f}), L_(L), scale_(scale), shift_(std::move(shift)) {
  if (shift_.size() != f->target_dim()) throw InputError("cone: shift dimension mismatch");
}
Vec ConeNode::eval(const Vec& x) const {
  need_dim(x, 1, "cone");
  const double t = x[0];
  Vec out(target_dim());
  out[0] = L_ * t;
  if (t == 0.0) {
    out.tail(out.size() - 1).setZero();
  } else {
    out.tail(out.size() - 1) = t * (scale_ * children_[0]->eval(x.tail(x.size() - 1)) + shift_);
  }
  return out;
}
json ConeNode::params() const { return {{"L", L_}, {"scale", scale_}, {"shift", vec_to_json(shift_)}}; }

EllipsoidMapNode::EllipsoidMapNode(double N, Bounds b) : Embedding(std::move(b), {}), N_(N) {}
Vec EllipsoidMapNode::eval(const Vec& x) const { return ellipsoid_map(N_, x); }
json EllipsoidMapNode::params() const { return {{"N", N_}}; }

TableNode::TableNode(Mat values, Bounds b) : Embedding(std::move(b), {}), values_(std::move(values)) {
  if (values_.rows() == 0) throw InputError("table: empty");
}
Vec TableNode::eval(const Vec& x) const {
  if (x.size() != 1) throw InputError("table: points are 1-vectors");
  const double r = std::round(x[0]);
  if (r < 0 || r >= static_cast<double>(values_.rows())) throw InputError("table: index out of range");
  return values_.row(static_cast<int>(r)).transpose();
}
json TableNode::params() const { return {{"values", rows_json(values_)}}; }

// ---------------------------------------------------------------- artifacts

namespace {

struct LoadContext {
  std::unordered_map<std::string, SpacePtr> spaces;
  SpacePtr space(const json& spec) {
    const std::string key = spec.dump();
    auto it = spaces.find(key);
    if (it != spaces.end()) return it->second;
    SpacePtr s = construct_space(spec);
    spaces.emplace(key, s);
    return s;
  }
};

const std::vector<std::string> kConcatTags = {"concat", "product", "patch", "doubling", "annulus", "gh_transfer", "local_chart"};

EmbPtr load(const json& node, LoadContext& ctx) {
  const std::string op = node.at("op").get<std::string>();
  const Bounds b = Bounds::from_json(node.at("bounds"));
  const json& p = node.at("params");
  std::vector<EmbPtr> ch;
  for (const auto& c : node.at("children")) ch.push_back(load(c, ctx));
  std::shared_ptr<Embedding> out;
  if (op == "coords") {
    out = std::make_shared<CoordsNode>(p.at("offset").get<int>(), p.at("len").get<int>());
  } else if (op == "affine") {
    out = std::make_shared<AffineNode>(ch.at(0), p.at("scale").get<double>(), vec_from_json(p.at("shift")));
  } else if (std::find(kConcatTags.begin(), kConcatTags.end(), op) != kConcatTags.end()) {
    out = std::make_shared<ConcatNode>(op, ch, b, p);
  } else if (op == "pipe") {
    out = std::make_shared<PipeNode>(ch.at(0), ch.at(1), b);
  } else if (op == "torus_circles") {
    out = std::make_shared<TorusCirclesNode>(rows_from(p.at("W")), vec_from_json(p.at("radii")), b);
  } else if (op == "mcshane") {
    out = std::make_shared<McShaneNode>(ctx.space(p.at("space")), points_from(p.at("points")), rows_from(p.at("values")),
                                        p.at("L").get<double>(), b);
  } else if (op == "dist_net") {
    out = std::make_shared<DistNetNode>(ctx.space(p.at("space")), points_from(p.at("points")), b);
  } else if (op == "dist_min") {
    out = std::make_shared<DistMinNode>(ctx.space(p.at("space")), points_from(p.at("points")));
  } else if (op == "local_lift") {
    out = std::make_shared<LocalLiftNode>(ctx.space(p.at("space")), vec_from_json(p.at("q")), b);
  } else if (op == "tent_glue") {
    out = std::make_shared<TentGlueNode>(ctx.space(p.at("space")), points_from(p.at("centers")),
                                         p.at("classes").get<std::vector<int>>(), p.at("K").get<int>(),
                                         p.at("r").get<double>(), ch, b);
  } else if (op == "cutoff_sum") {
    std::vector<CutoffPiece> ps;
    for (const auto& x : p.at("pieces")) ps.push_back({x.at("a").get<double>(), x.at("b").get<double>(), x.at("tau").get<double>()});
    if (ch.empty()) throw InputError("cutoff_sum: missing radial child");
    std::vector<EmbPtr> charts(ch.begin() + 1, ch.end());
    out = std::make_shared<CutoffSumNode>(ch[0], ps, charts, p.at("dim").get<int>(), b);
  } else if (op == "fiber_norm") {
    out = std::make_shared<FiberNormNode>(p.at("n").get<int>(), p.at("d").get<int>());
  } else if (op == "untwist_circle") {
    out = std::make_shared<UntwistCircleNode>(p.at("c").get<double>(), p.at("alpha").get<double>(), b);
  } else if (op == "annulus_chart") {
    out = std::make_shared<AnnulusChartNode>(p.at("rho").get<double>(), rows_from(p.at("W")), vec_from_json(p.at("radii")), b);
  } else if (op == "lens_chart") {
    out = std::make_shared<LensChartNode>(p.at("chart").get<int>(), p.at("limit").get<double>(), b);
  } else if (op == "lens_region_dist") {
    out = std::make_shared<LensRegionDistNode>(p.at("chart").get<int>());
  } else if (op == "cone") {
    out = std::make_shared<ConeNode>(ch.at(0), p.at("L").get<double>(), p.at("scale").get<double>(), vec_from_json(p.at("shift")), b);
  } else if (op == "ellipsoid") {
    out = std::make_shared<EllipsoidMapNode>(p.at("N").get<double>(), b);
  } else if (op == "table") {
    out = std::make_shared<TableNode>(rows_from(p.at("values")), b);
  } else {
    throw InputError("unknown embedding operator: " + op);
  }
  // stored bounds win over the ones derived on construction
  out->set_bounds(b);
  return out;
}

}  // namespace

std::string serialize_embedding(const EmbPtr& emb, const SpacePtr& space) {
  json j;
  j["format"] = kEmbeddingFormat;
  j["version"] = kEmbeddingVersion;
  j["space"] = space ? space->spec() : json(nullptr);
  j["root"] = emb->to_json();
  return j.dump();
}

EmbPtr embedding_from_json(const json& node) {
  LoadContext ctx;
  try {
    return load(node, ctx);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed embedding: ") + e.what());
  }
}

LoadedEmbedding deserialize_embedding(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("embedding artifact is truncated or malformed: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kEmbeddingFormat)
    throw InputError("not an embedding artifact");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != kEmbeddingVersion)
    throw InputError("embedding artifact version mismatch");
  LoadedEmbedding out;
  LoadContext ctx;
  try {
    if (!j.at("space").is_null()) out.space = ctx.space(j.at("space"));
    out.embedding = load(j.at("root"), ctx);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed embedding: ") + e.what());
  }
  return out;
}

}  // namespace qe
