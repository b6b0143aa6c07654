#include "qembed/space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "qembed/lattice.hpp"

namespace qe {

// ---------------------------------------------------------------- MetricSpace

std::string MetricSpace::sampling_measure() const { return "space sampler; half the pairs local at log-uniform scales"; }

std::pair<Vec, Vec> MetricSpace::sample_pair(std::uint64_t seed, std::uint64_t i) const {
  Rng rng(mix_seed(seed, i));
  Vec a = sample(rng);
  if (i % 2 == 1) {
    const double s = sample_scale() * std::pow(10.0, -3.0 * rng.uniform());
    return {a, perturb(a, s, rng)};
  }
  return {a, sample(rng)};
}

// ---------------------------------------------------------------- element set

namespace {

// Deduplicates isometries by their image of a generic probe point, bucketed
// on a 1e-6 grid; candidates in a bucket are compared on the full frame.
class ElementSet {
 public:
  explicit ElementSet(int dim) : probe_(dim) {
    for (int i = 0; i < dim; ++i) probe_[i] = 0.5772156649 + 0.3183098862 * (i + 1) - 0.1 * i * i;
    img_.resize(dim);
  }

  // returns true if inserted (not a duplicate)
  bool insert(const AffineIsometry& g, std::vector<AffineIsometry>& store) {
    g.act_into(probe_.data(), img_.data());
    const std::size_t h = key(img_, 0.0);
    auto it = buckets_.find(h);
    if (it != buckets_.end())
      for (int idx : it->second)
        if (store[static_cast<std::size_t>(idx)].same_action(g)) return false;
    const int idx = static_cast<int>(store.size());
    store.push_back(g);
    // register under every cell within the margin of the image
    std::vector<std::size_t> keys;
    register_keys(img_, 0, keys);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (std::size_t k : keys) buckets_[k].push_back(idx);
    return true;
  }

 private:
  static constexpr double kCell = 1e-6;
  static constexpr double kMargin = 1e-8;

  static long long cell(double x) { return static_cast<long long>(std::floor(x / kCell)); }

  std::size_t key(const Vec& v, double) const {
    std::size_t h = 1469598103934665603ULL;
    for (int i = 0; i < v.size(); ++i) {
      h ^= static_cast<std::size_t>(cell(v[i])) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }

  void register_keys(Vec& v, int i, std::vector<std::size_t>& keys) const {
    if (i == v.size()) {
      keys.push_back(key(v, 0.0));
      return;
    }
    const double x = v[i];
    register_keys(v, i + 1, keys);
    const long long c = cell(x);
    if (cell(x - kMargin) != c) {
      v[i] = x - kMargin;
      register_keys(v, i + 1, keys);
      v[i] = x;
    }
    if (cell(x + kMargin) != c) {
      v[i] = x + kMargin;
      register_keys(v, i + 1, keys);
      v[i] = x;
    }
  }

  Vec probe_;
  Vec img_;
  std::unordered_map<std::size_t, std::vector<int>> buckets_;
};

}  // namespace

// ---------------------------------------------------------------- QuotientSpace

QuotientSpace::QuotientSpace(Ambient ambient, std::vector<AffineIsometry> generators, Vec basepoint,
                             std::size_t cap)
    : ambient_(ambient), gens_(std::move(generators)), basepoint_(std::move(basepoint)), cap_(cap) {
  ambient_.check_point(basepoint_);
  for (const auto& g : gens_) {
    if (g.n() != ambient_.n || g.d() != ambient_.d) throw InputError("generator dimension mismatch");
    if (!g.is_orthogonal(1e-8)) throw InputError("generator is not orthogonal");
    if (ambient_.kind == AmbientKind::Sphere && g.translation().cwiseAbs().maxCoeff() > kTol)
      throw InputError("sphere generators must be linear");
  }
  for (const auto& g : gens_) {
    word_gens_.push_back(g);
    AffineIsometry gi = g.inverse();
    if (!gi.same_action(g)) word_gens_.push_back(gi);
  }
  // default sampling box
  const int n = ambient_.n;
  Mat M = Mat::Identity(n, n);
  if (ambient_.kind != AmbientKind::Sphere) {
    std::vector<Vec> ts;
    for (const auto& g : gens_)
      if (g.translation().norm() > kTol) ts.push_back(g.translation());
    if (static_cast<int>(ts.size()) == n) {
      for (int i = 0; i < n; ++i) M.col(i) = ts[static_cast<std::size_t>(i)];
      if (Eigen::FullPivLU<Mat>(M).rank() < n) M = Mat::Identity(n, n);
    }
  }
  set_box_region(basepoint_.head(n), M, ambient_.d > 0 ? 1.0 : 0.0);
  prepare_fast_paths();
}

void QuotientSpace::prepare_fast_paths() {
  const int n = ambient_.n;
  // translation lattice
  bool all_trans = ambient_.kind == AmbientKind::Euclidean || ambient_.kind == AmbientKind::ProductEuclidean;
  for (const auto& g : gens_) all_trans = all_trans && g.is_translation();
  if (all_trans) {
    const int k = static_cast<int>(gens_.size());
    Mat T(n, k);
    for (int i = 0; i < k; ++i) T.col(i) = gens_[static_cast<std::size_t>(i)].translation();
    if (k == 0 || Eigen::FullPivLU<Mat>(T).rank() == k) {
      lattice_ok_ = true;
      if (k > 0) {
        lat_B_ = lll_reduce(T).basis;
        lat_en_ = std::make_shared<LatticeEnumerator>(lat_B_);
      }
    }
  }
  // finite group: all elements fit in a bounded ball
  bool linear = true;
  for (const auto& g : gens_) linear = linear && g.translation().cwiseAbs().maxCoeff() <= kTol;
  if (!lattice_ok_ && linear && !gens_.empty()) {
    try {
      Vec p = basepoint_;
      double reach = 0.0;
      if (ambient_.kind == AmbientKind::Sphere) {
        reach = kPi * ambient_.radius;
      } else {
        for (int i = 0; i < p.size(); ++i) p[i] = 1.0 + 0.37 * i;
        if (ambient_.kind == AmbientKind::ProductSphere) p.tail(ambient_.d) = basepoint_.tail(ambient_.d);
        reach = 2.0 * p.head(n).norm() + 2.0 * kPi * ambient_.radius + 1.0;
      }
      GroupBall all = enumerate_capped(p, reach, std::min<std::size_t>(cap_, 100000));
      if (all.elements.size() <= 100000) {
        // linear generators fix the origin, so every element lies within reach
        finite_ok_ = true;
        finite_ = all.elements;
      }
    } catch (const InvariantError&) {
      finite_ok_ = false;
    }
  }
}

double QuotientSpace::displacement(const AffineIsometry& g, const Vec& p) const {
  return ambient_.distance(g.act(p), p);
}

GroupBall QuotientSpace::enumerate_ball(const Vec& p, double r) const { return enumerate_capped(p, r, cap_); }

GroupBall QuotientSpace::enumerate_capped(const Vec& p, double r, std::size_t cap) const {
  if (r < 0) throw InputError("enumerate_ball: negative radius");
  ambient_.check_point(p);
  GroupBall out;
  out.center = p;
  out.radius = r;
  const int dim = ambient_.dim();
  double m = 0.0;
  for (const auto& g : word_gens_) m = std::max(m, displacement(g, p));
  const double prune = r + m;

  std::vector<AffineIsometry> store;
  std::vector<double> disp;
  ElementSet set(dim);
  set.insert(AffineIsometry::identity(ambient_.n, ambient_.d), store);
  disp.push_back(0.0);
  std::deque<int> frontier{0};
  Vec img(dim);
  while (!frontier.empty()) {
    const int w = frontier.front();
    frontier.pop_front();
    for (const auto& g : word_gens_) {
      AffineIsometry e = compose(g, store[static_cast<std::size_t>(w)]);
      e.act_into(p.data(), img.data());
      const double dd = ambient_.distance(img, p);
      if (dd > prune) continue;
      if (!set.insert(e, store)) continue;
      disp.push_back(dd);
      frontier.push_back(static_cast<int>(store.size()) - 1);
      if (store.size() > cap) throw InvariantError("not properly discontinuous at this scale (cap exceeded)");
    }
  }
  const double tol = 1e-12 * (1.0 + r);
  for (std::size_t i = 0; i < store.size(); ++i)
    if (disp[i] <= r + tol) out.elements.push_back(store[i]);
  return out;
}

double QuotientSpace::quotient_distance(const Vec& p, const Vec& q, double radius_factor) const {
  ambient_.check_point(p);
  ambient_.check_point(q);
  const double d0 = ambient_.distance(p, q);
  if (d0 == 0.0) return 0.0;
  const GroupBall ball = enumerate_ball(q, radius_factor * d0);
  double best = d0;
  Vec img(ambient_.dim());
  for (const auto& g : ball.elements) {
    g.act_into(q.data(), img.data());
    best = std::min(best, ambient_.distance(p, img));
  }
  return best;
}

double QuotientSpace::lattice_distance(const Vec& a, const Vec& b) const {
  const int n = ambient_.n;
  Vec v = b - a;
  if (lat_B_.cols() == 0) return v.norm();
  Vec vb = v.head(n);
  double fiber2 = 0.0;
  if (ambient_.d > 0) fiber2 = v.tail(ambient_.d).squaredNorm();
  return std::sqrt(lat_en_->dist2(vb) + fiber2);
}

double QuotientSpace::distance(const Vec& a, const Vec& b) const {
  if (a.size() != dim() || b.size() != dim()) throw InputError("distance: dimension mismatch");
  if (lattice_ok_) return lattice_distance(a, b);
  if (finite_ok_) {
    double best = kInf;
    Vec img(dim());
    for (const auto& g : finite_) {
      g.act_into(b.data(), img.data());
      best = std::min(best, ambient_.distance(a, img));
    }
    return best;
  }
  return quotient_distance(a, b);
}

Vec QuotientSpace::closest_lift(const Vec& p, const Vec& x) const {
  if (lattice_ok_) {
    const int n = ambient_.n;
    if (lat_B_.cols() == 0) return x;
    Vec v = (x - p).head(n);
    Vec out = x;
    out.head(n) -= lat_B_ * lat_en_->closest(v).cast<double>();
    return out;
  }
  std::vector<AffineIsometry> elems;
  if (finite_ok_) {
    elems = finite_;
  } else {
    elems = enumerate_ball(x, 2.0 * ambient_.distance(p, x)).elements;
  }
  Vec best = x;
  double bd = ambient_.distance(p, x);
  for (const auto& g : elems) {
    Vec y = g.act(x);
    const double d = ambient_.distance(p, y);
    if (d < bd) {
      bd = d;
      best = y;
    }
  }
  return best;
}

json QuotientSpace::spec() const {
  if (!spec_override_.is_null()) return spec_override_;
  json j;
  j["ambient"] = ambient_.to_json();
  json g = json::array();
  for (const auto& x : gens_) g.push_back(x.to_json());
  j["generators"] = g;
  j["cap"] = cap_;
  j["basepoint"] = vec_to_json(basepoint_);
  return j;
}

std::shared_ptr<QuotientSpace> QuotientSpace::from_json(const json& j) {
  if (!j.is_object() || !j.contains("ambient")) throw InputError("space spec needs an ambient");
  const Ambient amb = Ambient::from_json(j.at("ambient"));
  std::vector<AffineIsometry> gens;
  if (j.contains("generators")) {
    if (!j.at("generators").is_array()) throw InputError("generators must be an array");
    for (const auto& g : j.at("generators")) gens.push_back(AffineIsometry::from_json(g, amb.n, amb.d));
  }
  Vec base = Vec::Zero(amb.dim());
  if (amb.kind == AmbientKind::Sphere) base[0] = amb.radius;
  if (amb.kind == AmbientKind::ProductSphere) base[amb.n] = amb.radius;
  if (j.contains("basepoint")) base = vec_from_json(j.at("basepoint"));
  const std::size_t cap = j.value("cap", static_cast<std::size_t>(1000000));
  return std::make_shared<QuotientSpace>(amb, gens, base, cap);
}

void QuotientSpace::set_box_region(const Vec& origin, const Mat& M, double fiber_radius) {
  box_origin_ = origin;
  box_M_ = M;
  fiber_radius_ = fiber_radius;
  sampler_ = nullptr;
  double sc = 0.0;
  for (int i = 0; i < M.cols(); ++i) sc += M.col(i).norm();
  if (ambient_.kind == AmbientKind::Sphere) sc = kPi * ambient_.radius;
  sample_scale_ = std::max(sc, 1e-9);
  if (ambient_.kind == AmbientKind::Sphere)
    sampling_measure_ = "uniform on the covering sphere; half the pairs local at log-uniform scales";
  else
    sampling_measure_ = "uniform on a fundamental box (fiber uniform in a ball); half the pairs local at log-uniform scales";
}

void QuotientSpace::set_sampler(std::function<Vec(Rng&)> f, double scale, std::string measure) {
  sampler_ = std::move(f);
  sample_scale_ = scale;
  sampling_measure_ = std::move(measure);
}

Vec QuotientSpace::sample(Rng& rng) const {
  if (sampler_) return sampler_(rng);
  const int n = ambient_.n, d = ambient_.d;
  Vec x(n + d);
  if (ambient_.kind == AmbientKind::Sphere) {
    x = rng.unit_vector(n) * ambient_.radius;
    return x;
  }
  Vec u(box_M_.cols());
  for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform();
  x.head(n) = box_origin_ + box_M_ * u;
  if (d > 0) {
    if (ambient_.kind == AmbientKind::ProductSphere) {
      x.tail(d) = rng.unit_vector(d) * ambient_.radius;
    } else {
      const double rad = fiber_radius_ * std::pow(rng.uniform(), 1.0 / d);
      x.tail(d) = rng.unit_vector(d) * rad;
    }
  }
  return x;
}

Vec QuotientSpace::perturb(const Vec& a, double scale, Rng& rng) const {
  const int n = ambient_.n, d = ambient_.d;
  Vec x = a;
  if (ambient_.kind == AmbientKind::Sphere) {
    Vec v = rng.unit_vector(n);
    v -= v.dot(a) / a.squaredNorm() * a;
    if (v.norm() < 1e-12) return a;
    v /= v.norm();
    const double t = scale / ambient_.radius;
    return std::cos(t) * a + std::sin(t) * ambient_.radius * v;
  }
  Vec v = rng.unit_vector(n + d) * scale;
  x.head(n) += v.head(n);
  if (d > 0) {
    if (ambient_.kind == AmbientKind::ProductSphere) {
      Vec f = a.tail(d);
      Vec w = v.tail(d);
      w -= w.dot(f) / f.squaredNorm() * f;
      const double wl = w.norm();
      if (wl > 1e-15) {
        const double t = wl / ambient_.radius;
        x.tail(d) = std::cos(t) * f + std::sin(t) * ambient_.radius * (w / wl);
      }
    } else {
      x.tail(d) += v.tail(d);
    }
  }
  return x;
}

std::vector<Vec> QuotientSpace::grid(double h) const {
  if (h <= 0) throw InputError("grid spacing must be positive");
  const int n = ambient_.n, d = ambient_.d, k = static_cast<int>(box_M_.cols());
  std::vector<int> m(k);
  for (int i = 0; i < k; ++i) m[i] = std::max(1, static_cast<int>(std::ceil(box_M_.col(i).norm() / h)));
  std::vector<Vec> out;
  std::vector<int> idx(k, 0);
  Vec base = basepoint_;
  while (true) {
    Vec u(k);
    for (int i = 0; i < k; ++i) u[i] = static_cast<double>(idx[i]) / m[i];
    Vec x = base;
    x.head(n) = box_origin_ + box_M_ * u;
    if (d > 0 && ambient_.kind == AmbientKind::ProductEuclidean) x.tail(d).setZero();
    out.push_back(x);
    int i = 0;
    while (i < k && ++idx[i] == m[i]) idx[i++] = 0;
    if (i == k) break;
  }
  return out;
}

// ---------------------------------------------------------------- local group

LocalGroup local_group(const QuotientSpace& space, const Vec& p, double r) {
  LocalGroup out;
  out.generating_ball = space.enumerate_ball(p, 8.0 * r);
  std::vector<AffineIsometry> gens;
  if (space.is_lattice() && space.lattice_basis().cols() > 0) {
    // translations only: reduce integer coordinates to an echelon basis
    const Mat& B = space.lattice_basis();
    const int k = static_cast<int>(B.cols());
    const auto solve = B.colPivHouseholderQr();
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(k));
    for (std::size_t i = 1; i < out.generating_ball.elements.size(); ++i) {
      const Vec c = solve.solve(out.generating_ball.elements[i].translation());
      std::vector<std::int64_t> v(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) v[static_cast<std::size_t>(j)] = std::llround(c[j]);
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] == 0) continue;
        auto& row = rows[j];
        if (row.empty()) {
          row = v;
          break;
        }
        while (v[j] != 0) {
          const std::int64_t q = row[j] / v[j];
          for (std::size_t t = 0; t < v.size(); ++t) row[t] -= q * v[t];
          std::swap(row, v);
        }
      }
    }
    for (const auto& row : rows) {
      if (row.empty()) continue;
      Vec c(k);
      for (int j = 0; j < k; ++j) c[j] = static_cast<double>(row[static_cast<std::size_t>(j)]);
      gens.push_back(AffineIsometry::translation(B * c, space.ambient().d));
    }
    out.space = std::make_shared<QuotientSpace>(space.ambient(), gens, p, space.cap());
    return out;
  }
  for (std::size_t i = 1; i < out.generating_ball.elements.size(); ++i) {
    const auto& g = out.generating_ball.elements[i];
    bool dup = false;
    for (const auto& h : gens) dup = dup || h.inverse().same_action(g);
    if (!dup) gens.push_back(g);
  }
  out.space = std::make_shared<QuotientSpace>(space.ambient(), gens, p, space.cap());
  return out;
}

// ---------------------------------------------------------------- nets

double QuotientSpace::grid_cover(double h) const {
  if (h <= 0) throw InputError("grid spacing must be positive");
  const int k = static_cast<int>(box_M_.cols());
  std::vector<Vec> e;
  for (int i = 0; i < k; ++i) e.push_back(box_M_.col(i) / std::max(1.0, std::ceil(box_M_.col(i).norm() / h)));
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    Vec v = Vec::Zero(box_M_.rows());
    for (int i = 0; i < k; ++i) v += ((mask >> i) & 1U) ? e[static_cast<std::size_t>(i)] : Vec(-e[static_cast<std::size_t>(i)]);
    best = std::max(best, 0.5 * v.norm());
  }
  return best;
}

Net build_net(const SpacePtr& host, const std::vector<Vec>& samples, double eps, std::size_t max_points) {
  if (samples.empty()) throw InputError("build_net: empty sampler");
  if (!(eps > 0)) throw InputError("build_net: eps must be positive");
  Net net;
  net.eps = eps;
  net.host = host;
  for (const auto& s : samples) {
    bool covered = false;
    for (auto it = net.points.rbegin(); it != net.points.rend(); ++it) {
      if (host->distance(*it, s) <= eps) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      net.points.push_back(s);
      if (net.points.size() > max_points) throw InvariantError("build_net: net size exceeds cap");
    }
  }
  return net;
}

}  // namespace qe
