#include "qembed/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>

namespace qe {

Icosphere icosphere(int level) {
  if (level < 0 || level > 8) throw InputError("icosphere level must be in [0, 8]");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosphere m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : raw) m.vertices.push_back(Eigen::Vector3d(v[0], v[1], v[2]).normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      nf.push_back({f[0], a, c});
      nf.push_back({f[1], b, a});
      nf.push_back({f[2], c, b});
      nf.push_back({a, b, c});
    }
    m.faces = std::move(nf);
  }
  return m;
}

namespace {

std::atomic<std::uint64_t> g_mesh_ids{1};

struct NodeKey {
  long long x, y, z;
  bool operator==(const NodeKey& o) const { return x == o.x && y == o.y && z == o.z; }
};
struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::size_t>(k.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(k.z) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return h;
  }
};
NodeKey key_of(const Eigen::Vector3d& p) {
  return {std::llround(p[0] * 1e12), std::llround(p[1] * 1e12), std::llround(p[2] * 1e12)};
}

struct Cache {
  std::uint64_t owner = 0;
  std::size_t src = 0;
  std::vector<double> dist;
};
thread_local Cache t_cache;

}  // namespace

EllipsoidSpace::EllipsoidSpace(double N, int level, int targets_per_source)
    : N_(N), level_(level), per_source_(targets_per_source), id_(g_mesh_ids.fetch_add(1)) {
  if (!(N >= 1.0) || !std::isfinite(N)) throw InputError("ellipsoid: N must be >= 1");
  if (per_source_ < 1) throw InputError("ellipsoid: targets_per_source must be positive");
  const Icosphere ico = icosphere(level);
  nv_ = ico.vertices.size();
  std::unordered_map<NodeKey, int, NodeKeyHash> index;
  auto node = [&](const Eigen::Vector3d& p) {
    const NodeKey k = key_of(p);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    const int idx = static_cast<int>(sphere_pos_.size());
    sphere_pos_.push_back(p);
    index.emplace(k, idx);
    return idx;
  };
  for (const auto& v : ico.vertices) node(v);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(ico.faces.size() * 15);
  std::vector<int> pts;
  for (const auto& f : ico.faces) {
    pts.clear();
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d& a = ico.vertices[f[i]];
      const Eigen::Vector3d& b = ico.vertices[f[(i + 1) % 3]];
      pts.push_back(node(a));
      if ((a[2] > 0 && b[2] < 0) || (a[2] < 0 && b[2] > 0)) {
        // split the edge at the equator; keep the sub-edge midpoints
        const double t = a[2] / (a[2] - b[2]);
        Eigen::Vector3d x = a + (b - a) * t;
        x[2] = 0.0;
        x.normalize();
        pts.push_back(node(x));
        pts.push_back(node((a + (x - a) / 2).normalized()));
        pts.push_back(node((x + (b - x) / 2).normalized()));
      } else {
        pts.push_back(node((a + b).normalized()));
      }
    }
    // connect within each closed half only, so no edge crosses the equator
    for (int sgn : {1, -1}) {
      std::vector<int> part;
      for (int p : pts)
        if (sgn * sphere_pos_[static_cast<std::size_t>(p)][2] >= -1e-15) part.push_back(p);
      for (std::size_t i = 0; i < part.size(); ++i)
        for (std::size_t j = i + 1; j < part.size(); ++j)
          if (part[i] != part[j]) edges.emplace_back(std::min(part[i], part[j]), std::max(part[i], part[j]));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  // meridian arc length of the ellipse (cos b, sin b / N), tabulated
  const int T = 20001;
  std::vector<double> bt(T), s(T, 0.0);
  for (int i = 0; i < T; ++i) bt[i] = (kPi / 2) * i / (T - 1);
  auto speed = [&](double b) { return std::sqrt(std::sin(b) * std::sin(b) + std::cos(b) * std::cos(b) / (N_ * N_)); };
  for (int i = 1; i < T; ++i) s[i] = s[i - 1] + 0.5 * (speed(bt[i]) + speed(bt[i - 1])) * (bt[i] - bt[i - 1]);
  pos_.resize(sphere_pos_.size());
  for (std::size_t i = 0; i < sphere_pos_.size(); ++i) {
    const auto& p = sphere_pos_[i];
    const double lat = std::asin(std::clamp(std::abs(p[2]), 0.0, 1.0));
    const double target = lat / (kPi / 2) * s[T - 1];
    auto it = std::lower_bound(s.begin(), s.end(), target);
    double beta;
    if (it == s.begin()) {
      beta = 0.0;
    } else if (it == s.end()) {
      beta = kPi / 2;
    } else {
      const std::size_t k = static_cast<std::size_t>(it - s.begin());
      const double f = (target - s[k - 1]) / (s[k] - s[k - 1]);
      beta = bt[k - 1] + f * (bt[k] - bt[k - 1]);
    }
    const double ph = std::atan2(p[1], p[0]);
    const double sg = p[2] > 0 ? 1.0 : (p[2] < 0 ? -1.0 : 0.0);
    pos_[i] = Eigen::Vector3d(std::cos(beta) * std::cos(ph), std::cos(beta) * std::sin(ph), sg * std::sin(beta) / N_);
  }

  std::vector<std::size_t> deg(pos_.size(), 0);
  for (const auto& e : edges) {
    ++deg[static_cast<std::size_t>(e.first)];
    ++deg[static_cast<std::size_t>(e.second)];
  }
  adj_start_.assign(pos_.size() + 1, 0);
  for (std::size_t i = 0; i < pos_.size(); ++i) adj_start_[i + 1] = adj_start_[i] + deg[i];
  adj_.resize(adj_start_.back());
  w_.resize(adj_start_.back());
  std::vector<std::size_t> fill(adj_start_.begin(), adj_start_.end() - 1);
  for (const auto& e : edges) {
    const double w = (pos_[static_cast<std::size_t>(e.first)] - pos_[static_cast<std::size_t>(e.second)]).norm();
    max_edge_ = std::max(max_edge_, w);
    adj_[fill[static_cast<std::size_t>(e.first)]] = e.second;
    w_[fill[static_cast<std::size_t>(e.first)]++] = w;
    adj_[fill[static_cast<std::size_t>(e.second)]] = e.first;
    w_[fill[static_cast<std::size_t>(e.second)]++] = w;
  }
}

std::vector<double> EllipsoidSpace::dijkstra(std::size_t src) const {
  std::vector<double> dist(pos_.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, static_cast<int>(src));
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (std::size_t e = adj_start_[static_cast<std::size_t>(u)]; e < adj_start_[static_cast<std::size_t>(u) + 1]; ++e) {
      const double nd = d + w_[e];
      const std::size_t v = static_cast<std::size_t>(adj_[e]);
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, adj_[e]);
      }
    }
  }
  return dist;
}

const std::vector<double>& EllipsoidSpace::cached(std::size_t src) const {
  if (t_cache.owner != id_ || t_cache.src != src || t_cache.dist.empty()) {
    t_cache.dist = dijkstra(src);
    t_cache.owner = id_;
    t_cache.src = src;
  }
  return t_cache.dist;
}

std::size_t EllipsoidSpace::node_of(const Vec& a) const {
  if (a.size() != 3) throw InputError("ellipsoid: points are 3-vectors");
  const double lhs = a[0] * a[0] + a[1] * a[1] + N_ * N_ * a[2] * a[2];
  if (std::abs(lhs - 1.0) > 1e-9) throw InputError("ellipsoid: point off surface");
  std::size_t best = 0;
  double bd = kInf;
  for (std::size_t i = 0; i < pos_.size(); ++i) {
    const double d = (pos_[i] - Eigen::Vector3d(a[0], a[1], a[2])).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
      if (d == 0.0) break;
    }
  }
  return best;
}

double EllipsoidSpace::distance(const Vec& a, const Vec& b) const {
  const std::size_t ia = node_of(a), ib = node_of(b);
  if (ia == ib) return 0.0;
  return cached(ia)[ib];
}

json EllipsoidSpace::spec() const {
  json j;
  j["kind"] = "ellipsoid";
  j["N"] = N_;
  j["mesh_level"] = level_;
  j["targets_per_source"] = per_source_;
  return j;
}

Vec EllipsoidSpace::sample(Rng& rng) const {
  const auto& p = pos_[rng.index(pos_.size())];
  return Vec(Eigen::Vector3d(p));
}

Vec EllipsoidSpace::perturb(const Vec& a, double scale, Rng& rng) const {
  std::size_t u = node_of(a);
  const int steps = std::max(1, static_cast<int>(std::lround(scale / std::max(max_edge_, 1e-12))));
  for (int s = 0; s < steps; ++s) {
    const std::size_t deg = adj_start_[u + 1] - adj_start_[u];
    u = static_cast<std::size_t>(adj_[adj_start_[u] + rng.index(deg)]);
  }
  return Vec(Eigen::Vector3d(pos_[u]));
}

std::string EllipsoidSpace::sampling_measure() const {
  return "uniform over mesh nodes; pairs grouped by a seeded source node, " + std::to_string(per_source_) +
         " uniform targets per source; pairs closer than 3 mesh edges skipped";
}

std::pair<Vec, Vec> EllipsoidSpace::sample_pair(std::uint64_t seed, std::uint64_t i) const {
  Rng srng(mix_seed(seed ^ 0xE111B50DULL, i / static_cast<std::uint64_t>(per_source_)));
  Rng trng(mix_seed(seed, i));
  return {sample(srng), sample(trng)};
}

double EllipsoidSpace::mesh_error(int sources, std::uint64_t seed) const {
  if (N_ == 1.0) {
    double err = 0.0;
    const double thr = min_resolved_distance();
    for (int s = 0; s < sources; ++s) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
      const std::size_t src = rng.index(pos_.size());
      const auto dist = dijkstra(src);
      for (std::size_t v = 0; v < pos_.size(); ++v) {
        const double ex = std::acos(std::clamp(pos_[src].dot(pos_[v]), -1.0, 1.0));
        if (ex <= thr) continue;
        err = std::max(err, std::abs(dist[v] - ex) / ex);
      }
    }
    return err;
  }
  return EllipsoidSpace(1.0, level_, per_source_).mesh_error(sources, seed);
}

}  // namespace qe
