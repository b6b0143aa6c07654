#include "qembed/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace qe {

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Partial {
  double exp = 0.0, con = 0.0;
  std::size_t used = 0;
  PairWitness we, wc;
  bool has_e = false, has_c = false;
};

void merge(Partial& into, const Partial& p) {
  into.used += p.used;
  if (p.has_e && (!into.has_e || p.exp > into.exp)) {
    into.exp = p.exp;
    into.we = p.we;
    into.has_e = true;
  }
  if (p.has_c && (!into.has_c || p.con > into.con)) {
    into.con = p.con;
    into.wc = p.wc;
    into.has_c = true;
  }
}

// Greedy max-coverage, then drop centers made redundant by later picks.
// Variants break gain ties from different ends and seed with a far point.
int greedy_cover(const std::vector<std::vector<int>>& covers, int variant) {
  const std::size_t m = covers.size();
  std::vector<int> hits(m, 0);
  std::vector<std::size_t> chosen;
  std::size_t left = m;
  auto take = [&](std::size_t c) {
    chosen.push_back(c);
    for (int j : covers[c]) {
      if (hits[static_cast<std::size_t>(j)]++ == 0) --left;
    }
  };
  if (variant >= 2) take(variant == 2 ? m - 1 : m / 2);
  while (left > 0) {
    std::size_t best = 0, gain = 0;
    for (std::size_t ii = 0; ii < m; ++ii) {
      const std::size_t i = (variant % 2 == 0) ? ii : m - 1 - ii;
      std::size_t g = 0;
      for (int j : covers[i]) g += hits[static_cast<std::size_t>(j)] ? 0 : 1;
      if (g > gain) {
        gain = g;
        best = i;
      }
    }
    take(best);
  }
  int count = static_cast<int>(chosen.size());
  for (std::size_t c : chosen) {
    bool redundant = true;
    for (int j : covers[c]) redundant = redundant && hits[static_cast<std::size_t>(j)] > 1;
    if (redundant) {
      for (int j : covers[c]) --hits[static_cast<std::size_t>(j)];
      --count;
    }
  }
  return count;
}

}  // namespace

int worker_count() {
  if (const char* s = std::getenv("QE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

json PairWitness::to_json() const {
  return {{"index", index}, {"a", vec_to_json(a)}, {"b", vec_to_json(b)}, {"distance", distance}, {"image_distance", image_distance}};
}

json DistortionReport::to_json() const {
  json j;
  j["pair_count"] = pair_count;
  j["pairs_used"] = pairs_used;
  j["seed"] = seed;
  j["sampling_measure"] = sampling_measure;
  j["max_expansion"] = finite_or_null(max_expansion);
  j["max_contraction"] = finite_or_null(max_contraction);
  j["distortion"] = finite_or_null(distortion);
  j["claimed"] = finite_or_null(claimed);
  j["pass"] = pass;
  j["worst_expansion"] = worst_expansion.to_json();
  j["worst_contraction"] = worst_contraction.to_json();
  for (auto it = extras.begin(); it != extras.end(); ++it) j[it.key()] = it.value();
  return j;
}

DistortionReport empirical_distortion(const MetricSpace& space, const Embedding& f, std::size_t pair_count,
                                      std::uint64_t seed, int threads) {
  if (pair_count == 0) throw InputError("audit: pair count must be positive");
  const int T = std::max(1, std::min<int>(threads > 0 ? threads : worker_count(), static_cast<int>(pair_count)));
  const double floor_d = std::max(1e-12, space.min_resolved_distance());
  std::vector<Partial> parts(static_cast<std::size_t>(T));
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(T));
  auto work = [&](int t) {
    try {
      const std::size_t lo = pair_count * static_cast<std::size_t>(t) / static_cast<std::size_t>(T);
      const std::size_t hi = pair_count * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(T);
      Partial& P = parts[static_cast<std::size_t>(t)];
      for (std::size_t i = lo; i < hi; ++i) {
        const auto [a, b] = space.sample_pair(seed, i);
        const double d = space.distance(a, b);
        if (!(d > floor_d)) continue;
        const double e = (f.eval(a) - f.eval(b)).norm();
        ++P.used;
        PairWitness w{i, a, b, d, e};
        const double ex = e / d;
        const double co = e > 0 ? d / e : kInf;
        if (!P.has_e || ex > P.exp) {
          P.exp = ex;
          P.we = w;
          P.has_e = true;
        }
        if (!P.has_c || co > P.con) {
          P.con = co;
          P.wc = w;
          P.has_c = true;
        }
      }
    } catch (...) {
      errs[static_cast<std::size_t>(t)] = std::current_exception();
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  Partial all;
  for (const auto& p : parts) merge(all, p);
  if (all.used == 0) throw InvariantError("audit: every sampled pair was degenerate");
  DistortionReport r;
  r.pair_count = pair_count;
  r.pairs_used = all.used;
  r.seed = seed;
  r.sampling_measure = space.sampling_measure();
  r.max_expansion = all.exp;
  r.max_contraction = all.con;
  r.distortion = std::sqrt(all.exp * all.con);
  r.claimed = f.claimed();
  r.worst_expansion = all.we;
  r.worst_contraction = all.wc;
  if (std::isfinite(r.claimed))
    r.pass = r.distortion <= r.claimed * (1.0 + 1e-6);
  else
    r.pass = std::isfinite(r.distortion);
  return r;
}

json DoublingEstimate::to_json() const {
  json j;
  j["D"] = D;
  j["radii"] = json::array();
  for (double x : radii) j["radii"].push_back(x);
  j["centers"] = centers;
  return j;
}

DoublingEstimate estimate_doubling(const MetricSpace& space, double r, double R, int centers, int ball_samples,
                                   std::uint64_t seed) {
  if (!(r > 0) || !(R > r)) throw InputError("estimate_doubling: need R > r > 0");
  if (centers < 1 || ball_samples < 1) throw InputError("estimate_doubling: need positive sample counts");
  DoublingEstimate est;
  est.centers = centers;
  for (double rho = r; rho <= R * (1 + 1e-12); rho *= 2) est.radii.push_back(rho);
  const int dim = std::max(1, space.dim());
  for (std::size_t ri = 0; ri < est.radii.size(); ++ri) {
    const double rho = est.radii[ri];
    for (int c = 0; c < centers; ++c) {
      Rng rng(mix_seed(seed, ri * 1000003ULL + static_cast<std::uint64_t>(c)));
      const Vec x = space.sample(rng);
      std::vector<Vec> pts{x};
      for (int s = 0; s < ball_samples; ++s) {
        Vec y = space.perturb(x, rho * std::pow(rng.uniform(), 1.0 / dim), rng);
        if (space.distance(x, y) <= rho) pts.push_back(std::move(y));
      }
      const std::size_t m = pts.size();
      std::vector<std::vector<int>> covers(m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i == j || space.distance(pts[i], pts[j]) <= 0.5 * rho) covers[i].push_back(static_cast<int>(j));
      int count = static_cast<int>(m);
      for (int variant = 0; variant < 4; ++variant) count = std::min(count, greedy_cover(covers, variant));
      est.D = std::max(est.D, count);
    }
  }
  return est;
}

}  // namespace qe
