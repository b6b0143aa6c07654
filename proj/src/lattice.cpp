#include "qembed/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qe {

// ---------------------------------------------------------------- LLL

LllResult lll_reduce(const Mat& Bin, double delta) {
  Mat B = Bin;
  const int k = static_cast<int>(B.cols());
  Eigen::MatrixXi U = Eigen::MatrixXi::Identity(k, k);
  if (k == 0) return {B, U};

  Mat Bs(B.rows(), k);
  Mat mu = Mat::Zero(k, k);
  Vec bn2(k);
  auto gso = [&]() {
    for (int i = 0; i < k; ++i) {
      Bs.col(i) = B.col(i);
      for (int j = 0; j < i; ++j) {
        mu(i, j) = B.col(i).dot(Bs.col(j)) / bn2[j];
        Bs.col(i) -= mu(i, j) * Bs.col(j);
      }
      bn2[i] = Bs.col(i).squaredNorm();
      if (bn2[i] < 1e-300) throw InputError("lll_reduce: dependent basis vectors");
    }
  };
  gso();
  int i = 1;
  int guard = 0;
  while (i < k) {
    if (++guard > 100000) throw InvariantError("lll_reduce did not terminate");
    for (int j = i - 1; j >= 0; --j) {
      const double q = std::round(mu(i, j));
      if (q != 0.0) {
        B.col(i) -= q * B.col(j);
        U.col(i) -= static_cast<int>(q) * U.col(j);
        for (int m = 0; m <= j; ++m) mu(i, m) -= q * (m == j ? 1.0 : mu(j, m));
      }
    }
    if (bn2[i] >= (delta - mu(i, i - 1) * mu(i, i - 1)) * bn2[i - 1]) {
      ++i;
    } else {
      B.col(i).swap(B.col(i - 1));
      U.col(i).swap(U.col(i - 1));
      gso();
      i = std::max(i - 1, 1);
    }
  }
  return {B, U};
}

// ---------------------------------------------------------------- enumeration

LatticeEnumerator::LatticeEnumerator(const Mat& B) : B_(B), k_(static_cast<int>(B.cols())) {
  Bstar_.resize(B.rows(), k_);
  mu_ = Mat::Zero(k_, k_);
  bn2_.resize(k_);
  for (int i = 0; i < k_; ++i) {
    Bstar_.col(i) = B.col(i);
    for (int j = 0; j < i; ++j) {
      mu_(i, j) = B.col(i).dot(Bstar_.col(j)) / bn2_[j];
      Bstar_.col(i) -= mu_(i, j) * Bstar_.col(j);
    }
    bn2_[i] = Bstar_.col(i).squaredNorm();
    if (bn2_[i] < 1e-300) throw InputError("lattice basis is degenerate");
  }
  coord_solve_ = (B.transpose() * B).inverse() * B.transpose();
}

void LatticeEnumerator::coords(const Vec& target, double* y, double& perp2) const {
  Vec yy = coord_solve_ * target;
  for (int i = 0; i < k_; ++i) y[i] = yy[i];
  perp2 = (target - B_ * yy).squaredNorm();
}

std::vector<Eigen::VectorXi> LatticeEnumerator::ball(double radius, std::size_t cap) const {
  std::vector<Eigen::VectorXi> out;
  if (k_ == 0) return out;
  const double R2 = radius * radius * (1.0 + 1e-12) + 1e-300;
  std::vector<long> c(k_, 0);
  std::function<void(int, double)> rec = [&](int j, double partial) {
    double ctr = 0.0;
    for (int i = j + 1; i < k_; ++i) ctr -= mu_(i, j) * static_cast<double>(c[i]);
    const double rem = R2 - partial;
    if (rem < 0) return;
    const double w = std::sqrt(rem / bn2_[j]);
    const long lo = static_cast<long>(std::ceil(ctr - w));
    const long hi = static_cast<long>(std::floor(ctr + w));
    for (long v = lo; v <= hi; ++v) {
      c[j] = v;
      const double t = static_cast<double>(v) - ctr;
      const double np = partial + bn2_[j] * t * t;
      if (np > R2) continue;
      if (j == 0) {
        bool zero = true;
        for (long x : c) zero = zero && x == 0;
        if (!zero) {
          Eigen::VectorXi e(k_);
          for (int i = 0; i < k_; ++i) e[i] = static_cast<int>(c[i]);
          out.push_back(e);
          if (out.size() > cap) throw InvariantError("lattice enumeration cap exceeded");
        }
      } else {
        rec(j - 1, np);
      }
    }
    c[j] = 0;
  };
  rec(k_ - 1, 0.0);
  return out;
}

Eigen::VectorXi LatticeEnumerator::closest(const Vec& target) const {
  Eigen::VectorXi best = Eigen::VectorXi::Zero(k_);
  if (k_ == 0) return best;
  std::vector<double> y(k_);
  double perp2 = 0.0;
  coords(target, y.data(), perp2);
  std::vector<long> c(k_, 0);
  // Babai nearest plane for the initial bound.
  double babai = 0.0;
  for (int j = k_ - 1; j >= 0; --j) {
    double ctr = y[j];
    for (int i = j + 1; i < k_; ++i) ctr -= mu_(i, j) * (static_cast<double>(c[i]) - y[i]);
    c[j] = std::lround(ctr);
    const double t = static_cast<double>(c[j]) - ctr;
    babai += bn2_[j] * t * t;
  }
  for (int i = 0; i < k_; ++i) best[i] = static_cast<int>(c[i]);
  double R2 = babai * (1.0 + 1e-12) + 1e-300;
  std::fill(c.begin(), c.end(), 0);
  std::function<void(int, double)> rec = [&](int j, double partial) {
    double ctr = y[j];
    for (int i = j + 1; i < k_; ++i) ctr -= mu_(i, j) * (static_cast<double>(c[i]) - y[i]);
    const double rem = R2 - partial;
    if (rem < 0) return;
    const double w = std::sqrt(rem / bn2_[j]);
    const long lo = static_cast<long>(std::ceil(ctr - w));
    const long hi = static_cast<long>(std::floor(ctr + w));
    for (long v = lo; v <= hi; ++v) {
      const double t = static_cast<double>(v) - ctr;
      const double np = partial + bn2_[j] * t * t;
      if (np > R2) continue;
      c[j] = v;
      if (j == 0) {
        if (np < R2) {
          R2 = np;
          for (int i = 0; i < k_; ++i) best[i] = static_cast<int>(c[i]);
        }
      } else {
        rec(j - 1, np);
      }
    }
  };
  rec(k_ - 1, 0.0);
  return best;
}

double LatticeEnumerator::dist2(const Vec& target) const {
  const Eigen::VectorXi c = closest(target);
  return (target - B_ * c.cast<double>()).squaredNorm();
}

// ---------------------------------------------------------------- params

namespace {
double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
}  // namespace

StratParams StratParams::with_c(int n, double c_n) {
  StratParams p;
  p.n = n;
  p.c_n = c_n;
  p.l = 400.0 * c_n;
  p.L = 2.0 * std::pow(p.l, n);
  p.C_n = 6.0 * n;
  return p;
}

StratParams StratParams::for_dimension(int n) { return with_c(n, factorial(n + 1)); }

StratParams StratParams::with_l(int n, double l) {
  StratParams p = with_c(n, l / 400.0);
  p.l = l;
  p.L = 2.0 * std::pow(l, n);
  return p;
}

json StratParams::to_json() const {
  json j;
  j["n"] = n;
  j["c_n"] = c_n;
  j["l"] = l;
  j["L"] = L;
  j["C_n"] = C_n;
  return j;
}

// ---------------------------------------------------------------- grouping

Grouping canonical_grouping(const std::vector<double>& norms, double l) {
  if (norms.empty()) throw InputError("canonical_grouping: empty input");
  for (std::size_t i = 1; i < norms.size(); ++i)
    if (norms[i] < norms[i - 1] * (1.0 - 1e-9)) throw InputError("canonical_grouping: norms not sorted");
  Grouping g;
  g.groups.push_back({0});
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
    if (norms[i + 1] > l * norms[i]) g.groups.push_back({});
    g.groups.back().push_back(static_cast<int>(i + 1));
  }
  for (const auto& grp : g.groups) {
    double m = 0.0;
    for (int idx : grp) m = std::max(m, norms[static_cast<std::size_t>(idx)]);
    g.scales.push_back(2.0 * m);
  }
  return g;
}

// ---------------------------------------------------------------- short basis

namespace {

long long det_int(std::vector<std::vector<long long>> a) {
  // fraction-free Bareiss elimination
  const int n = static_cast<int>(a.size());
  long long sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k] == 0) {
      int sw = -1;
      for (int r = k + 1; r < n; ++r)
        if (a[r][k] != 0) {
          sw = r;
          break;
        }
      if (sw < 0) return 0;
      std::swap(a[k], a[sw]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

// gcd of all maximal minors of an n x m integer matrix (m <= n): equals 1
// iff the columns extend to a basis of Z^n.
long long minor_gcd(const std::vector<Eigen::VectorXi>& cols) {
  const int m = static_cast<int>(cols.size());
  const int n = static_cast<int>(cols[0].size());
  long long g = 0;
  std::vector<int> rows(m);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m) {
      std::vector<std::vector<long long>> a(m, std::vector<long long>(m));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a[i][j] = cols[j][rows[i]];
      g = std::gcd(g, std::llabs(det_int(a)));
      return;
    }
    for (int r = start; r < n; ++r) {
      rows[depth] = r;
      rec(r + 1, depth + 1);
    }
  };
  rec(0, 0);
  return g;
}

void canonical_sign(Vec& v, Eigen::VectorXi& c) {
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0) {
        v = -v;
        c = -c;
      }
      return;
    }
  }
}

}  // namespace

ShortBasis short_basis(const Mat& basis, const StratParams& params) {
  const int n = static_cast<int>(basis.rows());
  if (basis.cols() != n) throw InputError("short_basis: need n generators in R^n");
  Eigen::FullPivLU<Mat> lu(basis);
  if (lu.rank() < n) throw InputError("short_basis: generators do not span (dependent or degenerate)");
  if (n > 6) throw InputError("short_basis: desk-scale limit n <= 6");

  const LllResult red = lll_reduce(basis);
  const LatticeEnumerator en(red.basis);
  double maxn = 0.0, minn = kInf;
  for (int i = 0; i < n; ++i) {
    maxn = std::max(maxn, red.basis.col(i).norm());
    minn = std::min(minn, red.basis.col(i).norm());
  }
  if (minn <= 1e-6) throw InputError("short_basis: lattice not discrete at 1e-6");

  struct Cand {
    Vec v;
    Eigen::VectorXi c;
    double norm;
  };
  std::vector<Cand> cands;
  for (auto& c : en.ball(2.0 * maxn)) {
    Vec v = red.basis * c.cast<double>();
    Eigen::VectorXi cc = c;
    canonical_sign(v, cc);
    cands.push_back({v, cc, v.norm()});
  }
  // dedupe +/- pairs
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    for (int i = 0; i < a.c.size(); ++i)
      if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    return false;
  });
  cands.erase(std::unique(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.c == b.c; }),
              cands.end());
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.norm < b.norm; });
  // within norm ties (relative 1e-9): lexicographically largest first
  for (std::size_t s = 0; s < cands.size();) {
    std::size_t e = s + 1;
    while (e < cands.size() && cands[e].norm <= cands[s].norm * (1.0 + 1e-9)) ++e;
    std::sort(cands.begin() + static_cast<long>(s), cands.begin() + static_cast<long>(e),
              [](const Cand& a, const Cand& b) {
                for (int i = 0; i < a.v.size(); ++i) {
                  if (std::abs(a.v[i] - b.v[i]) > 1e-12 * std::max(1.0, std::abs(a.v[i])))
                    return a.v[i] > b.v[i];
                }
                return false;
              });
    s = e;
  }

  std::vector<Eigen::VectorXi> chosen;
  std::vector<Vec> chosen_v;
  for (const auto& cd : cands) {
    if (static_cast<int>(chosen.size()) == n) break;
    std::vector<Eigen::VectorXi> trial = chosen;
    trial.push_back(cd.c);
    if (minor_gcd(trial) == 1) {
      chosen = trial;
      chosen_v.push_back(cd.v);
    }
  }
  if (static_cast<int>(chosen.size()) != n) throw InvariantError("short_basis: enumeration radius too small");

  ShortBasis sb;
  sb.params = params;
  sb.vectors.resize(n, n);
  sb.coeffs.resize(n, n);
  for (int i = 0; i < n; ++i) {
    sb.vectors.col(i) = chosen_v[static_cast<std::size_t>(i)];
    sb.norms.push_back(chosen_v[static_cast<std::size_t>(i)].norm());
    sb.coeffs.col(i) = red.transform * chosen[static_cast<std::size_t>(i)];
  }
  sb.grouping = canonical_grouping(sb.norms, params.l);
  return sb;
}

json ShortBasis::to_json() const {
  json j;
  json vecs = json::array();
  for (int i = 0; i < vectors.cols(); ++i) vecs.push_back(vec_to_json(vectors.col(i)));
  j["vectors"] = vecs;
  j["norms"] = norms;
  j["groups"] = grouping.groups;
  j["scales"] = grouping.scales;
  j["s"] = s();
  j["params"] = params.to_json();
  return j;
}

bool in_integer_span(const Mat& B, const Vec& v, double tol) {
  const Vec x = B.colPivHouseholderQr().solve(v);
  if ((B * x - v).norm() > tol * std::max(1.0, v.norm())) return false;
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - std::round(x[i])) > tol) return false;
  return true;
}

// ---------------------------------------------------------------- scale check

json ScaleCheck::to_json() const {
  json j;
  j["pass"] = pass;
  j["min_outside"] = min_outside;
  j["witnesses"] = witnesses;
  return j;
}

ScaleCheck scale_properties_check(const QuotientSpace& space, const ShortBasis& basis, const Vec& p) {
  ScaleCheck out;
  const int n = static_cast<int>(basis.vectors.rows());
  for (const auto& g : space.generators())
    if (!g.is_translation()) throw InputError("scale_properties_check: needs a translational lattice");
  const double l = basis.params.l;
  const int s = basis.s();
  std::vector<int> J;
  for (int k = 0; k < s; ++k) {
    for (int idx : basis.grouping.groups[static_cast<std::size_t>(k)]) J.push_back(idx);
    const double lk = basis.grouping.scales[static_cast<std::size_t>(k)];
    Mat Bk(n, static_cast<int>(J.size()));
    for (std::size_t i = 0; i < J.size(); ++i) Bk.col(static_cast<int>(i)) = basis.vectors.col(J[i]);
    for (std::size_t i = 0; i < J.size(); ++i) {
      const double nr = Bk.col(static_cast<int>(i)).norm();
      if (!(nr < lk)) {
        out.pass = false;
        out.witnesses.push_back("generator of J_" + std::to_string(k + 1) + " has norm >= l_k");
      }
    }
    if (k == s - 1) {
      out.min_outside.push_back(kInf);
      break;  // Lambda_s is the whole lattice
    }
    // (a) elements of norm < l_k lie in Lambda_k (enumerated by group words)
    const GroupBall ball = space.enumerate_ball(p, lk);
    for (const auto& g : ball.elements) {
      if (space.displacement(g, p) >= lk) continue;
      const Vec t = g.translation().head(n);
      if (!in_integer_span(Bk, t)) {
        out.pass = false;
        out.witnesses.push_back("element of norm " + std::to_string(t.norm()) + " < l_" + std::to_string(k + 1) +
                                " outside Lambda_k");
      }
    }
    // (b) exact minimum norm over Lambda \ Lambda_k: enumerate the projection
    // onto the orthogonal complement of span(Lambda_k), then solve the fiber CVP.
    Mat Q = Bk.householderQr().householderQ();
    Mat P = Mat::Identity(n, n) - Q.leftCols(Bk.cols()) * Q.leftCols(Bk.cols()).transpose();
    Mat rest(n, n - static_cast<int>(J.size()));
    {
      int c = 0;
      for (int i = 0; i < n; ++i)
        if (std::find(J.begin(), J.end(), i) == J.end()) rest.col(c++) = basis.vectors.col(i);
    }
    double best = kInf;
    for (int i = 0; i < rest.cols(); ++i) best = std::min(best, rest.col(i).norm());
    const LllResult pr = lll_reduce(P * rest);
    const LatticeEnumerator pen(pr.basis);
    const LatticeEnumerator fen(lll_reduce(Bk).basis);
    Mat restU = rest * pr.transform.cast<double>();
    for (const auto& c : pen.ball(best)) {
      const Vec lam = restU * c.cast<double>();
      const Vec par = lam - P * lam;
      const double d2 = (P * lam).squaredNorm() + fen.dist2(par);
      best = std::min(best, std::sqrt(d2));
    }
    out.min_outside.push_back(best);
    if (!(best > l * lk / 4.0)) {
      out.pass = false;
      out.witnesses.push_back("element outside Lambda_" + std::to_string(k + 1) + " with norm " +
                              std::to_string(best) + " <= l*l_k/4");
    }
  }
  return out;
}

// ---------------------------------------------------------------- diameter

DiameterBound diameter_bound(const QuotientSpace& space, const ShortBasis& basis, int grid_per_axis) {
  DiameterBound out;
  const int n = static_cast<int>(basis.vectors.rows());
  for (const auto& g : space.generators())
    if (!g.is_translation()) throw InputError("diameter_bound: translations only");
  double mx = 0.0;
  for (double v : basis.norms) mx = std::max(mx, v);
  out.analytic = basis.params.C_n * mx;

  int rank = 0;
  if (!space.generators().empty()) {
    Mat T(space.ambient().n, static_cast<int>(space.generators().size()));
    for (std::size_t i = 0; i < space.generators().size(); ++i)
      T.col(static_cast<int>(i)) = space.generators()[i].translation();
    rank = static_cast<int>(Eigen::FullPivLU<Mat>(T).rank());
  }
  const Vec& b = space.basepoint();
  if (rank < space.ambient().n || space.ambient().d > 0) {
    // a free direction: probe far along it
    Vec far = b;
    far[0] += 1e3 * out.analytic + 1.0;
    out.empirical = space.distance(b, far);
    out.noncompact = out.empirical > 10.0 * out.analytic;
    out.pass = false;
    return out;
  }
  const int G = grid_per_axis + (grid_per_axis % 2);  // even: includes u = 1/2
  std::vector<int> idx(n, 0);
  double emp = 0.0;
  while (true) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = static_cast<double>(idx[i]) / G;
    emp = std::max(emp, space.distance(b, b + basis.vectors * u));
    int i = 0;
    while (i < n && ++idx[i] == G) idx[i++] = 0;
    if (i == n) break;
  }
  out.empirical = emp;
  out.noncompact = emp > 10.0 * out.analytic;
  out.pass = emp <= out.analytic;
  return out;
}

}  // namespace qe
