#include "qembed/holonomy.hpp"

#include <algorithm>
#include <cmath>

namespace qe {

std::string to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Trivial: return "trivial";
    case BlockKind::Reflection: return "reflection";
    case BlockKind::Rotation: return "rotation";
  }
  return "?";
}

namespace {

constexpr double kEigGap = 1e-6;
constexpr double kAngleMerge = 1e-7;

// Splits span(P) into eigenspaces of the compression of the symmetric S.
std::vector<Mat> split(const Mat& P, const Mat& S) {
  const Mat C = P.transpose() * S * P;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.transpose()));
  const Vec& ev = es.eigenvalues();
  std::vector<Mat> out;
  int start = 0;
  const int k = static_cast<int>(ev.size());
  for (int i = 1; i <= k; ++i) {
    if (i == k || ev[i] - ev[i - 1] > kEigGap) {
      out.push_back(P * es.eigenvectors().middleCols(start, i - start));
      start = i;
    }
  }
  return out;
}

double wrap_angle(double a) {
  if (a <= -kPi + 1e-12) a += 2 * kPi;
  return a;
}

// Basis (w1, J w1, w2, J w2, ...) of R^k adapted to the complex structure J.
Mat adapted_basis(const Mat& J) {
  const int k = static_cast<int>(J.rows());
  Mat W(k, 0);
  for (int j = 0; j < k && W.cols() < k; ++j) {
    Vec w = Vec::Unit(k, j);
    for (int c = 0; c < W.cols(); ++c) w -= W.col(c).dot(w) * W.col(c);
    if (w.norm() < 1e-6) continue;
    w.normalize();
    Vec jw = J * w;
    for (int c = 0; c < W.cols(); ++c) jw -= W.col(c).dot(jw) * W.col(c);
    jw -= w.dot(jw) * w;
    jw.normalize();
    W.conservativeResize(k, W.cols() + 2);
    W.col(W.cols() - 2) = w;
    W.col(W.cols() - 1) = jw;
  }
  return W;
}

bool same_pattern(const HolonomyBlock& a, const HolonomyBlock& b) {
  if (a.kind != b.kind || a.angles.size() != b.angles.size()) return false;
  for (std::size_t i = 0; i < a.angles.size(); ++i)
    if (std::abs(a.angles[i] - b.angles[i]) > kAngleMerge) return false;
  return true;
}

Mat block_diag(const Mat& A, const Mat& B) {
  Mat C = Mat::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  C.topLeftCorner(A.rows(), A.cols()) = A;
  C.bottomRightCorner(B.rows(), B.cols()) = B;
  return C;
}

}  // namespace

CanonicalDecomposition canonical_decomposition(const std::vector<Mat>& mats) {
  if (mats.empty()) throw InputError("canonical_decomposition: no matrices");
  const int d = static_cast<int>(mats[0].rows());
  for (const auto& A : mats) {
    if (A.rows() != d || A.cols() != d) throw InputError("canonical_decomposition: shape mismatch");
    if ((A.transpose() * A - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8)
      throw InputError("canonical_decomposition: matrix is not orthogonal");
  }
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j)
      if ((mats[i] * mats[j] - mats[j] * mats[i]).cwiseAbs().maxCoeff() > 1e-8)
        throw InputError("canonical_decomposition: matrices do not commute");

  Rng rng(0x5EED0001ULL);
  std::vector<double> r(mats.size()), s(mats.size());
  for (auto& x : r) x = static_cast<double>(1 + rng.index(996)) / 997.0;
  for (auto& x : s) x = static_cast<double>(1 + rng.index(996)) / 997.0;

  Mat M = Mat::Zero(d, d);
  for (std::size_t i = 0; i < mats.size(); ++i) M += r[i] * (mats[i] + mats[i].transpose());
  std::vector<Mat> parts = split(Mat::Identity(d, d), M);
  // safeguard against accidental eigenvalue collisions
  for (const auto& A : mats) {
    std::vector<Mat> next;
    for (const auto& P : parts)
      for (auto& Q : split(P, A + A.transpose())) next.push_back(std::move(Q));
    parts = std::move(next);
  }

  std::vector<HolonomyBlock> raw;
  for (const auto& P : parts) {
    const int k = static_cast<int>(P.cols());
    std::vector<Mat> B;
    bool rotating = false;
    for (const auto& A : mats) {
      B.push_back(P.transpose() * A * P);
      const Mat K = 0.5 * (B.back() - B.back().transpose());
      if (K.norm() > 1e-9) rotating = true;
    }
    if (!rotating) {
      HolonomyBlock hb;
      hb.basis = P;
      bool trivial = true;
      for (const auto& b : B) {
        const double c = b.trace() / k;
        hb.angles.push_back(c > 0 ? 0.0 : kPi);
        trivial = trivial && c > 0;
      }
      hb.kind = trivial ? BlockKind::Trivial : BlockKind::Reflection;
      raw.push_back(hb);
      continue;
    }
    Mat K = Mat::Zero(k, k);
    for (std::size_t i = 0; i < B.size(); ++i) K += s[i] * 0.5 * (B[i] - B[i].transpose());
    const Mat S = K.transpose() * K;
    for (const auto& Q : split(Mat::Identity(k, k), S)) {
      const int m = static_cast<int>(Q.cols());
      if (m % 2 != 0) throw InvariantError("canonical_decomposition: odd rotation block");
      const Mat KQ = Q.transpose() * K * Q;
      const double c = std::sqrt((KQ.transpose() * KQ).trace() / m);
      Mat J = KQ / c;
      const Mat W = adapted_basis(J);
      HolonomyBlock hb;
      hb.kind = BlockKind::Rotation;
      hb.basis = P * Q * W;
      hb.J = W.transpose() * J * W;
      for (const auto& A : mats) {
        const Mat b = hb.basis.transpose() * A * hb.basis;
        hb.angles.push_back(wrap_angle(std::atan2((hb.J.transpose() * b).trace() / m, b.trace() / m)));
      }
      // theta in (0, pi] for the first generator that rotates
      for (double a : hb.angles) {
        if (std::abs(std::sin(a)) > 1e-9) {
          if (a < 0) {
            hb.J = -hb.J;
            for (double& x : hb.angles) x = wrap_angle(-x);
          }
          break;
        }
      }
      raw.push_back(hb);
    }
  }

  CanonicalDecomposition dec;
  dec.d = d;
  HolonomyBlock v0;
  v0.kind = BlockKind::Trivial;
  v0.basis = Mat(d, 0);
  v0.angles.assign(mats.size(), 0.0);
  dec.blocks.push_back(v0);
  for (auto& hb : raw) {
    if (hb.kind == BlockKind::Trivial) {
      Mat nb(d, dec.blocks[0].basis.cols() + hb.basis.cols());
      nb << dec.blocks[0].basis, hb.basis;
      dec.blocks[0].basis = nb;
      continue;
    }
    bool merged = false;
    for (std::size_t j = 1; j < dec.blocks.size() && !merged; ++j) {
      auto& tgt = dec.blocks[j];
      if (!same_pattern(tgt, hb)) continue;
      Mat nb(d, tgt.basis.cols() + hb.basis.cols());
      nb << tgt.basis, hb.basis;
      tgt.basis = nb;
      if (hb.kind == BlockKind::Rotation) tgt.J = block_diag(tgt.J, hb.J);
      merged = true;
    }
    if (!merged) dec.blocks.push_back(hb);
  }
  std::stable_sort(dec.blocks.begin() + 1, dec.blocks.end(), [](const HolonomyBlock& a, const HolonomyBlock& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.angles < b.angles;
  });
  return dec;
}

double CanonicalDecomposition::angle_of(int j, const Mat& h) const {
  const auto& b = blocks.at(static_cast<std::size_t>(j));
  const int k = b.dim();
  if (k == 0) return 0.0;
  const Mat B = b.basis.transpose() * h * b.basis;
  if (b.kind == BlockKind::Rotation) return wrap_angle(std::atan2((b.J.transpose() * B).trace() / k, B.trace() / k));
  return B.trace() > 0 ? 0.0 : kPi;
}

double CanonicalDecomposition::reconstruction_error(const std::vector<Mat>& mats) const {
  double err = 0.0;
  for (const auto& A : mats) {
    Mat R = Mat::Zero(d, d);
    for (const auto& b : blocks) {
      if (b.dim() == 0) continue;
      R += b.basis * (b.basis.transpose() * A * b.basis) * b.basis.transpose();
    }
    err = std::max(err, (R - A).cwiseAbs().maxCoeff());
  }
  return err;
}

double CanonicalDecomposition::invariance_error(const std::vector<Mat>& mats) const {
  double err = 0.0;
  for (const auto& A : mats)
    for (const auto& b : blocks) {
      if (b.dim() == 0) continue;
      const Mat AP = A * b.basis;
      err = std::max(err, (AP - b.basis * (b.basis.transpose() * AP)).cwiseAbs().maxCoeff());
    }
  // pairwise orthogonality
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j)
      if (blocks[i].dim() > 0 && blocks[j].dim() > 0)
        err = std::max(err, (blocks[i].basis.transpose() * blocks[j].basis).cwiseAbs().maxCoeff());
  return err;
}

json CanonicalDecomposition::to_json() const {
  json j;
  j["d"] = d;
  json bl = json::array();
  for (const auto& b : blocks) {
    json x;
    x["kind"] = to_string(b.kind);
    x["dim"] = b.dim();
    json basis = json::array();
    for (int c = 0; c < b.dim(); ++c) basis.push_back(vec_to_json(b.basis.col(c)));
    x["basis"] = basis;
    x["angles"] = b.angles;
    bl.push_back(x);
  }
  j["blocks"] = bl;
  return j;
}

Vec euclidean_fixed_point(const std::vector<Vec>& orbit) {
  if (orbit.empty()) throw InputError("euclidean_fixed_point: empty orbit");
  // sum in a canonical (lexicographic) order so relisting does not change the bits
  std::vector<const Vec*> ptr;
  for (const auto& v : orbit) ptr.push_back(&v);
  std::sort(ptr.begin(), ptr.end(), [](const Vec* a, const Vec* b) {
    return std::lexicographical_compare(a->data(), a->data() + a->size(), b->data(), b->data() + b->size());
  });
  Vec m = Vec::Zero(orbit[0].size());
  for (const Vec* v : ptr) {
    if (v->size() != m.size()) throw InputError("euclidean_fixed_point: dimension mismatch");
    m += *v;
  }
  return m / static_cast<double>(orbit.size());
}

KarcherResult karcher_mean_sphere(const std::vector<Vec>& points, double rho, double tol) {
  if (points.empty()) throw InputError("karcher_mean_sphere: empty input");
  if (!(rho > 0)) throw InputError("karcher_mean_sphere: radius must be positive");
  const int dim = static_cast<int>(points[0].size());
  std::vector<Vec> u;
  for (const auto& p : points) {
    if (p.size() != dim) throw InputError("karcher_mean_sphere: dimension mismatch");
    if (std::abs(p.norm() - rho) > 1e-9 * std::max(1.0, rho)) throw InputError("karcher_mean_sphere: point off sphere");
    u.push_back(p / rho);
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      if (std::acos(std::clamp(u[i].dot(u[j]), -1.0, 1.0)) >= kPi / 2)
        throw InputError("karcher_mean_sphere: outside uniqueness regime");
  Vec q = Vec::Zero(dim);
  for (const auto& x : u) q += x;
  q.normalize();
  KarcherResult res;
  for (int it = 0; it < 10000; ++it) {
    Vec t = Vec::Zero(dim);
    for (const auto& x : u) {
      const double c = std::clamp(q.dot(x), -1.0, 1.0);
      Vec w = x - c * q;
      const double wn = w.norm();
      if (wn > 1e-300) t += std::atan2(wn, c) * (w / wn);
    }
    t /= static_cast<double>(u.size());
    const double tn = t.norm();
    res.iterations = it;
    res.residual = tn * rho;
    if (tn * rho < tol) {
      res.mean = q * rho;
      return res;
    }
    q = std::cos(tn) * q + std::sin(tn) * (t / tn);
    q.normalize();
  }
  throw InvariantError("karcher_mean_sphere: no convergence after 10000 iterations");
}

InvariantCircle invariant_circle(const CanonicalDecomposition& dec, int j, const Vec& v) {
  if (j < 0 || j >= static_cast<int>(dec.blocks.size())) throw InputError("invariant_circle: no such block");
  const auto& b = dec.blocks[static_cast<std::size_t>(j)];
  if (b.kind != BlockKind::Rotation) throw InputError("invariant_circle: block is not a rotation block");
  if (v.size() != dec.d) throw InputError("invariant_circle: dimension mismatch");
  const Vec c = b.basis.transpose() * v;
  if (c.norm() < 1e-12) throw InputError("invariant_circle: zero projection");
  InvariantCircle out;
  const Vec cn = c / c.norm();
  out.u1 = b.basis * cn;
  out.u2 = b.basis * (b.J * cn);
  out.radius = 1.0;
  return out;
}

}  // namespace qe
