#include "qembed/isometry.hpp"

#include <algorithm>
#include <cmath>

namespace qe {

Ambient Ambient::euclidean(int n) { return Ambient{AmbientKind::Euclidean, n, 0, 1.0}; }
Ambient Ambient::sphere(int n, double radius) { return Ambient{AmbientKind::Sphere, n, 0, radius}; }
Ambient Ambient::product(int n, int d) { return Ambient{AmbientKind::ProductEuclidean, n, d, 1.0}; }
Ambient Ambient::product_sphere(int n, int d, double radius) {
  return Ambient{AmbientKind::ProductSphere, n, d, radius};
}

namespace {

double sphere_dist(const double* a, const double* b, int n, double rho) {
  // 2 atan2(|a - b|, |a + b|): no cancellation near 0 or pi, unlike acos
  double m2 = 0.0, p2 = 0.0;
  for (int i = 0; i < n; ++i) {
    m2 += (a[i] - b[i]) * (a[i] - b[i]);
    p2 += (a[i] + b[i]) * (a[i] + b[i]);
  }
  return 2.0 * rho * std::atan2(std::sqrt(m2), std::sqrt(p2));
}

double euclid_dist2(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace

double Ambient::distance(const Vec& a, const Vec& b) const {
  switch (kind) {
    case AmbientKind::Euclidean:
      return std::sqrt(euclid_dist2(a.data(), b.data(), n));
    case AmbientKind::Sphere:
      return sphere_dist(a.data(), b.data(), n, radius);
    case AmbientKind::ProductEuclidean:
      return std::sqrt(euclid_dist2(a.data(), b.data(), n + d));
    case AmbientKind::ProductSphere: {
      const double s = sphere_dist(a.data() + n, b.data() + n, d, radius);
      return std::sqrt(euclid_dist2(a.data(), b.data(), n) + s * s);
    }
  }
  return 0.0;
}

void Ambient::check_point(const Vec& x) const {
  if (x.size() != dim()) throw InputError("point dimension mismatch");
  if (kind == AmbientKind::Sphere) {
    if (std::abs(x.norm() - radius) > kTol * std::max(1.0, radius))
      throw InputError("point is not on the sphere");
  } else if (kind == AmbientKind::ProductSphere) {
    if (std::abs(x.tail(d).norm() - radius) > kTol * std::max(1.0, radius))
      throw InputError("fiber point is not on the sphere");
  }
}

json Ambient::to_json() const {
  json j;
  switch (kind) {
    case AmbientKind::Euclidean:
      j["kind"] = "euclidean";
      j["n"] = n;
      break;
    case AmbientKind::Sphere:
      j["kind"] = "sphere";
      j["n"] = n;
      j["radius"] = radius;
      break;
    case AmbientKind::ProductEuclidean:
      j["kind"] = "product";
      j["n"] = n;
      j["d"] = d;
      break;
    case AmbientKind::ProductSphere:
      j["kind"] = "product";
      j["n"] = n;
      j["d"] = d;
      j["radius"] = radius;
      break;
  }
  return j;
}

Ambient Ambient::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("n"))
    throw InputError("ambient needs kind and n");
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("n").get<int>();
  if (n < 1) throw InputError("ambient dimension must be positive");
  if (kind == "euclidean") return euclidean(n);
  if (kind == "sphere") return sphere(n, j.value("radius", 1.0));
  if (kind == "product") {
    const int d = j.at("d").get<int>();
    if (d < 1) throw InputError("product fiber dimension must be positive");
    if (j.contains("radius")) return product_sphere(n, d, j.at("radius").get<double>());
    return product(n, d);
  }
  throw InputError("unknown ambient kind: " + kind);
}

bool Ambient::operator==(const Ambient& o) const {
  return kind == o.kind && n == o.n && d == o.d && radius == o.radius;
}

AffineIsometry::AffineIsometry(Mat A, Vec t, Mat B) : A_(std::move(A)), t_(std::move(t)), B_(std::move(B)) {
  if (A_.rows() != A_.cols() || t_.size() != A_.rows())
    throw InputError("isometry matrix/translation dimension mismatch");
  if (B_.rows() != B_.cols()) throw InputError("fiber matrix must be square");
}

AffineIsometry AffineIsometry::identity(int n, int d) {
  return AffineIsometry(Mat::Identity(n, n), Vec::Zero(n), Mat::Identity(d, d));
}

AffineIsometry AffineIsometry::translation(const Vec& t, int d) {
  const int n = static_cast<int>(t.size());
  return AffineIsometry(Mat::Identity(n, n), t, Mat::Identity(d, d));
}

AffineIsometry AffineIsometry::rotation2(double angle) {
  Mat R(2, 2);
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return AffineIsometry(R, Vec::Zero(2));
}

Vec AffineIsometry::act(const Vec& x) const {
  const int n = this->n(), d = this->d();
  if (x.size() != n + d) throw InputError("act: dimension mismatch");
  Vec out(n + d);
  act_into(x.data(), out.data());
  return out;
}

void AffineIsometry::act_into(const double* x, double* out) const {
  const int n = this->n(), d = this->d();
  for (int i = 0; i < n; ++i) {
    double s = t_[i];
    for (int k = 0; k < n; ++k) s += A_(i, k) * x[k];
    out[i] = s;
  }
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += B_(i, k) * x[n + k];
    out[n + i] = s;
  }
}

AffineIsometry AffineIsometry::inverse() const {
  Mat At = A_.transpose();
  return AffineIsometry(At, -(At * t_), B_.transpose());
}

bool AffineIsometry::is_orthogonal(double tol) const {
  const int n = this->n(), d = this->d();
  if ((A_.transpose() * A_ - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > tol) return false;
  if (d > 0 && (B_.transpose() * B_ - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

bool AffineIsometry::is_translation(double tol) const {
  const int n = this->n(), d = this->d();
  if ((A_ - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > tol) return false;
  if (d > 0 && (B_ - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

bool AffineIsometry::same_action(const AffineIsometry& o, double tol) const {
  if (n() != o.n() || d() != o.d()) return false;
  // Probe frame: origin plus the unit basis points.
  if ((t_ - o.t_).cwiseAbs().maxCoeff() > tol) return false;
  for (int c = 0; c < n(); ++c)
    if (((A_.col(c) + t_) - (o.A_.col(c) + o.t_)).cwiseAbs().maxCoeff() > tol) return false;
  for (int c = 0; c < d(); ++c)
    if ((B_.col(c) - o.B_.col(c)).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

json AffineIsometry::to_json() const {
  json j;
  j["matrix"] = mat_to_json_flat(A_);
  j["translation"] = vec_to_json(t_);
  if (d() > 0) j["fiber_matrix"] = mat_to_json_flat(B_);
  return j;
}

AffineIsometry AffineIsometry::from_json(const json& j, int n, int d) {
  if (!j.is_object()) throw InputError("generator must be an object");
  Mat A = j.contains("matrix") ? mat_from_json(j.at("matrix"), n, n) : Mat(Mat::Identity(n, n));
  Vec t = j.contains("translation") ? vec_from_json(j.at("translation")) : Vec(Vec::Zero(n));
  if (t.size() != n) throw InputError("translation length mismatch");
  Mat B = j.contains("fiber_matrix") ? mat_from_json(j.at("fiber_matrix"), d, d) : Mat(Mat::Identity(d, d));
  AffineIsometry g(A, t, B);
  if (!g.is_orthogonal(1e-8)) throw InputError("generator matrix is not orthogonal");
  return g;
}

Vec act(const AffineIsometry& g, const Vec& x) { return g.act(x); }

AffineIsometry compose(const AffineIsometry& g1, const AffineIsometry& g2) {
  if (g1.n() != g2.n() || g1.d() != g2.d()) throw InputError("compose: dimension mismatch");
  return AffineIsometry(g1.matrix() * g2.matrix(), g1.matrix() * g2.translation() + g1.translation(),
                        g1.fiber_matrix() * g2.fiber_matrix());
}

AffineIsometry inverse(const AffineIsometry& g) { return g.inverse(); }

}  // namespace qe
