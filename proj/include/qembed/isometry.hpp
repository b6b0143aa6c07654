#pragma once

#include "qembed/common.hpp"

namespace qe {

enum class AmbientKind { Euclidean, Sphere, ProductEuclidean, ProductSphere };

// Ambient geometry of a quotient. Points are stored as n base coordinates
// followed by d fiber coordinates (d = 0 unless the ambient is a product).
// For Sphere, the n coordinates lie on the sphere of the given radius.
struct Ambient {
  AmbientKind kind = AmbientKind::Euclidean;
  int n = 1;
  int d = 0;
  double radius = 1.0;

  static Ambient euclidean(int n);
  static Ambient sphere(int n, double radius = 1.0);
  static Ambient product(int n, int d);
  static Ambient product_sphere(int n, int d, double radius = 1.0);

  int dim() const { return n + d; }
  bool has_fiber() const { return d > 0; }
  double distance(const Vec& a, const Vec& b) const;
  void check_point(const Vec& x) const;  // throws InputError
  json to_json() const;
  static Ambient from_json(const json& j);
  bool operator==(const Ambient& o) const;
};

// x -> (A x_base + t, B x_fiber).
class AffineIsometry {
 public:
  AffineIsometry() = default;
  AffineIsometry(Mat A, Vec t, Mat B = Mat());

  static AffineIsometry identity(int n, int d = 0);
  static AffineIsometry translation(const Vec& t, int d = 0);
  static AffineIsometry rotation2(double angle);

  const Mat& matrix() const { return A_; }
  const Vec& translation() const { return t_; }
  const Mat& fiber_matrix() const { return B_; }
  int n() const { return static_cast<int>(A_.rows()); }
  int d() const { return static_cast<int>(B_.rows()); }

  Vec act(const Vec& x) const;
  void act_into(const double* x, double* out) const;
  AffineIsometry inverse() const;
  bool is_orthogonal(double tol = kTol) const;
  bool is_translation(double tol = kTol) const;  // linear parts are identity
  bool same_action(const AffineIsometry& o, double tol = kTol) const;

  json to_json() const;
  static AffineIsometry from_json(const json& j, int n, int d);

 private:
  Mat A_;
  Vec t_;
  Mat B_;
};

Vec act(const AffineIsometry& g, const Vec& x);
AffineIsometry compose(const AffineIsometry& g1, const AffineIsometry& g2);  // g1 after g2
AffineIsometry inverse(const AffineIsometry& g);

}  // namespace qe
