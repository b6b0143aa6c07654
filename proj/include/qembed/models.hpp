#pragma once

#include <cmath>

#include "qembed/mesh.hpp"
#include "qembed/spaces.hpp"

namespace qe {

// R x R^d / Z with generator (x, z) -> (x + c, H z). Sampling is truncated at
// fiber radius 2^(k_max+1) D with D = c/2: an annulus index k in 0..k_max is
// drawn uniformly, then a radius uniformly inside that annulus.
class HolonomyBundleSpace : public QuotientSpace {
 public:
  // theta, when given, is the rotation angle H was built from (echoed by spec())
  HolonomyBundleSpace(double c, Mat H, int k_max = 8, double theta = std::nan(""));
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  double circumference() const { return c_; }
  const Mat& holonomy() const { return H_; }
  int k_max() const { return k_max_; }
  double base_diameter() const { return 0.5 * c_; }
  // annulus T_k: [0, 2D] for k = 0, [2^(k-1) D, 2^(k+1) D] otherwise
  std::pair<double, double> annulus(int k) const;
  // representative of b's class closest to a (exact)
  Vec closest_lift(const Vec& a, const Vec& b) const;
  double theta() const { return theta_; }  // rotation angle of the first plane

 private:
  double c_;
  Mat H_;
  int k_max_;
  double theta_;
  bool spec_theta_;
};

std::shared_ptr<QuotientSpace> make_flat_torus(const Mat& basis_columns);
std::shared_ptr<QuotientSpace> make_lens(int p, int q);
std::shared_ptr<HolonomyBundleSpace> make_holonomy_bundle(double theta, int d = 2, double circumference = 2 * kPi,
                                                          int k_max = 8);
// Euclidean space with no group, sampled uniformly in a box.
std::shared_ptr<QuotientSpace> make_euclidean_box(const Vec& lo, const Vec& hi);

// Any supported space from its JSON spec (quotient-core form or a "kind").
SpacePtr construct_space(const json& spec);

// ---- lens charts ----

int lens_inverse(int p, int q);  // s with s q = 1 mod p
// Coordinates (alpha, theta, phi) of a point on S^3: (cos a e^{i theta}, sin a e^{i phi}).
Eigen::Vector3d lens_coordinates(const Vec& x);
// Chart j in {1, 2}: the bundle point (x, z) of E(2 pi/p, 2 pi q/p) (chart 1)
// or E(2 pi/p, 2 pi s/p) (chart 2). `alpha_limit` bounds the chart's own
// polar coordinate (alpha for chart 1, pi/2 - alpha for chart 2).
Vec lens_chart_point(int j, const Vec& x, double alpha_limit);
// The chart operation proper: requires the point strictly inside U_j.
Vec lens_chart_map(int j, const Vec& x);
// Ratio g(v, v) / g_f(v, v) at chart coordinates for a tangent probe
// v = (d alpha, d theta, d phi).
double lens_metric_ratio(int j, double alpha, const Eigen::Vector3d& v);
struct LensCertificate {
  int probes = 0;
  double min_ratio = kInf;
  double max_ratio = 0.0;
  bool pass = false;
  json to_json() const;
};
LensCertificate lens_chart_certificate(int j, int probes, std::uint64_t seed);
// Distance from a point of S^3 to U_j (in the round metric of the lens space).
double lens_region_distance(int j, const Vec& x);

// ---- ellipsoid ----
Vec ellipsoid_map(double N, const Vec& p);

}  // namespace qe
