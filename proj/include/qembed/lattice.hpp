#pragma once

#include "qembed/space.hpp"

namespace qe {

// ---- exact lattice tools (columns of B are basis vectors) ----

// LLL reduction with delta = 0.99; returns reduced basis, U with B*U = reduced.
struct LllResult {
  Mat basis;
  Eigen::MatrixXi transform;
};
LllResult lll_reduce(const Mat& B, double delta = 0.99);

// Exact enumeration of lattice vectors. Coefficients are with respect to B.
class LatticeEnumerator {
 public:
  explicit LatticeEnumerator(const Mat& B);  // B should be LLL-reduced for speed
  // All nonzero coefficient vectors c with |B c| <= radius (one of each +/- pair
  // is NOT removed; both signs are returned).
  std::vector<Eigen::VectorXi> ball(double radius, std::size_t cap = 5000000) const;
  // Closest lattice vector coefficients to target (target may leave the span).
  Eigen::VectorXi closest(const Vec& target) const;
  // Squared distance from target to the lattice.
  double dist2(const Vec& target) const;
  const Mat& basis() const { return B_; }

 private:
  void coords(const Vec& target, double* y, double& perp2) const;
  Mat B_;
  Mat Bstar_;      // Gram-Schmidt vectors
  Mat mu_;         // mu(i,j) for j < i
  Vec bn2_;        // |b*_i|^2
  Mat coord_solve_; // least-squares coefficient map
  int k_ = 0;
};

// ---- short bases and collapsing scales ----

struct StratParams {
  int n = 2;
  double c_n = 6.0;
  double l = 2400.0;
  double L = 2.0 * 2400.0 * 2400.0;
  double C_n = 12.0;
  static StratParams for_dimension(int n);
  static StratParams with_c(int n, double c_n);
  static StratParams with_l(int n, double l);  // overrides l (L = 2 l^n follows)
  json to_json() const;
};

struct Grouping {
  std::vector<std::vector<int>> groups;  // 0-based indices into the basis
  std::vector<double> scales;            // l_k = 2 * max norm in group k
};
Grouping canonical_grouping(const std::vector<double>& norms, double l);

struct ShortBasis {
  Mat vectors;                 // columns gamma_1..gamma_n, sorted by norm
  std::vector<double> norms;
  Grouping grouping;
  StratParams params;
  Eigen::MatrixXi coeffs;      // vectors = input_basis * coeffs
  int s() const { return static_cast<int>(grouping.groups.size()); }
  json to_json() const;
};

// Greedy successive minima; ties by (norm, nonnegative leading coordinate,
// lexicographically largest coordinates).
ShortBasis short_basis(const Mat& basis, const StratParams& params);

struct ScaleCheck {
  bool pass = true;
  std::vector<std::string> witnesses;
  std::vector<double> min_outside;  // min |lambda| over Lambda \ Lambda_k, per k
  json to_json() const;
};
// Checks Lambda_k = <lambda : |lambda|_p < l_k> and |lambda|_p > l*l_k/4 outside.
ScaleCheck scale_properties_check(const QuotientSpace& space, const ShortBasis& basis, const Vec& p);

struct DiameterBound {
  double analytic = 0.0;
  double empirical = 0.0;
  bool pass = false;
  bool noncompact = false;
};
DiameterBound diameter_bound(const QuotientSpace& space, const ShortBasis& basis, int grid_per_axis = 24);

// Integer solve: is v in the Z-span of columns of B? (B square or full column rank)
bool in_integer_span(const Mat& B, const Vec& v, double tol = 1e-7);

}  // namespace qe
