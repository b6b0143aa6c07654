#pragma once

#include "qembed/common.hpp"

namespace qe {

enum class BlockKind { Trivial, Reflection, Rotation };
std::string to_string(BlockKind k);

struct HolonomyBlock {
  BlockKind kind = BlockKind::Trivial;
  Mat basis;                   // d x k, orthonormal columns
  Mat J;                       // k x k complex structure in block coordinates (rotation only)
  std::vector<double> angles;  // per input matrix; reflections use 0 or pi
  int dim() const { return static_cast<int>(basis.cols()); }
};

// blocks[0] is always V_0 (possibly zero-dimensional).
struct CanonicalDecomposition {
  int d = 0;
  std::vector<HolonomyBlock> blocks;
  // angle of an arbitrary element of the group on block j
  double angle_of(int j, const Mat& h) const;
  double reconstruction_error(const std::vector<Mat>& mats) const;
  double invariance_error(const std::vector<Mat>& mats) const;
  json to_json() const;
};

CanonicalDecomposition canonical_decomposition(const std::vector<Mat>& mats);

Vec euclidean_fixed_point(const std::vector<Vec>& orbit);

struct KarcherResult {
  Vec mean;
  int iterations = 0;
  double residual = 0.0;
};
// Intrinsic mean on the sphere of radius rho centered at 0.
KarcherResult karcher_mean_sphere(const std::vector<Vec>& points, double rho, double tol = 1e-12);

struct InvariantCircle {
  Vec u1, u2;          // orthonormal, u2 = J u1
  double radius = 1.0;
  Vec point(double t) const { return radius * (std::cos(t) * u1 + std::sin(t) * u2); }
};
InvariantCircle invariant_circle(const CanonicalDecomposition& dec, int j, const Vec& v);

}  // namespace qe
