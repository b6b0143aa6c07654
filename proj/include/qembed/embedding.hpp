#pragma once

#include <functional>
#include <map>

#include "qembed/space.hpp"

namespace qe {

// Certified two-sided constants: lower * d <= |f(a) - f(b)| <= upper * d.
// `claimed` is the distortion bound audited against.
struct Bounds {
  double upper = kInf;
  double lower = 0.0;
  double claimed = kInf;
  std::string provenance;
  double balanced() const { return lower > 0 ? std::sqrt(upper / lower) : kInf; }
  json to_json() const;
  static Bounds from_json(const json& j);
  static Bounds certified(double upper, double lower, std::string provenance);
};

class Embedding;
using EmbPtr = std::shared_ptr<const Embedding>;

// A node of an embedding construction tree: an evaluable map into R^N.
class Embedding {
 public:
  Embedding(Bounds b, std::vector<EmbPtr> children) : bounds_(std::move(b)), children_(std::move(children)) {}
  virtual ~Embedding() = default;
  virtual int target_dim() const = 0;
  virtual Vec eval(const Vec& x) const = 0;
  virtual std::string op() const = 0;
  virtual json params() const { return json::object(); }

  const Bounds& bounds() const { return bounds_; }
  void set_bounds(Bounds b) { bounds_ = std::move(b); }
  double claimed() const { return bounds_.claimed; }
  const std::vector<EmbPtr>& children() const { return children_; }
  json to_json() const;

 protected:
  Bounds bounds_;
  std::vector<EmbPtr> children_;
};

// ---- primitive and structural nodes ----

class CoordsNode : public Embedding {  // x -> x[offset .. offset+len)
 public:
  CoordsNode(int offset, int len);
  int target_dim() const override { return len_; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "coords"; }
  json params() const override;

 private:
  int offset_, len_;
};

class AffineNode : public Embedding {  // scale * f + shift
 public:
  AffineNode(EmbPtr f, double scale, Vec shift);
  int target_dim() const override { return children_[0]->target_dim(); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "affine"; }
  json params() const override;
  double scale() const { return scale_; }

 private:
  double scale_;
  Vec shift_;
};

class ConcatNode : public Embedding {  // all children on the same input, concatenated
 public:
  ConcatNode(std::string tag, std::vector<EmbPtr> children, Bounds b, json info = json::object());
  int target_dim() const override { return dim_; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return tag_; }
  json params() const override { return info_; }

 private:
  std::string tag_;
  int dim_ = 0;
  json info_;
};

class PipeNode : public Embedding {  // second(first(x))
 public:
  PipeNode(EmbPtr first, EmbPtr second, Bounds b);
  int target_dim() const override { return children_[1]->target_dim(); }
  Vec eval(const Vec& x) const override { return children_[1]->eval(children_[0]->eval(x)); }
  std::string op() const override { return "pipe"; }
};

// u_i = <w_i, x>; output pairs radii_i (cos 2 pi u_i, sin 2 pi u_i).
class TorusCirclesNode : public Embedding {
 public:
  TorusCirclesNode(Mat W, Vec radii, Bounds b);
  int target_dim() const override { return 2 * static_cast<int>(W_.rows()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "torus_circles"; }
  json params() const override;

 private:
  Mat W_;
  Vec radii_;
};

// f_j(x) = min_a [ values(a, j) + L d(x, a) ]
class McShaneNode : public Embedding {
 public:
  McShaneNode(SpacePtr host, std::vector<Vec> points, Mat values, double L, Bounds b);
  int target_dim() const override { return static_cast<int>(values_.cols()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "mcshane"; }
  json params() const override;
  const std::vector<Vec>& points() const { return points_; }
  const Mat& values() const { return values_; }
  double lipschitz() const { return L_; }

 private:
  SpacePtr host_;
  std::vector<Vec> points_;
  Mat values_;
  double L_;
};

class DistNetNode : public Embedding {  // (d(x, q_i))_i
 public:
  DistNetNode(SpacePtr host, std::vector<Vec> points, Bounds b);
  int target_dim() const override { return static_cast<int>(points_.size()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "dist_net"; }
  json params() const override;

 private:
  SpacePtr host_;
  std::vector<Vec> points_;
};

class DistMinNode : public Embedding {  // min_i d(x, q_i)
 public:
  DistMinNode(SpacePtr host, std::vector<Vec> points);
  int target_dim() const override { return 1; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "dist_min"; }
  json params() const override;

 private:
  SpacePtr host_;
  std::vector<Vec> points_;
};

class QuotientSpace;
class LocalLiftNode : public Embedding {  // closest lift of x to q, minus q
 public:
  LocalLiftNode(SpacePtr host, Vec q, Bounds b);
  int target_dim() const override { return static_cast<int>(q_.size()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "local_lift"; }
  json params() const override;

 private:
  SpacePtr host_;
  const QuotientSpace* quot_;
  Vec q_;
};

// Class k output: sum over centers i of class k of w(d(x, q_i)) chart_i(x),
// w = 1 up to 5r/8, linear down to 0 at r.
class TentGlueNode : public Embedding {
 public:
  TentGlueNode(SpacePtr host, std::vector<Vec> centers, std::vector<int> classes, int K, double r,
               std::vector<EmbPtr> charts, Bounds b);
  int target_dim() const override { return K_ * N_; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "tent_glue"; }
  json params() const override;

 private:
  SpacePtr host_;
  std::vector<Vec> centers_;
  std::vector<int> classes_;
  int K_;
  int N_ = 0;
  double r_;
};

// children: [radial, chart_1, ...]; piece i weighted by
// max(0, 1 - dist(radial(x), [a_i, b_i]) / tau_i).
struct CutoffPiece {
  double a = 0, b = 0, tau = 1;
};
class CutoffSumNode : public Embedding {
 public:
  CutoffSumNode(EmbPtr radial, std::vector<CutoffPiece> pieces, std::vector<EmbPtr> charts, int dim, Bounds b);
  int target_dim() const override { return dim_; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "cutoff_sum"; }
  json params() const override;

 private:
  std::vector<CutoffPiece> pieces_;
  int dim_;
};

class FiberNormNode : public Embedding {  // |x[n .. n+d)|
 public:
  FiberNormNode(int n, int d);
  int target_dim() const override { return 1; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "fiber_norm"; }
  json params() const override;

 private:
  int n_, d_;
};

// (x, z) -> (c/2pi cos(2 pi x/c), c/2pi sin(2 pi x/c), R(-alpha x) z) for z in R^2
class UntwistCircleNode : public Embedding {
 public:
  UntwistCircleNode(double c, double alpha, Bounds b);
  int target_dim() const override { return 4; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "untwist_circle"; }
  json params() const override;

 private:
  double c_, alpha_;
};

// (x, z) -> (|z|, s * torus_circles(x, rho * arg z))
class AnnulusChartNode : public Embedding {
 public:
  AnnulusChartNode(double rho, Mat W, Vec radii, Bounds b);
  int target_dim() const override { return 1 + 2 * static_cast<int>(W_.rows()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "annulus_chart"; }
  json params() const override;

 private:
  double rho_;
  Mat W_;
  Vec radii_;
};

class LensChartNode : public Embedding {  // S^3 point -> bundle point (x, z)
 public:
  LensChartNode(int j, double limit, Bounds b);
  int target_dim() const override { return 3; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "lens_chart"; }
  json params() const override;

 private:
  int j_;
  double limit_;
};

class LensRegionDistNode : public Embedding {
 public:
  explicit LensRegionDistNode(int j);
  int target_dim() const override { return 1; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "lens_region_dist"; }
  json params() const override;

 private:
  int j_;
};

// (t, x) -> (L t, t (scale f(x) + shift))
class ConeNode : public Embedding {
 public:
  ConeNode(EmbPtr f, double L, double scale, Vec shift, Bounds b);
  int target_dim() const override { return 1 + children_[0]->target_dim(); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "cone"; }
  json params() const override;

 private:
  double L_, scale_;
  Vec shift_;
};

class EllipsoidMapNode : public Embedding {
 public:
  EllipsoidMapNode(double N, Bounds b);
  int target_dim() const override { return 3; }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "ellipsoid"; }
  json params() const override;

 private:
  double N_;
};

class TableNode : public Embedding {  // finite space: row index -> values row
 public:
  TableNode(Mat values, Bounds b);
  int target_dim() const override { return static_cast<int>(values_.cols()); }
  Vec eval(const Vec& x) const override;
  std::string op() const override { return "table"; }
  json params() const override;

 private:
  Mat values_;
};

// ---- artifacts ----

inline constexpr const char* kEmbeddingFormat = "qembed-embedding";
inline constexpr int kEmbeddingVersion = 1;

std::string serialize_embedding(const EmbPtr& emb, const SpacePtr& space);
struct LoadedEmbedding {
  EmbPtr embedding;
  SpacePtr space;
};
// Throws InputError on malformed/truncated input, version mismatch or an unknown op.
LoadedEmbedding deserialize_embedding(const std::string& bytes);
EmbPtr embedding_from_json(const json& node);

}  // namespace qe
