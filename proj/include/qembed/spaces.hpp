#pragma once

#include "qembed/space.hpp"

namespace qe {

// l2 product of metric spaces; points are concatenated coordinates.
class ProductSpace : public MetricSpace {
 public:
  explicit ProductSpace(std::vector<SpacePtr> factors);
  int dim() const override { return dim_; }
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  Vec sample(Rng& rng) const override;
  Vec perturb(const Vec& a, double scale, Rng& rng) const override;
  double sample_scale() const override;
  const std::vector<SpacePtr>& factors() const { return factors_; }
  int offset(std::size_t i) const { return offsets_[i]; }

 private:
  std::vector<SpacePtr> factors_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

// Euclidean cone over a link of diameter <= pi; points are (t, link point).
class ConeSpace : public MetricSpace {
 public:
  ConeSpace(SpacePtr link, double t_max = 1.0);
  int dim() const override { return 1 + link_->dim(); }
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  Vec sample(Rng& rng) const override;
  Vec perturb(const Vec& a, double scale, Rng& rng) const override;
  double sample_scale() const override { return t_max_; }
  const SpacePtr& link() const { return link_; }
  double t_max() const { return t_max_; }

 private:
  SpacePtr link_;
  double t_max_;
};

// Finite metric space on indices 0..m-1 (a point is a 1-vector holding its index).
class FiniteSpace : public MetricSpace {
 public:
  explicit FiniteSpace(Mat distances);
  int dim() const override { return 1; }
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  Vec sample(Rng& rng) const override;
  Vec perturb(const Vec& a, double scale, Rng& rng) const override;
  double sample_scale() const override { return D_.maxCoeff(); }
  std::pair<Vec, Vec> sample_pair(std::uint64_t seed, std::uint64_t i) const override;
  int size() const { return static_cast<int>(D_.rows()); }
  const Mat& matrix() const { return D_; }

 private:
  std::size_t index_of(const Vec& a) const;
  Mat D_;
};

// Largest sampled distance (a lower estimate of the diameter).
double estimate_diameter(const MetricSpace& space, int pairs = 4000, std::uint64_t seed = 7);

}  // namespace qe
