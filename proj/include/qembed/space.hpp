#pragma once

#include <functional>
#include <utility>

#include "qembed/isometry.hpp"

namespace qe {

// A metric space whose points are coordinate vectors, with an exact
// distance oracle and a seeded sampler for audits.
class MetricSpace {
 public:
  virtual ~MetricSpace() = default;
  virtual int dim() const = 0;
  virtual double distance(const Vec& a, const Vec& b) const = 0;
  virtual json spec() const = 0;
  virtual Vec sample(Rng& rng) const = 0;
  virtual Vec perturb(const Vec& a, double scale, Rng& rng) const = 0;
  virtual double sample_scale() const = 0;
  virtual std::string sampling_measure() const;
  // Pair i of the audit stream for a seed; default mixes global pairs with
  // local pairs at log-uniform scales.
  virtual std::pair<Vec, Vec> sample_pair(std::uint64_t seed, std::uint64_t i) const;
  // Pairs closer than this are below oracle resolution and are skipped.
  virtual double min_resolved_distance() const { return 0.0; }
};

using SpacePtr = std::shared_ptr<const MetricSpace>;

struct GroupBall {
  Vec center;
  double radius = 0.0;
  std::vector<AffineIsometry> elements;  // identity first
};

class QuotientSpace;
class LatticeEnumerator;
using QuotientPtr = std::shared_ptr<const QuotientSpace>;

// X / Gamma for a finitely generated group of ambient isometries.
class QuotientSpace : public MetricSpace {
 public:
  QuotientSpace(Ambient ambient, std::vector<AffineIsometry> generators, Vec basepoint,
                std::size_t cap = 1000000);

  const Ambient& ambient() const { return ambient_; }
  const std::vector<AffineIsometry>& generators() const { return gens_; }
  const Vec& basepoint() const { return basepoint_; }
  std::size_t cap() const { return cap_; }

  // Every distinct element with |g|_p <= r, reached by BFS over words.
  GroupBall enumerate_ball(const Vec& p, double r) const;
  // Exact quotient distance through a radius-(factor * d(p,q)) enumeration.
  double quotient_distance(const Vec& p, const Vec& q, double radius_factor = 2.0) const;
  // Representative of [x] closest to p (ties: first found).
  Vec closest_lift(const Vec& p, const Vec& x) const;
  double displacement(const AffineIsometry& g, const Vec& p) const;

  // MetricSpace
  int dim() const override { return ambient_.dim(); }
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  Vec sample(Rng& rng) const override;
  Vec perturb(const Vec& a, double scale, Rng& rng) const override;
  double sample_scale() const override { return sample_scale_; }
  std::string sampling_measure() const override { return sampling_measure_; }

  static std::shared_ptr<QuotientSpace> from_json(const json& j);

  // Sampling region: base coordinates origin + M u with u uniform in [0,1)^k;
  // Euclidean fiber coordinates uniform in the ball of radius fiber_radius.
  void set_box_region(const Vec& origin, const Mat& M, double fiber_radius = 0.0);
  void set_sampler(std::function<Vec(Rng&)> f, double scale, std::string measure);
  // Deterministic grid over the sampling box (fiber ignored), spacing <= h.
  std::vector<Vec> grid(double h) const;
  // covering radius of grid(h) over the box (half the longest cell diagonal)
  double grid_cover(double h) const;
  const Mat& box_matrix() const { return box_M_; }
  bool is_lattice() const { return lattice_ok_; }
  const Mat& lattice_basis() const { return lat_B_; }
  bool is_finite_group() const { return finite_ok_; }
  const std::vector<AffineIsometry>& finite_elements() const { return finite_; }
  void set_spec_override(json j) { spec_override_ = std::move(j); }

 private:
  void prepare_fast_paths();
  GroupBall enumerate_capped(const Vec& p, double r, std::size_t cap) const;
  double lattice_distance(const Vec& a, const Vec& b) const;

  Ambient ambient_;
  std::vector<AffineIsometry> gens_;
  std::vector<AffineIsometry> word_gens_;  // generators and inverses
  Vec basepoint_;
  std::size_t cap_;

  // translation lattice fast path
  bool lattice_ok_ = false;
  Mat lat_B_;                    // n x k basis
  std::shared_ptr<const LatticeEnumerator> lat_en_;
  // finite group fast path
  bool finite_ok_ = false;
  std::vector<AffineIsometry> finite_;

  Vec box_origin_;
  Mat box_M_;
  double fiber_radius_ = 0.0;
  std::function<Vec(Rng&)> sampler_;
  double sample_scale_ = 1.0;
  std::string sampling_measure_ = "uniform on sampling box";
  json spec_override_;
};

// Gamma_p(r): generated by elements moving p by at most 8r.
struct LocalGroup {
  GroupBall generating_ball;
  std::shared_ptr<QuotientSpace> space;  // X / Gamma_p(r)
  bool trivial() const { return generating_ball.elements.size() <= 1; }
};
LocalGroup local_group(const QuotientSpace& space, const Vec& p, double r);

struct Net {
  double eps = 0.0;
  std::vector<Vec> points;
  SpacePtr host;
};

// Greedy net in sampler order: accept a sample iff it is farther than eps
// from every accepted point.
Net build_net(const SpacePtr& host, const std::vector<Vec>& samples, double eps,
              std::size_t max_points = 200000);

}  // namespace qe
