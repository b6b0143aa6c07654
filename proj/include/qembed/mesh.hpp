#pragma once

#include "qembed/space.hpp"

namespace qe {

struct Icosphere {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};
Icosphere icosphere(int level);

// The ellipsoid S_N = {x^2 + y^2 + N^2 z^2 = 1} with a graph-geodesic oracle.
// Points are graph nodes: icosphere vertices, edge midpoints and equator
// crossings, placed on S_N by meridian arc length. Distances between nodes
// are shortest paths with chord-length edge weights.
class EllipsoidSpace : public MetricSpace {
 public:
  EllipsoidSpace(double N, int level = 6, int targets_per_source = 2000);

  int dim() const override { return 3; }
  double distance(const Vec& a, const Vec& b) const override;
  json spec() const override;
  Vec sample(Rng& rng) const override;
  Vec perturb(const Vec& a, double scale, Rng& rng) const override;
  double sample_scale() const override { return 2.0; }
  std::string sampling_measure() const override;
  std::pair<Vec, Vec> sample_pair(std::uint64_t seed, std::uint64_t i) const override;
  double min_resolved_distance() const override { return 3.0 * max_edge_; }

  double N() const { return N_; }
  int level() const { return level_; }
  std::size_t node_count() const { return pos_.size(); }
  std::size_t vertex_count() const { return nv_; }
  double max_edge() const { return max_edge_; }
  const Eigen::Vector3d& node(std::size_t i) const { return pos_[i]; }
  std::size_t node_of(const Vec& a) const;
  // single-source shortest paths to every node
  std::vector<double> dijkstra(std::size_t src) const;
  // max relative error of the same construction at N = 1 against exact
  // great-circle distances, over resolved pairs from `sources` sources
  double mesh_error(int sources = 8, std::uint64_t seed = 11) const;

 private:
  const std::vector<double>& cached(std::size_t src) const;

  double N_;
  int level_;
  int per_source_;
  std::size_t nv_ = 0;
  std::vector<Eigen::Vector3d> pos_;
  std::vector<Eigen::Vector3d> sphere_pos_;
  std::vector<std::size_t> adj_start_;
  std::vector<int> adj_;
  std::vector<double> w_;
  double max_edge_ = 0.0;
  std::uint64_t id_;
};

}  // namespace qe
