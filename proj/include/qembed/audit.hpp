#pragma once

#include "qembed/embedding.hpp"

namespace qe {

// Worker count: QE_THREADS when set and positive, else hardware concurrency.
int worker_count();

struct PairWitness {
  std::uint64_t index = 0;
  Vec a, b;
  double distance = 0.0;
  double image_distance = 0.0;
  json to_json() const;
};

struct DistortionReport {
  std::size_t pair_count = 0;
  std::size_t pairs_used = 0;
  std::uint64_t seed = 0;
  std::string sampling_measure;
  double max_expansion = 0.0;
  double max_contraction = 0.0;
  double distortion = 0.0;
  double claimed = kInf;
  bool pass = false;
  PairWitness worst_expansion, worst_contraction;
  json extras = json::object();
  json to_json() const;
};

// Pair i is space.sample_pair(seed, i); pairs below the oracle resolution are skipped.
DistortionReport empirical_distortion(const MetricSpace& space, const Embedding& f, std::size_t pair_count,
                                      std::uint64_t seed, int threads = 0);

struct DoublingEstimate {
  int D = 1;
  std::vector<double> radii;
  int centers = 0;
  json to_json() const;
};
// Greedy cover of sampled balls B(x, rho) by balls of radius rho/2, maximized
// over centers and dyadic radii rho in [r, R].
DoublingEstimate estimate_doubling(const MetricSpace& space, double r, double R, int centers = 12,
                                   int ball_samples = 300, std::uint64_t seed = 1);

}  // namespace qe
