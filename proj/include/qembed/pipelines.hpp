#pragma once

#include "qembed/combinators.hpp"
#include "qembed/models.hpp"

namespace qe {

// ---- holonomy bundles (d = 2) ----

// Annulus pieces T_0..T_k_max of E(c, theta).
std::vector<AnnulusPiece> bundle_pieces(const HolonomyBundleSpace& space);
EmbPtr bundle_embedding(const HolonomyBundleSpace& space);

// Distances in the open annulus T_k (k >= 1) against the flat surrogate
// dr^2 + (dx, rho_k dphi) on R^2 / <(c, rho_k theta), (0, 2 pi rho_k)>.
struct MetricChange {
  int k = 0;
  int pairs = 0;
  double min_ratio = kInf;  // d_f / d
  double max_ratio = 0.0;
  bool within(double factor) const { return min_ratio >= 1.0 / factor && max_ratio <= factor; }
  json to_json() const;
};
MetricChange annulus_metric_change(const HolonomyBundleSpace& space, int k, int pairs, std::uint64_t seed);

// ---- lens spaces ----

struct LensEmbedding {
  SpacePtr space;
  EmbPtr embedding;
  int k_max = 0;
  double L = 0.0;
  json info;
};
LensEmbedding lens_embedding(int p, int q);

// ---- flat tori ----

// Circle map on an LLL-reduced lattice basis (lattice quotients of R^n, full rank).
EmbPtr torus_embedding(const QuotientSpace& torus);
// Doubling combinator on a flat torus with isometric local lifts as charts.
EmbPtr torus_doubling(const std::shared_ptr<const QuotientSpace>& torus, double r, TentInfo* info = nullptr);

// R^2 / (Z x delta Z) projected onto R / Z.
struct ThinTorus {
  std::shared_ptr<const QuotientSpace> space;
  EmbPtr embedding;
  GhInfo info;
  double delta = 0.0;
};
ThinTorus thin_torus_gh(double delta, double rho = 0.25, double eta = 0.012);

// |d_X(a, b) - d_Y(pi a, pi b)| for the projection of the thin torus.
struct GhDefect {
  double delta = 0.0;
  double fiber_diameter = 0.0;
  double max_defect = 0.0;
  int pairs = 0;
  bool pass() const { return max_defect <= 2.0 * fiber_diameter + 1e-12; }
  json to_json() const;
};
GhDefect thin_torus_projection_defect(double delta, int pairs, std::uint64_t seed);

// ---- dispatch ----

// method in {auto, doubling, annulus, cone, product, patch}
EmbPtr embed_auto(const SpacePtr& space, const std::string& method = "auto");

}  // namespace qe
