#pragma once

#include "qembed/embedding.hpp"
#include "qembed/spaces.hpp"

namespace qe {

// ---- primitives ----

struct TorusCirclesInfo {
  double E = 1.0;  // expansion: sigma_max of the unit dual rows
  double C = 1.0;  // contraction: (pi/2) sigma_max of the rescaled basis
};
// Lattice with basis columns B (square): one circle per dual vector w_i, of
// circumference 1/|w_i|. Returns the radii and dual rows too.
struct TorusCircles {
  Mat W;
  Vec radii;
  TorusCirclesInfo info;
};
TorusCircles torus_circles(const Mat& B);
EmbPtr torus_circles_embedding(const Mat& B);
EmbPtr circle_embedding(double circumference);
EmbPtr identity_embedding(int dim);
// Frechet embedding i -> (d(i, j))_j with exact constants on all pairs.
EmbPtr finite_embedding(const FiniteSpace& space);

// ---- McShane ----

struct NetFunction {
  Net net;
  Mat values;      // one row per net point
  double L = 0.0;  // Lipschitz constant on the net
};
// Exact max and min of |f(a) - f(b)| / d(a, b) over net pairs.
std::pair<double, double> net_ratio_range(const Net& net, const Mat& values);
EmbPtr mcshane_extend(const NetFunction& f);

// ---- structural helpers ----

EmbPtr normalize_at(const EmbPtr& f, const Vec& x0, double U);  // (f - f(x0)) / U
EmbPtr balance(const EmbPtr& f);                                // scale to upper = 1/lower
EmbPtr restrict_coords(const EmbPtr& f, int offset, int len);   // f applied to a coordinate block
EmbPtr pipe(const EmbPtr& first, const EmbPtr& second, const Bounds& b);

// ---- combinators ----

EmbPtr product_embed(const EmbPtr& f, int dim_x, const EmbPtr& g, int dim_y);
// f embeds the link; x0 is a link point (its image is moved to 0).
EmbPtr cone_embed(const EmbPtr& f, const MetricSpace& link, const Vec& x0);
// f_ext, g_ext: L-Lipschitz on X and L-bi-Lipschitz on A and B; dist_A = d(., A).
EmbPtr patch_two(const EmbPtr& f_ext, const EmbPtr& g_ext, const EmbPtr& dist_A, double L);

// A chart valid on B(q, r): upper/lower constants against the host metric.
struct LocalChart {
  EmbPtr chart;
  double upper = 1.0;
  double lower = 1.0;
};
using LocalEmbedder = std::function<LocalChart(const Vec& q)>;

struct TentInfo {
  std::size_t net_size = 0;
  int K = 0;                      // color classes
  int N = 0;                      // chart dimension
  double lambda_loc = 0.0;        // min over charts of lower/upper
  double min_class_separation = kInf;
  double net_eps = 0.0;
  double cover = 0.0;             // covering radius of the net over the region
  json to_json() const;
};
struct DoublingOptions {
  double r = 0.1;
  std::vector<Vec> samples;       // dense sampler of the region (deterministic order)
  double sample_cover = 0.0;      // covering radius of the samples
  std::size_t max_net = 20000;
};
// G = (g_1, ..., g_K, (d(x, q_i))_i) over an r/10-net.
EmbPtr doubling_embed(const SpacePtr& host, const DoublingOptions& opt, const LocalEmbedder& local, TentInfo* info = nullptr);
// Only the glued local part (shared with gh_transfer).
EmbPtr tent_part(const SpacePtr& host, const DoublingOptions& opt, const LocalEmbedder& local, TentInfo& info);

struct AnnulusPiece {
  int k = 0;
  double a = 0, b = 0, tau = 1;   // annulus [a, b] in the radial coordinate, cutoff width tau
  EmbPtr chart;                   // raw map, Lipschitz upper_ext on the widened annulus
  double upper_ext = 1.0;
  double lower = 1.0;             // lower constant on [a, b]
  Vec x0;                         // reference point in the annulus
  double M = 1.0;                 // sup of d(x, x0) over the widened annulus
};
// G = (r, F_0, F_1, F_2, F_3), F_s summing the pieces with k = s mod 4.
EmbPtr annulus_embed(const EmbPtr& radial, const std::vector<AnnulusPiece>& pieces);

struct GhOptions {
  Net h_net;                      // net of X for the transferred map
  Mat h_values;                   // h(g(q)) on the net
  double h_cover = 0.0;           // covering radius of h_net
  double h_distortion = 1.0;      // distortion of h on Y
  DoublingOptions local;          // local part at scale rho = local.r
};
struct GhInfo {
  double L_H = 0, lambda_H = 0, kappa = 0;
  TentInfo tent;
  json to_json() const;
};
EmbPtr gh_transfer(const SpacePtr& host, const GhOptions& opt, const LocalEmbedder& local, GhInfo* info = nullptr);

}  // namespace qe
