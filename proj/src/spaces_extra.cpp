#include "qembed/spaces.hpp"

#include <algorithm>
#include <cmath>

namespace qe {

// ---------------------------------------------------------------- product

ProductSpace::ProductSpace(std::vector<SpacePtr> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InputError("product space needs factors");
  for (const auto& f : factors_) {
    if (!f) throw InputError("null factor");
    offsets_.push_back(dim_);
    dim_ += f->dim();
  }
}

double ProductSpace::distance(const Vec& a, const Vec& b) const {
  if (a.size() != dim_ || b.size() != dim_) throw InputError("product space: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = offsets_[i], k = factors_[i]->dim();
    const double d = factors_[i]->distance(a.segment(o, k), b.segment(o, k));
    s += d * d;
  }
  return std::sqrt(s);
}

json ProductSpace::spec() const {
  json j;
  j["kind"] = "product";
  json f = json::array();
  for (const auto& x : factors_) f.push_back(x->spec());
  j["factors"] = f;
  return j;
}

Vec ProductSpace::sample(Rng& rng) const {
  Vec x(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) x.segment(offsets_[i], factors_[i]->dim()) = factors_[i]->sample(rng);
  return x;
}

Vec ProductSpace::perturb(const Vec& a, double scale, Rng& rng) const {
  Vec w = rng.unit_vector(static_cast<int>(factors_.size())).cwiseAbs();
  Vec x = a;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int o = offsets_[i], k = factors_[i]->dim();
    x.segment(o, k) = factors_[i]->perturb(a.segment(o, k), scale * w[static_cast<int>(i)], rng);
  }
  return x;
}

double ProductSpace::sample_scale() const {
  double s = 0.0;
  for (const auto& f : factors_) s = std::max(s, f->sample_scale());
  return s;
}

// ---------------------------------------------------------------- cone

ConeSpace::ConeSpace(SpacePtr link, double t_max) : link_(std::move(link)), t_max_(t_max) {
  if (!link_) throw InputError("cone needs a link");
  if (!(t_max_ > 0)) throw InputError("cone t_max must be positive");
}

double ConeSpace::distance(const Vec& a, const Vec& b) const {
  if (a.size() != dim() || b.size() != dim()) throw InputError("cone: dimension mismatch");
  const double t = a[0], s = b[0];
  if (t < 0 || s < 0) throw InputError("cone: negative radial coordinate");
  if (t == 0.0) return s;
  if (s == 0.0) return t;
  const int k = link_->dim();
  const double phi = std::min(link_->distance(a.tail(k), b.tail(k)), kPi);
  // (t-s)^2 + 2ts(1-cos phi), stable for small phi
  const double h = std::sin(0.5 * phi);
  return std::sqrt((t - s) * (t - s) + 4.0 * t * s * h * h);
}

json ConeSpace::spec() const {
  json j;
  j["kind"] = "cone";
  j["link"] = link_->spec();
  j["t_max"] = t_max_;
  return j;
}

Vec ConeSpace::sample(Rng& rng) const {
  Vec x(dim());
  x[0] = t_max_ * rng.uniform();
  x.tail(link_->dim()) = link_->sample(rng);
  return x;
}

Vec ConeSpace::perturb(const Vec& a, double scale, Rng& rng) const {
  Vec x = a;
  const double u = rng.uniform(-1.0, 1.0);
  x[0] = std::abs(a[0] + scale * u);
  const double t = std::max(a[0], scale);
  x.tail(link_->dim()) = link_->perturb(a.tail(link_->dim()), scale * std::sqrt(1 - u * u) / t, rng);
  return x;
}

// ---------------------------------------------------------------- finite

FiniteSpace::FiniteSpace(Mat distances) : D_(std::move(distances)) {
  const auto m = D_.rows();
  if (m == 0 || D_.cols() != m) throw InputError("finite space: distance matrix must be square and nonempty");
  for (int i = 0; i < m; ++i) {
    if (D_(i, i) != 0.0) throw InputError("finite space: nonzero diagonal");
    for (int j = 0; j < m; ++j) {
      if (D_(i, j) != D_(j, i)) throw InputError("finite space: asymmetric distances");
      if (i != j && !(D_(i, j) > 0)) throw InputError("finite space: distances must be positive");
      for (int k = 0; k < m; ++k)
        if (D_(i, k) > D_(i, j) + D_(j, k) + kTol) throw InputError("finite space: triangle inequality fails");
    }
  }
}

std::size_t FiniteSpace::index_of(const Vec& a) const {
  if (a.size() != 1) throw InputError("finite space: points are 1-vectors");
  const double r = std::round(a[0]);
  if (r < 0 || r >= static_cast<double>(D_.rows()) || std::abs(r - a[0]) > 1e-9)
    throw InputError("finite space: not a point index");
  return static_cast<std::size_t>(r);
}

double FiniteSpace::distance(const Vec& a, const Vec& b) const {
  return D_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
}

json FiniteSpace::spec() const {
  json j;
  j["kind"] = "finite";
  json rows = json::array();
  for (int i = 0; i < D_.rows(); ++i) rows.push_back(vec_to_json(D_.row(i).transpose()));
  j["distances"] = rows;
  return j;
}

Vec FiniteSpace::sample(Rng& rng) const {
  Vec x(1);
  x[0] = static_cast<double>(rng.index(static_cast<std::size_t>(D_.rows())));
  return x;
}

Vec FiniteSpace::perturb(const Vec& a, double, Rng& rng) const {
  (void)index_of(a);
  return sample(rng);
}

std::pair<Vec, Vec> FiniteSpace::sample_pair(std::uint64_t seed, std::uint64_t i) const {
  Rng rng(mix_seed(seed, i));
  return {sample(rng), sample(rng)};
}

double estimate_diameter(const MetricSpace& space, int pairs, std::uint64_t seed) {
  double best = 0.0;
  for (int i = 0; i < pairs; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const Vec a = space.sample(rng), b = space.sample(rng);
    best = std::max(best, space.distance(a, b));
  }
  return best;
}

}  // namespace qe
