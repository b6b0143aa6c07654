#include "qembed/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qe {

namespace {

Mat power(const Mat& H, long long t) {
  Mat base = t >= 0 ? H : Mat(H.transpose());
  unsigned long long e = static_cast<unsigned long long>(t >= 0 ? t : -t);
  Mat out = Mat::Identity(H.rows(), H.cols());
  while (e) {
    if (e & 1ULL) out = out * base;
    base = base * base;
    e >>= 1;
  }
  return out;
}

Mat rotation_blocks(double theta, int d) {
  Mat H = Mat::Identity(d, d);
  for (int i = 0; i + 1 < d; i += 2) {
    H(i, i) = std::cos(theta);
    H(i, i + 1) = -std::sin(theta);
    H(i + 1, i) = std::sin(theta);
    H(i + 1, i + 1) = std::cos(theta);
  }
  return H;
}

}  // namespace

// ---------------------------------------------------------------- bundle

HolonomyBundleSpace::HolonomyBundleSpace(double c, Mat H, int k_max, double theta)
    : QuotientSpace(Ambient::product(1, static_cast<int>(H.rows())),
                    {AffineIsometry(Mat::Identity(1, 1), Vec::Constant(1, c), H)}, Vec::Zero(1 + H.rows())),
      c_(c),
      H_(std::move(H)),
      k_max_(k_max),
      theta_(theta),
      spec_theta_(!std::isnan(theta)) {
  if (!(c_ > 0)) throw InputError("holonomy bundle: base circumference must be positive");
  if (k_max_ < 0 || k_max_ > 30) throw InputError("holonomy bundle: k_max must be in [0, 30]");
  const int d = static_cast<int>(H_.rows());
  if (!spec_theta_ && d >= 2) theta_ = std::atan2(H_(1, 0), H_(0, 0));
  const double D = 0.5 * c_;
  const int km = k_max_;
  const double cc = c_;
  set_sampler(
      [cc, D, km, d](Rng& rng) {
        const int k = static_cast<int>(rng.index(static_cast<std::size_t>(km + 1)));
        const double lo = k == 0 ? 0.0 : std::ldexp(D, k - 1);
        const double hi = std::ldexp(D, k + 1);
        Vec x(1 + d);
        x[0] = cc * rng.uniform();
        x.tail(d) = rng.unit_vector(d) * rng.uniform(lo, hi);
        return x;
      },
      D,
      "annulus index k uniform in 0..k_max, fiber radius uniform in T_k, base coordinate uniform, fiber "
      "direction uniform; local pairs at log-uniform scales below D = c/2");
}

std::pair<double, double> HolonomyBundleSpace::annulus(int k) const {
  const double D = base_diameter();
  if (k == 0) return {0.0, 2 * D};
  return {std::ldexp(D, k - 1), std::ldexp(D, k + 1)};
}

Vec HolonomyBundleSpace::closest_lift(const Vec& a, const Vec& b) const {
  const int d = static_cast<int>(H_.rows());
  if (a.size() != 1 + d || b.size() != 1 + d) throw InputError("holonomy bundle: dimension mismatch");
  const double dx = a[0] - b[0];
  const long long t0 = std::llround(dx / c_);
  const Vec za = a.tail(d);
  Vec zt = power(H_, t0) * b.tail(d);
  auto val = [&](long long t, const Vec& z) {
    const double ex = dx - static_cast<double>(t) * c_;
    return ex * ex + (za - z).squaredNorm();
  };
  double best = val(t0, zt);
  long long bt = t0;
  Vec bz = zt;
  for (int dir : {1, -1}) {
    const Mat step = dir > 0 ? H_ : Mat(H_.transpose());
    Vec z = zt;
    for (long long t = t0 + dir;; t += dir) {
      const double ex = dx - static_cast<double>(t) * c_;
      if (ex * ex >= best) break;
      z = step * z;
      const double v = val(t, z);
      if (v < best) {
        best = v;
        bt = t;
        bz = z;
      }
    }
  }
  Vec out(1 + d);
  out[0] = b[0] + static_cast<double>(bt) * c_;
  out.tail(d) = bz;
  return out;
}

double HolonomyBundleSpace::distance(const Vec& a, const Vec& b) const {
  const Vec l = closest_lift(a, b);
  return (a - l).norm();
}

json HolonomyBundleSpace::spec() const {
  json j;
  j["kind"] = "holonomy_bundle";
  const int d = static_cast<int>(H_.rows());
  if (spec_theta_) {
    j["theta"] = theta_;
  } else {
    j["holonomy"] = mat_to_json_flat(H_);
  }
  j["d"] = d;
  j["base_circumference"] = c_;
  j["k_max"] = k_max_;
  return j;
}

// ---------------------------------------------------------------- factories

std::shared_ptr<QuotientSpace> make_flat_torus(const Mat& B) {
  const int n = static_cast<int>(B.rows());
  if (n < 1 || B.cols() < 1) throw InputError("flat torus: empty basis");
  std::vector<AffineIsometry> gens;
  json basis = json::array();
  for (int i = 0; i < B.cols(); ++i) {
    gens.push_back(AffineIsometry::translation(B.col(i)));
    basis.push_back(vec_to_json(B.col(i)));
  }
  auto sp = std::make_shared<QuotientSpace>(Ambient::euclidean(n), gens, Vec::Zero(n));
  json spec;
  spec["kind"] = "flat_torus";
  spec["basis"] = basis;
  sp->set_spec_override(spec);
  return sp;
}

std::shared_ptr<QuotientSpace> make_lens(int p, int q) {
  if (p < 1) throw InputError("lens: p must be positive");
  if (std::gcd(p, q) != 1) throw InputError("lens: p and q must be coprime");
  std::vector<AffineIsometry> gens;
  if (p > 1) {
    Mat R = Mat::Zero(4, 4);
    const double a = 2 * kPi / p, b = 2 * kPi * q / p;
    R(0, 0) = std::cos(a);
    R(0, 1) = -std::sin(a);
    R(1, 0) = std::sin(a);
    R(1, 1) = std::cos(a);
    R(2, 2) = std::cos(b);
    R(2, 3) = -std::sin(b);
    R(3, 2) = std::sin(b);
    R(3, 3) = std::cos(b);
    gens.emplace_back(R, Vec::Zero(4));
  }
  auto sp = std::make_shared<QuotientSpace>(Ambient::sphere(4), gens, Vec::Unit(4, 0));
  json spec;
  spec["kind"] = "lens";
  spec["p"] = p;
  spec["q"] = q;
  sp->set_spec_override(spec);
  return sp;
}

std::shared_ptr<HolonomyBundleSpace> make_holonomy_bundle(double theta, int d, double circumference, int k_max) {
  if (d < 1) throw InputError("holonomy bundle: d must be positive");
  return std::make_shared<HolonomyBundleSpace>(circumference, rotation_blocks(theta, d), k_max, theta);
}

std::shared_ptr<QuotientSpace> make_euclidean_box(const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(lo.size());
  if (n < 1 || hi.size() != n) throw InputError("euclidean box: bad bounds");
  if ((hi - lo).minCoeff() <= 0) throw InputError("euclidean box: empty box");
  auto sp = std::make_shared<QuotientSpace>(Ambient::euclidean(n), std::vector<AffineIsometry>{}, lo);
  sp->set_box_region(lo, Mat((hi - lo).asDiagonal()));
  json spec;
  spec["kind"] = "euclidean";
  spec["lo"] = vec_to_json(lo);
  spec["hi"] = vec_to_json(hi);
  sp->set_spec_override(spec);
  return sp;
}

SpacePtr construct_space(const json& spec) {
  if (!spec.is_object()) throw InputError("space spec must be a JSON object");
  if (!spec.contains("kind")) return QuotientSpace::from_json(spec);
  const std::string kind = spec.at("kind").get<std::string>();
  try {
    if (kind == "flat_torus") {
      const json& b = spec.at("basis");
      if (!b.is_array() || b.empty()) throw InputError("flat_torus: basis must be a nonempty array");
      const int n = static_cast<int>(b[0].size());
      Mat B(n, static_cast<int>(b.size()));
      for (std::size_t i = 0; i < b.size(); ++i) {
        const Vec v = vec_from_json(b[i]);
        if (v.size() != n) throw InputError("flat_torus: ragged basis");
        B.col(static_cast<int>(i)) = v;
      }
      if (Eigen::FullPivLU<Mat>(B).rank() < std::min<int>(n, static_cast<int>(B.cols())))
        throw InputError("flat_torus: dependent basis");
      return make_flat_torus(B);
    }
    if (kind == "circle") {
      const double c = spec.at("circumference").get<double>();
      if (!(c > 0)) throw InputError("circle: circumference must be positive");
      auto sp = make_flat_torus(Mat::Constant(1, 1, c));
      sp->set_spec_override(spec);
      return sp;
    }
    if (kind == "flat_orbifold") {
      const int n = spec.at("n").get<int>();
      std::vector<AffineIsometry> gens;
      for (const auto& g : spec.at("generators")) gens.push_back(AffineIsometry::from_json(g, n, 0));
      const std::size_t cap = spec.value("cap", static_cast<std::size_t>(1000000));
      auto sp = std::make_shared<QuotientSpace>(Ambient::euclidean(n), gens, Vec::Zero(n), cap);
      sp->set_spec_override(spec);
      return sp;
    }
    if (kind == "euclidean") return make_euclidean_box(vec_from_json(spec.at("lo")), vec_from_json(spec.at("hi")));
    if (kind == "lens") return make_lens(spec.at("p").get<int>(), spec.at("q").get<int>());
    if (kind == "holonomy_bundle") {
      const int d = spec.value("d", 2);
      const double c = spec.value("base_circumference", 2 * kPi);
      const int k_max = spec.value("k_max", 8);
      if (spec.contains("holonomy")) {
        return std::make_shared<HolonomyBundleSpace>(c, mat_from_json(spec.at("holonomy"), d, d), k_max);
      }
      return make_holonomy_bundle(spec.at("theta").get<double>(), d, c, k_max);
    }
    if (kind == "cone") return std::make_shared<ConeSpace>(construct_space(spec.at("link")), spec.value("t_max", 1.0));
    if (kind == "ellipsoid")
      return std::make_shared<EllipsoidSpace>(spec.at("N").get<double>(), spec.value("mesh_level", 6),
                                              spec.value("targets_per_source", 2000));
    if (kind == "product") {
      std::vector<SpacePtr> f;
      for (const auto& x : spec.at("factors")) f.push_back(construct_space(x));
      return std::make_shared<ProductSpace>(f);
    }
    if (kind == "finite") {
      const json& rows = spec.at("distances");
      const int m = static_cast<int>(rows.size());
      Mat D(m, m);
      for (int i = 0; i < m; ++i) {
        const Vec r = vec_from_json(rows[static_cast<std::size_t>(i)]);
        if (r.size() != m) throw InputError("finite: distance matrix must be square");
        D.row(i) = r.transpose();
      }
      return std::make_shared<FiniteSpace>(D);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("space spec: ") + e.what());
  }
  throw InputError("unknown space kind: " + kind);
}

// ---------------------------------------------------------------- lens charts

int lens_inverse(int p, int q) {
  if (p == 1) return 0;
  for (int s = 1; s < p; ++s)
    if (((static_cast<long long>(s) * q) % p + p) % p == 1) return s;
  throw InputError("lens: q is not invertible mod p");
}

Eigen::Vector3d lens_coordinates(const Vec& x) {
  if (x.size() != 4) throw InputError("lens: points lie in R^4");
  const double r1 = std::hypot(x[0], x[1]), r2 = std::hypot(x[2], x[3]);
  return {std::atan2(r2, r1), std::atan2(x[1], x[0]), std::atan2(x[3], x[2])};
}

Vec lens_chart_point(int j, const Vec& x, double limit) {
  const Eigen::Vector3d c = lens_coordinates(x);
  Vec out(3);
  if (j == 1) {
    if (!(c[0] < limit)) throw InputError("lens chart 1: point outside chart domain");
    out << c[1], c[0] * std::cos(c[2]), c[0] * std::sin(c[2]);
  } else if (j == 2) {
    const double b = kPi / 2 - c[0];
    if (!(b < limit)) throw InputError("lens chart 2: point outside chart domain");
    out << c[2], b * std::cos(c[1]), b * std::sin(c[1]);
  } else {
    throw InputError("lens chart index must be 1 or 2");
  }
  return out;
}

Vec lens_chart_map(int j, const Vec& x) { return lens_chart_point(j, x, kPi / 3); }

double lens_metric_ratio(int j, double a, const Eigen::Vector3d& v) {
  if (j != 1 && j != 2) throw InputError("lens chart index must be 1 or 2");
  if (a < 0 || a >= kPi / 2) throw InputError("lens chart coordinate out of range");
  // g = da^2 + cos^2 a dx^2 + sin^2 a dw^2, g_f = da^2 + dx^2 + a^2 dw^2 (same form in both charts)
  const double ca = std::cos(a), sa = std::sin(a);
  const double g = v[0] * v[0] + ca * ca * v[1] * v[1] + sa * sa * v[2] * v[2];
  const double gf = v[0] * v[0] + v[1] * v[1] + a * a * v[2] * v[2];
  return g / gf;
}

json LensCertificate::to_json() const {
  json j;
  j["probes"] = probes;
  j["min_ratio"] = min_ratio;
  j["max_ratio"] = max_ratio;
  j["pass"] = pass;
  return j;
}

LensCertificate lens_chart_certificate(int j, int probes, std::uint64_t seed) {
  LensCertificate c;
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(j)));
  for (int i = 0; i < probes; ++i) {
    const double a = rng.uniform(0.0, kPi / 3);
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    const double r = lens_metric_ratio(j, a, v);
    c.min_ratio = std::min(c.min_ratio, r);
    c.max_ratio = std::max(c.max_ratio, r);
  }
  c.probes = probes;
  c.pass = probes > 0 && c.min_ratio >= 0.25 && c.max_ratio <= 4.0;
  return c;
}

double lens_region_distance(int j, const Vec& x) {
  const double a = lens_coordinates(x)[0];
  if (j == 1) return std::max(0.0, a - kPi / 3);
  if (j == 2) return std::max(0.0, kPi / 6 - a);
  throw InputError("lens chart index must be 1 or 2");
}

// ---------------------------------------------------------------- ellipsoid

Vec ellipsoid_map(double N, const Vec& p) {
  if (p.size() != 3) throw InputError("ellipsoid_map: points are 3-vectors");
  if (std::abs(p[0] * p[0] + p[1] * p[1] + N * N * p[2] * p[2] - 1.0) > 1e-9)
    throw InputError("ellipsoid_map: point off surface");
  Vec out = p;
  if (p[2] >= 0) out[2] += 1.0 - std::hypot(p[0], p[1]);
  return out;
}

}  // namespace qe
