#include "qembed/common.hpp"

#include <cmath>

namespace qe {

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

std::uint64_t Rng::next() { return eng_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  spare_ = rad * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return rad * std::cos(2.0 * kPi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw InputError("Rng::index on empty range");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

Vec Rng::unit_vector(int dim) {
  Vec v(dim);
  double nrm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal();
    nrm = v.norm();
  } while (nrm < 1e-12);
  return v / nrm;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError("expected a number");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Mat mat_from_json(const json& j, int rows, int cols) {
  if (!j.is_array()) throw InputError("expected a matrix array");
  Mat m(rows, cols);
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != rows) throw InputError("matrix row count mismatch");
    for (int r = 0; r < rows; ++r) {
      if (static_cast<int>(j[r].size()) != cols) throw InputError("matrix column count mismatch");
      for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  if (static_cast<int>(j.size()) != rows * cols) throw InputError("matrix size mismatch");
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r * cols + c].get<double>();
  return m;
}

json mat_to_json_flat(const Mat& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) j.push_back(m(r, c));
  return j;
}

}  // namespace qe
