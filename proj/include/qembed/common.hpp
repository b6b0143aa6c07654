#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using json = nlohmann::ordered_json;

inline constexpr double kTol = 1e-9;
inline constexpr double kSymTol = 1e-12;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Rejected input (bad dimensions, malformed specs, unmet preconditions).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A checked property failed at runtime (cap exceeded, audit failure, ...).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Portable RNG: the standard distributions are implementation-defined, so
// uniform/normal draws are derived from the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                       // [0,1)
  double uniform(double a, double b);     // [a,b)
  double normal();
  std::size_t index(std::size_t n);       // [0,n)
  Vec unit_vector(int dim);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

Vec vec_from_json(const json& j);
json vec_to_json(const Vec& v);
Mat mat_from_json(const json& j, int rows, int cols);  // row-major flat or nested
json mat_to_json_flat(const Mat& m);                   // row-major flat

}  // namespace qe
