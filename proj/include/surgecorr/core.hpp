#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace surgecorr {

/// Row-major dense matrix of doubles. Weight matrices use this layout so a
/// flattened parameter vector reads row by row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Column-major work matrix for batched passes; one column per sample.
using BatchMatrix = Eigen::MatrixXd;

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A shape or length precondition was violated.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity reached a place that requires finite values.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* where) {
  if (!m.allFinite()) throw NonFiniteError(std::string(where) + ": non-finite value");
}

inline void require_finite(std::span<const double> v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x)) throw NonFiniteError(std::string(where) + ": non-finite value");
}

inline void require(bool cond, const std::string& message) {
  if (!cond) throw ShapeError(message);
}

/// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace surgecorr
