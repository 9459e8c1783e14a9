#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asc {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Bad user input (files, configs, preconditions on data). The CLI maps this
// to exit code 1; anything else is an internal error (exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Sum with the addends in a canonical (sorted) order, so the result does not
// depend on the order the values arrived in. Used wherever bag-of-frames
// invariance must hold bit-for-bit.
inline double stable_sum(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v.sum();
}

// Column means computed with stable_sum per column: permuting the rows of m
// leaves the result bit-identical.
inline Eigen::VectorXd stable_colmean(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out[j] = stable_sum(m.col(j)) / static_cast<double>(m.rows());
  return out;
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

// Fixed 6-decimal formatting for human-facing accuracy values and %.17g for
// round-trip serialization of doubles.
std::string format_fixed6(double v);
std::string format_g17(double v);

}  // namespace asc
