#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace retmom {

namespace detail {

inline constexpr int kBinomialMaxN = 64;

// Pascal's triangle up to n = 64; every entry fits in uint64 (the largest,
// C(64,32), is ~1.8e18).
constexpr auto make_pascal_table() {
  std::array<std::array<std::uint64_t, kBinomialMaxN + 1>, kBinomialMaxN + 1> t{};
  for (int n = 0; n <= kBinomialMaxN; ++n) {
    t[n][0] = 1;
    t[n][n] = 1;
    for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
  }
  return t;
}

inline constexpr auto kPascal = make_pascal_table();

}  // namespace detail

/// Exact binomial coefficient C(n, k) for k <= n <= 64.
inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n)
    throw std::invalid_argument("binomial: require 0 <= k <= n");
  if (n > detail::kBinomialMaxN)
    throw std::overflow_error("binomial: n > 64 exceeds exact range");
  return detail::kPascal[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

}  // namespace retmom
