#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "retmom/binomial.hpp"

namespace retmom {

/// Surrogate one-step reward that makes the k-th power of the return
/// learnable by a Bellman-style update:
///   sum_{l=0}^{k-1} C(k,l) discount^l reward^{k-l} next_values[l]
/// next_values holds the successor-state estimates for powers 0..k-1, with
/// entry 0 carrying the zeroth-power convention.
template <class Scalar>
Scalar surrogate_reward(int k, Scalar reward, Scalar discount,
                        std::span<const Scalar> next_values) {
  if (k < 1) throw std::invalid_argument("surrogate_reward: moment index must be >= 1");
  if (static_cast<int>(next_values.size()) != k)
    throw std::invalid_argument("surrogate_reward: need exactly k next-state values");
  // Powers by repeated multiplication; reward^1 stays bit-exact so the k=1
  // case reduces to the plain TD reward.
  std::vector<Scalar> reward_pow(static_cast<std::size_t>(k) + 1);
  reward_pow[0] = Scalar(1);
  for (int i = 1; i <= k; ++i)
    reward_pow[static_cast<std::size_t>(i)] = reward_pow[static_cast<std::size_t>(i - 1)] * reward;
  Scalar acc = Scalar(0);
  Scalar discount_pow = Scalar(1);
  for (int l = 0; l < k; ++l) {
    acc += static_cast<Scalar>(binomial(k, l)) * discount_pow *
           reward_pow[static_cast<std::size_t>(k - l)] * next_values[static_cast<std::size_t>(l)];
    discount_pow *= discount;
  }
  return acc;
}

/// Central moments c_0..c_n from raw moments v_0..v_n (v_0 = 1):
///   c_m = sum_{k=0}^{m} C(m,k) (-1)^{m-k} v_k v_1^{m-k}
/// c_1 comes out exactly zero.
template <class Scalar>
std::vector<Scalar> central_from_raw(std::span<const Scalar> raw) {
  if (raw.empty()) throw std::invalid_argument("central_from_raw: need at least v_0");
  const std::size_t n = raw.size() - 1;
  std::vector<Scalar> mean_pow(n + 1);
  mean_pow[0] = Scalar(1);
  for (std::size_t i = 1; i <= n; ++i) mean_pow[i] = mean_pow[i - 1] * raw[1];
  std::vector<Scalar> central(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    Scalar acc = Scalar(0);
    for (std::size_t k = 0; k <= m; ++k) {
      const Scalar term = static_cast<Scalar>(binomial(static_cast<int>(m), static_cast<int>(k))) *
                          raw[k] * mean_pow[m - k];
      acc += ((m - k) % 2 == 0) ? term : -term;
    }
    central[m] = acc;
  }
  return central;
}

}  // namespace retmom
