#pragma once

#include <Eigen/Core>
#include <functional>

#include "retmom/mdp.hpp"

namespace retmom {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// State-feature map for linear value functions. evaluate(terminal) must be
/// the zero vector; that single convention makes every bootstrapped term
/// vanish at episode ends.
template <class Scalar>
struct FeatureMap {
  Eigen::Index dimension = 0;
  std::function<VectorX<Scalar>(int state)> evaluate;
};

/// Tabular one-hot features over the model's states (zero at terminals).
template <class Scalar = double>
FeatureMap<Scalar> one_hot_features(const MdpModel& model) {
  FeatureMap<Scalar> map;
  map.dimension = model.num_states;
  const std::vector<bool> terminal = model.terminal;
  const int num_states = model.num_states;
  map.evaluate = [terminal, num_states](int state) {
    if (state < 0 || state >= num_states)
      throw std::out_of_range("one_hot_features: state id out of range");
    VectorX<Scalar> x = VectorX<Scalar>::Zero(num_states);
    if (!terminal[static_cast<std::size_t>(state)]) x[state] = Scalar(1);
    return x;
  };
  return map;
}

}  // namespace retmom
