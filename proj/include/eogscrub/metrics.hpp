#pragma once

#include <span>

#include "eogscrub/errors.hpp"

namespace eogscrub {

// Mean squared error between two equal-length sequences. Accumulates in
// double so 131072-element image planes do not drift in float.
template <typename T>
double mse(std::span<const T> predicted, std::span<const T> target) {
  if (predicted.size() != target.size())
    throw LengthMismatch("mse: length " + std::to_string(predicted.size()) + " vs " +
                         std::to_string(target.size()));
  if (predicted.empty()) throw EmptyInput("mse: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const double d = double(predicted[i]) - double(target[i]);
    acc += d * d;
  }
  return acc / double(predicted.size());
}

inline double mse(std::span<const float> predicted, std::span<const float> target) {
  return mse<float>(predicted, target);
}

}  // namespace eogscrub
