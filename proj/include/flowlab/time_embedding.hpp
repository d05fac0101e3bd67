#pragma once

#include "flowlab/tensor.hpp"

namespace flowlab {

inline constexpr double kMinTimeFrequency = 1.0;
inline constexpr double kMaxTimeFrequency = 1000.0;

/// Sinusoidal time features [sin(w_1 t), cos(w_1 t), ..., sin(w_k t), cos(w_k t)]
/// with k = m/2 frequencies spaced geometrically over [1, 1000].
/// Throws ConfigError unless m is positive and even.
RowVector time_embed(double t, int m);

/// Row-wise time_embed over a batch of times; result is times.size() x m.
Matrix time_embed_batch(const Eigen::Ref<const Eigen::VectorXd>& times, int m);

}  // namespace flowlab
