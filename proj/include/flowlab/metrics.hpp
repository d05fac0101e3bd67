#pragma once

#include <cstdint>

#include "flowlab/datasets.hpp"
#include "flowlab/tensor.hpp"

namespace flowlab {

inline constexpr int kDefaultProjections = 256;
/// Shared projection seed so SWD values are comparable across runs.
inline constexpr std::uint64_t kProjectionSeed = 0x5eedULL;

/// Sliced 2-Wasserstein distance: sqrt of the mean, over random unit directions,
/// of the squared 1-D W2 between sorted projections. Unequal batches are
/// truncated to the smaller row count. Deterministic given the seed.
double swd(const Matrix& a, const Matrix& b, int n_projections = kDefaultProjections,
           std::uint64_t seed = kProjectionSeed);

struct MmdResult {
    double value;  // max(raw, 0)
    double raw;    // unbiased estimate, may be slightly negative
};

/// Unbiased MMD^2 with kernel exp(-|x-y|^2 / (2 h^2)).
MmdResult mmd_rbf(const Matrix& a, const Matrix& b, double bandwidth);

/// Mean SWD between independent same-size draws of the dataset.
double noise_floor(const DatasetSpec& spec, std::size_t count, int trials, std::uint64_t seed,
                   int n_projections = kDefaultProjections);

}  // namespace flowlab
