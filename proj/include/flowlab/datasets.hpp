#pragma once

#include <cstdint>
#include <string>

#include "flowlab/sample_batch.hpp"

namespace flowlab {

/// Synthetic 2-D target distributions.
///   gauss8       8 Gaussians (std `noise`) on the radius-2 circle, label = mode index
///   moons        two interleaved half circles with Gaussian noise, label = moon index
///   checkerboard 8 occupied cells of a 4x4 board on [-2,2]^2, unlabeled
struct DatasetSpec {
    std::string name = "gauss8";
    int dim = 2;
    double noise = 0.1;
    std::uint64_t seed = 0;

    /// Number of real classes; 0 for unconditional datasets.
    int class_count() const;
    bool conditional() const { return class_count() > 0; }
    void validate() const;
};

inline constexpr double kGauss8Radius = 2.0;

SampleBatch sample_data(const DatasetSpec& spec, std::size_t count, std::uint64_t seed);

/// Center of gauss8 mode k.
RowVector gauss8_center(int k);

}  // namespace flowlab
