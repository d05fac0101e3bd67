#pragma once

#include <cstddef>
#include <vector>

#include "flowlab/tensor.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

/// B points in R^d with one condition label per row (kNullCondition when unlabeled).
struct SampleBatch {
    Matrix points;
    std::vector<int> labels;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    /// Throws ArgumentError for an empty batch or non-finite entries and
    /// ShapeError when labels do not match the row count.
    void validate() const;
    /// First n rows.
    SampleBatch head(std::size_t n) const;
};

}  // namespace flowlab
