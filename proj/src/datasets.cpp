#include "flowlab/datasets.hpp"

#include <cmath>
#include <numbers>

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

void SampleBatch::validate() const {
    if (points.rows() < 1)
        throw ArgumentError("sample batch is empty");
    if (static_cast<Eigen::Index>(labels.size()) != points.rows())
        throw ShapeError("sample batch has " + std::to_string(points.rows()) + " points but " +
                         std::to_string(labels.size()) + " labels");
    if (!points.allFinite())
        throw ArgumentError("sample batch contains non-finite values");
}

SampleBatch SampleBatch::head(std::size_t n) const {
    n = std::min(n, size());
    const auto rows = static_cast<Eigen::Index>(n);
    return {points.topRows(rows), std::vector<int>(labels.begin(), labels.begin() + rows)};
}

int DatasetSpec::class_count() const {
    if (name == "gauss8")
        return 8;
    if (name == "moons")
        return 2;
    if (name == "checkerboard")
        return 0;
    throw ConfigError("unknown dataset '" + name + "' (expected gauss8, moons or checkerboard)");
}

void DatasetSpec::validate() const {
    class_count();
    if (dim != 2)
        throw ConfigError("synthetic datasets are 2-D");
    if (!(noise >= 0.0))
        throw ConfigError("dataset noise must be non-negative");
}

RowVector gauss8_center(int k) {
    const double angle = 2.0 * std::numbers::pi * k / 8.0;
    RowVector c(2);
    c << kGauss8Radius * std::cos(angle), kGauss8Radius * std::sin(angle);
    return c;
}

SampleBatch sample_data(const DatasetSpec& spec, std::size_t count, std::uint64_t seed) {
    spec.validate();
    if (count < 1)
        throw ArgumentError("sample_data needs count >= 1");
    Rng rng(seed);
    SampleBatch batch{Matrix(static_cast<Eigen::Index>(count), 2), std::vector<int>(count, kNullCondition)};

    for (std::size_t i = 0; i < count; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (spec.name == "gauss8") {
            const int k = static_cast<int>(rng.index(8));
            const RowVector c = gauss8_center(k);
            batch.points(row, 0) = c[0] + spec.noise * rng.normal();
            batch.points(row, 1) = c[1] + spec.noise * rng.normal();
            batch.labels[i] = k;
        } else if (spec.name == "moons") {
            const int k = static_cast<int>(rng.index(2));
            const double theta = std::numbers::pi * rng.uniform();
            double x = k == 0 ? std::cos(theta) : 1.0 - std::cos(theta);
            double y = k == 0 ? std::sin(theta) : 0.5 - std::sin(theta);
            x += spec.noise * rng.normal();
            y += spec.noise * rng.normal();
            batch.points(row, 0) = 1.5 * (x - 0.5);
            batch.points(row, 1) = 1.5 * (y - 0.25);
            batch.labels[i] = k;
        } else {
            // Occupied cells are those with (col + row) even.
            const auto cell = static_cast<int>(rng.index(8));
            const int cell_row = cell / 2;
            const int cell_col = 2 * (cell % 2) + (cell_row % 2);
            batch.points(row, 0) = -2.0 + cell_col + rng.uniform();
            batch.points(row, 1) = -2.0 + cell_row + rng.uniform();
        }
    }
    return batch;
}

}  // namespace flowlab
