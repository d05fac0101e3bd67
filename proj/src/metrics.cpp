#include "flowlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

double swd(const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed) {
    if (a.rows() == 0 || b.rows() == 0)
        throw ArgumentError("swd needs non-empty inputs");
    if (a.cols() != b.cols())
        throw ShapeError("swd inputs differ in dimension");
    if (n_projections < 1)
        throw ArgumentError("swd needs at least one projection");

    const Eigen::Index n = std::min(a.rows(), b.rows());
    const Eigen::Index d = a.cols();
    Rng rng(seed);
    Matrix dirs(d, n_projections);
    for (int p = 0; p < n_projections; ++p) {
        double norm = 0.0;
        do {
            for (Eigen::Index k = 0; k < d; ++k)
                dirs(k, p) = rng.normal();
            norm = dirs.col(p).norm();
        } while (norm == 0.0);
        dirs.col(p) /= norm;
    }

    const Matrix pa = a.topRows(n) * dirs;
    const Matrix pb = b.topRows(n) * dirs;
    std::vector<double> xa(static_cast<std::size_t>(n)), xb(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int p = 0; p < n_projections; ++p) {
        for (Eigen::Index i = 0; i < n; ++i) {
            xa[static_cast<std::size_t>(i)] = pa(i, p);
            xb[static_cast<std::size_t>(i)] = pb(i, p);
        }
        std::sort(xa.begin(), xa.end());
        std::sort(xb.begin(), xb.end());
        double w2 = 0.0;
        for (std::size_t i = 0; i < xa.size(); ++i) {
            const double diff = xa[i] - xb[i];
            w2 += diff * diff;
        }
        total += w2 / static_cast<double>(n);
    }
    return std::sqrt(total / n_projections);
}

MmdResult mmd_rbf(const Matrix& a, const Matrix& b, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw ArgumentError("mmd bandwidth must be positive");
    if (a.rows() < 2 || b.rows() < 2)
        throw ArgumentError("mmd needs at least 2 points per set");
    if (a.cols() != b.cols())
        throw ShapeError("mmd inputs differ in dimension");

    const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
    auto kernel_sum = [scale](const Matrix& x, const Matrix& y, bool skip_diagonal) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < y.rows(); ++j) {
                if (skip_diagonal && i == j)
                    continue;
                s += std::exp(scale * (x.row(i) - y.row(j)).squaredNorm());
            }
        }
        return s;
    };

    const auto m = static_cast<double>(a.rows());
    const auto n = static_cast<double>(b.rows());
    const double xx = kernel_sum(a, a, true) / (m * (m - 1.0));
    const double yy = kernel_sum(b, b, true) / (n * (n - 1.0));
    const double xy = kernel_sum(a, b, false) / (m * n);
    const double raw = xx + yy - 2.0 * xy;
    return {std::max(raw, 0.0), raw};
}

double noise_floor(const DatasetSpec& spec, std::size_t count, int trials, std::uint64_t seed, int n_projections) {
    if (trials < 3)
        throw ArgumentError("noise_floor needs at least 3 trials, got " + std::to_string(trials));
    double total = 0.0;
    for (int k = 0; k < trials; ++k) {
        const std::string tag = std::to_string(k);
        const SampleBatch a = sample_data(spec, count, derive_seed(seed, "floor-a" + tag));
        const SampleBatch b = sample_data(spec, count, derive_seed(seed, "floor-b" + tag));
        total += swd(a.points, b.points, n_projections, kProjectionSeed);
    }
    return total / trials;
}

}  // namespace flowlab
