#include "flowlab/time_embedding.hpp"

#include <cmath>
#include <string>

#include "flowlab/errors.hpp"

namespace flowlab {

namespace {

void check_dim(int m) {
    if (m < 2 || m % 2 != 0)
        throw ConfigError("time embedding dimension must be even and >= 2, got " + std::to_string(m));
}

double frequency(int k, int half) {
    if (half == 1)
        return kMinTimeFrequency;
    const double ratio = static_cast<double>(k) / static_cast<double>(half - 1);
    return kMinTimeFrequency * std::pow(kMaxTimeFrequency / kMinTimeFrequency, ratio);
}

}  // namespace

RowVector time_embed(double t, int m) {
    check_dim(m);
    const int half = m / 2;
    RowVector out(m);
    for (int k = 0; k < half; ++k) {
        const double w = frequency(k, half);
        out[2 * k] = std::sin(w * t);
        out[2 * k + 1] = std::cos(w * t);
    }
    return out;
}

Matrix time_embed_batch(const Eigen::Ref<const Eigen::VectorXd>& times, int m) {
    check_dim(m);
    const int half = m / 2;
    Matrix out(times.size(), m);
    for (int k = 0; k < half; ++k) {
        const double w = frequency(k, half);
        for (Eigen::Index i = 0; i < times.size(); ++i) {
            out(i, 2 * k) = std::sin(w * times[i]);
            out(i, 2 * k + 1) = std::cos(w * times[i]);
        }
    }
    return out;
}

}  // namespace flowlab
