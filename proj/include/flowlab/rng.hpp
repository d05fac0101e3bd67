#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flowlab {

/// Derives an independent stream seed from a root seed and a stream name
/// (e.g. "data", "init", "training", "intervals", "projections", "o3s").
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    double uniform() { return m_uniform(m_engine); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return m_normal(m_engine); }
    std::size_t index(std::size_t n);

    std::mt19937_64& engine() { return m_engine; }

private:
    std::mt19937_64 m_engine;
    std::uniform_real_distribution<double> m_uniform{0.0, 1.0};
    std::normal_distribution<double> m_normal{0.0, 1.0};
};

}  // namespace flowlab
