#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "flowlab/tensor.hpp"

namespace flowlab {

/// A named, shaped array of doubles. The shape is fixed at creation.
class ParamEntry {
public:
    ParamEntry(std::string name, std::vector<std::size_t> shape, double fill);

    const std::string& name() const { return m_name; }
    const std::vector<std::size_t>& shape() const { return m_shape; }
    std::size_t size() const { return m_values.size(); }

    std::span<double> values() { return m_values; }
    std::span<const double> values() const { return m_values; }

    /// Row-major view of a 2-D entry.
    MatrixMap matrix();
    ConstMatrixMap matrix() const;
    /// View of a 1-D entry.
    VectorMap vector();
    ConstVectorMap vector() const;

private:
    std::string m_name;
    std::vector<std::size_t> m_shape;
    // Fixed alignment keeps vectorized loops splitting the same way on every run.
    std::vector<double, Eigen::aligned_allocator<double>> m_values;
};

/// Insertion-ordered collection of uniquely named parameter arrays.
class ParamStore {
public:
    ParamEntry& add(const std::string& name, std::vector<std::size_t> shape, double fill = 0.0);

    bool contains(const std::string& name) const { return m_index.count(name) != 0; }
    ParamEntry& at(const std::string& name);
    const ParamEntry& at(const std::string& name) const;

    std::size_t size() const { return m_entries.size(); }
    std::size_t total_values() const;

    auto begin() { return m_entries.begin(); }
    auto end() { return m_entries.end(); }
    auto begin() const { return m_entries.begin(); }
    auto end() const { return m_entries.end(); }

    /// Same names, order and shapes, all values zero.
    ParamStore zeros_like() const;
    bool same_layout(const ParamStore& other) const;
    bool all_finite() const;

    friend bool operator==(const ParamStore& a, const ParamStore& b);

private:
    std::vector<ParamEntry> m_entries;
    std::unordered_map<std::string, std::size_t> m_index;
};

}  // namespace flowlab
