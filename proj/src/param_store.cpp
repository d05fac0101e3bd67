#include "flowlab/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "flowlab/errors.hpp"

namespace flowlab {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

ParamEntry::ParamEntry(std::string name, std::vector<std::size_t> shape, double fill)
    : m_name(std::move(name)), m_shape(std::move(shape)), m_values(product(m_shape), fill) {
    if (m_shape.empty() || m_shape.size() > 2)
        throw ShapeError("parameter '" + m_name + "' must be 1-D or 2-D");
}

MatrixMap ParamEntry::matrix() {
    if (m_shape.size() != 2)
        throw ShapeError("parameter '" + m_name + "' is not 2-D");
    return {m_values.data(), static_cast<Eigen::Index>(m_shape[0]), static_cast<Eigen::Index>(m_shape[1])};
}

ConstMatrixMap ParamEntry::matrix() const {
    if (m_shape.size() != 2)
        throw ShapeError("parameter '" + m_name + "' is not 2-D");
    return {m_values.data(), static_cast<Eigen::Index>(m_shape[0]), static_cast<Eigen::Index>(m_shape[1])};
}

VectorMap ParamEntry::vector() {
    if (m_shape.size() != 1)
        throw ShapeError("parameter '" + m_name + "' is not 1-D");
    return {m_values.data(), static_cast<Eigen::Index>(m_shape[0])};
}

ConstVectorMap ParamEntry::vector() const {
    if (m_shape.size() != 1)
        throw ShapeError("parameter '" + m_name + "' is not 1-D");
    return {m_values.data(), static_cast<Eigen::Index>(m_shape[0])};
}

ParamEntry& ParamStore::add(const std::string& name, std::vector<std::size_t> shape, double fill) {
    if (contains(name))
        throw ConfigError("duplicate parameter name '" + name + "'");
    m_index.emplace(name, m_entries.size());
    return m_entries.emplace_back(name, std::move(shape), fill);
}

ParamEntry& ParamStore::at(const std::string& name) {
    auto it = m_index.find(name);
    if (it == m_index.end())
        throw ConfigError("unknown parameter '" + name + "'");
    return m_entries[it->second];
}

const ParamEntry& ParamStore::at(const std::string& name) const {
    auto it = m_index.find(name);
    if (it == m_index.end())
        throw ConfigError("unknown parameter '" + name + "'");
    return m_entries[it->second];
}

std::size_t ParamStore::total_values() const {
    std::size_t n = 0;
    for (const auto& e : m_entries)
        n += e.size();
    return n;
}

ParamStore ParamStore::zeros_like() const {
    ParamStore out;
    for (const auto& e : m_entries)
        out.add(e.name(), e.shape(), 0.0);
    return out;
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (m_entries.size() != other.m_entries.size())
        return false;
    for (std::size_t i = 0; i < m_entries.size(); ++i) {
        if (m_entries[i].name() != other.m_entries[i].name() || m_entries[i].shape() != other.m_entries[i].shape())
            return false;
    }
    return true;
}

bool ParamStore::all_finite() const {
    return std::all_of(m_entries.begin(), m_entries.end(), [](const ParamEntry& e) {
        return std::all_of(e.values().begin(), e.values().end(), [](double v) { return std::isfinite(v); });
    });
}

bool operator==(const ParamStore& a, const ParamStore& b) {
    if (!a.same_layout(b))
        return false;
    for (std::size_t i = 0; i < a.m_entries.size(); ++i) {
        auto x = a.m_entries[i].values();
        auto y = b.m_entries[i].values();
        if (!std::equal(x.begin(), x.end(), y.begin()))
            return false;
    }
    return true;
}

}  // namespace flowlab
