#pragma once

#include <cstdint>

#include "flowlab/param_store.hpp"

namespace flowlab {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter first/second moments for an Adam update.
class AdamState {
public:
    AdamState(const ParamStore& params, AdamConfig config);

    const AdamConfig& config() const { return m_config; }
    void set_lr(double lr) { m_config.lr = lr; }
    std::int64_t step() const { return m_step; }
    const ParamStore& first_moment() const { return m_first; }
    const ParamStore& second_moment() const { return m_second; }

    /// Applies one bias-corrected Adam update in place. Throws ShapeError on a
    /// layout mismatch and NumericalError (naming the parameter) on non-finite
    /// gradients; parameters are left untouched in both cases.
    void apply(ParamStore& params, const ParamStore& grads);

private:
    AdamConfig m_config;
    ParamStore m_first;
    ParamStore m_second;
    std::int64_t m_step = 0;
};

}  // namespace flowlab
