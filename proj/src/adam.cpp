#include "flowlab/adam.hpp"

#include <cmath>

#include "flowlab/errors.hpp"

namespace flowlab {

AdamState::AdamState(const ParamStore& params, AdamConfig config)
    : m_config(config), m_first(params.zeros_like()), m_second(params.zeros_like()) {}

void AdamState::apply(ParamStore& params, const ParamStore& grads) {
    if (!params.same_layout(grads) || !params.same_layout(m_first))
        throw ShapeError("gradient layout does not match parameters");
    for (const auto& g : grads) {
        for (double v : g.values()) {
            if (!std::isfinite(v))
                throw NumericalError("non-finite gradient in parameter '" + g.name() + "'");
        }
    }

    ++m_step;
    const double b1 = m_config.beta1;
    const double b2 = m_config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(m_step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(m_step));

    auto p_it = params.begin();
    auto m_it = m_first.begin();
    auto v_it = m_second.begin();
    for (auto g_it = grads.begin(); g_it != grads.end(); ++g_it, ++p_it, ++m_it, ++v_it) {
        auto p = p_it->values();
        auto m = m_it->values();
        auto v = v_it->values();
        auto g = g_it->values();
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= m_config.lr * m_hat / (std::sqrt(v_hat) + m_config.eps);
        }
    }
}

}  // namespace flowlab
