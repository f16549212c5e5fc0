#include "sentcorr/adam.hpp"

#include <cmath>

#include "sentcorr/error.hpp"

namespace sentcorr {

AdamState AdamState::init_like(std::span<const NamedTensor> params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& p : params) {
        s.m.push_back(Tensor::like(*p.tensor));
        s.v.push_back(Tensor::like(*p.tensor));
    }
    return s;
}

void adam_step(std::span<const NamedTensor> params, std::span<const NamedTensor> grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw numeric_error("adam_step: parameter/gradient/state count mismatch");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!params[k].tensor->same_shape(*grads[k].tensor)) {
            throw numeric_error("adam_step: shape mismatch for tensor '" + params[k].name + "'");
        }
        if (!grads[k].tensor->all_finite()) {
            throw numeric_error("adam_step: non-finite gradient in tensor '" + grads[k].name +
                                "', step aborted");
        }
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k].tensor;
        const Tensor& g = *grads[k].tensor;
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

}  // namespace sentcorr
