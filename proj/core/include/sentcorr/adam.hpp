#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sentcorr/tensor.hpp"

namespace sentcorr {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter first/second moment estimates plus the shared step counter.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t step = 0;

    static AdamState init_like(std::span<const NamedTensor> params);
};

/// One bias-corrected Adam update, applied in place. The whole step is
/// aborted (no tensor touched) if any gradient entry is non-finite; the
/// error names the offending tensor.
void adam_step(std::span<const NamedTensor> params, std::span<const NamedTensor> grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace sentcorr
