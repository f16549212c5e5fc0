#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "sentcorr/tensor.hpp"

namespace sentcorr {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    std::size_t entries_checked = 0;
};

/// Compare analytic gradients against central finite differences
/// (L(x+eps) - L(x-eps)) / (2 eps). `loss` must recompute the loss from the
/// current parameter values; parameters are perturbed in place and restored.
/// Tensors with more than 500 entries are checked on a seeded random
/// subsample of 200 entries to keep full-model checks fast.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(std::span<const NamedTensor> params,
                           std::span<const NamedTensor> analytic,
                           const std::function<double()>& loss, double eps,
                           std::uint64_t subsample_seed = 7);

}  // namespace sentcorr
