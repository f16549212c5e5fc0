#include "sentcorr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sentcorr/error.hpp"
#include "sentcorr/rng.hpp"

namespace sentcorr {

namespace {
constexpr std::size_t kSubsampleAbove = 500;
constexpr std::size_t kSubsampleCount = 200;
}  // namespace

GradCheckResult grad_check(std::span<const NamedTensor> params,
                           std::span<const NamedTensor> analytic,
                           const std::function<double()>& loss, double eps,
                           std::uint64_t subsample_seed) {
    if (params.size() != analytic.size()) {
        throw numeric_error("grad_check: parameter/gradient count mismatch");
    }
    SeededRng rng(subsample_seed);
    GradCheckResult result;

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k].tensor;
        const Tensor& a = *analytic[k].tensor;
        if (!p.same_shape(a)) {
            throw numeric_error("grad_check: gradient shape mismatch for '" + params[k].name + "'");
        }

        std::vector<std::size_t> entries;
        if (p.size() > kSubsampleAbove) {
            entries.reserve(kSubsampleCount);
            for (std::size_t i = 0; i < kSubsampleCount; ++i) {
                entries.push_back(static_cast<std::size_t>(rng.next_below(p.size())));
            }
        } else {
            entries.resize(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) entries[i] = i;
        }

        for (std::size_t idx : entries) {
            const double saved = p[idx];
            p[idx] = saved + eps;
            const double lp = loss();
            p[idx] = saved - eps;
            const double lm = loss();
            p[idx] = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm)) {
                throw numeric_error("grad_check: non-finite loss while perturbing '" +
                                    params[k].name + "'");
            }
            const double numeric = (lp - lm) / (2.0 * eps);
            const double rel = std::abs(a[idx] - numeric) /
                               std::max({std::abs(a[idx]), std::abs(numeric), 1e-8});
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_tensor = params[k].name;
                result.worst_index = idx;
            }
            ++result.entries_checked;
        }
    }
    return result;
}

}  // namespace sentcorr
