#pragma once

#include <string>
#include <vector>

namespace sentcorr {

struct GradCheckCase {
    std::string name;
    double max_rel_err = 0.0;
    double threshold = 0.0;
    double seconds = 0.0;
    bool passed() const { return max_rel_err < threshold; }
};

/// Finite-difference verification of every backward path: a linear+softmax
/// toy, each layer in isolation, single-layer BPTT, and both full models on
/// a tiny configuration (d=4, c=4, H=5, N=7, V=20, dropout off).
/// Deterministic; intended to finish in seconds.
std::vector<GradCheckCase> run_gradcheck_suite();

}  // namespace sentcorr
