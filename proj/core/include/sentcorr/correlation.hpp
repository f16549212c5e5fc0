#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentcorr/labels.hpp"
#include "sentcorr/metrics.hpp"

namespace sentcorr {

struct PredictionRecord {
    std::string sample_id;
    SentimentLabel gold = SentimentLabel::love;       // the manually marked label
    SentimentLabel predicted = SentimentLabel::love;  // the model output
    ComboKey combo;
};

/// counts[a][b] = #{gold b, predicted a}; prob is the column-normalized
/// conditional: the probability that class b is recognized as class a.
/// Columns without gold samples stay all-zero and are flagged undefined.
struct ConfusionMatrix {
    ComboKey combo;
    std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> counts{};
    std::array<std::array<double, kNumLabels>, kNumLabels> prob{};
    std::array<std::int64_t, kNumLabels> gold_totals{};
    std::array<bool, kNumLabels> column_defined{};
};

struct BinaryConfusion {
    ComboKey combo;
    std::array<std::array<std::uint8_t, kNumLabels>, kNumLabels> cr{};
    std::string rule;       // "theta=0.25" or "top3" etc., for reports
    bool saturated = false; // top-k asked for more entries than were available
};

struct VoteResult {
    std::array<std::array<std::uint8_t, kNumLabels>, kNumLabels> t{};
    std::array<std::array<int, kNumLabels>, kNumLabels> votes{};  // per-cell contributor count
    int quorum = 0;
    std::vector<ComboKey> combos;
};

ConfusionMatrix confusion(std::span<const PredictionRecord> records);

/// Cr[a][b] = 1 iff prob[a][b] > theta (strict).
BinaryConfusion binarize_fixed(const ConfusionMatrix& c, double theta);

/// Selects the k largest entries (off-diagonal unless include_diagonal).
/// Zero-valued entries are never selected; ties at the cut are broken by
/// (row, column) index order. Asking for more than the positive candidate
/// count selects them all and flags saturated.
BinaryConfusion binarize_topk(const ConfusionMatrix& c, int k, bool include_diagonal = false);

/// T[a][b] = 1 iff at least `quorum` inputs have Cr[a][b] = 1.
/// quorum 0 means "all inputs", the conjunction vote.
VoteResult vote(std::span<const BinaryConfusion> inputs, int quorum = 0);

/// 7x7 CSV grid: header row and column carry the tags in canonical order,
/// rows are predicted classes, columns gold classes.
std::string matrix_csv(const ConfusionMatrix& c);

/// Glyph scale: 0 ".", (0,0.25] "░", (0.25,0.5] "▒", (0.5,0.75] "▓", (0.75,1] "█".
std::string heatmap(const ConfusionMatrix& c);

/// Per-combo heatmaps plus the vote table as ranked (gold -> predicted)
/// pairs with contributing-combo counts.
std::string correlation_report(std::span<const ConfusionMatrix> matrices,
                               std::span<const BinaryConfusion> binaries, const VoteResult& vote);

/// Prediction log CSV: sample_id,gold,predicted,dataset,feature,model.
/// The interchange format between training and correlation analysis.
void write_prediction_log(const std::string& path, std::span<const PredictionRecord> records);
std::vector<PredictionRecord> read_prediction_log(const std::string& path);

}  // namespace sentcorr
