#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sentcorr/labels.hpp"

namespace sentcorr {

/// One (dataset D_i, feature F_j, model M_k) combination.
struct ComboKey {
    std::string dataset;
    std::string feature;
    std::string model;

    bool operator==(const ComboKey&) const = default;
    std::string str() const { return dataset + "/" + feature + "/" + model; }
};

/// Per-class precision/recall/F1 plus accuracy and loss for one epoch/split.
struct MetricsRecord {
    int epoch = 0;
    std::string split;
    double loss = 0.0;
    double accuracy = 0.0;
    std::array<double, kNumLabels> precision{};
    std::array<double, kNumLabels> recall{};
    std::array<double, kNumLabels> f1{};
    // Classes the model never predicted: precision is reported as 0, flagged here.
    std::array<bool, kNumLabels> precision_undefined{};
};

/// counts[a][b] = number of samples with gold class b predicted as class a.
using CountMatrix = std::array<std::array<std::int64_t, kNumLabels>, kNumLabels>;

MetricsRecord metrics_from_counts(const CountMatrix& counts, double loss, int epoch,
                                  std::string split);

/// History CSV columns: epoch,split,loss,accuracy, then
/// gd_precision,gd_recall,gd_f1 ... fn_f1 in canonical tag order.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& rec);
void write_history_csv(const std::string& path, std::span<const MetricsRecord> history);

/// Metrics file used by `eval` and consumed by `report`: the history columns
/// prefixed with dataset,feature,model.
std::string combo_metrics_csv_header();
std::string combo_metrics_csv_row(const ComboKey& combo, const MetricsRecord& rec);
std::vector<std::pair<ComboKey, MetricsRecord>> read_combo_metrics_csv(const std::string& path);

/// Table-shaped summary: one grid per dataset, rows feature x model, columns
/// the six per-class F1 scores and accuracy, three decimals.
std::string render_report(std::span<const std::pair<ComboKey, MetricsRecord>> entries);

}  // namespace sentcorr
