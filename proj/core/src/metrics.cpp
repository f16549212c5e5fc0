#include "sentcorr/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "sentcorr/error.hpp"
#include "sentcorr/textio.hpp"

namespace sentcorr {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error(where + ": bad number '" + s + "'");
    }
}

// Short names used in report rows; unknown strings pass through unchanged.
std::string feature_short(const std::string& feature) {
    if (feature == "explicit") return "exp";
    if (feature == "implicit") return "imp";
    if (feature == "character") return "char";
    return feature;
}

std::string model_short(const std::string& model) {
    if (model == "cnn_lstm2") return "M1";
    if (model == "cnn_lstm2_stack") return "M2";
    return model;
}

int feature_rank(const std::string& s) {
    if (s == "exp") return 0;
    if (s == "imp") return 1;
    if (s == "char") return 2;
    return 3;
}

int model_rank(const std::string& s) {
    if (s == "M1") return 0;
    if (s == "M2") return 1;
    return 2;
}

}  // namespace

MetricsRecord metrics_from_counts(const CountMatrix& counts, double loss, int epoch,
                                  std::string split) {
    MetricsRecord rec;
    rec.epoch = epoch;
    rec.split = std::move(split);
    rec.loss = loss;

    std::int64_t total = 0, correct = 0;
    for (int a = 0; a < kNumLabels; ++a) {
        for (int b = 0; b < kNumLabels; ++b) {
            total += counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        correct += counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
    }
    rec.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;

    for (int c = 0; c < kNumLabels; ++c) {
        const std::size_t cc = static_cast<std::size_t>(c);
        std::int64_t tp = counts[cc][cc], predicted = 0, gold = 0;
        for (int x = 0; x < kNumLabels; ++x) {
            predicted += counts[cc][static_cast<std::size_t>(x)];
            gold += counts[static_cast<std::size_t>(x)][cc];
        }
        if (predicted > 0) {
            rec.precision[cc] = static_cast<double>(tp) / static_cast<double>(predicted);
        } else {
            rec.precision[cc] = 0.0;
            rec.precision_undefined[cc] = true;
        }
        rec.recall[cc] = gold > 0 ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
        const double pr = rec.precision[cc] + rec.recall[cc];
        rec.f1[cc] = pr > 0.0 ? 2.0 * rec.precision[cc] * rec.recall[cc] / pr : 0.0;
    }
    return rec;
}

std::string metrics_csv_header() {
    std::string h = "epoch,split,loss,accuracy";
    for (auto tag : kLabelTags) {
        const std::string t(tag);
        h += "," + t + "_precision," + t + "_recall," + t + "_f1";
    }
    return h;
}

std::string metrics_csv_row(const MetricsRecord& rec) {
    std::string row = std::to_string(rec.epoch) + "," + rec.split + "," + fmt(rec.loss) + "," +
                      fmt(rec.accuracy);
    for (int c = 0; c < kNumLabels; ++c) {
        const std::size_t cc = static_cast<std::size_t>(c);
        row += "," + fmt(rec.precision[cc]) + "," + fmt(rec.recall[cc]) + "," + fmt(rec.f1[cc]);
    }
    return row;
}

void write_history_csv(const std::string& path, std::span<const MetricsRecord> history) {
    std::string out = metrics_csv_header() + "\n";
    for (const auto& rec : history) out += metrics_csv_row(rec) + "\n";
    atomic_write_file(path, out);
}

std::string combo_metrics_csv_header() { return "dataset,feature,model," + metrics_csv_header(); }

std::string combo_metrics_csv_row(const ComboKey& combo, const MetricsRecord& rec) {
    return csv_field(combo.dataset) + "," + csv_field(combo.feature) + "," +
           csv_field(combo.model) + "," + metrics_csv_row(rec);
}

std::vector<std::pair<ComboKey, MetricsRecord>> read_combo_metrics_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw input_error(path + ": empty metrics file");
    const std::string expected = combo_metrics_csv_header();
    if (lines[0] != expected) {
        throw input_error(path + ":1: unexpected header (want '" + expected + "')");
    }
    std::vector<std::pair<ComboKey, MetricsRecord>> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const std::string where = path + ":" + std::to_string(li + 1);
        const std::vector<std::string> f = csv_split(lines[li]);
        if (f.size() != 7 + 3 * kNumLabels) {
            throw input_error(where + ": expected " + std::to_string(7 + 3 * kNumLabels) +
                              " fields, got " + std::to_string(f.size()));
        }
        ComboKey combo{f[0], f[1], f[2]};
        MetricsRecord rec;
        try {
            rec.epoch = std::stoi(f[3]);
        } catch (const std::exception&) {
            throw input_error(where + ": bad epoch '" + f[3] + "'");
        }
        rec.split = f[4];
        rec.loss = parse_double(f[5], where);
        rec.accuracy = parse_double(f[6], where);
        for (int c = 0; c < kNumLabels; ++c) {
            const std::size_t base = 7 + 3 * static_cast<std::size_t>(c);
            rec.precision[static_cast<std::size_t>(c)] = parse_double(f[base], where);
            rec.recall[static_cast<std::size_t>(c)] = parse_double(f[base + 1], where);
            rec.f1[static_cast<std::size_t>(c)] = parse_double(f[base + 2], where);
        }
        out.emplace_back(std::move(combo), std::move(rec));
    }
    return out;
}

std::string render_report(std::span<const std::pair<ComboKey, MetricsRecord>> entries) {
    struct Row {
        std::string feature, model;
        MetricsRecord rec;
    };
    std::map<std::string, std::vector<Row>> by_dataset;
    for (const auto& [combo, rec] : entries) {
        by_dataset[combo.dataset].push_back(
            Row{feature_short(combo.feature), model_short(combo.model), rec});
    }

    std::ostringstream out;
    for (auto& [dataset, rows] : by_dataset) {
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (feature_rank(a.feature) != feature_rank(b.feature)) {
                return feature_rank(a.feature) < feature_rank(b.feature);
            }
            return model_rank(a.model) < model_rank(b.model);
        });
        out << "D " << dataset;
        for (auto tag : kLabelTags) out << "\t" << tag << "_f1";
        out << "\tA\n";
        for (const auto& row : rows) {
            out << row.feature << " " << row.model;
            for (int c = 0; c < kNumLabels; ++c) out << "\t" << fmt3(row.rec.f1[static_cast<std::size_t>(c)]);
            out << "\t" << fmt3(row.rec.accuracy) << "\n";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace sentcorr
