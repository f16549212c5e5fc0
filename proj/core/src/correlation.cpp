#include "sentcorr/correlation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "sentcorr/error.hpp"
#include "sentcorr/textio.hpp"

namespace sentcorr {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

const char* glyph(double v) {
    if (v <= 0.0) return ".";
    if (v <= 0.25) return "░";
    if (v <= 0.5) return "▒";
    if (v <= 0.75) return "▓";
    return "█";
}

}  // namespace

ConfusionMatrix confusion(std::span<const PredictionRecord> records) {
    if (records.empty()) throw input_error("confusion: empty record set");
    ConfusionMatrix m;
    m.combo = records.front().combo;
    for (const auto& r : records) {
        if (!(r.combo == m.combo)) {
            throw input_error("confusion: mixed combo keys (" + m.combo.str() + " vs " +
                              r.combo.str() + ")");
        }
        const std::size_t a = static_cast<std::size_t>(label_index(r.predicted));
        const std::size_t b = static_cast<std::size_t>(label_index(r.gold));
        ++m.counts[a][b];
    }
    for (int b = 0; b < kNumLabels; ++b) {
        const std::size_t bb = static_cast<std::size_t>(b);
        std::int64_t total = 0;
        for (int a = 0; a < kNumLabels; ++a) total += m.counts[static_cast<std::size_t>(a)][bb];
        m.gold_totals[bb] = total;
        m.column_defined[bb] = total > 0;
        if (total > 0) {
            for (int a = 0; a < kNumLabels; ++a) {
                m.prob[static_cast<std::size_t>(a)][bb] =
                    static_cast<double>(m.counts[static_cast<std::size_t>(a)][bb]) /
                    static_cast<double>(total);
            }
        }
    }
    return m;
}

BinaryConfusion binarize_fixed(const ConfusionMatrix& c, double theta) {
    if (theta < 0.0 || theta > 1.0) {
        throw usage_error("theta must be in [0, 1], got " + std::to_string(theta));
    }
    BinaryConfusion b;
    b.combo = c.combo;
    b.rule = "theta=" + fmt(theta);
    for (int a = 0; a < kNumLabels; ++a) {
        for (int g = 0; g < kNumLabels; ++g) {
            b.cr[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] =
                c.prob[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] > theta ? 1 : 0;
        }
    }
    return b;
}

BinaryConfusion binarize_topk(const ConfusionMatrix& c, int k, bool include_diagonal) {
    if (k < 1) throw usage_error("top-k must be >= 1");
    struct Entry {
        double value;
        int row, col;
    };
    std::vector<Entry> candidates;
    for (int a = 0; a < kNumLabels; ++a) {
        for (int g = 0; g < kNumLabels; ++g) {
            if (!include_diagonal && a == g) continue;
            const double v = c.prob[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)];
            if (v > 0.0) candidates.push_back({v, a, g});  // zero confusion is never "confusing"
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Entry& x, const Entry& y) {
        if (x.value != y.value) return x.value > y.value;
        if (x.row != y.row) return x.row < y.row;
        return x.col < y.col;
    });

    BinaryConfusion b;
    b.combo = c.combo;
    b.rule = "top" + std::to_string(k) + (include_diagonal ? "+diag" : "");
    if (static_cast<std::size_t>(k) >= candidates.size()) b.saturated = true;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
        b.cr[static_cast<std::size_t>(candidates[i].row)][static_cast<std::size_t>(candidates[i].col)] = 1;
    }
    return b;
}

VoteResult vote(std::span<const BinaryConfusion> inputs, int quorum) {
    if (inputs.empty()) throw input_error("vote: empty input set");
    const int n = static_cast<int>(inputs.size());
    if (quorum == 0) quorum = n;
    if (quorum < 1 || quorum > n) {
        throw usage_error("quorum must be in [1, " + std::to_string(n) + "], got " +
                          std::to_string(quorum));
    }
    VoteResult v;
    v.quorum = quorum;
    for (const auto& b : inputs) v.combos.push_back(b.combo);
    for (int a = 0; a < kNumLabels; ++a) {
        for (int g = 0; g < kNumLabels; ++g) {
            int count = 0;
            for (const auto& b : inputs) {
                count += b.cr[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)];
            }
            v.votes[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] = count;
            v.t[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] = count >= quorum ? 1 : 0;
        }
    }
    return v;
}

std::string matrix_csv(const ConfusionMatrix& c) {
    std::ostringstream out;
    out << "pred\\gold";
    for (auto tag : kLabelTags) out << "," << tag;
    out << "\n";
    for (int a = 0; a < kNumLabels; ++a) {
        out << kLabelTags[static_cast<std::size_t>(a)];
        for (int g = 0; g < kNumLabels; ++g) {
            out << "," << fmt(c.prob[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)]);
        }
        out << "\n";
    }
    return out.str();
}

std::string heatmap(const ConfusionMatrix& c) {
    std::ostringstream out;
    out << "      ";
    for (auto tag : kLabelTags) out << tag << " ";
    out << " (columns: gold)\n";
    for (int a = 0; a < kNumLabels; ++a) {
        out << "  " << kLabelTags[static_cast<std::size_t>(a)] << "  ";
        for (int g = 0; g < kNumLabels; ++g) {
            out << glyph(c.prob[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)]) << "  ";
        }
        out << "\n";
    }
    return out.str();
}

std::string correlation_report(std::span<const ConfusionMatrix> matrices,
                               std::span<const BinaryConfusion> binaries,
                               const VoteResult& vote) {
    std::ostringstream out;
    out << "# Inter-sentiment confusion report\n\n";
    out << "Combos: " << matrices.size() << ", vote quorum: " << vote.quorum << " of "
        << vote.combos.size() << "\n\n";

    for (std::size_t i = 0; i < matrices.size(); ++i) {
        const auto& m = matrices[i];
        out << "## " << m.combo.str();
        if (i < binaries.size()) out << "  [" << binaries[i].rule << "]";
        out << "\n\n" << heatmap(m);
        bool first = true;
        for (int b = 0; b < kNumLabels; ++b) {
            if (!m.column_defined[static_cast<std::size_t>(b)]) {
                out << (first ? "undefined gold columns: " : ", ")
                    << kLabelTags[static_cast<std::size_t>(b)];
                first = false;
            }
        }
        if (!first) out << "\n";
        out << "\n";
    }

    out << "## Vote: ranked confusion pairs (gold -> predicted)\n\n";
    struct Pair {
        int votes, gold, pred;
        bool passed;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < kNumLabels; ++a) {
        for (int g = 0; g < kNumLabels; ++g) {
            const int n = vote.votes[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)];
            if (n > 0) {
                pairs.push_back({n, g, a,
                                 vote.t[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] != 0});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        if (x.votes != y.votes) return x.votes > y.votes;
        if (x.gold != y.gold) return x.gold < y.gold;
        return x.pred < y.pred;
    });
    if (pairs.empty()) {
        out << "(no pair received any vote)\n";
    } else {
        out << "gold -> predicted : votes (vote passed)\n";
        for (const auto& p : pairs) {
            out << kLabelTags[static_cast<std::size_t>(p.gold)] << " -> "
                << kLabelTags[static_cast<std::size_t>(p.pred)] << " : " << p.votes << "/"
                << vote.combos.size() << (p.passed ? "  *" : "") << "\n";
        }
    }
    return out.str();
}

void write_prediction_log(const std::string& path, std::span<const PredictionRecord> records) {
    std::string out = "sample_id,gold,predicted,dataset,feature,model\n";
    for (const auto& r : records) {
        out += csv_field(r.sample_id);
        out += ",";
        out += label_tag(r.gold);
        out += ",";
        out += label_tag(r.predicted);
        out += ",";
        out += csv_field(r.combo.dataset);
        out += ",";
        out += csv_field(r.combo.feature);
        out += ",";
        out += csv_field(r.combo.model);
        out += "\n";
    }
    atomic_write_file(path, out);
}

std::vector<PredictionRecord> read_prediction_log(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw input_error(path + ": empty prediction log");
    if (lines[0] != "sample_id,gold,predicted,dataset,feature,model") {
        throw input_error(path + ":1: unexpected prediction log header");
    }
    std::vector<PredictionRecord> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const std::string where = path + ":" + std::to_string(li + 1);
        const std::vector<std::string> f = csv_split(lines[li]);
        if (f.size() != 6) {
            throw input_error(where + ": expected 6 fields, got " + std::to_string(f.size()));
        }
        PredictionRecord r;
        r.sample_id = f[0];
        auto gold = label_from_tag(f[1]);
        auto pred = label_from_tag(f[2]);
        if (!gold) throw input_error(where + ": unknown gold tag '" + f[1] + "'");
        if (!pred) throw input_error(where + ": unknown predicted tag '" + f[2] + "'");
        r.gold = *gold;
        r.predicted = *pred;
        r.combo = ComboKey{f[3], f[4], f[5]};
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace sentcorr
