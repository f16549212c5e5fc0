#include "sentcorr/runconfig.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sentcorr/error.hpp"
#include "sentcorr/textio.hpp"

namespace sentcorr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

int parse_int(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw usage_error(where + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const unsigned long long r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(r);
    } catch (const std::exception&) {
        throw usage_error(where + ": expected a non-negative integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw usage_error(where + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw usage_error(where + ": expected true|false, got '" + v + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

#define STR_SETTING(field, help_text)                                                  \
    Setting {                                                                          \
        #field, help_text,                                                             \
            [](RunConfig& c, const std::string& v, const std::string&) { c.field = v; }, \
            [](const RunConfig& c) { return c.field; }                                 \
    }
#define INT_SETTING(field, help_text)                                                \
    Setting {                                                                        \
        #field, help_text,                                                           \
            [](RunConfig& c, const std::string& v, const std::string& w) {           \
                c.field = parse_int(v, w);                                           \
            },                                                                       \
            [](const RunConfig& c) { return std::to_string(c.field); }               \
    }
#define DBL_SETTING(field, help_text)                                                \
    Setting {                                                                        \
        #field, help_text,                                                           \
            [](RunConfig& c, const std::string& v, const std::string& w) {           \
                c.field = parse_double(v, w);                                        \
            },                                                                       \
            [](const RunConfig& c) { return fmt_double(c.field); }                   \
    }
#define BOOL_SETTING(field, help_text)                                               \
    Setting {                                                                        \
        #field, help_text,                                                           \
            [](RunConfig& c, const std::string& v, const std::string& w) {           \
                c.field = parse_bool(v, w);                                          \
            },                                                                       \
            [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); } \
    }

}  // namespace

const std::vector<Setting>& settings() {
    static const std::vector<Setting> table = {
        STR_SETTING(corpus, "corpus file (JSON lines: id, text, label, split)"),
        STR_SETTING(dict, "synonym dictionary file (tag<TAB>word lines)"),
        STR_SETTING(vocab, "vocabulary file (id<TAB>token lines)"),
        STR_SETTING(checkpoint, "model checkpoint file"),
        STR_SETTING(outdir, "output directory"),
        STR_SETTING(dataset, "dataset key for logs/reports (default: corpus file name)"),
        STR_SETTING(mode, "feature mode: explicit|implicit|character"),
        INT_SETTING(min_count, "drop tokens seen fewer times than this when building the vocabulary"),
        STR_SETTING(model, "model kind: cnn_lstm2|cnn_lstm2_stack"),
        INT_SETTING(embed_dim, "embedding dimension"),
        INT_SETTING(conv_out, "convolution output dimension"),
        INT_SETTING(lstm_hidden, "LSTM hidden size"),
        INT_SETTING(stack_dim, "stack path output size; -1 follows lstm_hidden"),
        INT_SETTING(window, "convolution window (odd)"),
        DBL_SETTING(dropout, "dropout rate in [0, 1)"),
        INT_SETTING(seq_len, "padded sequence length; 0 derives min(longest train doc, seq_cap)"),
        INT_SETTING(seq_cap, "cap for the derived sequence length"),
        STR_SETTING(activation, "conv activation: relu|softplus"),
        STR_SETTING(mean_by, "pooling divisor: padded|valid"),
        INT_SETTING(epochs, "training epochs"),
        INT_SETTING(batch_size, "gradient accumulation batch size"),
        DBL_SETTING(lr, "Adam learning rate"),
        DBL_SETTING(beta1, "Adam beta1"),
        DBL_SETTING(beta2, "Adam beta2"),
        DBL_SETTING(adam_eps, "Adam epsilon"),
        Setting{"seed", "rng seed for init, shuffling and dropout",
                [](RunConfig& c, const std::string& v, const std::string& w) {
                    c.seed = parse_u64(v, w);
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }},
        INT_SETTING(eval_every, "test-split metrics every this many epochs"),
        BOOL_SETTING(shuffle, "shuffle training samples each epoch"),
        INT_SETTING(patience, "stop after this many epochs without train-loss improvement; 0 disables"),
        DBL_SETTING(stop_train_acc, "stop once train accuracy reaches this; 0 disables"),
        INT_SETTING(threads, "worker threads per batch/eval; 0 uses all cores"),
        STR_SETTING(split, "corpus split to evaluate: train|test"),
        DBL_SETTING(theta, "fixed binarization threshold in [0,1]; negative selects top_k"),
        INT_SETTING(top_k, "dynamic threshold: top k confusing off-diagonal pairs"),
        BOOL_SETTING(include_diagonal, "let top_k also select diagonal entries"),
        INT_SETTING(quorum, "votes required per pair; 0 means all combos must agree"),
    };
    return table;
}

#undef STR_SETTING
#undef INT_SETTING
#undef DBL_SETTING
#undef BOOL_SETTING

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                   const std::string& where) {
    for (const auto& s : settings()) {
        if (s.key == key) {
            s.apply(cfg, value, where);
            return;
        }
    }
    throw usage_error(where + ": unknown setting '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw usage_error(where + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw usage_error(where + ": empty key");
        apply_setting(cfg, key, value, where);
    }
}

std::string resolved_config(const RunConfig& cfg) {
    std::string out = "# resolved run configuration\n";
    for (const auto& s : settings()) {
        out += s.key + " = " + s.get(cfg) + "\n";
    }
    return out;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig mc;
    mc.embed_dim = embed_dim;
    mc.conv_out = conv_out;
    mc.lstm_hidden = lstm_hidden;
    mc.stack_dim = stack_dim < 0 ? lstm_hidden : stack_dim;
    mc.window = window;
    mc.dropout_rate = dropout;
    mc.seq_len = seq_len;
    if (activation == "relu") {
        mc.activation = Activation::relu;
    } else if (activation == "softplus") {
        mc.activation = Activation::softplus;
    } else {
        throw usage_error("unknown activation '" + activation + "' (expected relu|softplus)");
    }
    if (mean_by == "padded") {
        mc.mean_by = MeanBy::padded;
    } else if (mean_by == "valid") {
        mc.mean_by = MeanBy::valid;
    } else {
        throw usage_error("unknown mean_by '" + mean_by + "' (expected padded|valid)");
    }
    return mc;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.adam.lr = lr;
    tc.adam.beta1 = beta1;
    tc.adam.beta2 = beta2;
    tc.adam.eps = adam_eps;
    tc.seed = seed;
    tc.eval_every = eval_every;
    tc.shuffle = shuffle;
    tc.patience = patience;
    tc.stop_train_acc = stop_train_acc;
    tc.threads = threads;
    return tc;
}

}  // namespace sentcorr
