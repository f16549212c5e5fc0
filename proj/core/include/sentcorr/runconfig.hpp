#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sentcorr/model.hpp"
#include "sentcorr/train.hpp"

namespace sentcorr {

/// Flat run settings: defaults, overridden by a "key = value" config file,
/// overridden by command-line flags of the same names.
struct RunConfig {
    // paths
    std::string corpus;
    std::string dict;
    std::string vocab;
    std::string checkpoint;
    std::string outdir = "out";
    std::string dataset;  // empty: derived from the corpus file name

    // features
    std::string mode = "explicit";
    int min_count = 1;

    // model
    std::string model = "cnn_lstm2";
    int embed_dim = 100;
    int conv_out = 100;
    int lstm_hidden = 128;
    int stack_dim = -1;  // -1: match lstm_hidden
    int window = 5;
    double dropout = 0.5;
    int seq_len = 0;  // 0: min(longest train document, seq_cap)
    int seq_cap = 1024;
    std::string activation = "relu";
    std::string mean_by = "padded";

    // training
    int epochs = 20;
    int batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 42;
    int eval_every = 1;
    bool shuffle = true;
    int patience = 0;
    double stop_train_acc = 0.0;
    int threads = 0;  // 0: hardware concurrency

    // evaluation
    std::string split = "test";

    // correlation
    double theta = -1.0;  // < 0: dynamic top-k instead of a fixed threshold
    int top_k = 3;
    bool include_diagonal = false;
    int quorum = 0;  // 0: all contributing combos

    ModelConfig model_config() const;  // stack_dim resolved, validated by caller
    TrainConfig train_config() const;
    FeatureMode feature_mode() const { return feature_mode_from_name(mode); }
    ModelKind model_kind() const { return model_kind_from_name(model); }
};

struct Setting {
    std::string key;
    std::string help;
    std::function<void(RunConfig&, const std::string& value, const std::string& where)> apply;
    std::function<std::string(const RunConfig&)> get;
};

/// Every tunable, in documentation order. Both the config file parser and the
/// generated command-line flags go through this table, so the two surfaces
/// cannot drift apart.
const std::vector<Setting>& settings();

/// "key = value" lines, '#' comments. Unknown keys and unparsable values are
/// usage errors naming the file and line.
void apply_config_file(RunConfig& cfg, const std::string& path);

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                   const std::string& where);

/// The fully resolved snapshot; loading it back reproduces the run.
std::string resolved_config(const RunConfig& cfg);

}  // namespace sentcorr
