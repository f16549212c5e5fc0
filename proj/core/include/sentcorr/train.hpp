#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentcorr/adam.hpp"
#include "sentcorr/metrics.hpp"
#include "sentcorr/model.hpp"

namespace sentcorr {

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    AdamConfig adam;
    std::uint64_t seed = 42;
    int eval_every = 1;  // test-split record every this many epochs
    bool shuffle = true;
    int patience = 0;             // >0: stop after this many epochs without train-loss improvement
    double stop_train_acc = 0.0;  // >0: stop once train accuracy reaches this
    int threads = 1;              // per-batch sample parallelism; 0 = hardware

    void validate() const;
};

struct TrainResult {
    ModelParams params;
    std::vector<MetricsRecord> history;
    int epochs_run = 0;
    bool diverged = false;
    std::string divergence_message;
    std::uint64_t clamp_warnings = 0;
};

/// Epoch loop: shuffle (seeded), batched Adam steps, one eval-mode train
/// record per epoch and one test record every eval_every epochs. Divergence
/// (non-finite loss) aborts and returns the partial history. Deterministic
/// given (config, model config, corpus): the sample-order gradient reduction
/// makes results independent of the thread count.
TrainResult train(const TrainConfig& tc, const ModelConfig& mc, ModelKind kind,
                  std::size_t vocab_size, std::span<const EncodedSample> train_set,
                  std::span<const EncodedSample> test_set);

/// Eval-mode pass: mean cross-entropy, accuracy and per-class metrics.
MetricsRecord evaluate(const ModelParams& params, const ModelConfig& cfg,
                       std::span<const EncodedSample> samples, int epoch,
                       const std::string& split, int threads = 1);

/// Gold/prediction counts for one sample set; counts[a][b] = gold b predicted a.
CountMatrix confusion_counts(std::span<const EncodedSample> samples,
                             std::span<const Prediction> preds);

}  // namespace sentcorr
