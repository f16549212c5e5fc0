#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentcorr/features.hpp"
#include "sentcorr/labels.hpp"
#include "sentcorr/layers.hpp"
#include "sentcorr/rng.hpp"
#include "sentcorr/tensor.hpp"

namespace sentcorr {

enum class ModelKind { cnn_lstm2, cnn_lstm2_stack };

std::string_view model_kind_name(ModelKind kind);  // "cnn_lstm2" | "cnn_lstm2_stack"
ModelKind model_kind_from_name(const std::string& name);

/// Divisor of the mean pooling step: the padded length N (the literal
/// formula) or the number of valid positions.
enum class MeanBy { padded, valid };

struct ModelConfig {
    int embed_dim = 100;
    int conv_out = 100;
    int lstm_hidden = 128;
    int stack_dim = 128;  // must equal lstm_hidden: the stack path adds into the pooled vector
    int num_classes = kNumLabels;
    int window = 5;
    double dropout_rate = 0.5;
    int seq_len = 0;  // padded length N, set per dataset
    Activation activation = Activation::relu;
    MeanBy mean_by = MeanBy::padded;

    void validate() const;  // throws usage_error on inconsistent settings
};

/// All learnable tensors for one model. The stack linear pair exists only
/// for the stack kind. Tensor enumeration order is the checkpoint order.
struct ModelParams {
    ModelKind kind = ModelKind::cnn_lstm2;
    Tensor embedding;  // V x d
    ConvParams conv;
    LstmParams lstm1;
    LstmParams lstm2;
    LinearParams stack;   // d -> H, stack kind only
    LinearParams output;  // H -> M

    static ModelParams zeros(ModelKind kind, const ModelConfig& cfg, std::size_t vocab_size);

    std::vector<NamedTensor> tensors();
    std::vector<NamedTensor> tensors() const;  // const view, tensors must not be written

    std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }
    void zero_all();
    void add(const ModelParams& other);
    bool all_finite() const;
};

/// Gradients shape-mirror the parameters exactly.
using GradSet = ModelParams;

/// Per-sample record of every activation the backward pass and the
/// inspection tools need.
struct ForwardTrace {
    std::vector<int> ids;
    std::vector<std::uint8_t> mask;
    double divisor = 1.0;
    Tensor embeds;         // N x d
    Tensor windows;        // N x window*d
    Tensor conv_pre;       // N x c
    Tensor conv_act;       // N x c
    LstmTrace lstm1;       // hidden: N x H
    LstmTrace lstm2;       // hidden: N x H
    Tensor dropout_scale;  // N x H, empty in eval mode
    Tensor dropped;        // N x H
    Tensor stack_pre;      // N x H, stack kind only
    Tensor stack_act;      // N x H, stack kind only
    Tensor pooled;         // H
    Tensor logits;         // M
    Tensor probs;          // M, sums to 1
};

struct Prediction {
    std::array<double, kNumLabels> probs{};
    SentimentLabel label = SentimentLabel::love;
};

struct BatchResult {
    double loss = 0.0;
    GradSet grads;
    std::uint64_t clamped = 0;  // cross-entropy floor hits
};

/// Random initialization: embeddings uniform(-0.1, 0.1); weight matrices
/// uniform(+-sqrt(6/(fan_in+fan_out))); biases zero except the LSTM forget
/// gate block, which starts at 1. Deterministic given the rng stream.
ModelParams init_model(ModelKind kind, const ModelConfig& cfg, std::size_t vocab_size,
                       SeededRng& rng);

/// Full forward pass. Training mode draws one dropout mask from rng; eval
/// mode never touches rng and is bitwise deterministic.
ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const EncodedSample& sample, bool training, SeededRng* rng);

/// Backpropagate the cross-entropy loss of one traced sample; gradients are
/// scaled by `scale` and accumulated into grads.
void backward(const ModelParams& params, const ModelConfig& cfg, const ForwardTrace& trace,
              SentimentLabel gold, double scale, GradSet& grads);

/// Mean cross-entropy and the exact mean of per-sample gradients. Per-sample
/// dropout streams are forked from rng in batch order; samples may be
/// processed in parallel but gradients are reduced in sample order, so the
/// result does not depend on the thread count.
BatchResult loss_and_grads(const ModelParams& params, const ModelConfig& cfg,
                           std::span<const EncodedSample> batch, SeededRng& rng,
                           int threads = 1);

/// Eval-mode argmax with lowest-index tie break.
Prediction predict(const ModelParams& params, const ModelConfig& cfg,
                   const EncodedSample& sample);

std::vector<Prediction> predict_all(const ModelParams& params, const ModelConfig& cfg,
                                    std::span<const EncodedSample> samples, int threads = 1);

}  // namespace sentcorr
