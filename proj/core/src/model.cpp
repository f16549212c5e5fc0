#include "sentcorr/model.hpp"

#include <algorithm>
#include <cmath>

#include "sentcorr/error.hpp"
#include "parallel.hpp"

namespace sentcorr {

std::string_view model_kind_name(ModelKind kind) {
    return kind == ModelKind::cnn_lstm2 ? "cnn_lstm2" : "cnn_lstm2_stack";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "cnn_lstm2") return ModelKind::cnn_lstm2;
    if (name == "cnn_lstm2_stack") return ModelKind::cnn_lstm2_stack;
    throw usage_error("unknown model kind '" + name + "' (expected cnn_lstm2|cnn_lstm2_stack)");
}

void ModelConfig::validate() const {
    if (embed_dim < 1 || conv_out < 1 || lstm_hidden < 1) {
        throw usage_error("model dimensions must be positive");
    }
    if (window < 1 || window % 2 == 0) {
        throw usage_error("window must be odd and positive, got " + std::to_string(window));
    }
    if (stack_dim != lstm_hidden) {
        throw usage_error("stack_dim (" + std::to_string(stack_dim) +
                          ") must equal lstm_hidden (" + std::to_string(lstm_hidden) +
                          "): the stack path adds into the pooled vector");
    }
    if (num_classes != kNumLabels) {
        throw usage_error("num_classes is fixed at " + std::to_string(kNumLabels));
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw usage_error("dropout rate must be in [0, 1)");
    }
    if (seq_len < 1) throw usage_error("seq_len must be >= 1 (set it or let it derive from data)");
}

ModelParams ModelParams::zeros(ModelKind kind, const ModelConfig& cfg, std::size_t vocab_size) {
    if (vocab_size < 2) throw usage_error("vocabulary must contain the reserved tokens");
    const int v = static_cast<int>(vocab_size);
    const int d = cfg.embed_dim, c = cfg.conv_out, h = cfg.lstm_hidden, m = cfg.num_classes;
    ModelParams p;
    p.kind = kind;
    p.embedding = Tensor::zeros(v, d);
    p.conv.weight = Tensor::zeros(cfg.window * d, c);
    p.conv.bias = Tensor::zeros(c);
    p.lstm1.w_input = Tensor::zeros(c, 4 * h);
    p.lstm1.w_recur = Tensor::zeros(h, 4 * h);
    p.lstm1.bias = Tensor::zeros(4 * h);
    p.lstm2.w_input = Tensor::zeros(h, 4 * h);
    p.lstm2.w_recur = Tensor::zeros(h, 4 * h);
    p.lstm2.bias = Tensor::zeros(4 * h);
    if (kind == ModelKind::cnn_lstm2_stack) {
        p.stack.weight = Tensor::zeros(d, h);
        p.stack.bias = Tensor::zeros(h);
    }
    p.output.weight = Tensor::zeros(h, m);
    p.output.bias = Tensor::zeros(m);
    return p;
}

std::vector<NamedTensor> ModelParams::tensors() {
    std::vector<NamedTensor> out = {
        {"embedding", &embedding},
        {"conv.weight", &conv.weight},
        {"conv.bias", &conv.bias},
        {"lstm1.w_input", &lstm1.w_input},
        {"lstm1.w_recur", &lstm1.w_recur},
        {"lstm1.bias", &lstm1.bias},
        {"lstm2.w_input", &lstm2.w_input},
        {"lstm2.w_recur", &lstm2.w_recur},
        {"lstm2.bias", &lstm2.bias},
    };
    if (kind == ModelKind::cnn_lstm2_stack) {
        out.push_back({"stack.weight", &stack.weight});
        out.push_back({"stack.bias", &stack.bias});
    }
    out.push_back({"output.weight", &output.weight});
    out.push_back({"output.bias", &output.bias});
    return out;
}

std::vector<NamedTensor> ModelParams::tensors() const {
    return const_cast<ModelParams*>(this)->tensors();
}

void ModelParams::zero_all() {
    for (auto& nt : tensors()) nt.tensor->zero();
}

void ModelParams::add(const ModelParams& other) {
    auto mine = tensors();
    auto theirs = other.tensors();
    for (std::size_t k = 0; k < mine.size(); ++k) {
        Tensor& a = *mine[k].tensor;
        const Tensor& b = *theirs[k].tensor;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    }
}

bool ModelParams::all_finite() const {
    for (const auto& nt : tensors()) {
        if (!nt.tensor->all_finite()) return false;
    }
    return true;
}

ModelParams init_model(ModelKind kind, const ModelConfig& cfg, std::size_t vocab_size,
                       SeededRng& rng) {
    ModelParams p = ModelParams::zeros(kind, cfg, vocab_size);
    const int h = cfg.lstm_hidden;

    auto fill_uniform = [&rng](Tensor& t, double bound) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    };
    auto xavier = [&fill_uniform](Tensor& t) {
        fill_uniform(t, std::sqrt(6.0 / (t.rows() + t.cols())));
    };

    fill_uniform(p.embedding, 0.1);
    xavier(p.conv.weight);
    xavier(p.lstm1.w_input);
    xavier(p.lstm1.w_recur);
    xavier(p.lstm2.w_input);
    xavier(p.lstm2.w_recur);
    if (kind == ModelKind::cnn_lstm2_stack) xavier(p.stack.weight);
    xavier(p.output.weight);

    // Forget-gate bias starts at 1 so early training does not flush the cell.
    for (int k = 0; k < h; ++k) {
        p.lstm1.bias[static_cast<std::size_t>(h + k)] = 1.0;
        p.lstm2.bias[static_cast<std::size_t>(h + k)] = 1.0;
    }
    return p;
}

ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const EncodedSample& sample, bool training, SeededRng* rng) {
    if (sample.ids.size() != sample.mask.size() || sample.ids.empty()) {
        throw input_error("sample '" + sample.id + "': ids/mask length mismatch or empty");
    }
    ForwardTrace t;
    t.ids = sample.ids;
    t.mask = sample.mask;

    t.embeds = embedding_forward(params.embedding, sample.ids);
    t.windows = window_concat(t.embeds, params.embedding.row(kNoneId), cfg.window);
    t.conv_pre = conv_forward(params.conv, t.windows);
    t.conv_act = activation_forward(t.conv_pre, cfg.activation);
    t.lstm1 = lstm_forward(params.lstm1, t.conv_act);
    t.lstm2 = lstm_forward(params.lstm2, t.lstm1.hidden);

    if (training && cfg.dropout_rate > 0.0) {
        if (!rng) throw usage_error("training forward requires an rng for dropout");
        t.dropped = dropout_forward(t.lstm2.hidden, cfg.dropout_rate, true, *rng, t.dropout_scale);
    } else {
        t.dropped = t.lstm2.hidden;
        t.dropout_scale = Tensor();
    }

    const int n = static_cast<int>(sample.ids.size());
    int valid = 0;
    for (std::uint8_t m : sample.mask) valid += m;
    t.divisor = cfg.mean_by == MeanBy::padded ? static_cast<double>(n)
                                              : static_cast<double>(std::max(valid, 1));

    t.pooled = masked_mean(t.dropped, t.mask, t.divisor);
    if (params.kind == ModelKind::cnn_lstm2_stack) {
        t.stack_pre = linear_forward(params.stack, t.embeds);
        t.stack_act = sigmoid(t.stack_pre);
        const Tensor stack_pooled = masked_mean(t.stack_act, t.mask, t.divisor);
        for (std::size_t i = 0; i < t.pooled.size(); ++i) t.pooled[i] += stack_pooled[i];
    }

    t.logits = linear_forward(params.output, t.pooled);
    t.probs = softmax(t.logits);
    return t;
}

void backward(const ModelParams& params, const ModelConfig& cfg, const ForwardTrace& t,
              SentimentLabel gold, double scale, GradSet& grads) {
    const int n = static_cast<int>(t.ids.size());
    const int d = cfg.embed_dim, c = cfg.conv_out, h = cfg.lstm_hidden;

    Tensor d_logits = Tensor::zeros(cfg.num_classes);
    softmax_xent_backward(t.probs, label_index(gold), scale, d_logits);

    Tensor d_pooled = Tensor::zeros(h);
    linear_backward(params.output, t.pooled, d_logits, grads.output, d_pooled);

    Tensor d_embeds = Tensor::zeros(n, d);

    if (params.kind == ModelKind::cnn_lstm2_stack) {
        Tensor d_stack_act = Tensor::zeros(n, h);
        masked_mean_backward(d_pooled, t.mask, t.divisor, d_stack_act);
        Tensor d_stack_pre = Tensor::zeros(n, h);
        sigmoid_backward(t.stack_act, d_stack_act, d_stack_pre);
        linear_backward(params.stack, t.embeds, d_stack_pre, grads.stack, d_embeds);
    }

    Tensor d_dropped = Tensor::zeros(n, h);
    masked_mean_backward(d_pooled, t.mask, t.divisor, d_dropped);

    Tensor d_h4 = Tensor::zeros(n, h);
    dropout_backward(d_dropped, t.dropout_scale, d_h4);

    Tensor d_h3 = lstm_backward(params.lstm2, t.lstm1.hidden, t.lstm2, d_h4, grads.lstm2);
    Tensor d_conv_act = lstm_backward(params.lstm1, t.conv_act, t.lstm1, d_h3, grads.lstm1);

    Tensor d_conv_pre = Tensor::zeros(n, c);
    activation_backward(t.conv_pre, d_conv_act, cfg.activation, d_conv_pre);

    Tensor d_windows = Tensor::zeros(n, cfg.window * d);
    conv_backward(params.conv, t.windows, d_conv_pre, grads.conv, d_windows);

    Tensor d_none = Tensor::zeros(d);
    window_concat_backward(d_windows, cfg.window, d_embeds, d_none.flat());
    embedding_backward(d_embeds, t.ids, grads.embedding);
    {
        auto none_row = grads.embedding.row(kNoneId);
        for (int j = 0; j < d; ++j) none_row[static_cast<std::size_t>(j)] += d_none[static_cast<std::size_t>(j)];
    }
}

BatchResult loss_and_grads(const ModelParams& params, const ModelConfig& cfg,
                           std::span<const EncodedSample> batch, SeededRng& rng, int threads) {
    if (batch.empty()) throw usage_error("loss_and_grads: empty batch");
    const std::size_t b = batch.size();
    const double scale = 1.0 / static_cast<double>(b);

    // Per-sample dropout streams, forked in batch order so the draw sequence
    // is independent of scheduling.
    std::vector<std::uint64_t> seeds(b);
    for (auto& s : seeds) s = rng.next_u64();

    BatchResult result;
    result.grads = ModelParams::zeros(params.kind, cfg, params.vocab_size());

    const std::size_t wave =
        std::max<std::size_t>(1, std::min<std::size_t>(b, threads <= 0 ? 16 : static_cast<std::size_t>(threads)));
    std::vector<GradSet> scratch;
    scratch.reserve(wave);
    for (std::size_t i = 0; i < wave; ++i) {
        scratch.push_back(ModelParams::zeros(params.kind, cfg, params.vocab_size()));
    }
    std::vector<double> losses(b, 0.0);
    std::vector<std::uint8_t> clamps(b, 0);

    for (std::size_t start = 0; start < b; start += wave) {
        const std::size_t count = std::min(wave, b - start);
        detail::parallel_for(count, threads, [&](std::size_t j) {
            const std::size_t s = start + j;
            scratch[j].zero_all();
            SeededRng sample_rng(seeds[s]);
            ForwardTrace trace = forward(params, cfg, batch[s], true, &sample_rng);
            bool clamped = false;
            losses[s] = cross_entropy(trace.probs, label_index(batch[s].label), &clamped);
            clamps[s] = clamped ? 1 : 0;
            backward(params, cfg, trace, batch[s].label, scale, scratch[j]);
        });
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t s = start + j;
            if (!std::isfinite(losses[s])) {
                throw numeric_error("non-finite loss at sample '" + batch[s].id + "'");
            }
            result.grads.add(scratch[j]);
        }
    }

    double total = 0.0;
    for (double l : losses) total += l;
    result.loss = total * scale;
    for (std::uint8_t c : clamps) result.clamped += c;
    return result;
}

Prediction predict(const ModelParams& params, const ModelConfig& cfg,
                   const EncodedSample& sample) {
    const ForwardTrace trace = forward(params, cfg, sample, false, nullptr);
    Prediction pred;
    int best = 0;
    for (int i = 0; i < kNumLabels; ++i) {
        pred.probs[static_cast<std::size_t>(i)] = trace.probs[static_cast<std::size_t>(i)];
        if (trace.probs[static_cast<std::size_t>(i)] > pred.probs[static_cast<std::size_t>(best)]) best = i;
    }
    pred.label = static_cast<SentimentLabel>(best);
    return pred;
}

std::vector<Prediction> predict_all(const ModelParams& params, const ModelConfig& cfg,
                                    std::span<const EncodedSample> samples, int threads) {
    std::vector<Prediction> out(samples.size());
    detail::parallel_for(samples.size(), threads,
                         [&](std::size_t i) { out[i] = predict(params, cfg, samples[i]); });
    return out;
}

}  // namespace sentcorr
