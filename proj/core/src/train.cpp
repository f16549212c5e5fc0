#include "sentcorr/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentcorr/error.hpp"
#include "parallel.hpp"

namespace sentcorr {

void TrainConfig::validate() const {
    if (epochs < 1) throw usage_error("epochs must be >= 1");
    if (batch_size < 1) throw usage_error("batch_size must be >= 1");
    if (eval_every < 1) throw usage_error("eval_every must be >= 1");
    if (patience < 0) throw usage_error("patience must be >= 0");
    if (stop_train_acc < 0.0 || stop_train_acc > 1.0) {
        throw usage_error("stop_train_acc must be in [0, 1]");
    }
    if (adam.lr <= 0.0) throw usage_error("learning rate must be positive");
}

CountMatrix confusion_counts(std::span<const EncodedSample> samples,
                             std::span<const Prediction> preds) {
    CountMatrix counts{};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t a = static_cast<std::size_t>(label_index(preds[i].label));
        const std::size_t b = static_cast<std::size_t>(label_index(samples[i].label));
        ++counts[a][b];
    }
    return counts;
}

MetricsRecord evaluate(const ModelParams& params, const ModelConfig& cfg,
                       std::span<const EncodedSample> samples, int epoch,
                       const std::string& split, int threads) {
    if (samples.empty()) throw usage_error("evaluate: empty sample set");
    std::vector<Prediction> preds(samples.size());
    std::vector<double> losses(samples.size());
    detail::parallel_for(samples.size(), threads, [&](std::size_t i) {
        preds[i] = predict(params, cfg, samples[i]);
        const double p = preds[i].probs[static_cast<std::size_t>(label_index(samples[i].label))];
        losses[i] = -std::log(std::max(p, 1e-12));
    });
    double total = 0.0;
    for (double l : losses) total += l;
    const CountMatrix counts = confusion_counts(samples, preds);
    return metrics_from_counts(counts, total / static_cast<double>(samples.size()), epoch, split);
}

TrainResult train(const TrainConfig& tc, const ModelConfig& mc, ModelKind kind,
                  std::size_t vocab_size, std::span<const EncodedSample> train_set,
                  std::span<const EncodedSample> test_set) {
    tc.validate();
    mc.validate();
    if (train_set.empty()) throw input_error("train: empty training split");

    SeededRng rng(tc.seed);
    TrainResult result;
    result.params = init_model(kind, mc, vocab_size, rng);
    AdamState adam = AdamState::init_like(result.params.tensors());

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_loss = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        if (tc.shuffle) rng.shuffle(order);

        std::vector<EncodedSample> batch;
        batch.reserve(static_cast<std::size_t>(tc.batch_size));
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(tc.batch_size)) {
            batch.clear();
            const std::size_t end =
                std::min(order.size(), pos + static_cast<std::size_t>(tc.batch_size));
            for (std::size_t i = pos; i < end; ++i) batch.push_back(train_set[order[i]]);

            BatchResult br;
            try {
                br = loss_and_grads(result.params, mc, batch, rng, tc.threads);
            } catch (const Error& e) {
                if (e.status() == ExitStatus::numerical) {
                    result.diverged = true;
                    result.divergence_message = e.what();
                    result.epochs_run = epoch - 1;
                    return result;
                }
                throw;
            }
            result.clamp_warnings += br.clamped;
            auto grads = br.grads.tensors();
            try {
                adam_step(result.params.tensors(), grads, adam, tc.adam);
            } catch (const Error& e) {
                if (e.status() == ExitStatus::numerical) {
                    result.diverged = true;
                    result.divergence_message = e.what();
                    result.epochs_run = epoch - 1;
                    return result;
                }
                throw;
            }
        }

        const MetricsRecord train_rec =
            evaluate(result.params, mc, train_set, epoch, "train", tc.threads);
        result.history.push_back(train_rec);
        if (!test_set.empty() && epoch % tc.eval_every == 0) {
            result.history.push_back(evaluate(result.params, mc, test_set, epoch, "test", tc.threads));
        }
        result.epochs_run = epoch;

        if (tc.stop_train_acc > 0.0 && train_rec.accuracy >= tc.stop_train_acc) break;
        if (tc.patience > 0) {
            if (train_rec.loss < best_loss) {
                best_loss = train_rec.loss;
                epochs_since_best = 0;
            } else if (++epochs_since_best >= tc.patience) {
                break;
            }
        }
    }
    return result;
}

}  // namespace sentcorr
