#include "sentcorr/gradcheck_suite.hpp"

#include <chrono>
#include <cmath>

#include "sentcorr/gradcheck.hpp"
#include "sentcorr/model.hpp"

namespace sentcorr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Tensor random_tensor(std::vector<int> shape, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Weighted-sum loss turns any tensor-valued layer into a scalar target.
double weighted_sum(const Tensor& out, const Tensor& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
    return s;
}

GradCheckCase run_case(const std::string& name, double threshold,
                       std::vector<NamedTensor> params, std::vector<NamedTensor> analytic,
                       const std::function<double()>& loss, double eps = 1e-5) {
    const auto start = Clock::now();
    const GradCheckResult r = grad_check(params, analytic, loss, eps);
    GradCheckCase c;
    c.name = name;
    c.max_rel_err = r.max_rel_err;
    c.threshold = threshold;
    c.seconds = seconds_since(start);
    return c;
}

GradCheckCase check_linear_softmax() {
    SeededRng rng(101);
    LinearParams p{random_tensor({4, 6}, rng), random_tensor({6}, rng)};
    const Tensor x = random_tensor({4}, rng);
    const int gold = 2;

    auto loss = [&]() { return cross_entropy(softmax(linear_forward(p, x)), gold); };

    LinearParams g{Tensor::zeros(4, 6), Tensor::zeros(6)};
    const Tensor logits = linear_forward(p, x);
    const Tensor probs = softmax(logits);
    Tensor d_logits = Tensor::zeros(6);
    softmax_xent_backward(probs, gold, 1.0, d_logits);
    Tensor d_x = Tensor::zeros(4);
    linear_backward(p, x, d_logits, g, d_x);

    return run_case("linear_softmax_toy", 1e-8,
                    {{"weight", &p.weight}, {"bias", &p.bias}},
                    {{"weight", &g.weight}, {"bias", &g.bias}}, loss);
}

GradCheckCase check_embedding() {
    SeededRng rng(102);
    Tensor table = random_tensor({5, 3}, rng);
    const std::vector<int> ids = {2, 0, 2, 4};  // repeated id exercises the scatter-add
    const Tensor w = random_tensor({4, 3}, rng);

    auto loss = [&]() { return weighted_sum(embedding_forward(table, ids), w); };

    Tensor g = Tensor::zeros(5, 3);
    embedding_backward(w, ids, g);

    return run_case("embedding", 1e-6, {{"table", &table}}, {{"table", &g}}, loss);
}

GradCheckCase check_window_concat() {
    SeededRng rng(103);
    Tensor table = random_tensor({4, 2}, rng);
    const std::vector<int> ids = {2, 3, 1};
    const int window = 5;
    const Tensor w = random_tensor({3, 10}, rng);

    auto loss = [&]() {
        const Tensor embeds = embedding_forward(table, ids);
        return weighted_sum(window_concat(embeds, table.row(0), window), w);
    };

    Tensor g = Tensor::zeros(4, 2);
    {
        const Tensor embeds = embedding_forward(table, ids);
        Tensor d_embeds = Tensor::zeros(3, 2);
        Tensor d_none = Tensor::zeros(2);
        window_concat_backward(w, window, d_embeds, d_none.flat());
        embedding_backward(d_embeds, ids, g);
        for (int j = 0; j < 2; ++j) g.at(0, j) += d_none[static_cast<std::size_t>(j)];
    }

    return run_case("window_concat_none", 1e-6, {{"table", &table}}, {{"table", &g}}, loss);
}

GradCheckCase check_conv() {
    SeededRng rng(104);
    ConvParams p{random_tensor({10, 4}, rng), random_tensor({4}, rng)};
    const Tensor windows = random_tensor({3, 10}, rng);
    const Tensor w = random_tensor({3, 4}, rng);

    auto loss = [&]() { return weighted_sum(conv_forward(p, windows), w); };

    ConvParams g{Tensor::zeros(10, 4), Tensor::zeros(4)};
    Tensor d_windows = Tensor::zeros(3, 10);
    conv_backward(p, windows, w, g, d_windows);

    return run_case("conv", 1e-6, {{"weight", &p.weight}, {"bias", &p.bias}},
                    {{"weight", &g.weight}, {"bias", &g.bias}}, loss);
}

GradCheckCase check_activation(Activation act, const std::string& name) {
    SeededRng rng(105);
    // Keep entries away from zero: the ReLU kink has no classical derivative.
    Tensor x(std::vector<int>{3, 4});
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = rng.uniform(0.1, 1.0);
        x[i] = rng.bernoulli(0.5) ? v : -v;
    }
    const Tensor w = random_tensor({3, 4}, rng);

    auto loss = [&]() { return weighted_sum(activation_forward(x, act), w); };

    Tensor g = Tensor::zeros(3, 4);
    activation_backward(x, w, act, g);

    return run_case(name, 1e-6, {{"x", &x}}, {{"x", &g}}, loss);
}

GradCheckCase check_masked_mean() {
    SeededRng rng(106);
    Tensor h = random_tensor({4, 3}, rng);
    const std::vector<std::uint8_t> mask = {1, 1, 0, 1};
    const double divisor = 4.0;
    const Tensor w = random_tensor({3}, rng);

    auto loss = [&]() { return weighted_sum(masked_mean(h, mask, divisor), w); };

    Tensor g = Tensor::zeros(4, 3);
    masked_mean_backward(w, mask, divisor, g);

    return run_case("masked_mean", 1e-6, {{"h", &h}}, {{"h", &g}}, loss);
}

GradCheckCase check_sigmoid() {
    SeededRng rng(107);
    Tensor x = random_tensor({8}, rng, -2.0, 2.0);
    const Tensor w = random_tensor({8}, rng);

    auto loss = [&]() { return weighted_sum(sigmoid(x), w); };

    Tensor g = Tensor::zeros(8);
    const Tensor y = sigmoid(x);
    sigmoid_backward(y, w, g);

    return run_case("sigmoid", 1e-6, {{"x", &x}}, {{"x", &g}}, loss);
}

GradCheckCase check_lstm_bptt() {
    SeededRng rng(108);
    const int in = 3, h = 4, n = 3;
    LstmParams p{random_tensor({in, 4 * h}, rng, -0.5, 0.5),
                 random_tensor({h, 4 * h}, rng, -0.5, 0.5), random_tensor({4 * h}, rng, -0.5, 0.5)};
    const Tensor seq = random_tensor({n, in}, rng);
    const Tensor w = random_tensor({n, h}, rng);

    auto loss = [&]() { return weighted_sum(lstm_forward(p, seq).hidden, w); };

    LstmParams g{Tensor::zeros(in, 4 * h), Tensor::zeros(h, 4 * h), Tensor::zeros(4 * h)};
    {
        const LstmTrace t = lstm_forward(p, seq);
        lstm_backward(p, seq, t, w, g);
    }

    return run_case("lstm_bptt", 1e-5,
                    {{"w_input", &p.w_input}, {"w_recur", &p.w_recur}, {"bias", &p.bias}},
                    {{"w_input", &g.w_input}, {"w_recur", &g.w_recur}, {"bias", &g.bias}}, loss);
}

GradCheckCase check_full_model(ModelKind kind, const std::string& name) {
    ModelConfig cfg;
    cfg.embed_dim = 4;
    cfg.conv_out = 4;
    cfg.lstm_hidden = 5;
    cfg.stack_dim = 5;
    cfg.window = 5;
    cfg.dropout_rate = 0.0;
    cfg.seq_len = 7;
    cfg.validate();
    const std::size_t vocab_size = 20;

    SeededRng rng(109);
    ModelParams params = init_model(kind, cfg, vocab_size, rng);

    EncodedSample sample;
    sample.id = "gradcheck";
    sample.ids = {3, 17, 5, 9, 12, 0, 0};
    sample.mask = {1, 1, 1, 1, 1, 0, 0};
    sample.label = SentimentLabel::sadness;

    auto loss = [&]() {
        const ForwardTrace t = forward(params, cfg, sample, false, nullptr);
        return cross_entropy(t.probs, label_index(sample.label));
    };

    GradSet grads = ModelParams::zeros(kind, cfg, vocab_size);
    {
        const ForwardTrace t = forward(params, cfg, sample, false, nullptr);
        backward(params, cfg, t, sample.label, 1.0, grads);
    }

    return run_case(name, 1e-4, params.tensors(), grads.tensors(), loss);
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite() {
    std::vector<GradCheckCase> cases;
    cases.push_back(check_linear_softmax());
    cases.push_back(check_embedding());
    cases.push_back(check_window_concat());
    cases.push_back(check_conv());
    cases.push_back(check_activation(Activation::relu, "activation_relu"));
    cases.push_back(check_activation(Activation::softplus, "activation_softplus"));
    cases.push_back(check_masked_mean());
    cases.push_back(check_sigmoid());
    cases.push_back(check_lstm_bptt());
    cases.push_back(check_full_model(ModelKind::cnn_lstm2, "cnn_lstm2_full"));
    cases.push_back(check_full_model(ModelKind::cnn_lstm2_stack, "cnn_lstm2_stack_full"));
    return cases;
}

}  // namespace sentcorr
