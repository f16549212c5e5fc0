#include "sentcorr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "sentcorr/error.hpp"

namespace sentcorr {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw numeric_error("shape mismatch: " + what);
}

}  // namespace

// --------------------------------------------------------------------------
// gemm kernels
// --------------------------------------------------------------------------

void gemm_nn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
            "gemm_nn " + a.shape_str() + " * " + b.shape_str() + " -> " + c.shape_str());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
            "gemm_tn " + a.shape_str() + "^T * " + b.shape_str() + " -> " + c.shape_str());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        const double* bi = b.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            double* cp = c.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) cp[j] += av * bi[j];
        }
    }
}

void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    require(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
            "gemm_nt " + a.shape_str() + " * " + b.shape_str() + "^T -> " + c.shape_str());
    const int m = a.rows(), n = a.cols(), k = b.rows();
    for (int i = 0; i < m; ++i) {
        const double* ai = a.data() + static_cast<std::size_t>(i) * n;
        double* ci = c.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += ai[j] * bp[j];
            ci[p] += s;
        }
    }
}

// --------------------------------------------------------------------------
// embedding
// --------------------------------------------------------------------------

Tensor embedding_forward(const Tensor& table, std::span<const int> ids) {
    const int v = table.rows(), d = table.cols();
    Tensor out(std::vector<int>{static_cast<int>(ids.size()), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (id < 0 || id >= v) {
            throw input_error("embedding id " + std::to_string(id) + " out of range [0, " +
                              std::to_string(v) + ")");
        }
        std::memcpy(out.row(static_cast<int>(i)).data(), table.row(id).data(),
                    sizeof(double) * static_cast<std::size_t>(d));
    }
    return out;
}

void embedding_backward(const Tensor& d_embeds, std::span<const int> ids, Tensor& d_table) {
    require(d_embeds.cols() == d_table.cols() &&
                d_embeds.rows() == static_cast<int>(ids.size()),
            "embedding_backward");
    const int d = d_table.cols();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double* dst = d_table.row(ids[i]).data();
        const double* src = d_embeds.row(static_cast<int>(i)).data();
        for (int j = 0; j < d; ++j) dst[j] += src[j];
    }
}

// --------------------------------------------------------------------------
// window concatenation
// --------------------------------------------------------------------------

Tensor window_concat(const Tensor& embeds, std::span<const double> none_row, int window) {
    const int n = embeds.rows(), d = embeds.cols();
    require(static_cast<int>(none_row.size()) == d, "window_concat none row");
    if (window < 1 || window % 2 == 0) throw usage_error("window size must be odd and positive");
    const int half = window / 2;
    Tensor out(std::vector<int>{n, window * d});
    for (int i = 0; i < n; ++i) {
        double* dst = out.row(i).data();
        for (int s = 0; s < window; ++s) {
            const int src = i + s - half;
            const double* from =
                (src >= 0 && src < n) ? embeds.row(src).data() : none_row.data();
            std::memcpy(dst + static_cast<std::size_t>(s) * d, from,
                        sizeof(double) * static_cast<std::size_t>(d));
        }
    }
    return out;
}

void window_concat_backward(const Tensor& d_windows, int window, Tensor& d_embeds,
                            std::span<double> d_none_row) {
    const int n = d_embeds.rows(), d = d_embeds.cols();
    require(d_windows.rows() == n && d_windows.cols() == window * d &&
                static_cast<int>(d_none_row.size()) == d,
            "window_concat_backward");
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        const double* src = d_windows.row(i).data();
        for (int s = 0; s < window; ++s) {
            const int pos = i + s - half;
            double* dst =
                (pos >= 0 && pos < n) ? d_embeds.row(pos).data() : d_none_row.data();
            const double* slot = src + static_cast<std::size_t>(s) * d;
            for (int j = 0; j < d; ++j) dst[j] += slot[j];
        }
    }
}

// --------------------------------------------------------------------------
// convolution (per-window affine map, shared weights)
// --------------------------------------------------------------------------

Tensor conv_forward(const ConvParams& p, const Tensor& windows) {
    require(windows.cols() == p.weight.rows(), "conv_forward input " + windows.shape_str() +
                                                   " vs weight " + p.weight.shape_str());
    const int n = windows.rows(), c = p.weight.cols();
    Tensor out(std::vector<int>{n, c});
    for (int i = 0; i < n; ++i) {
        std::memcpy(out.row(i).data(), p.bias.data(), sizeof(double) * static_cast<std::size_t>(c));
    }
    gemm_nn_acc(windows, p.weight, out);
    return out;
}

void conv_backward(const ConvParams& p, const Tensor& windows, const Tensor& d_out,
                   ConvParams& grad, Tensor& d_windows) {
    gemm_tn_acc(windows, d_out, grad.weight);
    const int n = d_out.rows(), c = d_out.cols();
    for (int i = 0; i < n; ++i) {
        const double* src = d_out.row(i).data();
        for (int j = 0; j < c; ++j) grad.bias[static_cast<std::size_t>(j)] += src[j];
    }
    gemm_nt_acc(d_out, p.weight, d_windows);
}

// --------------------------------------------------------------------------
// activations
// --------------------------------------------------------------------------

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::like(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor softplus(const Tensor& x) {
    Tensor out = Tensor::like(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        out[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    return out;
}

Tensor activation_forward(const Tensor& x, Activation act) {
    return act == Activation::relu ? relu(x) : softplus(x);
}

void activation_backward(const Tensor& x_pre, const Tensor& d_out, Activation act, Tensor& d_x) {
    require(x_pre.same_shape(d_out) && x_pre.same_shape(d_x), "activation_backward");
    if (act == Activation::relu) {
        for (std::size_t i = 0; i < x_pre.size(); ++i) {
            if (x_pre[i] > 0.0) d_x[i] += d_out[i];
        }
    } else {
        for (std::size_t i = 0; i < x_pre.size(); ++i) {
            d_x[i] += d_out[i] * sigmoid_scalar(x_pre[i]);
        }
    }
}

// --------------------------------------------------------------------------
// LSTM
// --------------------------------------------------------------------------

LstmTrace lstm_forward(const LstmParams& p, const Tensor& seq) {
    const int n = seq.rows();
    const int in = p.w_input.rows();
    const int h4 = p.w_input.cols();
    const int h = h4 / 4;
    require(seq.cols() == in && p.w_recur.rows() == h && p.w_recur.cols() == h4 &&
                static_cast<int>(p.bias.size()) == h4,
            "lstm_forward params");

    LstmTrace t;
    t.gates = Tensor(std::vector<int>{n, h4});
    t.cell = Tensor(std::vector<int>{n, h});
    t.cell_tanh = Tensor(std::vector<int>{n, h});
    t.hidden = Tensor(std::vector<int>{n, h});

    // Input contribution for all steps at once, then the recurrence.
    for (int i = 0; i < n; ++i) {
        std::memcpy(t.gates.row(i).data(), p.bias.flat().data(),
                    sizeof(double) * static_cast<std::size_t>(h4));
    }
    gemm_nn_acc(seq, p.w_input, t.gates);

    for (int i = 0; i < n; ++i) {
        double* g = t.gates.row(i).data();
        if (i > 0) {
            const double* hp = t.hidden.row(i - 1).data();
            for (int k = 0; k < h; ++k) {
                const double hv = hp[k];
                if (hv == 0.0) continue;
                const double* wr = p.w_recur.row(k).data();
                for (int j = 0; j < h4; ++j) g[j] += hv * wr[j];
            }
        }
        double* cell = t.cell.row(i).data();
        double* ct = t.cell_tanh.row(i).data();
        double* hid = t.hidden.row(i).data();
        const double* cp = i > 0 ? t.cell.row(i - 1).data() : nullptr;
        for (int k = 0; k < h; ++k) {
            const double gi = sigmoid_scalar(g[k]);
            const double gf = sigmoid_scalar(g[h + k]);
            const double gg = std::tanh(g[2 * h + k]);
            const double go = sigmoid_scalar(g[3 * h + k]);
            g[k] = gi;
            g[h + k] = gf;
            g[2 * h + k] = gg;
            g[3 * h + k] = go;
            const double c = (cp ? gf * cp[k] : 0.0) + gi * gg;
            cell[k] = c;
            ct[k] = std::tanh(c);
            hid[k] = go * ct[k];
        }
    }
    return t;
}

Tensor lstm_backward(const LstmParams& p, const Tensor& seq, const LstmTrace& trace,
                     const Tensor& d_hidden, LstmParams& grad) {
    const int n = seq.rows();
    const int h4 = p.w_input.cols();
    const int h = h4 / 4;
    require(d_hidden.rows() == n && d_hidden.cols() == h, "lstm_backward d_hidden");

    Tensor d_gates(std::vector<int>{n, h4});  // pre-activation gate grads
    std::vector<double> dh_next(static_cast<std::size_t>(h), 0.0);
    std::vector<double> dc_next(static_cast<std::size_t>(h), 0.0);

    for (int i = n - 1; i >= 0; --i) {
        const double* g = trace.gates.row(i).data();
        const double* ct = trace.cell_tanh.row(i).data();
        const double* cprev = i > 0 ? trace.cell.row(i - 1).data() : nullptr;
        const double* dh_up = d_hidden.row(i).data();
        double* dg = d_gates.row(i).data();

        for (int k = 0; k < h; ++k) {
            const double gi = g[k], gf = g[h + k], gg = g[2 * h + k], go = g[3 * h + k];
            const double dh = dh_up[k] + dh_next[k];
            const double d_o = dh * ct[k];
            double dc = dh * go * (1.0 - ct[k] * ct[k]) + dc_next[k];
            const double d_i = dc * gg;
            const double d_g = dc * gi;
            const double d_f = cprev ? dc * cprev[k] : 0.0;
            dc_next[k] = dc * gf;
            dg[k] = d_i * gi * (1.0 - gi);
            dg[h + k] = d_f * gf * (1.0 - gf);
            dg[2 * h + k] = d_g * (1.0 - gg * gg);
            dg[3 * h + k] = d_o * go * (1.0 - go);
        }
        // Recurrent flow into step i-1.
        if (i > 0) {
            for (int k = 0; k < h; ++k) {
                const double* wr = p.w_recur.row(k).data();
                double s = 0.0;
                for (int j = 0; j < h4; ++j) s += wr[j] * dg[j];
                dh_next[k] = s;
            }
        }
    }

    for (int i = 0; i < n; ++i) {
        const double* dg = d_gates.row(i).data();
        for (int j = 0; j < h4; ++j) grad.bias[static_cast<std::size_t>(j)] += dg[j];
    }
    gemm_tn_acc(seq, d_gates, grad.w_input);

    // Previous-hidden sequence: row i holds hidden(i-1), zeros at i = 0.
    Tensor h_prev(std::vector<int>{n, h});
    for (int i = 1; i < n; ++i) {
        std::memcpy(h_prev.row(i).data(), trace.hidden.row(i - 1).data(),
                    sizeof(double) * static_cast<std::size_t>(h));
    }
    gemm_tn_acc(h_prev, d_gates, grad.w_recur);

    Tensor d_seq(std::vector<int>{n, seq.cols()});
    gemm_nt_acc(d_gates, p.w_input, d_seq);
    return d_seq;
}

// --------------------------------------------------------------------------
// dropout
// --------------------------------------------------------------------------

Tensor dropout_forward(const Tensor& x, double rate, bool training, SeededRng& rng,
                       Tensor& scale_out) {
    if (rate < 0.0 || rate >= 1.0) {
        throw usage_error("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) {
        scale_out = Tensor();
        return x;
    }
    const double keep = 1.0 - rate;
    const double boost = 1.0 / keep;
    scale_out = Tensor::like(x);
    Tensor out = Tensor::like(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = rng.next_double() < rate ? 0.0 : boost;
        scale_out[i] = s;
        out[i] = x[i] * s;
    }
    return out;
}

void dropout_backward(const Tensor& d_out, const Tensor& scale, Tensor& d_x) {
    if (scale.empty()) {
        for (std::size_t i = 0; i < d_out.size(); ++i) d_x[i] += d_out[i];
        return;
    }
    require(d_out.same_shape(scale) && d_out.same_shape(d_x), "dropout_backward");
    for (std::size_t i = 0; i < d_out.size(); ++i) d_x[i] += d_out[i] * scale[i];
}

// --------------------------------------------------------------------------
// masked mean pooling
// --------------------------------------------------------------------------

Tensor masked_mean(const Tensor& h, std::span<const std::uint8_t> mask, double divisor) {
    const int n = h.rows(), w = h.cols();
    require(static_cast<int>(mask.size()) == n, "masked_mean mask length");
    Tensor out(std::vector<int>{w});
    const double inv = 1.0 / divisor;
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        const double* src = h.row(i).data();
        for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(j)] += src[j];
    }
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(j)] *= inv;
    return out;
}

void masked_mean_backward(const Tensor& d_pooled, std::span<const std::uint8_t> mask,
                          double divisor, Tensor& d_h) {
    const int n = d_h.rows(), w = d_h.cols();
    require(static_cast<int>(d_pooled.size()) == w && static_cast<int>(mask.size()) == n,
            "masked_mean_backward");
    const double inv = 1.0 / divisor;
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        double* dst = d_h.row(i).data();
        for (int j = 0; j < w; ++j) dst[j] += d_pooled[static_cast<std::size_t>(j)] * inv;
    }
}

// --------------------------------------------------------------------------
// linear
// --------------------------------------------------------------------------

Tensor linear_forward(const LinearParams& p, const Tensor& x) {
    const int in = p.weight.rows(), out_dim = p.weight.cols();
    if (x.rank() == 1) {
        require(static_cast<int>(x.size()) == in, "linear_forward input " + x.shape_str() +
                                                      " vs weight " + p.weight.shape_str());
        Tensor out(std::vector<int>{out_dim});
        for (int j = 0; j < out_dim; ++j) out[static_cast<std::size_t>(j)] = p.bias[static_cast<std::size_t>(j)];
        for (int k = 0; k < in; ++k) {
            const double xv = x[static_cast<std::size_t>(k)];
            if (xv == 0.0) continue;
            const double* wk = p.weight.row(k).data();
            for (int j = 0; j < out_dim; ++j) out[static_cast<std::size_t>(j)] += xv * wk[j];
        }
        return out;
    }
    require(x.cols() == in, "linear_forward batch input");
    Tensor out(std::vector<int>{x.rows(), out_dim});
    for (int i = 0; i < x.rows(); ++i) {
        std::memcpy(out.row(i).data(), p.bias.flat().data(),
                    sizeof(double) * static_cast<std::size_t>(out_dim));
    }
    gemm_nn_acc(x, p.weight, out);
    return out;
}

void linear_backward(const LinearParams& p, const Tensor& x, const Tensor& d_out,
                     LinearParams& grad, Tensor& d_x) {
    const int in = p.weight.rows(), out_dim = p.weight.cols();
    if (x.rank() == 1) {
        require(static_cast<int>(d_out.size()) == out_dim && static_cast<int>(d_x.size()) == in,
                "linear_backward vector");
        for (int j = 0; j < out_dim; ++j) grad.bias[static_cast<std::size_t>(j)] += d_out[static_cast<std::size_t>(j)];
        for (int k = 0; k < in; ++k) {
            const double xv = x[static_cast<std::size_t>(k)];
            double* gw = grad.weight.row(k).data();
            const double* wk = p.weight.row(k).data();
            double s = 0.0;
            for (int j = 0; j < out_dim; ++j) {
                const double dj = d_out[static_cast<std::size_t>(j)];
                gw[j] += xv * dj;
                s += wk[j] * dj;
            }
            d_x[static_cast<std::size_t>(k)] += s;
        }
        return;
    }
    gemm_tn_acc(x, d_out, grad.weight);
    for (int i = 0; i < d_out.rows(); ++i) {
        const double* src = d_out.row(i).data();
        for (int j = 0; j < out_dim; ++j) grad.bias[static_cast<std::size_t>(j)] += src[j];
    }
    gemm_nt_acc(d_out, p.weight, d_x);
}

// --------------------------------------------------------------------------
// sigmoid / softmax / cross entropy
// --------------------------------------------------------------------------

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    Tensor out = Tensor::like(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid_scalar(x[i]);
    return out;
}

void sigmoid_backward(const Tensor& y, const Tensor& d_out, Tensor& d_x) {
    require(y.same_shape(d_out) && y.same_shape(d_x), "sigmoid_backward");
    for (std::size_t i = 0; i < y.size(); ++i) d_x[i] += d_out[i] * y[i] * (1.0 - y[i]);
}

Tensor softmax(const Tensor& logits) {
    require(logits.rank() == 1 && logits.size() >= 1, "softmax expects a non-empty vector");
    Tensor out = Tensor::like(logits);
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] *= inv;
    return out;
}

double cross_entropy(const Tensor& probs, int gold, bool* clamped) {
    if (gold < 0 || gold >= static_cast<int>(probs.size())) {
        throw input_error("cross_entropy gold index " + std::to_string(gold) + " out of range");
    }
    double p = probs[static_cast<std::size_t>(gold)];
    if (p < 1e-12) {
        p = 1e-12;
        if (clamped) *clamped = true;
    }
    return -std::log(p);
}

void softmax_xent_backward(const Tensor& probs, int gold, double scale, Tensor& d_logits) {
    require(probs.same_shape(d_logits), "softmax_xent_backward");
    for (std::size_t i = 0; i < probs.size(); ++i) d_logits[i] += probs[i] * scale;
    d_logits[static_cast<std::size_t>(gold)] -= scale;
}

}  // namespace sentcorr
