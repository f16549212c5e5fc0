#pragma once

#include <cstdint>
#include <span>

#include "sentcorr/rng.hpp"
#include "sentcorr/tensor.hpp"

namespace sentcorr {

enum class Activation { relu, softplus };

struct ConvParams {
    Tensor weight;  // (window*d) x c
    Tensor bias;    // c
};

// Gate blocks along the 4H axis are ordered (input, forget, candidate,
// output). Checkpoints depend on this order; do not change it.
struct LstmParams {
    Tensor w_input;  // in x 4H
    Tensor w_recur;  // H x 4H
    Tensor bias;     // 4H
};

struct LinearParams {
    Tensor weight;  // in x out
    Tensor bias;    // out
};

/// Per-sequence cache kept by lstm_forward so lstm_backward can run BPTT.
struct LstmTrace {
    Tensor gates;      // N x 4H, post-activation, blocks [i|f|g|o]
    Tensor cell;       // N x H
    Tensor cell_tanh;  // N x H
    Tensor hidden;     // N x H
};

// --------------------------------------------------------------------------
// Dense kernels. Row-major, accumulate into c.
// --------------------------------------------------------------------------

void gemm_nn_acc(const Tensor& a, const Tensor& b, Tensor& c);  // c += a * b
void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);  // c += a^T * b
void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);  // c += a * b^T

// --------------------------------------------------------------------------
// Layer forward/backward pairs. Backward functions accumulate into their
// gradient outputs so per-sample contributions can be summed in place.
// --------------------------------------------------------------------------

/// Row i of the result is table row ids[i].
Tensor embedding_forward(const Tensor& table, std::span<const int> ids);

/// Scatter-add: repeated ids accumulate into the same table row.
void embedding_backward(const Tensor& d_embeds, std::span<const int> ids, Tensor& d_table);

/// Row i is the concatenation of embeds[i-w/2 .. i+w/2]; out-of-range slots
/// read none_row (the embedding of the reserved padding token).
Tensor window_concat(const Tensor& embeds, std::span<const double> none_row, int window);

void window_concat_backward(const Tensor& d_windows, int window, Tensor& d_embeds,
                            std::span<double> d_none_row);

/// Per-window affine map with shared weights: out.row(i) = weight^T * windows.row(i) + bias.
Tensor conv_forward(const ConvParams& p, const Tensor& windows);

void conv_backward(const ConvParams& p, const Tensor& windows, const Tensor& d_out,
                   ConvParams& grad, Tensor& d_windows);

Tensor relu(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor activation_forward(const Tensor& x, Activation act);

/// d_x += d_out * act'(x_pre). ReLU uses subgradient 0 at x == 0.
void activation_backward(const Tensor& x_pre, const Tensor& d_out, Activation act, Tensor& d_x);

/// Standard LSTM over the full sequence, zero initial hidden and cell state.
LstmTrace lstm_forward(const LstmParams& p, const Tensor& seq);

/// Full backpropagation through time. d_hidden holds dL/dh_t for every step.
/// Returns dL/dseq; parameter gradients accumulate into grad.
Tensor lstm_backward(const LstmParams& p, const Tensor& seq, const LstmTrace& trace,
                     const Tensor& d_hidden, LstmParams& grad);

/// Inverted dropout: each element is zeroed with probability rate and the
/// survivors are scaled by 1/(1-rate). Eval mode (training == false) and
/// rate == 0 are the identity and leave scale_out empty.
Tensor dropout_forward(const Tensor& x, double rate, bool training, SeededRng& rng,
                       Tensor& scale_out);

void dropout_backward(const Tensor& d_out, const Tensor& scale, Tensor& d_x);

/// (1/divisor) * sum_i h.row(i) * mask[i]. The divisor is passed in so the
/// caller can choose padded length or valid length.
Tensor masked_mean(const Tensor& h, std::span<const std::uint8_t> mask, double divisor);

void masked_mean_backward(const Tensor& d_pooled, std::span<const std::uint8_t> mask,
                          double divisor, Tensor& d_h);

/// weight^T * x + bias. x may be a vector (rank 1) or a row batch (N x in).
Tensor linear_forward(const LinearParams& p, const Tensor& x);

void linear_backward(const LinearParams& p, const Tensor& x, const Tensor& d_out,
                     LinearParams& grad, Tensor& d_x);

/// Numerically stable logistic, branch on sign.
double sigmoid_scalar(double x);
Tensor sigmoid(const Tensor& x);

/// y is the forward output sigmoid(x); d_x += d_out * y * (1 - y).
void sigmoid_backward(const Tensor& y, const Tensor& d_out, Tensor& d_x);

/// Max-subtracted softmax over a rank-1 tensor.
Tensor softmax(const Tensor& logits);

/// -ln(probs[gold]); probs[gold] below 1e-12 is clamped and reported
/// through *clamped when the caller asks.
double cross_entropy(const Tensor& probs, int gold, bool* clamped = nullptr);

/// Combined softmax + cross-entropy gradient at the logits:
/// d_logits += (probs - onehot(gold)) * scale.
void softmax_xent_backward(const Tensor& probs, int gold, double scale, Tensor& d_logits);

}  // namespace sentcorr
