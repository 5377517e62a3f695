// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "docrec/errors.hpp"
#include "docrec/rng.hpp"
#include "docrec/tensor.hpp"

namespace docrec::kernels {

/// Numerically stable softmax; shift-invariant, entries sum to 1.
Vector softmax(const Vector& v);

struct PEConfig {
  int d_model = 256;
  double base = 10000.0;
};

/// Sinusoidal encoding of a 1D position: channel 2k is sin(w_k * pos),
/// channel 2k+1 is cos(w_k * pos) with w_k = base^(-2k/d_model).
Vector positional_encoding_1d(long pos, const PEConfig& cfg = {});

/// 2D variant: the first half of the channels encodes the vertical
/// position y and the second half the horizontal position x, each with
/// the 1D sin/cos scheme. d_model must be divisible by 4.
Vector positional_encoding_2d(long x, long y, const PEConfig& cfg = {});

/// Adds PE_2D(x, y) to every cell of an H x W x C feature map and
/// flattens it to (H*W) x C with row index j = y*W + x.
Matrix flatten_with_pe(const Tensor& f2d, const PEConfig& cfg = {});

/// Per-head projections for scaled dot-product attention.
struct AttentionParams {
  std::vector<Matrix> w_q;  // each d_model x d_k
  std::vector<Matrix> w_k;
  std::vector<Matrix> w_v;  // each d_model x d_v
  Matrix w_c;               // (h * d_v) x d_c

  int heads() const { return static_cast<int>(w_q.size()); }
  /// Identity single-head parameters for a given model width.
  static AttentionParams identity(int d_model);
};

struct AttentionMask {
  enum class Kind { none, causal, causal_window };
  Kind kind = Kind::none;
  int window = 100;

  static AttentionMask none() { return {Kind::none, 0}; }
  static AttentionMask causal() { return {Kind::causal, 0}; }
  static AttentionMask causal_window(int w) { return {Kind::causal_window, w}; }
};

/// Multi-head scaled dot-product attention. Queries are M x d_model,
/// the key/value source is L x d_model. Masked key positions are
/// excluded from the softmax entirely, so their weights are exactly
/// zero (equivalent to the usual -inf additive mask, but exact in
/// finite arithmetic). Causal masks require M == L and let position t
/// attend to j <= t; the windowed variant further requires j >= t - w.
Matrix sdpa_multihead(const Matrix& queries, const Matrix& source,
                      const AttentionParams& params,
                      const AttentionMask& mask = AttentionMask::none());

/// Recurrent state of the vertical attention: previous weights, the
/// clamped coverage of everything already read, and the decoder state.
struct VanAttentionState {
  Vector alpha_prev;  // H_f, all zero before the first step
  Vector coverage;    // H_f, entries in [0, 1]
  Vector decoder_state;  // C_h

  static VanAttentionState initial(Eigen::Index h_f, Eigen::Index c_h);
};

struct VanParams {
  Matrix w_f;  // C_f x C_u
  Matrix w_j;  // C_j x C_u
  Matrix w_h;  // C_h x C_u
  Vector w_a;  // C_u
  /// Context convolution over the [alpha, coverage] pair: C_j filters,
  /// 2 input channels, kernel width 15 (indexing [filter][channel][tap]).
  std::vector<std::array<Vector, 2>> conv_filter;
  Matrix w_d;       // (C_u + C_h) x 2, learned-stop projection
  Vector w_pool;    // 15, dense collapse of the pooled rows

  static VanParams zeros(Eigen::Index c_f, Eigen::Index c_h,
                         Eigen::Index c_u = 256, Eigen::Index c_j = 16,
                         int kernel = 15);
};

struct VanStepResult {
  Vector alpha;          // H_f, sums to 1
  Matrix line_features;  // W_f x C_f, weighted row sum
  Matrix multiscale;     // H_f x C_u, the tanh scores feeding the head
  VanAttentionState next_state;
};

/// One vertical-attention step: contextualizes [alpha, coverage] with a
/// same-padded 1D convolution plus instance norm, scores every feature
/// row with tanh(W_f f'_i + W_j j_i + W_h h) projected by w_a, softmaxes
/// over rows, and returns the weighted row sum of f as line features.
/// Coverage is clamped to [0, 1] after adding the new weights.
VanStepResult van_attention_step(const Tensor& f, const Matrix& f_prime,
                                 const VanAttentionState& state,
                                 const VanParams& params);

/// Stop/continue probabilities from the multiscale rows: adaptive max
/// pooling of the height to 15 bins, dense collapse, concatenation with
/// the decoder state, projection to two logits, softmax. Index 0 is
/// stop, index 1 is continue.
Vector learned_stop_head(const Matrix& multiscale, const Vector& decoder_state,
                         const VanParams& params);

/// Adaptive max pooling over rows to a fixed number of bins; bin i
/// covers input rows [floor(i*H/bins), floor((i+1)*H/bins)), widened to
/// at least one row when H < bins.
Matrix adaptive_max_pool_rows(const Matrix& x, int bins);

/// Gating: the channel axis is split in half, tanh is applied to the
/// first half and sigmoid to the second, each half is layer-normalized
/// over the channel axis, and the results are multiplied elementwise.
Tensor gate(const Tensor& x, double layer_norm_epsilon = 1e-5);

struct DropoutConfig {
  double p_std = 0.5;
  double p_2d = 0.25;
  double mode_prob_std = 0.5;  // probability of picking the standard mode
  int locations = 1;           // candidate insertion points for the diffuse pick
};

struct MixDropoutReport {
  bool used_2d = false;
  int location = 0;  // which candidate insertion point this call covers
};

/// Mix dropout: picks one of the two modes at random, zeroes either
/// individual elements (standard, p_std) or whole channel maps along
/// the last axis (2d, p_2d), and rescales survivors by 1/(1-tau). The
/// diffuse location pick is reported so a caller with several candidate
/// insertion points can apply the result at exactly one of them.
Tensor mix_dropout(const Tensor& x, const DropoutConfig& cfg, Rng& rng,
                   MixDropoutReport* report = nullptr);

struct ScheduleConfig {
  double tau_bar = 0.0;
  double total_updates = 5e4;  // T; gamma = 1/T
  /// The schedule value is the drop probability (tau_0 = 1 means every
  /// unit dropped at step 0). Callers treating it as a keep rate must
  /// invert it themselves; the formula here is applied literally.
  bool value_is_drop_rate = true;
};

/// (1 - tau_bar) * exp(-t/T) + tau_bar. Monotone non-increasing from 1
/// toward tau_bar.
double curriculum_dropout_rate(double t, const ScheduleConfig& cfg);

/// Replaces each token independently with probability p by a uniformly
/// random different token from a dictionary of dict_size entries.
std::vector<int> inject_tf_errors(const std::vector<int>& tokens, double p,
                                  int dict_size, Rng& rng);

/// Worst-case relative error (with unit floor) between an analytic
/// gradient and central finite differences of fn at the given point.
double finite_diff_check(const std::function<double(const Vector&)>& fn,
                         const Vector& analytic_grad, const Vector& point,
                         double step = 1e-4);

}  // namespace docrec::kernels
