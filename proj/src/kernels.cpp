// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace docrec::kernels {
namespace {

void fill_pe_half(Vector& out, Eigen::Index offset, Eigen::Index half,
                  long pos, double base, int d_model) {
  for (Eigen::Index k = 0; 2 * k < half; ++k) {
    double w = std::pow(base, -2.0 * static_cast<double>(k) / d_model);
    double angle = w * static_cast<double>(pos);
    out[offset + 2 * k] = std::sin(angle);
    if (offset + 2 * k + 1 < offset + half) out[offset + 2 * k + 1] = std::cos(angle);
  }
}

// Layer norm over the last axis for one contiguous row.
void layer_norm_row(double* row, Eigen::Index n, double eps) {
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += row[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = row[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  double inv = 1.0 / std::sqrt(var + eps);
  for (Eigen::Index i = 0; i < n; ++i) row[i] = (row[i] - mean) * inv;
}

}  // namespace

Vector softmax(const Vector& v) {
  double m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

Vector positional_encoding_1d(long pos, const PEConfig& cfg) {
  if (cfg.d_model <= 0 || cfg.d_model % 2 != 0)
    throw ConfigError("1d positional encoding needs an even d_model");
  if (pos < 0) throw ConfigError("position must be nonnegative");
  Vector out = Vector::Zero(cfg.d_model);
  fill_pe_half(out, 0, cfg.d_model, pos, cfg.base, cfg.d_model);
  return out;
}

Vector positional_encoding_2d(long x, long y, const PEConfig& cfg) {
  if (cfg.d_model <= 0 || cfg.d_model % 4 != 0)
    throw ConfigError("2d positional encoding needs d_model divisible by 4");
  if (x < 0 || y < 0) throw ConfigError("positions must be nonnegative");
  Vector out = Vector::Zero(cfg.d_model);
  Eigen::Index half = cfg.d_model / 2;
  fill_pe_half(out, 0, half, y, cfg.base, cfg.d_model);
  fill_pe_half(out, half, half, x, cfg.base, cfg.d_model);
  return out;
}

Matrix flatten_with_pe(const Tensor& f2d, const PEConfig& cfg) {
  if (f2d.rank() != 3) throw ShapeError("flatten_with_pe expects H x W x C");
  const Eigen::Index h = f2d.dim(0), w = f2d.dim(1), c = f2d.dim(2);
  if (c != cfg.d_model)
    throw ShapeError("channel count must equal d_model for the encoding");
  auto grid = f2d.as_matrix(h * w, c);
  Matrix out(h * w, c);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      Eigen::Index j = y * w + x;
      out.row(j) = grid.row(j) +
                   positional_encoding_2d(static_cast<long>(x),
                                          static_cast<long>(y), cfg)
                       .transpose();
    }
  }
  return out;
}

AttentionParams AttentionParams::identity(int d_model) {
  AttentionParams p;
  p.w_q = {Matrix::Identity(d_model, d_model)};
  p.w_k = {Matrix::Identity(d_model, d_model)};
  p.w_v = {Matrix::Identity(d_model, d_model)};
  p.w_c = Matrix::Identity(d_model, d_model);
  return p;
}

Matrix sdpa_multihead(const Matrix& queries, const Matrix& source,
                      const AttentionParams& params, const AttentionMask& mask) {
  const int h = params.heads();
  if (h == 0 || params.w_k.size() != static_cast<std::size_t>(h) ||
      params.w_v.size() != static_cast<std::size_t>(h))
    throw ConfigError("attention needs matching per-head projections");
  if (mask.kind == AttentionMask::Kind::causal_window && mask.window < 1)
    throw ConfigError("attention window must be >= 1");
  const Eigen::Index m = queries.rows(), l = source.rows();
  if (mask.kind != AttentionMask::Kind::none && m != l)
    throw ShapeError("causal masks require aligned query/key positions");

  Matrix concat(m, params.w_v[0].cols() * h);
  for (int head = 0; head < h; ++head) {
    const Matrix& wq = params.w_q[static_cast<std::size_t>(head)];
    const Matrix& wk = params.w_k[static_cast<std::size_t>(head)];
    const Matrix& wv = params.w_v[static_cast<std::size_t>(head)];
    if (wq.rows() != queries.cols() || wk.rows() != source.cols() ||
        wv.rows() != source.cols() || wq.cols() != wk.cols())
      throw ShapeError("attention projection shapes are inconsistent");
    Matrix q = queries * wq;
    Matrix k = source * wk;
    Matrix v = source * wv;
    const double scale = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
    Matrix out(m, wv.cols());
    for (Eigen::Index t = 0; t < m; ++t) {
      Eigen::Index lo = 0, hi = l - 1;
      if (mask.kind != AttentionMask::Kind::none) hi = t;
      if (mask.kind == AttentionMask::Kind::causal_window)
        lo = std::max<Eigen::Index>(0, t - mask.window);
      // Softmax over the allowed range only; everything outside gets an
      // exact zero weight.
      Eigen::Index n = hi - lo + 1;
      Vector scores(n);
      for (Eigen::Index j = 0; j < n; ++j)
        scores[j] = q.row(t).dot(k.row(lo + j)) * scale;
      Vector weights = softmax(scores);
      out.row(t).setZero();
      for (Eigen::Index j = 0; j < n; ++j)
        out.row(t) += weights[j] * v.row(lo + j);
    }
    concat.block(0, head * wv.cols(), m, wv.cols()) = out;
  }
  if (params.w_c.rows() != concat.cols())
    throw ShapeError("output projection does not match concatenated heads");
  return concat * params.w_c;
}

VanAttentionState VanAttentionState::initial(Eigen::Index h_f, Eigen::Index c_h) {
  VanAttentionState s;
  s.alpha_prev = Vector::Zero(h_f);
  s.coverage = Vector::Zero(h_f);
  s.decoder_state = Vector::Zero(c_h);
  return s;
}

VanParams VanParams::zeros(Eigen::Index c_f, Eigen::Index c_h, Eigen::Index c_u,
                           Eigen::Index c_j, int kernel) {
  VanParams p;
  p.w_f = Matrix::Zero(c_f, c_u);
  p.w_j = Matrix::Zero(c_j, c_u);
  p.w_h = Matrix::Zero(c_h, c_u);
  p.w_a = Vector::Zero(c_u);
  p.conv_filter.resize(static_cast<std::size_t>(c_j));
  for (auto& f : p.conv_filter) {
    f[0] = Vector::Zero(kernel);
    f[1] = Vector::Zero(kernel);
  }
  p.w_d = Matrix::Zero(c_u + c_h, 2);
  p.w_pool = Vector::Constant(15, 1.0 / 15.0);
  return p;
}

VanStepResult van_attention_step(const Tensor& f, const Matrix& f_prime,
                                 const VanAttentionState& state,
                                 const VanParams& params) {
  if (f.rank() != 3) throw ShapeError("van features must be H x W x C");
  const Eigen::Index h_f = f.dim(0), w_f = f.dim(1), c_f = f.dim(2);
  if (f_prime.rows() != h_f || f_prime.cols() != c_f)
    throw ShapeError("collapsed features must be H x C");
  if (state.alpha_prev.size() != h_f || state.coverage.size() != h_f)
    throw ShapeError("attention state height mismatch");
  if (params.w_f.rows() != c_f || params.w_h.rows() != state.decoder_state.size())
    throw ShapeError("van projection shapes are inconsistent");
  const Eigen::Index c_u = params.w_f.cols();
  const Eigen::Index c_j = static_cast<Eigen::Index>(params.conv_filter.size());
  if (params.w_j.rows() != c_j)
    throw ShapeError("context projection does not match the filter count");

  // Context: same-padded conv over the [alpha, coverage] channels,
  // then instance norm per channel over the height.
  Matrix context(h_f, c_j);
  for (Eigen::Index fi = 0; fi < c_j; ++fi) {
    const auto& filt = params.conv_filter[static_cast<std::size_t>(fi)];
    const Eigen::Index kernel = filt[0].size();
    const Eigen::Index pad = kernel / 2;
    for (Eigen::Index i = 0; i < h_f; ++i) {
      double acc = 0.0;
      for (Eigen::Index tap = 0; tap < kernel; ++tap) {
        Eigen::Index src = i + tap - pad;
        if (src < 0 || src >= h_f) continue;
        acc += filt[0][tap] * state.alpha_prev[src] +
               filt[1][tap] * state.coverage[src];
      }
      context(i, fi) = acc;
    }
    double mean = context.col(fi).mean();
    double var = (context.col(fi).array() - mean).square().mean();
    context.col(fi) = (context.col(fi).array() - mean) / std::sqrt(var + 1e-5);
  }

  // Multi-scale rows and scalar scores.
  Vector h_term = params.w_h.transpose() * state.decoder_state;  // C_u
  Matrix multiscale(h_f, c_u);
  Vector scores(h_f);
  for (Eigen::Index i = 0; i < h_f; ++i) {
    Vector s = params.w_f.transpose() * f_prime.row(i).transpose() +
               params.w_j.transpose() * context.row(i).transpose() + h_term;
    multiscale.row(i) = s.array().tanh().matrix().transpose();
    scores[i] = params.w_a.dot(multiscale.row(i));
  }
  Vector alpha = softmax(scores);

  auto rows = f.as_matrix(h_f * w_f, c_f);
  Matrix line = Matrix::Zero(w_f, c_f);
  for (Eigen::Index i = 0; i < h_f; ++i)
    line += alpha[i] * rows.block(i * w_f, 0, w_f, c_f);

  VanStepResult r;
  r.alpha = alpha;
  r.line_features = std::move(line);
  r.multiscale = std::move(multiscale);
  r.next_state.alpha_prev = alpha;
  r.next_state.coverage =
      (state.coverage + alpha).cwiseMax(0.0).cwiseMin(1.0);
  r.next_state.decoder_state = state.decoder_state;
  return r;
}

Matrix adaptive_max_pool_rows(const Matrix& x, int bins) {
  if (x.rows() < 1) throw ShapeError("adaptive pooling needs at least one row");
  const Eigen::Index h = x.rows();
  Matrix out(bins, x.cols());
  for (int i = 0; i < bins; ++i) {
    Eigen::Index lo = h * i / bins;
    Eigen::Index hi = h * (i + 1) / bins;
    if (hi <= lo) hi = lo + 1;  // short inputs: bins repeat a row
    out.row(i) = x.row(lo);
    for (Eigen::Index r = lo + 1; r < hi; ++r)
      out.row(i) = out.row(i).cwiseMax(x.row(r));
  }
  return out;
}

Vector learned_stop_head(const Matrix& multiscale, const Vector& decoder_state,
                         const VanParams& params) {
  Matrix pooled = adaptive_max_pool_rows(multiscale, static_cast<int>(params.w_pool.size()));
  Vector collapsed = pooled.transpose() * params.w_pool;  // C_u
  Vector b(collapsed.size() + decoder_state.size());
  b << collapsed, decoder_state;
  if (params.w_d.rows() != b.size())
    throw ShapeError("stop head projection does not match its input");
  Vector logits = params.w_d.transpose() * b;
  return softmax(logits);
}

Tensor gate(const Tensor& x, double layer_norm_epsilon) {
  if (x.rank() < 1 || x.channels() % 2 != 0)
    throw ShapeError("gate needs an even channel count");
  const Eigen::Index c2 = x.channels();
  const Eigen::Index c = c2 / 2;
  const Eigen::Index positions = x.size() / c2;

  std::vector<Eigen::Index> out_shape = x.shape();
  out_shape.back() = c;
  Tensor out(out_shape);

  std::vector<double> a(static_cast<std::size_t>(c)), b(static_cast<std::size_t>(c));
  for (Eigen::Index p = 0; p < positions; ++p) {
    const double* in = x.data().data() + p * c2;
    for (Eigen::Index i = 0; i < c; ++i) {
      a[static_cast<std::size_t>(i)] = std::tanh(in[i]);
      b[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-in[c + i]));
    }
    layer_norm_row(a.data(), c, layer_norm_epsilon);
    layer_norm_row(b.data(), c, layer_norm_epsilon);
    double* dst = out.data().data() + p * c;
    for (Eigen::Index i = 0; i < c; ++i)
      dst[i] = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  }
  return out;
}

Tensor mix_dropout(const Tensor& x, const DropoutConfig& cfg, Rng& rng,
                   MixDropoutReport* report) {
  if (cfg.p_std < 0 || cfg.p_std >= 1.0 || cfg.p_2d < 0 || cfg.p_2d >= 1.0)
    throw ConfigError("dropout probabilities must lie in [0, 1)");
  if (cfg.locations < 1) throw ConfigError("at least one dropout location");

  int location = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.locations)));
  bool use_std = rng.next_double() < cfg.mode_prob_std;
  if (report) {
    report->used_2d = !use_std;
    report->location = location;
  }

  Tensor out = x;
  if (use_std) {
    const double tau = cfg.p_std;
    const double scale = 1.0 / (1.0 - tau);
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out.data()[i] = rng.next_double() < tau ? 0.0 : out.data()[i] * scale;
  } else {
    const double tau = cfg.p_2d;
    const double scale = 1.0 / (1.0 - tau);
    const Eigen::Index c = std::max<Eigen::Index>(out.channels(), 1);
    std::vector<bool> drop(static_cast<std::size_t>(c));
    for (Eigen::Index k = 0; k < c; ++k)
      drop[static_cast<std::size_t>(k)] = rng.next_double() < tau;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      Eigen::Index k = i % c;
      out.data()[i] = drop[static_cast<std::size_t>(k)] ? 0.0 : out.data()[i] * scale;
    }
  }
  return out;
}

double curriculum_dropout_rate(double t, const ScheduleConfig& cfg) {
  if (cfg.tau_bar < 0.0 || cfg.tau_bar > 1.0 || cfg.total_updates <= 0.0)
    throw ConfigError("invalid curriculum schedule");
  double gamma = 1.0 / cfg.total_updates;
  return (1.0 - cfg.tau_bar) * std::exp(-gamma * t) + cfg.tau_bar;
}

std::vector<int> inject_tf_errors(const std::vector<int>& tokens, double p,
                                  int dict_size, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("error rate must lie in [0, 1)");
  if (dict_size < 2) throw ConfigError("need at least two tokens to corrupt");
  std::vector<int> out = tokens;
  for (int& tok : out) {
    if (rng.next_double() >= p) continue;
    int r = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dict_size - 1)));
    tok = r >= tok ? r + 1 : r;  // uniform over the dictionary minus itself
  }
  return out;
}

double finite_diff_check(const std::function<double(const Vector&)>& fn,
                         const Vector& analytic_grad, const Vector& point,
                         double step) {
  if (analytic_grad.size() != point.size())
    throw ShapeError("gradient and point sizes differ");
  double worst = 0.0;
  Vector x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    x[i] = point[i] + step;
    double up = fn(x);
    x[i] = point[i] - step;
    double down = fn(x);
    x[i] = point[i];
    double fd = (up - down) / (2.0 * step);
    double denom = std::max({1.0, std::abs(fd), std::abs(analytic_grad[i])});
    worst = std::max(worst, std::abs(fd - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace docrec::kernels
