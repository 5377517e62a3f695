// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/kernel_check.hpp"

#include <cmath>
#include <sstream>

#include "docrec/ctc.hpp"
#include "docrec/kernels.hpp"

namespace docrec::kernels::checks {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      m(i, j) = (rng.next_double() * 2.0 - 1.0) * scale;
  return m;
}

Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = (rng.next_double() * 2.0 - 1.0) * scale;
  return v;
}

Tensor random_tensor(std::vector<Eigen::Index> shape, Rng& rng) {
  Tensor t(shape);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    t.data()[i] = rng.next_double() * 2.0 - 1.0;
  return t;
}

AttentionParams random_params(int d_model, int heads, Rng& rng) {
  AttentionParams p;
  int d_k = d_model / heads;
  for (int h = 0; h < heads; ++h) {
    p.w_q.push_back(random_matrix(d_model, d_k, rng, 0.5));
    p.w_k.push_back(random_matrix(d_model, d_k, rng, 0.5));
    p.w_v.push_back(random_matrix(d_model, d_k, rng, 0.5));
  }
  p.w_c = random_matrix(d_k * heads, d_model, rng, 0.5);
  return p;
}

VanParams random_van(Eigen::Index c_f, Eigen::Index c_h, Rng& rng,
                     Eigen::Index c_u = 32, Eigen::Index c_j = 16) {
  VanParams p = VanParams::zeros(c_f, c_h, c_u, c_j);
  p.w_f = random_matrix(c_f, c_u, rng, 0.5);
  p.w_j = random_matrix(c_j, c_u, rng, 0.5);
  p.w_h = random_matrix(c_h, c_u, rng, 0.5);
  p.w_a = random_vector(c_u, rng, 0.5);
  for (auto& f : p.conv_filter) {
    f[0] = random_vector(f[0].size(), rng, 0.5);
    f[1] = random_vector(f[1].size(), rng, 0.5);
  }
  p.w_d = random_matrix(c_u + c_h, 2, rng, 0.5);
  p.w_pool = random_vector(15, rng, 0.5);
  return p;
}

CheckResult check_softmax(Rng& rng) {
  for (int trial = 0; trial < 1000; ++trial) {
    Vector v = random_vector(1 + rng.next_below(16), rng, 50.0);
    Vector s = softmax(v);
    if (std::abs(s.sum() - 1.0) > 1e-9 || s.minCoeff() < 0.0)
      return {"softmax_normalized", false, "row sum off at trial " + std::to_string(trial)};
    Eigen::Index am_v, am_s;
    v.maxCoeff(&am_v);
    s.maxCoeff(&am_s);
    if (am_v != am_s) return {"softmax_normalized", false, "argmax not preserved"};
    Vector shifted = softmax((v.array() + 123.0).matrix());
    if ((shifted - s).cwiseAbs().maxCoeff() > 1e-12)
      return {"softmax_normalized", false, "not shift invariant"};
  }
  Vector big(2);
  big << 1000.0, 0.0;
  Vector s = softmax(big);
  if (!(s[0] > 1.0 - 1e-12 && s[1] < 1e-12))
    return {"softmax_normalized", false, "overflow handling"};
  return {"softmax_normalized", true, ""};
}

CheckResult check_attention_normalized(Rng& rng) {
  // With every source row identical, each value row is the same vector,
  // so the output equals it exactly iff the weights sum to one.
  for (int trial = 0; trial < 25; ++trial) {
    int d = 8;
    AttentionParams params = random_params(d, 2, rng);
    Vector row = random_vector(d, rng);
    Matrix source(6, d);
    for (int i = 0; i < 6; ++i) source.row(i) = row.transpose();
    Matrix queries = random_matrix(4, d, rng);
    Matrix out = sdpa_multihead(queries, source, params);
    Matrix expected_concat(1, 2 * (d / 2));
    for (int h = 0; h < 2; ++h)
      expected_concat.block(0, h * (d / 2), 1, d / 2) =
          (row.transpose() * params.w_v[static_cast<std::size_t>(h)]);
    Matrix expected = expected_concat * params.w_c;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      if ((out.row(r) - expected.row(0)).cwiseAbs().maxCoeff() > 1e-9)
        return {"attention_weights_normalized", false, "weights do not sum to 1"};
  }
  return {"attention_weights_normalized", true, ""};
}

CheckResult check_causal_independence(Rng& rng) {
  int d = 8, n = 12;
  AttentionParams params = random_params(d, 2, rng);
  Matrix source = random_matrix(n, d, rng);
  Matrix base = sdpa_multihead(source, source, params, AttentionMask::causal());
  for (int t = 0; t < n - 1; ++t) {
    Matrix perturbed = source;
    for (int j = t + 1; j < n; ++j)
      perturbed.row(j) += random_vector(d, rng, 3.0).transpose();
    Matrix out = sdpa_multihead(perturbed, perturbed, params, AttentionMask::causal());
    for (int i = 0; i <= t; ++i)
      if ((out.row(i) - base.row(i)).cwiseAbs().maxCoeff() != 0.0)
        return {"causal_mask_independence", false, "row " + std::to_string(i) + " leaked"};
  }
  return {"causal_mask_independence", true, ""};
}

CheckResult check_window_independence(Rng& rng) {
  int d = 8, n = 140, w = 100;
  AttentionParams params = random_params(d, 1, rng);
  Matrix source = random_matrix(n, d, rng);
  Matrix base = sdpa_multihead(source, source, params, AttentionMask::causal_window(w));
  Matrix perturbed = source;
  int t = n - 1;
  for (int j = 0; j < t - w; ++j)
    perturbed.row(j) += random_vector(d, rng, 3.0).transpose();
  Matrix out = sdpa_multihead(perturbed, perturbed, params, AttentionMask::causal_window(w));
  if ((out.row(t) - base.row(t)).cwiseAbs().maxCoeff() != 0.0)
    return {"window_mask_independence", false, "positions before t-100 leaked"};
  return {"window_mask_independence", true, ""};
}

CheckResult check_coverage(Rng& rng) {
  Eigen::Index h_f = 9, w_f = 5, c_f = 6, c_h = 4;
  VanParams params = random_van(c_f, c_h, rng);
  Tensor f = random_tensor({h_f, w_f, c_f}, rng);
  Matrix f_prime = random_matrix(h_f, c_f, rng);
  VanAttentionState state = VanAttentionState::initial(h_f, c_h);
  for (int step = 0; step < 1000; ++step) {
    VanStepResult r = van_attention_step(f, f_prime, state, params);
    if (std::abs(r.alpha.sum() - 1.0) > 1e-9)
      return {"coverage_clamped", false, "alpha not normalized at step " + std::to_string(step)};
    if (r.next_state.coverage.minCoeff() < 0.0 || r.next_state.coverage.maxCoeff() > 1.0)
      return {"coverage_clamped", false, "coverage left [0,1] at step " + std::to_string(step)};
    state = r.next_state;
    state.decoder_state = random_vector(c_h, rng, 0.3);
  }
  return {"coverage_clamped", true, ""};
}

CheckResult check_pe(Rng&) {
  PEConfig cfg;  // d_model = 256
  const long n = 4096;
  std::vector<Vector> pes;
  pes.reserve(static_cast<std::size_t>(n));
  for (long pos = 0; pos < n; ++pos) {
    Vector v = positional_encoding_1d(pos, cfg);
    if (v.maxCoeff() > 1.0 + 1e-12 || v.minCoeff() < -1.0 - 1e-12)
      return {"pe_bounded_distinct", false, "values escape [-1,1]"};
    pes.push_back(std::move(v));
  }
  for (long a = 0; a < n; ++a)
    for (long b = a + 1; b < n; ++b) {
      const Vector& va = pes[static_cast<std::size_t>(a)];
      const Vector& vb = pes[static_cast<std::size_t>(b)];
      bool distinct = false;
      for (Eigen::Index k = 0; k < va.size(); ++k) {
        if (std::abs(va[k] - vb[k]) > 1e-6) {
          distinct = true;
          break;
        }
      }
      if (!distinct)
        return {"pe_bounded_distinct", false,
                "positions " + std::to_string(a) + " and " + std::to_string(b) +
                    " collide"};
    }
  return {"pe_bounded_distinct", true, ""};
}

CheckResult check_mix_dropout(Rng& rng) {
  const Eigen::Index n = 100000;
  Tensor x({n});
  for (Eigen::Index i = 0; i < n; ++i) x.data()[i] = 1.0;

  // Forced standard mode: per-element variance tau/(1-tau).
  {
    DropoutConfig cfg;
    cfg.mode_prob_std = 1.0;
    Rng r = rng.split();
    Tensor out = mix_dropout(x, cfg, r);
    double mean = out.data().mean();
    double se = std::sqrt(cfg.p_std / (1.0 - cfg.p_std) / static_cast<double>(n));
    if (std::abs(mean - 1.0) > 3.0 * se)
      return {"mix_dropout_expectation", false, "std mode mean " + std::to_string(mean)};
  }
  // Forced 2d mode: whole channels drop together, so the channels are
  // the independent units.
  {
    DropoutConfig cfg;
    cfg.mode_prob_std = 0.0;
    const Eigen::Index channels = 50000;
    Tensor img({2, channels});
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = 1.0;
    Rng r = rng.split();
    Tensor out = mix_dropout(img, cfg, r);
    double mean = out.data().mean();
    double se = std::sqrt(cfg.p_2d / (1.0 - cfg.p_2d) / static_cast<double>(channels));
    if (std::abs(mean - 1.0) > 3.0 * se)
      return {"mix_dropout_expectation", false, "2d mode mean " + std::to_string(mean)};
  }
  // Mode pick frequency at the default 50/50 configuration.
  {
    DropoutConfig cfg;
    cfg.locations = 4;
    Tensor tiny({1});
    Rng r = rng.split();
    int picked_2d = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
      MixDropoutReport rep;
      (void)mix_dropout(tiny, cfg, r, &rep);
      if (rep.used_2d) ++picked_2d;
      if (rep.location < 0 || rep.location >= cfg.locations)
        return {"mix_dropout_expectation", false, "location out of range"};
    }
    double freq = static_cast<double>(picked_2d) / trials;
    double se = std::sqrt(0.25 / trials);
    if (std::abs(freq - 0.5) > 3.0 * se)
      return {"mix_dropout_expectation", false, "mode frequency " + std::to_string(freq)};
  }
  return {"mix_dropout_expectation", true, ""};
}

CheckResult check_tf_errors(Rng& rng) {
  const int n = 100000;
  std::vector<int> tokens(static_cast<std::size_t>(n));
  Rng fill = rng.split();
  for (auto& t : tokens) t = static_cast<int>(fill.next_below(50));
  Rng r = rng.split();
  std::vector<int> out = inject_tf_errors(tokens, 0.2, 50, r);
  int replaced = 0;
  for (int i = 0; i < n; ++i)
    if (out[static_cast<std::size_t>(i)] != tokens[static_cast<std::size_t>(i)]) ++replaced;
  double rate = static_cast<double>(replaced) / n;
  double se = std::sqrt(0.2 * 0.8 / n);
  if (std::abs(rate - 0.2) > 3.0 * se)
    return {"tf_error_rate", false, "rate " + std::to_string(rate)};
  return {"tf_error_rate", true, ""};
}

CheckResult check_curriculum(Rng&) {
  ScheduleConfig cfg;
  cfg.tau_bar = 0.2;
  cfg.total_updates = 5e4;
  double at0 = curriculum_dropout_rate(0.0, cfg);
  double atT = curriculum_dropout_rate(cfg.total_updates, cfg);
  double expected = (1.0 - cfg.tau_bar) * std::exp(-1.0) + cfg.tau_bar;
  if (std::abs(at0 - 1.0) > 1e-12)
    return {"curriculum_schedule", false, "tau_0 != 1"};
  if (std::abs(atT - expected) > 1e-12)
    return {"curriculum_schedule", false, "tau_T off"};
  double prev = at0;
  for (double t = 0.0; t <= 10.0 * cfg.total_updates; t += 1000.0) {
    double cur = curriculum_dropout_rate(t, cfg);
    if (cur > prev + 1e-15)
      return {"curriculum_schedule", false, "not monotone"};
    prev = cur;
  }
  return {"curriculum_schedule", true, ""};
}

CheckResult check_gradients(Rng& rng) {
  // Linear map: central differences are exact up to rounding.
  {
    Vector w = random_vector(6, rng);
    Vector x = random_vector(6, rng);
    auto fn = [&](const Vector& p) { return w.dot(p); };
    double err = finite_diff_check(fn, w, x);
    if (err > 1e-10)
      return {"gradient_checks", false, "linear map error " + std::to_string(err)};
  }
  // Softmax cross-entropy.
  {
    Vector x = random_vector(8, rng, 2.0);
    int target = 3;
    auto fn = [&](const Vector& p) {
      Vector s = softmax(p);
      return -std::log(s[target]);
    };
    Vector grad = softmax(x);
    grad[target] -= 1.0;
    double err = finite_diff_check(fn, grad, x);
    if (err > 1e-6)
      return {"gradient_checks", false, "softmax-ce error " + std::to_string(err)};
  }
  // CTC loss through softmax.
  {
    ctc::TokenDictionary dict = ctc::TokenDictionary::from_charset("ab");
    std::vector<int> target{0, 1};
    Matrix logits = random_matrix(5, 3, rng, 1.5);
    ctc::LossGrad lg = ctc::ctc_loss_grad(logits, target, dict);
    Vector flat(logits.size());
    Vector gflat(logits.size());
    for (Eigen::Index t = 0; t < logits.rows(); ++t)
      for (Eigen::Index k = 0; k < logits.cols(); ++k) {
        flat[t * logits.cols() + k] = logits(t, k);
        gflat[t * logits.cols() + k] = lg.grad(t, k);
      }
    auto fn = [&](const Vector& p) {
      Matrix l(logits.rows(), logits.cols());
      for (Eigen::Index t = 0; t < l.rows(); ++t)
        for (Eigen::Index k = 0; k < l.cols(); ++k)
          l(t, k) = p[t * l.cols() + k];
      return ctc::ctc_loss_grad(l, target, dict).loss;
    };
    double err = finite_diff_check(fn, gflat, flat);
    if (err > 1e-4)
      return {"gradient_checks", false, "ctc grad error " + std::to_string(err)};
  }
  return {"gradient_checks", true, ""};
}

CheckResult check_determinism(Rng& rng) {
  Tensor x = random_tensor({4, 5, 6}, rng);
  DropoutConfig cfg;
  std::uint64_t seed = rng.next_u64();
  Rng a(seed), b(seed);
  Tensor o1 = mix_dropout(x, cfg, a);
  Tensor o2 = mix_dropout(x, cfg, b);
  for (Eigen::Index i = 0; i < o1.size(); ++i)
    if (o1.data()[i] != o2.data()[i])
      return {"seed_determinism", false, "mix_dropout not reproducible"};
  return {"seed_determinism", true, ""};
}

}  // namespace

std::vector<CheckResult> run_all(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> results;
  results.push_back(check_softmax(rng));
  results.push_back(check_attention_normalized(rng));
  results.push_back(check_causal_independence(rng));
  results.push_back(check_window_independence(rng));
  results.push_back(check_coverage(rng));
  results.push_back(check_pe(rng));
  results.push_back(check_mix_dropout(rng));
  results.push_back(check_tf_errors(rng));
  results.push_back(check_curriculum(rng));
  results.push_back(check_gradients(rng));
  results.push_back(check_determinism(rng));
  return results;
}

}  // namespace docrec::kernels::checks
