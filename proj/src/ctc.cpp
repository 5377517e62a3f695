// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "docrec/textmetrics.hpp"

namespace docrec::ctc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

void check_target(const std::vector<int>& target, const TokenDictionary& dict) {
  for (int t : target)
    if (!dict.is_valid_character(t))
      throw InvalidLabelError("target label " + std::to_string(t) +
                              " outside the alphabet");
}

void check_lattice_width(const Matrix& probs, const TokenDictionary& dict,
                         const char* what) {
  if (probs.cols() != dict.size_with_blank())
    throw ShapeError(std::string(what) + ": lattice has " +
                     std::to_string(probs.cols()) + " columns, dictionary needs " +
                     std::to_string(dict.size_with_blank()));
}

// Forward variables in log space; alpha(t, s) includes the emission of
// frame t. Rows follow the automaton's 2L+1 interleaved states.
Matrix log_forward(const Matrix& logp, const std::vector<int>& target,
                   const TokenDictionary& dict) {
  const Eigen::Index frames = logp.rows();
  const int L = static_cast<int>(target.size());
  const int S = 2 * L + 1;
  auto label = [&](int s) { return s % 2 ? target[(s - 1) / 2] : dict.blank_index(); };

  Matrix alpha = Matrix::Constant(frames, S, kNegInf);
  alpha(0, 0) = logp(0, label(0));
  if (S > 1) alpha(0, 1) = logp(0, label(1));
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (s >= 2 && s % 2 == 1 && label(s) != label(s - 2))
        acc = log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc + logp(t, label(s));
    }
  }
  return alpha;
}

// Backward variables: beta(t, s) sums the completion probability over
// frames t+1..T-1, excluding frame t's own emission.
Matrix log_backward(const Matrix& logp, const std::vector<int>& target,
                    const TokenDictionary& dict) {
  const Eigen::Index frames = logp.rows();
  const int L = static_cast<int>(target.size());
  const int S = 2 * L + 1;
  auto label = [&](int s) { return s % 2 ? target[(s - 1) / 2] : dict.blank_index(); };

  Matrix beta = Matrix::Constant(frames, S, kNegInf);
  beta(frames - 1, S - 1) = 0.0;
  if (S > 1) beta(frames - 1, S - 2) = 0.0;
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double acc = beta(t + 1, s) + logp(t + 1, label(s));
      if (s + 1 < S)
        acc = log_add(acc, beta(t + 1, s + 1) + logp(t + 1, label(s + 1)));
      if (s + 2 < S && (s + 2) % 2 == 1 && label(s + 2) != label(s))
        acc = log_add(acc, beta(t + 1, s + 2) + logp(t + 1, label(s + 2)));
      beta(t, s) = acc;
    }
  }
  return beta;
}

int min_alignment_length(const std::vector<int>& target) {
  int repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++repeats;
  return static_cast<int>(target.size()) + repeats;
}

void check_feasible(Eigen::Index frames, const std::vector<int>& target) {
  int need = min_alignment_length(target);
  if (frames < need)
    throw InfeasibleAlignmentError(
        "target needs at least " + std::to_string(need) + " frames, lattice has " +
        std::to_string(frames));
}

std::vector<int> argmax_path(const Matrix& probs) {
  std::vector<int> path(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    int best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k)
      if (probs(t, k) > probs(t, best)) best = static_cast<int>(k);
    path[static_cast<std::size_t>(t)] = best;
  }
  return path;
}

}  // namespace

TokenDictionary::TokenDictionary(std::vector<std::string> characters)
    : tokens_(std::move(characters)) {
  std::unordered_map<std::string, int> seen;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty())
      throw InvalidLabelError("empty character token at index " +
                              std::to_string(i));
    if (!seen.emplace(tokens_[i], static_cast<int>(i)).second)
      throw InvalidLabelError("duplicate character token '" + tokens_[i] + "'");
  }
}

TokenDictionary TokenDictionary::from_charset(const std::string& utf8_charset) {
  std::u32string u = textmetrics::decode_utf8(utf8_charset);
  std::vector<std::string> chars;
  chars.reserve(u.size());
  for (char32_t c : u)
    chars.push_back(textmetrics::encode_utf8(std::u32string(1, c)));
  return TokenDictionary(std::move(chars));
}

const std::string& TokenDictionary::token(int index) const {
  static const std::string kBlank;
  if (index == blank_index()) return kBlank;
  if (!is_valid_character(index))
    throw InvalidLabelError("label index out of range: " + std::to_string(index));
  return tokens_[static_cast<std::size_t>(index)];
}

int TokenDictionary::index_of(const std::string& token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i] == token) return static_cast<int>(i);
  throw InvalidLabelError("token '" + token + "' not in the alphabet");
}

std::vector<int> TokenDictionary::encode(const std::string& utf8) const {
  std::u32string u = textmetrics::decode_utf8(utf8);
  std::vector<int> out;
  out.reserve(u.size());
  for (char32_t c : u)
    out.push_back(index_of(textmetrics::encode_utf8(std::u32string(1, c))));
  return out;
}

std::string TokenDictionary::decode(const std::vector<int>& labels) const {
  std::string out;
  for (int l : labels)
    if (l != blank_index()) out += token(l);
  return out;
}

void ProbLattice1D::validate() const {
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      double v = probs(t, k);
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("lattice entry out of [0,1] at frame " +
                              std::to_string(t));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw ValidationError("lattice row " + std::to_string(t) +
                            " sums to " + std::to_string(sum));
  }
}

void ProbLattice2D::validate() const {
  if (probs.rows() != height * width)
    throw ShapeError("2d lattice rows do not match height*width");
  ProbLattice1D{probs}.validate();
}

bool CtcAutomaton::has_edge(int from, int to) const {
  return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) !=
         edges.end();
}

int CtcAutomaton::min_path_length() const {
  // One frame per emitted label plus one per mandatory blank.
  int L = (num_states() - 1) / 2;
  int repeats = 0;
  for (int s = 1; s + 2 < num_states(); s += 2)
    if (state_labels[static_cast<std::size_t>(s)] ==
        state_labels[static_cast<std::size_t>(s + 2)])
      ++repeats;
  return L + repeats;
}

CtcAutomaton build_automaton(const std::vector<int>& target,
                             const TokenDictionary& dict) {
  check_target(target, dict);
  const int L = static_cast<int>(target.size());
  const int S = 2 * L + 1;
  CtcAutomaton a;
  a.state_labels.resize(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s)
    a.state_labels[static_cast<std::size_t>(s)] =
        s % 2 ? target[static_cast<std::size_t>((s - 1) / 2)] : dict.blank_index();
  for (int s = 0; s < S; ++s) {
    a.edges.emplace_back(s, s);
    if (s + 1 < S) a.edges.emplace_back(s, s + 1);
    if (s + 2 < S && (s + 2) % 2 == 1 &&
        a.state_labels[static_cast<std::size_t>(s + 2)] !=
            a.state_labels[static_cast<std::size_t>(s)])
      a.edges.emplace_back(s, s + 2);
  }
  a.accepting.push_back(S - 1);
  if (S > 1) a.accepting.push_back(S - 2);
  return a;
}

std::vector<int> collapse(const std::vector<int>& path,
                          const TokenDictionary& dict) {
  for (int p : path)
    if (!(dict.is_valid_character(p) || p == dict.blank_index()))
      throw InvalidLabelError("path label outside the extended alphabet");
  std::vector<int> out;
  int prev = -1;
  for (int p : path) {
    if (p != prev && p != dict.blank_index()) out.push_back(p);
    prev = p;
  }
  return out;
}

double ctc_loss(const ProbLattice1D& lattice, const std::vector<int>& target,
                const TokenDictionary& dict) {
  check_target(target, dict);
  check_lattice_width(lattice.probs, dict, "ctc_loss");
  lattice.validate();
  check_feasible(lattice.frames(), target);

  Matrix logp = lattice.probs.array().max(0.0).log().matrix();
  Matrix alpha = log_forward(logp, target, dict);
  const int S = 2 * static_cast<int>(target.size()) + 1;
  double logprob = alpha(lattice.frames() - 1, S - 1);
  if (S > 1) logprob = log_add(logprob, alpha(lattice.frames() - 1, S - 2));
  return -logprob;
}

LossGrad ctc_loss_grad(const Matrix& logits, const std::vector<int>& target,
                       const TokenDictionary& dict) {
  check_target(target, dict);
  check_lattice_width(logits, dict, "ctc_loss_grad");
  check_feasible(logits.rows(), target);

  const Eigen::Index frames = logits.rows();
  const Eigen::Index K = logits.cols();

  // Per-frame log softmax.
  Matrix logp(frames, K);
  for (Eigen::Index t = 0; t < frames; ++t) {
    double m = logits.row(t).maxCoeff();
    double lse = std::log((logits.row(t).array() - m).exp().sum()) + m;
    logp.row(t) = logits.row(t).array() - lse;
  }

  Matrix alpha = log_forward(logp, target, dict);
  Matrix beta = log_backward(logp, target, dict);
  const int S = 2 * static_cast<int>(target.size()) + 1;
  auto label = [&](int s) {
    return s % 2 ? target[static_cast<std::size_t>((s - 1) / 2)] : dict.blank_index();
  };
  double total = alpha(frames - 1, S - 1);
  if (S > 1) total = log_add(total, alpha(frames - 1, S - 2));

  // Posterior symbol marginals per frame; the softmax-composed gradient
  // is probs - posterior.
  Matrix grad(frames, K);
  for (Eigen::Index t = 0; t < frames; ++t) {
    Vector post_log = Vector::Constant(K, kNegInf);
    for (int s = 0; s < S; ++s) {
      int k = label(s);
      post_log[k] = log_add(post_log[k], alpha(t, s) + beta(t, s));
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      double posterior =
          post_log[k] == kNegInf ? 0.0 : std::exp(post_log[k] - total);
      grad(t, k) = std::exp(logp(t, k)) - posterior;
    }
  }
  return LossGrad{-total, std::move(grad)};
}

double brute_force_prob(const ProbLattice1D& lattice,
                        const std::vector<int>& target,
                        const TokenDictionary& dict) {
  check_target(target, dict);
  check_lattice_width(lattice.probs, dict, "brute_force_prob");
  const Eigen::Index T = lattice.frames();
  const int K = dict.size_with_blank();
  double count = std::pow(static_cast<double>(K), static_cast<double>(T));
  if (count > 1e7)
    throw SizeError("path enumeration too large: " + std::to_string(count));

  std::vector<int> path(static_cast<std::size_t>(T), 0);
  double total = 0.0;
  // Odometer over all K^T paths.
  while (true) {
    double p = 1.0;
    for (Eigen::Index t = 0; t < T; ++t)
      p *= lattice.probs(t, path[static_cast<std::size_t>(t)]);
    if (p > 0.0 && collapse(path, dict) == target) total += p;
    Eigen::Index pos = T - 1;
    while (pos >= 0) {
      if (++path[static_cast<std::size_t>(pos)] < K) break;
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return total;
}

BestPathResult best_path_decode(const ProbLattice1D& lattice,
                                const TokenDictionary& dict) {
  check_lattice_width(lattice.probs, dict, "best_path_decode");
  lattice.validate();
  BestPathResult r;
  r.path = argmax_path(lattice.probs);
  r.labels = collapse(r.path, dict);
  return r;
}

std::vector<int> span_decode(const ProbLattice2D& lattice,
                             const TokenDictionary& dict) {
  lattice.validate();
  // The stored cell order is already the row-major concatenation of the
  // H_f rows, so the flattened lattice is the matrix itself.
  return best_path_decode(ProbLattice1D{lattice.probs}, dict).labels;
}

ParagraphResult paragraph_decode(
    const LineProvider& lines,
    const std::optional<std::vector<std::pair<double, double>>>& stop_probs,
    const StopPolicy& policy, const TokenDictionary& dict) {
  if (policy.l_max < 1) throw ConfigError("l_max must be >= 1");
  if (policy.kind == StopPolicy::Kind::learned && !stop_probs)
    throw ConfigError("learned stop policy requires stop probabilities");

  std::vector<std::string> decoded;
  int lines_used = 0;
  for (int t = 0; t < policy.l_max; ++t) {
    if (policy.kind == StopPolicy::Kind::learned) {
      if (static_cast<std::size_t>(t) >= stop_probs->size())
        throw ConfigError("stop probabilities exhausted at line " +
                          std::to_string(t));
      const auto& [p_stop, p_continue] = (*stop_probs)[static_cast<std::size_t>(t)];
      if (p_stop >= p_continue) break;
    }
    std::optional<ProbLattice1D> lat = lines(t);
    if (!lat) break;
    std::string text = dict.decode(best_path_decode(*lat, dict).labels);
    if (policy.kind == StopPolicy::Kind::early && text.empty()) break;
    if (!text.empty()) decoded.push_back(std::move(text));
    ++lines_used;
  }

  ParagraphResult r;
  if (policy.kind == StopPolicy::Kind::early)
    lines_used = static_cast<int>(decoded.size());
  r.lines_used = lines_used;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    if (i) r.text += ' ';
    r.text += decoded[i];
  }
  return r;
}

ParagraphResult paragraph_decode(
    const std::vector<ProbLattice1D>& lines,
    const std::optional<std::vector<std::pair<double, double>>>& stop_probs,
    const StopPolicy& policy, const TokenDictionary& dict) {
  return paragraph_decode(
      [&lines](int t) -> std::optional<ProbLattice1D> {
        if (static_cast<std::size_t>(t) >= lines.size()) return std::nullopt;
        return lines[static_cast<std::size_t>(t)];
      },
      stop_probs, policy, dict);
}

}  // namespace docrec::ctc
