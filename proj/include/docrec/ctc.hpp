// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "docrec/errors.hpp"
#include "docrec/tensor.hpp"

namespace docrec::ctc {

/// Ordered character alphabet plus the blank symbol. The blank always
/// takes the last index so that characters win argmax ties against it.
class TokenDictionary {
 public:
  explicit TokenDictionary(std::vector<std::string> characters);

  /// Convenience: one dictionary entry per unicode scalar of `charset`.
  static TokenDictionary from_charset(const std::string& utf8_charset);

  int size_with_blank() const { return static_cast<int>(tokens_.size()) + 1; }
  int num_characters() const { return static_cast<int>(tokens_.size()); }
  int blank_index() const { return num_characters(); }

  /// Token text for an index; the blank renders as an empty string.
  const std::string& token(int index) const;

  /// Index of a character token. Throws InvalidLabelError for unknown
  /// tokens.
  int index_of(const std::string& token) const;

  /// Encodes UTF-8 text, one label per unicode scalar.
  std::vector<int> encode(const std::string& utf8) const;

  /// Decodes a label sequence back to UTF-8 text (blanks skipped).
  std::string decode(const std::vector<int>& labels) const;

  bool is_valid_character(int label) const {
    return label >= 0 && label < num_characters();
  }

 private:
  std::vector<std::string> tokens_;
};

/// Per-frame probability distributions over the extended alphabet,
/// rows = frames, cols = card(A)+1.
struct ProbLattice1D {
  Matrix probs;

  Eigen::Index frames() const { return probs.rows(); }
  /// Throws ValidationError unless every row is a distribution
  /// (sum within 1e-5 of 1, entries in [0,1]).
  void validate() const;
};

/// H_f x W_f grid of distributions, stored cell-major (row y, then x).
struct ProbLattice2D {
  Eigen::Index height = 0;
  Eigen::Index width = 0;
  Matrix probs;  // (height*width) x card(A')

  void validate() const;
};

/// Alignment automaton for a target sequence: 2L+1 interleaved states
/// (blank, y_1, blank, ..., y_L, blank). Transitions are self loops,
/// moves to the next state, and skips over a blank between distinct
/// consecutive labels. Accepting states are the last two (the single
/// blank state for an empty target).
struct CtcAutomaton {
  std::vector<int> state_labels;               // label emitted by each state
  std::vector<std::pair<int, int>> edges;      // includes self loops
  std::vector<int> accepting;

  int num_states() const { return static_cast<int>(state_labels.size()); }
  bool has_edge(int from, int to) const;
  /// Shortest accepted path length (frames needed to emit the target).
  int min_path_length() const;
};

/// End-of-paragraph policy for paragraph_decode.
struct StopPolicy {
  enum class Kind { fixed, early, learned };
  Kind kind = Kind::fixed;
  int l_max = 30;
};

CtcAutomaton build_automaton(const std::vector<int>& target,
                             const TokenDictionary& dict);

/// The beta map: removes repeated tokens, then blanks.
std::vector<int> collapse(const std::vector<int>& path,
                          const TokenDictionary& dict);

/// Negative log probability of the target given the lattice, summed
/// over all collapsing paths by the forward recursion in log space.
/// Throws InfeasibleAlignmentError when the lattice is shorter than the
/// minimum alignment length.
double ctc_loss(const ProbLattice1D& lattice, const std::vector<int>& target,
                const TokenDictionary& dict);

struct LossGrad {
  double loss;
  Matrix grad;  // same shape as the logits
};

/// Loss and analytic gradient of ctc_loss composed with a per-frame
/// softmax over the logits, via the forward-backward recursion.
LossGrad ctc_loss_grad(const Matrix& logits, const std::vector<int>& target,
                       const TokenDictionary& dict);

/// Exact p(target | lattice) by enumerating every path. Throws
/// SizeError when card(A')^T exceeds 1e7.
double brute_force_prob(const ProbLattice1D& lattice,
                        const std::vector<int>& target,
                        const TokenDictionary& dict);

struct BestPathResult {
  std::vector<int> labels;  // collapsed result
  std::vector<int> path;    // per-frame argmax
};

/// Greedy decode: collapse of the per-frame argmax. Ties break toward
/// the lowest token index.
BestPathResult best_path_decode(const ProbLattice1D& lattice,
                                const TokenDictionary& dict);

/// 2D decode: rows concatenated top to bottom into one long line, then
/// best-path decoded. Blank cells separate text lines.
std::vector<int> span_decode(const ProbLattice2D& lattice,
                             const TokenDictionary& dict);

struct ParagraphResult {
  std::string text;
  int lines_used = 0;
};

/// Pulls the lattice for line index t (0-based); nullopt when the
/// source is exhausted.
using LineProvider = std::function<std::optional<ProbLattice1D>(int)>;

/// Line-by-line paragraph decoding under a stop policy.
///   fixed:   decode min(l_max, available) lines; all count as used.
///   early:   decode until the first empty line; the empty line is
///            consumed but not counted.
///   learned: decode while stop_probs favors continuing, up to l_max.
/// Non-empty line texts are joined with single spaces.
ParagraphResult paragraph_decode(
    const LineProvider& lines,
    const std::optional<std::vector<std::pair<double, double>>>& stop_probs,
    const StopPolicy& policy, const TokenDictionary& dict);

ParagraphResult paragraph_decode(
    const std::vector<ProbLattice1D>& lines,
    const std::optional<std::vector<std::pair<double, double>>>& stop_probs,
    const StopPolicy& policy, const TokenDictionary& dict);

}  // namespace docrec::ctc
