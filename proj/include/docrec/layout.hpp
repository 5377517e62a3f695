// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "docrec/errors.hpp"

namespace docrec::layout {

/// One layout class: paired begin/end tokens plus the classes it may
/// nest under (empty means directly under the document root).
struct LayoutClass {
  std::string name;
  std::string begin;
  std::string end;
  std::vector<std::string> parents;
};

/// Token grammar for layout markup. Begin/end tokens are bijective
/// with classes, the nesting relation is acyclic, and every class is
/// reachable from the document root.
class LayoutSchema {
 public:
  LayoutSchema(std::vector<LayoutClass> classes, std::string root_name = "D",
               std::optional<std::string> page_class = std::nullopt);

  /// {"classes":[{"name","begin","end","parents":[...]}],
  ///  "root": "D", "page_class": "P"?}
  static LayoutSchema from_json(const std::string& json_text);

  int num_classes() const { return static_cast<int>(classes_.size()); }
  const LayoutClass& cls(int index) const {
    return classes_[static_cast<std::size_t>(index)];
  }
  const std::string& root_name() const { return root_name_; }
  const std::optional<std::string>& page_class() const { return page_class_; }

  int class_index(const std::string& name) const;
  std::optional<int> begin_class(const std::string& token) const;
  std::optional<int> end_class(const std::string& token) const;
  bool is_layout_token(const std::string& token) const;

  /// Whether `child` may nest directly under `parent` (-1 = root).
  bool allows(int parent, int child) const;

  /// Shortest list of classes to open between `context` (-1 = root)
  /// and `child`, excluding child itself; nullopt when no chain exists.
  std::optional<std::vector<int>> ancestor_chain(int context, int child) const;

 private:
  std::vector<LayoutClass> classes_;
  std::string root_name_;
  std::optional<std::string> page_class_;
  std::map<std::string, int> by_begin_, by_end_, by_name_;
  std::vector<std::vector<int>> parent_ids_;  // -1 entries mean the root
};

/// Token sequence over characters, layout tokens and <eot>, with
/// optional per-token confidences aligned 1:1.
struct TaggedTranscription {
  std::vector<std::string> tokens;
  std::optional<std::vector<double>> confidences;
};

struct Diagnostic {
  enum class Kind { unpaired_begin, isolated_end, illegal_nesting };
  Kind kind;
  std::size_t position;
  std::string token;
};

/// Typed layout graph. Node 0 is the document root (class ""); the
/// remaining nodes are layout entities. Hierarchy edges run parent to
/// child, order edges chain consecutive siblings in reading order. The
/// null graph has no nodes at all.
struct LayoutGraph {
  std::vector<std::string> node_class;  // [0] == "" for the root
  std::vector<std::pair<int, int>> hierarchy_edges;
  std::vector<std::pair<int, int>> order_edges;

  int num_nodes() const { return static_cast<int>(node_class.size()); }
  int num_edges() const {
    return static_cast<int>(hierarchy_edges.size() + order_edges.size());
  }
  bool is_null() const { return node_class.empty(); }
  static LayoutGraph null_graph() { return {}; }
};

struct ParseResult {
  std::optional<LayoutGraph> graph;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

/// Validates the token sequence against the grammar; returns the graph
/// when well formed, diagnostics with positions otherwise.
ParseResult parse_layout(const std::vector<std::string>& tokens,
                         const LayoutSchema& schema);

struct PostProcessReport {
  std::vector<std::string> corrected_tokens;
  std::optional<std::vector<double>> corrected_confidences;
  int n_ppe = 0;  // layout tokens added or removed
};

/// Rule-based correction in one forward pass: a begin token that cannot
/// nest in the open context closes entities or opens the minimal chain
/// of missing ancestors; isolated end tokens are removed; unclosed
/// entities are closed at the end. Only layout tokens are edited and
/// the output always parses cleanly. Inserted tokens carry confidence 0
/// when the input has confidences.
PostProcessReport postprocess(const TaggedTranscription& input,
                              const LayoutSchema& schema);

/// Maps a clean token sequence to its layout graph (character tokens
/// are ignored). Throws GrammarError when the sequence does not parse;
/// run postprocess first for raw predictions.
LayoutGraph build_graph(const std::vector<std::string>& tokens,
                        const LayoutSchema& schema);

struct GedOptions {
  long budget = 10'000'000;  // A* expansions before giving up
  /// Class whose nodes delimit pages; when both graphs contain page
  /// nodes the distance decomposes into per-page distances, pairing
  /// pages in reading order and comparing extras to the null graph.
  std::optional<std::string> page_class;
};

struct GedResult {
  long distance = 0;
  bool decomposed = false;
  int unpaired_pages = 0;  // pages on either side without a counterpart
};

/// Exact graph edit distance with unit costs for node and edge
/// insertion, deletion and substitution (substitution is free between
/// equal labels). A* search with a label-count lower bound; throws
/// BudgetExceededError beyond the expansion budget.
long ged(const LayoutGraph& a, const LayoutGraph& b, const GedOptions& opt = {});
GedResult ged_detailed(const LayoutGraph& a, const LayoutGraph& b,
                       const GedOptions& opt = {});

struct LoerResult {
  double value = 0.0;
  long total_ged = 0;
  long total_norm = 0;
  int page_count_mismatches = 0;
};

/// Sum of graph edit distances over (ground truth, prediction) pairs,
/// normalized by ground-truth nodes plus edges.
double loer(const std::vector<std::pair<LayoutGraph, LayoutGraph>>& pairs,
            const GedOptions& opt = {});
LoerResult loer_detailed(
    const std::vector<std::pair<LayoutGraph, LayoutGraph>>& pairs,
    const GedOptions& opt = {});

/// Post-processing edition rate: edit counts normalized by the number
/// of ground-truth layout tokens.
double pper(const std::vector<PostProcessReport>& reports,
            const std::vector<TaggedTranscription>& ground_truths,
            const LayoutSchema& schema);

struct SubSequence {
  std::string text;        // character content, inner tags stripped
  double confidence = 0.0; // mean of the begin and end token confidences
  std::size_t begin_pos = 0;
  std::size_t end_pos = 0;
};

/// Extracts per-class sub-sequences between matching begin/end tokens,
/// ordered by descending confidence (ties keep sequence order).
/// Requires confidences; the input must parse cleanly.
std::map<std::string, std::vector<SubSequence>> extract_subsequences(
    const TaggedTranscription& pred, const LayoutSchema& schema);

/// CER thresholds 0.05, 0.10, ..., 0.50.
std::vector<double> map_cer_thresholds();

/// Mean average precision over CER thresholds for one document: a
/// predicted sub-sequence is a true positive when its CER against an
/// unconsumed ground-truth sub-sequence of the same class is at most
/// the threshold (the lowest-CER candidate is consumed). Average
/// precision is computed per class and threshold, averaged over the
/// thresholds, then weighted by the ground-truth character count per
/// class.
double map_cer(const TaggedTranscription& pred, const TaggedTranscription& gt,
               const LayoutSchema& schema);

}  // namespace docrec::layout
