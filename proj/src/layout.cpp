// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/layout.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include <json.hpp>

#include "docrec/segmetrics.hpp"
#include "docrec/textmetrics.hpp"

namespace docrec::layout {
namespace {

constexpr int kRoot = -1;

int popcount(std::uint8_t mask) { return std::popcount(static_cast<unsigned>(mask)); }

// Cost of aligning two (possibly empty) sets of edge kinds.
long edge_pair_cost(std::uint8_t m1, std::uint8_t m2) {
  int c1 = popcount(m1), c2 = popcount(m2);
  int common = popcount(static_cast<std::uint8_t>(m1 & m2));
  return std::max(c1, c2) - common;
}

}  // namespace

LayoutSchema::LayoutSchema(std::vector<LayoutClass> classes,
                           std::string root_name,
                           std::optional<std::string> page_class)
    : classes_(std::move(classes)),
      root_name_(std::move(root_name)),
      page_class_(std::move(page_class)) {
  for (int i = 0; i < num_classes(); ++i) {
    const auto& c = classes_[static_cast<std::size_t>(i)];
    if (c.name.empty() || c.begin.empty() || c.end.empty())
      throw GrammarError("layout class needs a name and begin/end tokens");
    if (!by_name_.emplace(c.name, i).second)
      throw GrammarError("duplicate layout class name: " + c.name);
    if (!by_begin_.emplace(c.begin, i).second || by_end_.count(c.begin))
      throw GrammarError("begin token reused: " + c.begin);
    if (!by_end_.emplace(c.end, i).second || by_begin_.count(c.end))
      throw GrammarError("end token reused: " + c.end);
  }
  parent_ids_.resize(static_cast<std::size_t>(num_classes()));
  for (int i = 0; i < num_classes(); ++i) {
    const auto& c = classes_[static_cast<std::size_t>(i)];
    auto& pids = parent_ids_[static_cast<std::size_t>(i)];
    if (c.parents.empty()) {
      pids.push_back(kRoot);
    } else {
      for (const auto& p : c.parents) {
        if (p == root_name_) {
          pids.push_back(kRoot);
        } else {
          auto it = by_name_.find(p);
          if (it == by_name_.end())
            throw GrammarError("unknown parent class: " + p);
          pids.push_back(it->second);
        }
      }
    }
  }
  // The nesting relation must be acyclic and reach the root from
  // every class.
  for (int start = 0; start < num_classes(); ++start) {
    if (!ancestor_chain(kRoot, start))
      throw GrammarError("class not reachable from the root: " +
                         classes_[static_cast<std::size_t>(start)].name);
  }
  std::vector<int> color(static_cast<std::size_t>(num_classes()), 0);
  auto dfs = [&](auto&& self, int c) -> void {
    color[static_cast<std::size_t>(c)] = 1;
    for (int p : parent_ids_[static_cast<std::size_t>(c)]) {
      if (p == kRoot) continue;
      if (color[static_cast<std::size_t>(p)] == 1)
        throw GrammarError("nesting relation has a cycle at class " +
                           classes_[static_cast<std::size_t>(p)].name);
      if (color[static_cast<std::size_t>(p)] == 0) self(self, p);
    }
    color[static_cast<std::size_t>(c)] = 2;
  };
  for (int c = 0; c < num_classes(); ++c)
    if (color[static_cast<std::size_t>(c)] == 0) dfs(dfs, c);
  if (page_class_ && !by_name_.count(*page_class_))
    throw GrammarError("page class is not a schema class: " + *page_class_);
}

LayoutSchema LayoutSchema::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::vector<LayoutClass> classes;
  for (const auto& c : j.at("classes")) {
    LayoutClass lc;
    lc.name = c.at("name").get<std::string>();
    lc.begin = c.value("begin", "<" + lc.name + ">");
    lc.end = c.value("end", "</" + lc.name + ">");
    if (c.contains("parents"))
      for (const auto& p : c["parents"]) lc.parents.push_back(p.get<std::string>());
    classes.push_back(std::move(lc));
  }
  std::string root = j.value("root", std::string("D"));
  std::optional<std::string> page;
  if (j.contains("page_class") && !j["page_class"].is_null())
    page = j["page_class"].get<std::string>();
  return LayoutSchema(std::move(classes), std::move(root), std::move(page));
}

int LayoutSchema::class_index(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw GrammarError("unknown layout class: " + name);
  return it->second;
}

std::optional<int> LayoutSchema::begin_class(const std::string& token) const {
  auto it = by_begin_.find(token);
  if (it == by_begin_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> LayoutSchema::end_class(const std::string& token) const {
  auto it = by_end_.find(token);
  if (it == by_end_.end()) return std::nullopt;
  return it->second;
}

bool LayoutSchema::is_layout_token(const std::string& token) const {
  return by_begin_.count(token) || by_end_.count(token);
}

bool LayoutSchema::allows(int parent, int child) const {
  const auto& pids = parent_ids_[static_cast<std::size_t>(child)];
  return std::find(pids.begin(), pids.end(), parent) != pids.end();
}

std::optional<std::vector<int>> LayoutSchema::ancestor_chain(int context,
                                                             int child) const {
  if (allows(context, child)) return std::vector<int>{};
  // BFS upward through the parent relation; the chain is reconstructed
  // root-side first.
  std::vector<int> prev(static_cast<std::size_t>(num_classes()), -2);
  std::deque<int> frontier;
  for (int p : parent_ids_[static_cast<std::size_t>(child)]) {
    if (p == kRoot) continue;  // direct root attachment already checked
    if (prev[static_cast<std::size_t>(p)] == -2) {
      prev[static_cast<std::size_t>(p)] = child;
      frontier.push_back(p);
    }
  }
  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    if (allows(context, cur)) {
      // prev points downward, so walking it from cur yields the chain
      // in opening order.
      std::vector<int> chain;
      for (int c = cur; c != child; c = prev[static_cast<std::size_t>(c)])
        chain.push_back(c);
      return chain;
    }
    for (int p : parent_ids_[static_cast<std::size_t>(cur)]) {
      if (p == kRoot) continue;
      if (prev[static_cast<std::size_t>(p)] == -2) {
        prev[static_cast<std::size_t>(p)] = cur;
        frontier.push_back(p);
      }
    }
  }
  return std::nullopt;
}

namespace {

// Shared parser: walks the tokens with an open-entity stack, builds the
// graph, and records violations instead of repairing them.
struct ParseState {
  LayoutGraph graph;
  std::vector<Diagnostic> diagnostics;
};

ParseState parse_impl(const std::vector<std::string>& tokens,
                      const LayoutSchema& schema) {
  ParseState st;
  st.graph.node_class.push_back("");  // document root
  struct Open {
    int cls;
    int node;
    int last_child = -1;
    std::size_t begin_pos;
  };
  std::vector<Open> stack;
  int root_last_child = -1;

  auto open_entity = [&](int cls, std::size_t pos) {
    int node = st.graph.num_nodes();
    st.graph.node_class.push_back(schema.cls(cls).name);
    int parent_node = stack.empty() ? 0 : stack.back().node;
    int& last_child = stack.empty() ? root_last_child : stack.back().last_child;
    st.graph.hierarchy_edges.emplace_back(parent_node, node);
    if (last_child >= 0) st.graph.order_edges.emplace_back(last_child, node);
    last_child = node;
    stack.push_back(Open{cls, node, -1, pos});
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (auto b = schema.begin_class(tok)) {
      int context = stack.empty() ? kRoot : stack.back().cls;
      if (!schema.allows(context, *b))
        st.diagnostics.push_back({Diagnostic::Kind::illegal_nesting, i, tok});
      open_entity(*b, i);
    } else if (auto e = schema.end_class(tok)) {
      if (!stack.empty() && stack.back().cls == *e) {
        stack.pop_back();
      } else {
        st.diagnostics.push_back({Diagnostic::Kind::isolated_end, i, tok});
      }
    }
    // character tokens carry no structure
  }
  for (const auto& open : stack)
    st.diagnostics.push_back({Diagnostic::Kind::unpaired_begin, open.begin_pos,
                              schema.cls(open.cls).begin});
  return st;
}

}  // namespace

ParseResult parse_layout(const std::vector<std::string>& tokens,
                         const LayoutSchema& schema) {
  ParseState st = parse_impl(tokens, schema);
  ParseResult r;
  r.diagnostics = std::move(st.diagnostics);
  if (r.diagnostics.empty()) r.graph = std::move(st.graph);
  return r;
}

LayoutGraph build_graph(const std::vector<std::string>& tokens,
                        const LayoutSchema& schema) {
  ParseState st = parse_impl(tokens, schema);
  if (!st.diagnostics.empty())
    throw GrammarError("token sequence does not parse (" +
                       std::to_string(st.diagnostics.size()) +
                       " violations); post-process it first");
  return std::move(st.graph);
}

PostProcessReport postprocess(const TaggedTranscription& input,
                              const LayoutSchema& schema) {
  if (input.confidences &&
      input.confidences->size() != input.tokens.size())
    throw ConfigError("confidences must align 1:1 with tokens");

  PostProcessReport rep;
  const bool with_conf = input.confidences.has_value();
  if (with_conf) rep.corrected_confidences.emplace();
  std::vector<int> stack;

  auto emit = [&](const std::string& tok, std::optional<double> conf) {
    rep.corrected_tokens.push_back(tok);
    if (with_conf) rep.corrected_confidences->push_back(conf.value_or(0.0));
  };
  auto close_top = [&](bool charge) {
    int cls = stack.back();
    stack.pop_back();
    emit(schema.cls(cls).end, std::nullopt);
    if (charge) ++rep.n_ppe;
  };

  for (std::size_t i = 0; i < input.tokens.size(); ++i) {
    const std::string& tok = input.tokens[i];
    std::optional<double> conf;
    if (with_conf) conf = (*input.confidences)[i];

    if (auto b = schema.begin_class(tok)) {
      // Close entities the new one cannot live under, then open any
      // missing ancestors. Termination: the stack only shrinks until a
      // chain from the root is found, which the schema guarantees.
      for (;;) {
        int context = stack.empty() ? kRoot : stack.back();
        auto chain = schema.ancestor_chain(context, *b);
        if (chain) {
          for (int a : *chain) {
            emit(schema.cls(a).begin, std::nullopt);
            stack.push_back(a);
            ++rep.n_ppe;
          }
          emit(tok, conf);
          stack.push_back(*b);
          break;
        }
        close_top(true);
      }
    } else if (auto e = schema.end_class(tok)) {
      if (std::find(stack.begin(), stack.end(), *e) == stack.end()) {
        ++rep.n_ppe;  // isolated end token removed
        continue;
      }
      while (stack.back() != *e) close_top(true);
      stack.pop_back();
      emit(tok, conf);
    } else {
      emit(tok, conf);
    }
  }
  while (!stack.empty()) close_top(true);
  return rep;
}

namespace {

// Interned graph for the edit-distance search.
struct IGraph {
  int n = 0;
  std::vector<int> label;
  std::vector<std::vector<std::uint8_t>> adj;  // kind masks: 1=hierarchy, 2=order
  long edge_total = 0;
};

IGraph intern(const LayoutGraph& g, std::map<std::string, int>& labels) {
  IGraph ig;
  ig.n = g.num_nodes();
  ig.label.resize(static_cast<std::size_t>(ig.n));
  for (int i = 0; i < ig.n; ++i) {
    const std::string& cls = g.node_class[static_cast<std::size_t>(i)];
    auto [it, inserted] = labels.emplace(cls, static_cast<int>(labels.size()));
    ig.label[static_cast<std::size_t>(i)] = it->second;
  }
  ig.adj.assign(static_cast<std::size_t>(ig.n),
                std::vector<std::uint8_t>(static_cast<std::size_t>(ig.n), 0));
  for (auto [a, b] : g.hierarchy_edges) ig.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] |= 1;
  for (auto [a, b] : g.order_edges) ig.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] |= 2;
  for (int a = 0; a < ig.n; ++a)
    for (int b = 0; b < ig.n; ++b)
      ig.edge_total += popcount(ig.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
  return ig;
}

struct SearchState {
  long f = 0;
  long g = 0;
  int k = 0;
  std::uint64_t used = 0;
  std::vector<int> assign;
};

struct StateOrder {
  bool operator()(const SearchState& a, const SearchState& b) const {
    return a.f > b.f;
  }
};

long remaining_edges(const IGraph& g, const std::vector<bool>& open) {
  long e = 0;
  for (int a = 0; a < g.n; ++a) {
    if (!open[static_cast<std::size_t>(a)]) continue;
    for (int b = 0; b < g.n; ++b)
      if (open[static_cast<std::size_t>(b)])
        e += popcount(g.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
  }
  return e;
}

long heuristic(const IGraph& g1, const IGraph& g2, int k, std::uint64_t used,
               int num_labels) {
  std::vector<int> c1(static_cast<std::size_t>(num_labels), 0);
  std::vector<int> c2(static_cast<std::size_t>(num_labels), 0);
  int r1 = 0, r2 = 0;
  std::vector<bool> open1(static_cast<std::size_t>(g1.n), false);
  std::vector<bool> open2(static_cast<std::size_t>(g2.n), false);
  for (int i = k; i < g1.n; ++i) {
    ++c1[static_cast<std::size_t>(g1.label[static_cast<std::size_t>(i)])];
    ++r1;
    open1[static_cast<std::size_t>(i)] = true;
  }
  for (int v = 0; v < g2.n; ++v) {
    if (used & (1ULL << v)) continue;
    ++c2[static_cast<std::size_t>(g2.label[static_cast<std::size_t>(v)])];
    ++r2;
    open2[static_cast<std::size_t>(v)] = true;
  }
  int matched = 0;
  for (int l = 0; l < num_labels; ++l)
    matched += std::min(c1[static_cast<std::size_t>(l)], c2[static_cast<std::size_t>(l)]);
  long h_nodes = std::max(r1, r2) - matched;
  long h_edges = std::labs(remaining_edges(g1, open1) - remaining_edges(g2, open2));
  return h_nodes + h_edges;
}

long astar_ged(const LayoutGraph& ga, const LayoutGraph& gb, long budget) {
  std::map<std::string, int> labels;
  IGraph g1 = intern(ga, labels);
  IGraph g2 = intern(gb, labels);
  if (g2.n > 62 || g1.n > 62)
    throw SizeError("graph too large for exact edit distance");
  const int num_labels = static_cast<int>(labels.size());

  auto pair_delta = [&](const SearchState& s, int v) {
    // Edge costs settled by assigning node s.k of g1 to v (or -1).
    long d = 0;
    for (int i = 0; i < s.k; ++i) {
      std::uint8_t m1f = g1.adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(s.k)];
      std::uint8_t m1b = g1.adj[static_cast<std::size_t>(s.k)][static_cast<std::size_t>(i)];
      int ai = s.assign[static_cast<std::size_t>(i)];
      if (ai >= 0 && v >= 0) {
        std::uint8_t m2f = g2.adj[static_cast<std::size_t>(ai)][static_cast<std::size_t>(v)];
        std::uint8_t m2b = g2.adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(ai)];
        d += edge_pair_cost(m1f, m2f) + edge_pair_cost(m1b, m2b);
      } else {
        d += popcount(m1f) + popcount(m1b);
      }
    }
    return d;
  };

  auto completion = [&](const SearchState& s) {
    // Unmatched g2 nodes are inserted, along with every g2 edge that
    // touches at least one of them.
    long d = 0;
    for (int v = 0; v < g2.n; ++v)
      if (!(s.used & (1ULL << v))) ++d;
    for (int a = 0; a < g2.n; ++a)
      for (int b = 0; b < g2.n; ++b) {
        if (!g2.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
        if (!(s.used & (1ULL << a)) || !(s.used & (1ULL << b)))
          d += popcount(g2.adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
      }
    return d;
  };

  std::priority_queue<SearchState, std::vector<SearchState>, StateOrder> queue;
  SearchState start;
  if (g1.n == 0) {
    start.g = completion(start);  // everything in g2 is inserted
    start.f = start.g;
  } else {
    start.f = heuristic(g1, g2, 0, 0, num_labels);
  }
  queue.push(start);
  long expansions = 0;

  while (!queue.empty()) {
    SearchState s = queue.top();
    queue.pop();
    if (s.k == g1.n) return s.g;
    if (++expansions > budget)
      throw BudgetExceededError("edit-distance search budget exceeded", s.f);

    // Map node k to every unused node of g2, or delete it.
    for (int v = -1; v < g2.n; ++v) {
      if (v >= 0 && (s.used & (1ULL << v))) continue;
      SearchState nxt = s;
      nxt.k = s.k + 1;
      nxt.assign.push_back(v);
      long node_cost;
      if (v < 0) {
        node_cost = 1;
      } else {
        nxt.used |= (1ULL << v);
        node_cost = g1.label[static_cast<std::size_t>(s.k)] ==
                            g2.label[static_cast<std::size_t>(v)]
                        ? 0
                        : 1;
      }
      nxt.g = s.g + node_cost + pair_delta(s, v);
      if (nxt.k == g1.n) {
        nxt.g += completion(nxt);
        nxt.f = nxt.g;
      } else {
        nxt.f = nxt.g + heuristic(g1, g2, nxt.k, nxt.used, num_labels);
      }
      queue.push(std::move(nxt));
    }
  }
  throw Error("edit-distance search exhausted without a goal");
}

std::vector<int> root_children(const LayoutGraph& g) {
  std::vector<int> out;
  for (auto [a, b] : g.hierarchy_edges)
    if (a == 0) out.push_back(b);
  return out;
}

// Page subtree plus a fresh root and the root-to-page edge.
LayoutGraph page_subgraph(const LayoutGraph& g, int page_node) {
  std::vector<int> nodes{page_node};
  std::set<int> in_tree{page_node};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (auto [a, b] : g.hierarchy_edges)
      if (a == nodes[i] && !in_tree.count(b)) {
        in_tree.insert(b);
        nodes.push_back(b);
      }
  }
  std::map<int, int> remap;
  LayoutGraph sub;
  sub.node_class.push_back("");
  for (int n : nodes) {
    remap[n] = sub.num_nodes();
    sub.node_class.push_back(g.node_class[static_cast<std::size_t>(n)]);
  }
  sub.hierarchy_edges.emplace_back(0, remap[page_node]);
  for (auto [a, b] : g.hierarchy_edges)
    if (in_tree.count(a) && in_tree.count(b))
      sub.hierarchy_edges.emplace_back(remap[a], remap[b]);
  for (auto [a, b] : g.order_edges)
    if (in_tree.count(a) && in_tree.count(b))
      sub.order_edges.emplace_back(remap[a], remap[b]);
  return sub;
}

}  // namespace

GedResult ged_detailed(const LayoutGraph& a, const LayoutGraph& b,
                       const GedOptions& opt) {
  GedResult r;
  if (opt.page_class && !a.is_null() && !b.is_null()) {
    auto pages_of = [&](const LayoutGraph& g, std::vector<int>& pages) {
      bool all_pages = true;
      for (int child : root_children(g)) {
        if (g.node_class[static_cast<std::size_t>(child)] == *opt.page_class)
          pages.push_back(child);
        else
          all_pages = false;
      }
      return all_pages;
    };
    std::vector<int> pages_a, pages_b;
    bool clean_a = pages_of(a, pages_a);
    bool clean_b = pages_of(b, pages_b);
    if (!pages_a.empty() && !pages_b.empty() && clean_a && clean_b) {
      r.decomposed = true;
      std::size_t paired = std::min(pages_a.size(), pages_b.size());
      for (std::size_t i = 0; i < paired; ++i)
        r.distance += astar_ged(page_subgraph(a, pages_a[i]),
                                page_subgraph(b, pages_b[i]), opt.budget);
      auto extra_cost = [&](const LayoutGraph& g, int page) {
        LayoutGraph sub = page_subgraph(g, page);
        // Subtree nodes and edges, plus the order edge that chained the
        // page to its predecessor; the fresh root and its edge already
        // appear in the subgraph counts, so remove the root node again.
        return static_cast<long>(sub.num_nodes() - 1 + sub.num_edges() + 1);
      };
      for (std::size_t i = paired; i < pages_a.size(); ++i)
        r.distance += extra_cost(a, pages_a[i]);
      for (std::size_t i = paired; i < pages_b.size(); ++i)
        r.distance += extra_cost(b, pages_b[i]);
      r.unpaired_pages = static_cast<int>(pages_a.size() + pages_b.size() - 2 * paired);
      return r;
    }
  }
  r.distance = astar_ged(a, b, opt.budget);
  return r;
}

long ged(const LayoutGraph& a, const LayoutGraph& b, const GedOptions& opt) {
  return ged_detailed(a, b, opt).distance;
}

LoerResult loer_detailed(
    const std::vector<std::pair<LayoutGraph, LayoutGraph>>& pairs,
    const GedOptions& opt) {
  if (pairs.empty()) throw UndefinedMetricError("loer undefined: no pairs");
  LoerResult r;
  for (const auto& [gt, pred] : pairs) {
    GedResult gr = ged_detailed(gt, pred, opt);
    r.total_ged += gr.distance;
    r.total_norm += gt.num_nodes() + gt.num_edges();
    if (gr.unpaired_pages > 0) ++r.page_count_mismatches;
  }
  if (r.total_norm == 0)
    throw UndefinedMetricError("loer undefined: empty ground-truth graphs");
  r.value = static_cast<double>(r.total_ged) / static_cast<double>(r.total_norm);
  return r;
}

double loer(const std::vector<std::pair<LayoutGraph, LayoutGraph>>& pairs,
            const GedOptions& opt) {
  return loer_detailed(pairs, opt).value;
}

double pper(const std::vector<PostProcessReport>& reports,
            const std::vector<TaggedTranscription>& ground_truths,
            const LayoutSchema& schema) {
  long edits = 0;
  for (const auto& r : reports) edits += r.n_ppe;
  long layout_tokens = 0;
  for (const auto& gt : ground_truths)
    for (const auto& tok : gt.tokens)
      if (schema.is_layout_token(tok)) ++layout_tokens;
  if (layout_tokens == 0)
    throw UndefinedMetricError("pper undefined: no ground-truth layout tokens");
  return static_cast<double>(edits) / static_cast<double>(layout_tokens);
}

namespace {

struct Span {
  int cls;
  std::string text;
  double confidence;
  std::size_t begin_pos, end_pos;
};

// Spans between matching begin/end tokens; character content includes
// nested spans' characters with their tags stripped.
std::vector<Span> extract_spans(const std::vector<std::string>& tokens,
                                const std::vector<double>* confidences,
                                const LayoutSchema& schema) {
  struct Open {
    int cls;
    std::size_t pos;
    double begin_conf;
    std::string text;
  };
  std::vector<Open> stack;
  std::vector<Span> spans;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (auto b = schema.begin_class(tok)) {
      stack.push_back({*b, i, confidences ? (*confidences)[i] : 0.0, {}});
    } else if (auto e = schema.end_class(tok)) {
      if (stack.empty() || stack.back().cls != *e)
        throw GrammarError("unbalanced layout tokens; post-process first");
      Open open = std::move(stack.back());
      stack.pop_back();
      double conf =
          confidences ? (open.begin_conf + (*confidences)[i]) / 2.0 : 0.0;
      if (!stack.empty()) stack.back().text += open.text;
      spans.push_back(
          {open.cls, std::move(open.text), conf, open.pos, i});
    } else {
      if (!stack.empty()) stack.back().text += tok;
    }
  }
  if (!stack.empty())
    throw GrammarError("unclosed layout tokens; post-process first");
  return spans;
}

double span_cer(const std::string& pred, const std::string& gt) {
  std::u32string ugt = textmetrics::decode_utf8(gt);
  std::u32string upred = textmetrics::decode_utf8(pred);
  if (ugt.empty())
    return upred.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  return static_cast<double>(textmetrics::levenshtein(upred, ugt)) /
         static_cast<double>(ugt.size());
}

}  // namespace

std::map<std::string, std::vector<SubSequence>> extract_subsequences(
    const TaggedTranscription& pred, const LayoutSchema& schema) {
  if (!pred.confidences)
    throw ConfigError("sub-sequence extraction needs token confidences");
  if (pred.confidences->size() != pred.tokens.size())
    throw ConfigError("confidences must align 1:1 with tokens");
  auto spans = extract_spans(pred.tokens, &*pred.confidences, schema);
  std::map<std::string, std::vector<SubSequence>> out;
  for (auto& s : spans)
    out[schema.cls(s.cls).name].push_back(
        {std::move(s.text), s.confidence, s.begin_pos, s.end_pos});
  for (auto& [cls, list] : out)
    std::stable_sort(list.begin(), list.end(),
                     [](const SubSequence& a, const SubSequence& b) {
                       return a.confidence > b.confidence;
                     });
  return out;
}

std::vector<double> map_cer_thresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 10; ++i) t.push_back(0.05 * i);
  return t;
}

double map_cer(const TaggedTranscription& pred, const TaggedTranscription& gt,
               const LayoutSchema& schema) {
  auto pred_spans = extract_subsequences(pred, schema);
  auto gt_spans_flat = extract_spans(gt.tokens, nullptr, schema);

  std::map<std::string, std::vector<std::string>> gt_by_class;
  std::map<std::string, long> chars_by_class;
  for (auto& s : gt_spans_flat) {
    const std::string& name = schema.cls(s.cls).name;
    chars_by_class[name] +=
        static_cast<long>(textmetrics::decode_utf8(s.text).size());
    gt_by_class[name].push_back(std::move(s.text));
  }
  long total_chars = 0;
  for (const auto& [cls, n] : chars_by_class) total_chars += n;
  if (total_chars == 0)
    throw UndefinedMetricError("map_cer undefined: empty ground-truth text");

  static const std::vector<SubSequence> kNoPreds;
  double weighted = 0.0;
  for (const auto& [cls, gt_texts] : gt_by_class) {
    long len_c = chars_by_class[cls];
    if (len_c == 0) continue;
    auto it = pred_spans.find(cls);
    const auto& preds = it == pred_spans.end() ? kNoPreds : it->second;

    double ap_sum = 0.0;
    for (double threshold : map_cer_thresholds()) {
      std::vector<bool> consumed(gt_texts.size(), false);
      std::vector<bool> is_tp(preds.size(), false);
      for (std::size_t n = 0; n < preds.size(); ++n) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_g = gt_texts.size();
        for (std::size_t g = 0; g < gt_texts.size(); ++g) {
          if (consumed[g]) continue;
          double c = span_cer(preds[n].text, gt_texts[g]);
          if (c <= threshold && c < best) {
            best = c;
            best_g = g;
          }
        }
        if (best_g < gt_texts.size()) {
          consumed[best_g] = true;
          is_tp[n] = true;
        }
      }
      ap_sum += segmetrics::interpolated_ap(is_tp, gt_texts.size());
    }
    weighted += (ap_sum / 10.0) * static_cast<double>(len_c);
  }
  return weighted / static_cast<double>(total_chars);
}

}  // namespace docrec::layout
