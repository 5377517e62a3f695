// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one line per criterion, nonzero exit on any
// failure. Tolerances are pinned in the assertions themselves.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "docrec/ctc.hpp"
#include "docrec/kernel_check.hpp"
#include "docrec/kernels.hpp"
#include "docrec/layout.hpp"
#include "docrec/segmetrics.hpp"
#include "docrec/syndoc.hpp"
#include "oracles.hpp"

using namespace docrec;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& fn) {
  std::string detail;
  try {
    detail = fn();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  if (detail.empty()) {
    std::printf("PASS  %s\n", name.c_str());
  } else {
    std::printf("FAIL  %s  (%s)\n", name.c_str(), detail.c_str());
    ++g_failures;
  }
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string ap_worked_example() {
  using namespace docrec::segmetrics;
  std::vector<BBox> gts;
  for (int g = 0; g < 4; ++g) gts.push_back({g * 100, 0, g * 100 + 9, 9, 0});
  auto miss = [](int g) { return BBox{g * 100 + 40, 40, g * 100 + 49, 49, 0}; };
  std::vector<ScoredPrediction> preds = {
      {gts[0], 0.95}, {miss(0), 0.90}, {gts[1], 0.85}, {gts[2], 0.80},
      {miss(1), 0.75}, {gts[3], 0.70}, {miss(2), 0.65}};
  (void)average_precision(preds, gts, 0.5);  // warm up
  auto start = Clock::now();
  double ap = average_precision(preds, gts, 0.5);
  double elapsed = ms_since(start);
  double expected = 0.25 * 1.0 + 0.25 * 0.75 + 0.25 * 0.75 + 0.25 * (4.0 / 6.0);
  if (std::abs(ap - expected) > 1e-6)
    return "ap = " + std::to_string(ap) + ", expected " + std::to_string(expected);
  if (std::abs(ap - 0.791667) > 1e-6) return "ap differs from 0.791667";
  if (elapsed >= 1.0) return "runtime " + std::to_string(elapsed) + " ms";
  return "";
}

std::string ctc_collapse_goldens() {
  using namespace docrec::ctc;
  TokenDictionary dict = TokenDictionary::from_charset("CAT");
  const int blank = dict.blank_index();
  auto lbl = [&](char c) { return dict.index_of(std::string(1, c)); };
  auto check = [&](std::vector<int> path, const std::string& expected) {
    return dict.decode(collapse(path, dict)) == expected;
  };
  if (!check({lbl('C'), lbl('A'), lbl('A'), lbl('A'), lbl('T')}, "CAT"))
    return "beta(CAAAT) != CAT";
  if (!check({lbl('C'), blank, lbl('A'), lbl('A'), lbl('T')}, "CAT"))
    return "beta(C.AAT) != CAT";
  if (!check({lbl('C'), lbl('C'), lbl('A'), blank, lbl('A'), lbl('T')}, "CAAT"))
    return "beta(CCA.AT) != CAAT";
  return "";
}

std::string ctc_oracle_equivalence() {
  using namespace docrec::ctc;
  auto start = Clock::now();
  Rng rng(90210);
  int done = 0;
  while (done < 500) {
    int n_chars = 1 + static_cast<int>(rng.next_below(3));  // card(A) <= 3
    std::string charset = std::string("ABC").substr(0, static_cast<std::size_t>(n_chars));
    TokenDictionary dict = TokenDictionary::from_charset(charset);
    Eigen::Index frames = 1 + static_cast<Eigen::Index>(rng.next_below(8));
    ProbLattice1D lat = oracles::random_lattice(frames, n_chars + 1, rng);
    int target_len = static_cast<int>(rng.next_below(4));
    std::vector<int> target;
    for (int i = 0; i < target_len; ++i)
      target.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_chars))));

    double p_oracle = brute_force_prob(lat, target, dict);
    double p_loss;
    try {
      p_loss = std::exp(-ctc_loss(lat, target, dict));
    } catch (const InfeasibleAlignmentError&) {
      if (p_oracle != 0.0) return "loss infeasible but oracle nonzero";
      continue;  // does not count toward the 500 comparable instances
    }
    if (std::abs(p_loss - p_oracle) > 1e-9)
      return "mismatch " + std::to_string(p_loss) + " vs " + std::to_string(p_oracle);
    ++done;
  }
  double elapsed = ms_since(start);
  if (elapsed >= 30000.0) return "runtime " + std::to_string(elapsed) + " ms";
  return "";
}

std::string ctc_gradient_fd() {
  using namespace docrec::ctc;
  Rng rng(777013);
  for (int instance = 0; instance < 100; ++instance) {
    int n_chars = 1 + static_cast<int>(rng.next_below(2));
    std::string charset = std::string("AB").substr(0, static_cast<std::size_t>(n_chars));
    TokenDictionary dict = TokenDictionary::from_charset(charset);
    int target_len = static_cast<int>(rng.next_below(3));
    std::vector<int> target;
    for (int i = 0; i < target_len; ++i)
      target.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_chars))));
    int repeats = 0;
    for (std::size_t i = 1; i < target.size(); ++i)
      if (target[i] == target[i - 1]) ++repeats;
    Eigen::Index frames = static_cast<Eigen::Index>(target.size()) + repeats + 1 +
                          static_cast<Eigen::Index>(rng.next_below(3));
    Matrix logits(frames, n_chars + 1);
    for (Eigen::Index t = 0; t < frames; ++t)
      for (Eigen::Index k = 0; k <= n_chars; ++k)
        logits(t, k) = rng.next_double() * 3.0 - 1.5;

    LossGrad lg = ctc_loss_grad(logits, target, dict);
    Vector flat(logits.size()), gflat(logits.size());
    for (Eigen::Index t = 0; t < frames; ++t)
      for (Eigen::Index k = 0; k <= n_chars; ++k) {
        flat[t * (n_chars + 1) + k] = logits(t, k);
        gflat[t * (n_chars + 1) + k] = lg.grad(t, k);
      }
    double err = kernels::finite_diff_check(
        [&](const Vector& p) {
          Matrix l(frames, n_chars + 1);
          for (Eigen::Index t = 0; t < frames; ++t)
            for (Eigen::Index k = 0; k <= n_chars; ++k)
              l(t, k) = p[t * (n_chars + 1) + k];
          return ctc_loss_grad(l, target, dict).loss;
        },
        gflat, flat, 1e-4);
    if (err > 1e-4)
      return "instance " + std::to_string(instance) + " error " + std::to_string(err);
  }
  return "";
}

std::string postprocess_goldens() {
  using namespace docrec::layout;
  LayoutSchema flat({{"X", "<X>", "</X>", {}},
                     {"Y", "<Y>", "</Y>", {}},
                     {"Z", "<Z>", "</Z>", {}}});
  PostProcessReport a =
      postprocess({{"<X>", "<Y>", "</Y>", "</Z>"}, std::nullopt}, flat);
  std::string joined;
  for (const auto& t : a.corrected_tokens) joined += t;
  if (joined != "<X></X><Y></Y>") return "case 1 produced " + joined;

  LayoutSchema nested({{"B", "<B>", "</B>", {}},
                       {"A", "<A>", "</A>", {"B"}},
                       {"Y", "<Y>", "</Y>", {}}});
  PostProcessReport b = postprocess({{"<A>", "</Y>"}, std::nullopt}, nested);
  joined.clear();
  for (const auto& t : b.corrected_tokens) joined += t;
  if (joined != "<B><A></A></B>") return "case 2 produced " + joined;
  return "";
}

std::string map_cer_worked_example() {
  using namespace docrec::layout;
  LayoutSchema schema({{"X", "<X>", "</X>", {}},
                       {"B", "<B>", "</B>", {}},
                       {"A", "<A>", "</A>", {"B"}}});
  TaggedTranscription pred;
  pred.confidences.emplace();
  auto push = [&](const std::string& tok, double conf) {
    pred.tokens.push_back(tok);
    pred.confidences->push_back(conf);
  };
  push("<X>", 0.90);
  for (char c : std::string("text1")) push(std::string(1, c), 0.95);
  push("</X>", 0.70);
  push("<B>", 0.95);
  push("<A>", 0.82);
  for (char c : std::string("text2")) push(std::string(1, c), 0.73);
  push("</A>", 0.86);
  push("<A>", 0.80);
  for (char c : std::string("text3")) push(std::string(1, c), 0.89);
  push("</A>", 0.80);
  push("</B>", 0.75);

  auto spans = extract_subsequences(pred, schema);
  auto close = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  if (spans["X"].size() != 1 || spans["X"][0].text != "text1" ||
      !close(spans["X"][0].confidence, 0.80))
    return "class X grouped wrong";
  if (spans["A"].size() != 2 || spans["A"][0].text != "text2" ||
      !close(spans["A"][0].confidence, 0.84) || spans["A"][1].text != "text3" ||
      !close(spans["A"][1].confidence, 0.80))
    return "class A grouped wrong";
  if (spans["B"].size() != 1 || spans["B"][0].text != "text2text3" ||
      !close(spans["B"][0].confidence, 0.85))
    return "class B grouped wrong";
  return "";
}

std::string loer_properties() {
  using namespace docrec::layout;
  LayoutSchema schema({{"P", "<P>", "</P>", {}},
                       {"N", "<N>", "</N>", {"P"}},
                       {"S", "<S>", "</S>", {"P"}},
                       {"A", "<A>", "</A>", {"S"}},
                       {"B", "<B>", "</B>", {"S"}}});
  LayoutGraph g = build_graph(
      {"<P>", "<N>", "</N>", "<S>", "<B>", "</B>", "</S>", "</P>"}, schema);
  if (loer({{g, g}}) != 0.0) return "identical graphs not zero";
  long expected = g.num_nodes() + g.num_edges();
  if (ged(g, LayoutGraph::null_graph()) != expected)
    return "null-graph distance is not nodes+edges";
  if (std::abs(loer({{g, LayoutGraph::null_graph()}}) - 1.0) > 1e-12)
    return "null-graph loer is not 1";

  // Exhaustive-oracle agreement over a corpus of small graphs.
  Rng rng(60601);
  std::vector<LayoutGraph> corpus;
  std::vector<std::string> pool = {"<P>", "</P>", "<N>", "</N>", "<S>",
                                   "</S>", "<A>", "</A>", "<B>", "</B>"};
  while (corpus.size() < 12) {
    std::vector<std::string> soup;
    int len = static_cast<int>(rng.next_below(8));
    for (int i = 0; i < len; ++i) soup.push_back(pool[rng.next_below(pool.size())]);
    PostProcessReport rep = postprocess({soup, std::nullopt}, schema);
    LayoutGraph cand = build_graph(rep.corrected_tokens, schema);
    if (cand.num_nodes() <= 5) corpus.push_back(cand);
  }
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      long fast = ged(corpus[i], corpus[j]);
      long slow = oracles::ged_enumeration(corpus[i], corpus[j]);
      if (fast != slow)
        return "ged mismatch at pair " + std::to_string(i) + "," +
               std::to_string(j) + ": " + std::to_string(fast) + " vs " +
               std::to_string(slow);
    }
  return "";
}

std::string kernel_invariants() {
  auto results = kernels::checks::run_all(424243);
  const char* needed[] = {"softmax_normalized", "attention_weights_normalized",
                          "causal_mask_independence", "window_mask_independence",
                          "coverage_clamped", "pe_bounded_distinct"};
  for (const char* name : needed) {
    bool found = false;
    for (const auto& r : results) {
      if (r.name != name) continue;
      found = true;
      if (!r.pass) return std::string(name) + ": " + r.detail;
    }
    if (!found) return std::string("missing check ") + name;
  }
  return "";
}

std::string stochastic_kernels() {
  auto results = kernels::checks::run_all(515151);
  for (const auto& r : results) {
    if (r.name == "mix_dropout_expectation" && !r.pass)
      return "mix_dropout: " + r.detail;
    if (r.name == "tf_error_rate" && !r.pass) return "tf errors: " + r.detail;
  }
  return "";
}

std::string curriculum_schedule() {
  kernels::ScheduleConfig cfg;
  cfg.tau_bar = 0.2;
  cfg.total_updates = 5e4;
  double at0 = kernels::curriculum_dropout_rate(0.0, cfg);
  if (std::abs(at0 - 1.0) > 1e-12) return "tau_0 = " + std::to_string(at0);
  double atT = kernels::curriculum_dropout_rate(cfg.total_updates, cfg);
  double expected = (1.0 - cfg.tau_bar) * std::exp(-1.0) + cfg.tau_bar;
  if (std::abs(atT - expected) > 1e-12) return "tau_T = " + std::to_string(atT);
  return "";
}

std::string generator_self_consistency() {
  using namespace docrec::syndoc;
  auto start = Clock::now();
  layout::LayoutSchema schema({{"H", "<H>", "</H>", {}},
                               {"B", "<B>", "</B>", {}},
                               {"F", "<F>", "</F>", {}}});
  StyleSheet sheet(schema,
                   {{"H", 2, 30, 1.0, 0, 10},
                    {"B", 6, 36, 3.0, 0, 24},
                    {"F", 1, 24, 0.5, 0, 6}},
                   1700, 700);
  LineCorpus corpus;
  corpus.by_class["H"] = {"ANNUAL REPORT 1872", "LETTER TO THE BOARD"};
  corpus.by_class["B"] = {"the quick brown fox jumps over it",
                          "we hereby acknowledge receipt of",
                          "payment is due within thirty days",
                          "sincerely and with best regards"};
  corpus.by_class["F"] = {"page 1 of 2", "continued overleaf"};
  FontSet fonts = FontSet::builtin();

  const int curriculum_l = 30;
  for (int i = 0; i < 1000; ++i) {
    SynDoc doc = generate_document(curriculum_l, sheet, corpus, fonts,
                                   static_cast<std::uint64_t>(i));
    if (!layout::parse_layout(doc.gt_tokens.tokens, schema).ok())
      return "document " + std::to_string(i) + " does not parse";
    if (layout::loer({{doc.gt_graph, doc.gt_graph}}) != 0.0)
      return "document " + std::to_string(i) + " self-loer nonzero";
    if (doc.line_count < 1 || doc.line_count > curriculum_l)
      return "document " + std::to_string(i) + " line count " +
             std::to_string(doc.line_count);
  }
  double elapsed = ms_since(start);
  if (elapsed >= 60000.0) return "runtime " + std::to_string(elapsed) + " ms";
  return "";
}

}  // namespace

int main() {
  criterion("ap_worked_example", ap_worked_example);
  criterion("ctc_automaton_goldens", ctc_collapse_goldens);
  criterion("ctc_oracle_equivalence_500", ctc_oracle_equivalence);
  criterion("ctc_gradient_finite_difference_100", ctc_gradient_fd);
  criterion("postprocess_goldens", postprocess_goldens);
  criterion("map_cer_worked_example", map_cer_worked_example);
  criterion("loer_properties_and_ged_oracle", loer_properties);
  criterion("kernel_invariants", kernel_invariants);
  criterion("stochastic_kernels_3se", stochastic_kernels);
  criterion("curriculum_dropout_endpoints", curriculum_schedule);
  criterion("generator_self_consistency_1000", generator_self_consistency);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
