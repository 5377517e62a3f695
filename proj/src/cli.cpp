// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "docrec/ctc.hpp"
#include "docrec/errors.hpp"
#include "docrec/image.hpp"
#include "docrec/kernel_check.hpp"
#include "docrec/lattice_io.hpp"
#include "docrec/layout.hpp"
#include "docrec/report.hpp"
#include "docrec/segmetrics.hpp"
#include "docrec/syndoc.hpp"
#include "docrec/textmetrics.hpp"

namespace docrec::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw UsageError(path + ":" + std::to_string(lineno) + ": malformed JSON");
    out.push_back(std::move(j));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(i) for i in [0, n) over `jobs` threads; exceptions surface on
// the caller thread. Work is partitioned by index, so reductions done
// by index afterwards stay order-independent.
template <class Fn>
void parallel_for(int jobs, std::size_t n, Fn fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::size_t chunk = (n + static_cast<std::size_t>(jobs) - 1) / static_cast<std::size_t>(jobs);
  for (int w = 0; w < jobs; ++w) {
    threads.emplace_back([&, w] {
      std::size_t lo = static_cast<std::size_t>(w) * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_eval_text(const std::string& path, const std::string& word_mode,
                  bool nfc, int jobs, std::ostream& out) {
  std::vector<json> lines = read_jsonl(path);
  std::vector<textmetrics::EvalPair> pairs;
  for (const auto& j : lines) {
    if (!j.contains("gt") || !j.contains("pred"))
      throw UsageError(path + ": each line needs gt and pred fields");
    pairs.push_back({j["gt"].get<std::string>(), j["pred"].get<std::string>()});
  }
  textmetrics::TextOptions opt;
  opt.nfc = nfc;
  textmetrics::WordMode mode = word_mode == "punct-attached"
                                   ? textmetrics::WordMode::punct_attached
                                   : textmetrics::WordMode::punct_as_word;

  // Exact integer sums per pair keep the reduction order-independent.
  std::vector<long> cdist(pairs.size()), clen(pairs.size());
  std::vector<long> wdist(pairs.size()), wlen(pairs.size());
  parallel_for(jobs, pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    std::u32string gt = textmetrics::decode_utf8(p.ground_truth);
    std::u32string pr = textmetrics::decode_utf8(p.prediction);
    cdist[i] = textmetrics::levenshtein(p.prediction, p.ground_truth, opt);
    clen[i] = static_cast<long>(gt.size());
    (void)pr;
    auto gtw = textmetrics::tokenize_words(p.ground_truth, mode, opt);
    auto prw = textmetrics::tokenize_words(p.prediction, mode, opt);
    wdist[i] = textmetrics::levenshtein(prw, gtw);
    wlen[i] = static_cast<long>(gtw.size());
  });
  long cd = 0, cl = 0, wd = 0, wl = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cd += cdist[i];
    cl += clen[i];
    wd += wdist[i];
    wl += wlen[i];
  }
  if (cl == 0 || wl == 0)
    throw UndefinedMetricError("metrics undefined: empty ground truth");
  std::map<std::string, ReportValue> rep;
  rep["cer"] = static_cast<double>(cd) / static_cast<double>(cl);
  rep["wer"] = static_cast<double>(wd) / static_cast<double>(wl);
  out << report_format(rep) << "\n";
  return 0;
}

segmetrics::BBox parse_box(const json& j) {
  segmetrics::BBox b;
  const auto& arr = j.at("box");
  b.x_min = arr[0].get<long>();
  b.y_min = arr[1].get<long>();
  b.x_max = arr[2].get<long>();
  b.y_max = arr[3].get<long>();
  b.class_id = j.value("class", 0);
  return b;
}

int cmd_eval_seg(const std::string& path, const std::string& weighting,
                 std::ostream& out) {
  std::vector<json> lines = read_jsonl(path);
  // Matching is per image; AP pools predictions across images. Boxes
  // get an image tag via a coordinate offset-free composite key: we
  // keep per-image GT lists and give each prediction its image index.
  struct ImageSet {
    std::map<int, std::vector<segmetrics::BBox>> gts;
    std::map<int, std::vector<segmetrics::ScoredPrediction>> preds;
  };
  std::vector<ImageSet> images;
  for (const auto& j : lines) {
    ImageSet img;
    if (j.contains("gt"))
      for (const auto& g : j["gt"]) img.gts[g.value("class", 0)].push_back(parse_box(g));
    if (j.contains("pred"))
      for (const auto& p : j["pred"])
        img.preds[p.value("class", 0)].push_back(
            {parse_box(p), p.value("conf", 0.0)});
    images.push_back(std::move(img));
  }

  // Pool per class across images by shifting each image onto its own
  // disjoint coordinate stripe, preserving within-image geometry.
  long stripe = 1;
  for (const auto& img : images)
    for (const auto& [cls, boxes] : img.gts)
      for (const auto& b : boxes) stripe = std::max(stripe, b.y_max + 10);
  for (const auto& img : images)
    for (const auto& [cls, preds] : img.preds)
      for (const auto& p : preds) stripe = std::max(stripe, p.box.y_max + 10);

  std::map<int, std::vector<segmetrics::BBox>> gts_by_class;
  std::map<int, std::vector<segmetrics::ScoredPrediction>> preds_by_class;
  for (std::size_t i = 0; i < images.size(); ++i) {
    long dy = static_cast<long>(i) * stripe;
    for (const auto& [cls, boxes] : images[i].gts)
      for (segmetrics::BBox b : boxes) {
        b.y_min += dy;
        b.y_max += dy;
        gts_by_class[cls].push_back(b);
      }
    for (const auto& [cls, preds] : images[i].preds)
      for (segmetrics::ScoredPrediction p : preds) {
        p.box.y_min += dy;
        p.box.y_max += dy;
        preds_by_class[cls].push_back(p);
      }
  }

  segmetrics::MapWeighting w = weighting == "pixels"
                                   ? segmetrics::MapWeighting::pixels
                                   : segmetrics::MapWeighting::items;
  double value = segmetrics::map(preds_by_class, gts_by_class,
                                 segmetrics::default_iou_thresholds(), w);
  std::map<std::string, ReportValue> rep;
  rep["map"] = value;
  rep["weighting"] = weighting;
  out << report_format(rep) << "\n";
  return 0;
}

layout::TaggedTranscription parse_transcription(const json& j) {
  layout::TaggedTranscription t;
  for (const auto& tok : j.at("tokens")) t.tokens.push_back(tok.get<std::string>());
  if (j.contains("conf") && !j["conf"].is_null()) {
    t.confidences.emplace();
    for (const auto& c : j["conf"]) t.confidences->push_back(c.get<double>());
  }
  return t;
}

int cmd_eval_layout(const std::string& schema_path, const std::string& preds_path,
                    const std::string& gts_path, int jobs, std::ostream& out,
                    std::ostream& err) {
  layout::LayoutSchema schema = layout::LayoutSchema::from_json(read_file(schema_path));
  std::vector<json> pred_lines = read_jsonl(preds_path);
  std::vector<json> gt_lines = read_jsonl(gts_path);
  if (pred_lines.size() != gt_lines.size())
    throw UsageError("prediction and ground-truth files differ in length");

  const std::size_t n = pred_lines.size();
  std::vector<layout::TaggedTranscription> preds(n), gts(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds[i] = parse_transcription(pred_lines[i]);
    gts[i] = parse_transcription(gt_lines[i]);
    if (pred_lines[i].contains("id") && gt_lines[i].contains("id") &&
        pred_lines[i]["id"] != gt_lines[i]["id"])
      throw UsageError("document ids diverge at line " + std::to_string(i + 1));
    // Predictions without confidences still evaluate; a uniform score
    // keeps sub-sequence ordering well defined.
    if (!preds[i].confidences)
      preds[i].confidences.emplace(preds[i].tokens.size(), 1.0);
  }

  layout::GedOptions ged_opt;
  ged_opt.page_class = schema.page_class();

  struct DocResult {
    layout::PostProcessReport report;
    long ged = 0;
    long norm = 0;
    bool page_mismatch = false;
    double map_cer = 0.0;
    long chars = 0;
  };
  std::vector<DocResult> results(n);
  parallel_for(jobs, n, [&](std::size_t i) {
    DocResult& r = results[i];
    layout::ParseResult gt_parse = layout::parse_layout(gts[i].tokens, schema);
    if (!gt_parse.ok())
      throw ValidationError("ground truth line " + std::to_string(i + 1) +
                            " violates the layout grammar");
    r.report = layout::postprocess(preds[i], schema);
    layout::LayoutGraph pred_graph =
        layout::build_graph(r.report.corrected_tokens, schema);
    const layout::LayoutGraph& gt_graph = *gt_parse.graph;
    layout::GedResult g = layout::ged_detailed(gt_graph, pred_graph, ged_opt);
    r.ged = g.distance;
    r.norm = gt_graph.num_nodes() + gt_graph.num_edges();
    r.page_mismatch = g.unpaired_pages > 0;
    layout::TaggedTranscription corrected{r.report.corrected_tokens,
                                          r.report.corrected_confidences};
    r.map_cer = layout::map_cer(corrected, gts[i], schema);
    for (const auto& tok : gts[i].tokens)
      if (!schema.is_layout_token(tok))
        r.chars += static_cast<long>(textmetrics::decode_utf8(tok).size());
  });

  long total_ged = 0, total_norm = 0, mismatches = 0;
  double map_weighted = 0.0;
  long map_chars = 0;
  std::vector<layout::PostProcessReport> reports;
  for (const auto& r : results) {
    total_ged += r.ged;
    total_norm += r.norm;
    if (r.page_mismatch) ++mismatches;
    map_weighted += r.map_cer * static_cast<double>(r.chars);
    map_chars += r.chars;
    reports.push_back(r.report);
  }
  if (total_norm == 0 || map_chars == 0)
    throw UndefinedMetricError("layout metrics undefined: empty ground truth");

  std::map<std::string, ReportValue> rep;
  rep["loer"] = static_cast<double>(total_ged) / static_cast<double>(total_norm);
  rep["map_cer"] = map_weighted / static_cast<double>(map_chars);
  rep["pper"] = layout::pper(reports, gts, schema);
  if (mismatches > 0) rep["page_count_mismatches"] = mismatches;
  if (mismatches > 0)
    err << "warning: " << mismatches
        << " document(s) had mismatched page counts; extras were compared "
           "to the null graph in order\n";
  out << report_format(rep) << "\n";
  return 0;
}

int cmd_decode(const std::vector<std::string>& files, const std::string& charset,
               const std::string& policy, int l_max,
               const std::string& stop_probs_path, std::ostream& out) {
  ctc::TokenDictionary dict = ctc::TokenDictionary::from_charset(charset);

  if (!policy.empty()) {
    ctc::StopPolicy sp;
    sp.l_max = l_max;
    if (policy == "fixed") sp.kind = ctc::StopPolicy::Kind::fixed;
    else if (policy == "early") sp.kind = ctc::StopPolicy::Kind::early;
    else if (policy == "learned") sp.kind = ctc::StopPolicy::Kind::learned;
    else throw UsageError("unknown policy: " + policy);

    std::vector<ctc::ProbLattice1D> lines;
    for (const auto& f : files) {
      ctc::AnyLattice any = ctc::read_lattice_file(f);
      if (!std::holds_alternative<ctc::ProbLattice1D>(any))
        throw UsageError("paragraph decoding expects rank-2 lattices: " + f);
      lines.push_back(std::get<ctc::ProbLattice1D>(any));
    }
    std::optional<std::vector<std::pair<double, double>>> stop_probs;
    if (!stop_probs_path.empty()) {
      json j = json::parse(read_file(stop_probs_path), nullptr, false);
      if (j.is_discarded() || !j.is_array())
        throw UsageError("stop probabilities must be a JSON array of pairs");
      stop_probs.emplace();
      for (const auto& p : j)
        stop_probs->emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    ctc::ParagraphResult r = ctc::paragraph_decode(lines, stop_probs, sp, dict);
    std::map<std::string, ReportValue> rep;
    rep["text"] = r.text;
    rep["lines_used"] = static_cast<long>(r.lines_used);
    out << report_format(rep) << "\n";
    return 0;
  }

  for (const auto& f : files) {
    ctc::AnyLattice any = ctc::read_lattice_file(f);
    std::string text;
    if (std::holds_alternative<ctc::ProbLattice1D>(any)) {
      auto r = ctc::best_path_decode(std::get<ctc::ProbLattice1D>(any), dict);
      text = dict.decode(r.labels);
    } else {
      auto labels = ctc::span_decode(std::get<ctc::ProbLattice2D>(any), dict);
      text = dict.decode(labels);
    }
    std::map<std::string, ReportValue> rep;
    rep["file"] = f;
    rep["text"] = text;
    out << report_format(rep) << "\n";
  }
  return 0;
}

int cmd_gen(const std::string& stylesheet_path, const std::string& out_dir,
            int count, std::uint64_t seed, int curriculum_l, bool png,
            int jobs, std::ostream& out) {
  std::string sheet_text = read_file(stylesheet_path);
  syndoc::StyleSheet sheet = syndoc::StyleSheet::from_json(sheet_text);

  json j = json::parse(sheet_text);
  if (!j.contains("corpus"))
    throw UsageError("stylesheet needs an embedded corpus object");
  syndoc::LineCorpus corpus;
  for (auto it = j["corpus"].begin(); it != j["corpus"].end(); ++it)
    for (const auto& line : it.value())
      corpus.by_class[it.key()].push_back(line.get<std::string>());

  syndoc::FontSet fonts = syndoc::FontSet::builtin();
  fs::create_directories(out_dir);

  // Per-document seeds drawn up front so the output does not depend on
  // the parallelism degree.
  Rng master(seed);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(master.next_u64());

  std::vector<syndoc::SynDoc> docs(static_cast<std::size_t>(count));
  parallel_for(jobs, static_cast<std::size_t>(count), [&](std::size_t i) {
    docs[i] = syndoc::generate_document(curriculum_l, sheet, corpus, fonts, seeds[i]);
  });

  std::ofstream gt(fs::path(out_dir) / "gt.jsonl");
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "doc_%05d", i);
    const auto& doc = docs[static_cast<std::size_t>(i)];
    write_pgm((fs::path(out_dir) / (std::string(name) + ".pgm")).string(), doc.image);
    if (png)
      write_png((fs::path(out_dir) / (std::string(name) + ".png")).string(), doc.image);
    json line;
    line["id"] = name;
    line["tokens"] = doc.gt_tokens.tokens;
    line["lines"] = doc.line_count;
    gt << line.dump() << "\n";
  }
  std::map<std::string, ReportValue> rep;
  rep["count"] = static_cast<long>(count);
  rep["out"] = out_dir;
  out << report_format(rep) << "\n";
  return 0;
}

int cmd_kernel_check(std::uint64_t seed, std::ostream& out) {
  auto results = kernels::checks::run_all(seed);
  int failures = 0;
  for (const auto& r : results) {
    out << (r.pass ? "ok   " : "FAIL ") << r.name;
    if (!r.pass && !r.detail.empty()) out << "  (" << r.detail << ")";
    out << "\n";
  }
  for (const auto& r : results)
    if (!r.pass) ++failures;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"document-recognition core toolkit"};
  app.require_subcommand(1);

  // eval-text
  std::string pairs_path, word_mode = "punct-word";
  bool nfc = false;
  int jobs = 1;
  auto* eval_text = app.add_subcommand("eval-text", "character and word error rates");
  eval_text->add_option("pairs", pairs_path, "JSONL of {id, gt, pred}")->required();
  eval_text->add_option("--word-mode", word_mode, "punct-word|punct-attached")
      ->check(CLI::IsMember({"punct-word", "punct-attached"}));
  eval_text->add_flag("--nfc", nfc, "compose Latin diacritics before comparing");
  eval_text->add_option("--jobs", jobs, "worker threads");

  // eval-seg
  std::string boxes_path, weighting = "items";
  auto* eval_seg = app.add_subcommand("eval-seg", "box mAP over IoU thresholds");
  eval_seg->add_option("boxes", boxes_path, "JSONL of {image, gt, pred}")->required();
  eval_seg->add_option("--weighting", weighting, "items|pixels")
      ->check(CLI::IsMember({"items", "pixels"}));

  // eval-layout
  std::string schema_path, preds_path, gts_path;
  auto* eval_layout = app.add_subcommand("eval-layout", "LOER, mAP_CER and PPER");
  eval_layout->add_option("--schema", schema_path, "layout schema JSON")->required();
  eval_layout->add_option("preds", preds_path, "predictions JSONL")->required();
  eval_layout->add_option("gts", gts_path, "ground truth JSONL")->required();
  eval_layout->add_option("--jobs", jobs, "worker threads");

  // decode
  std::vector<std::string> lattice_files;
  std::string charset, policy, stop_probs_path;
  int l_max = 30;
  auto* decode = app.add_subcommand("decode", "best-path / 2D / paragraph decoding");
  decode->add_option("lattices", lattice_files, "LATT or JSON lattice files")
      ->required();
  decode->add_option("--charset", charset, "characters in label order")->required();
  decode->add_option("--policy", policy,
                     "fixed|early|learned: treat inputs as paragraph lines");
  decode->add_option("--l-max", l_max, "line cap for paragraph decoding");
  decode->add_option("--stop-probs", stop_probs_path,
                     "JSON [[p_stop, p_continue], ...] for the learned policy");

  // gen
  std::string stylesheet_path, out_dir;
  int count = 1, curriculum_l = 30;
  std::uint64_t seed = 0;
  bool png = false;
  auto* gen = app.add_subcommand("gen", "synthetic document generation");
  gen->add_option("--stylesheet", stylesheet_path, "style sheet JSON")->required();
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--count", count, "documents to generate");
  gen->add_option("--seed", seed, "generator seed")->required();
  gen->add_option("--curriculum-l", curriculum_l, "line budget upper bound");
  gen->add_flag("--png", png, "also write PNG images");
  gen->add_option("--jobs", jobs, "worker threads");

  // kernel-check
  std::uint64_t check_seed = 7;
  auto* kernel_check = app.add_subcommand("kernel-check",
                                          "run the kernel invariant suite");
  kernel_check->add_option("--seed", check_seed, "suite seed");

  try {
    std::vector<const char*> argv;
    argv.push_back("docrec");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(eval_text))
      return cmd_eval_text(pairs_path, word_mode, nfc, jobs, out);
    if (app.got_subcommand(eval_seg)) return cmd_eval_seg(boxes_path, weighting, out);
    if (app.got_subcommand(eval_layout))
      return cmd_eval_layout(schema_path, preds_path, gts_path, jobs, out, err);
    if (app.got_subcommand(decode))
      return cmd_decode(lattice_files, charset, policy, l_max, stop_probs_path, out);
    if (app.got_subcommand(gen))
      return cmd_gen(stylesheet_path, out_dir, count, seed, curriculum_l, png, jobs, out);
    if (app.got_subcommand(kernel_check)) return cmd_kernel_check(check_seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace docrec::cli
