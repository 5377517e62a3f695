// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "docrec/cli.hpp"
#include "docrec/ctc.hpp"
#include "docrec/lattice_io.hpp"
#include "docrec/report.hpp"

using namespace docrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "docrec_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  std::string at(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSchemaJson = R"({
  "root": "D",
  "classes": [
    {"name": "X", "begin": "<X>", "end": "</X>", "parents": []},
    {"name": "B", "begin": "<B>", "end": "</B>", "parents": []},
    {"name": "A", "begin": "<A>", "end": "</A>", "parents": ["B"]}
  ]
})";

std::string tagged_line(const std::string& id, const std::string& tokens,
                        bool with_conf) {
  std::string json = "{\"id\":\"" + id + "\",\"tokens\":[";
  std::string confs = "[";
  bool first = true;
  for (char c : tokens) {
    if (!first) {
      json += ",";
      confs += ",";
    }
    first = false;
    if (c == '(')
      json += "\"<X>\"";
    else if (c == ')')
      json += "\"</X>\"";
    else
      json += std::string("\"") + c + "\"";
    confs += "0.9";
  }
  json += "]";
  confs += "]";
  if (with_conf) json += ",\"conf\":" + confs;
  return json + "}";
}

}  // namespace

TEST_CASE("report_format is canonical") {
  std::map<std::string, ReportValue> r;
  r["cer"] = 0.791666666;
  r["n"] = 12L;
  r["name"] = std::string("x");
  std::string a = report_format(r);
  std::string b = report_format(r);
  CHECK(a == b);
  CHECK(a == "{\"cer\":0.791667,\"n\":12,\"name\":\"x\"}");
  CHECK(report_format({}) == "{}");
}

TEST_CASE("eval-text on identical pairs reports zero error") {
  TempDir dir;
  std::string pairs = dir.file(
      "pairs.jsonl",
      "{\"id\":\"a\",\"gt\":\"hello world\",\"pred\":\"hello world\"}\n"
      "{\"id\":\"b\",\"gt\":\"second line\",\"pred\":\"second line\"}\n");
  RunResult r = run_cli({"eval-text", pairs});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"cer\":0.000000,\"wer\":0.000000}\n");
}

TEST_CASE("eval-text respects the word mode flag") {
  TempDir dir;
  std::string pairs = dir.file(
      "pairs.jsonl", "{\"id\":\"a\",\"gt\":\"a cat !\",\"pred\":\"a cat .\"}\n");
  RunResult words = run_cli({"eval-text", pairs, "--word-mode", "punct-word"});
  RunResult attached =
      run_cli({"eval-text", pairs, "--word-mode", "punct-attached"});
  CHECK(words.out.find("\"wer\":0.333333") != std::string::npos);
  CHECK(attached.out.find("\"wer\":0.500000") != std::string::npos);
}

TEST_CASE("eval-text output does not depend on the job count") {
  TempDir dir;
  std::string content;
  for (int i = 0; i < 23; ++i)
    content += "{\"id\":\"x\",\"gt\":\"line number " + std::to_string(i) +
               "\",\"pred\":\"line numbre " + std::to_string(i) + "\"}\n";
  std::string pairs = dir.file("pairs.jsonl", content);
  RunResult one = run_cli({"eval-text", pairs, "--jobs", "1"});
  RunResult four = run_cli({"eval-text", pairs, "--jobs", "4"});
  CHECK(one.code == 0);
  CHECK(one.out == four.out);
}

TEST_CASE("eval-seg scores the worked box instance") {
  TempDir dir;
  std::string boxes = dir.file(
      "boxes.jsonl",
      R"({"image":"i0","gt":[{"box":[0,0,9,9],"class":0}],"pred":[{"box":[0,0,9,9],"class":0,"conf":0.9}]})"
      "\n");
  RunResult r = run_cli({"eval-seg", boxes, "--weighting", "items"});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"map\":1.000000,\"weighting\":\"items\"}\n");
}

TEST_CASE("eval-layout on identical inputs is perfect") {
  TempDir dir;
  std::string schema = dir.file("schema.json", kSchemaJson);
  // (abc) encodes <X>abc</X>.
  std::string pred_content = tagged_line("d0", "(abc)", true) + "\n" +
                             tagged_line("d1", "(xy)", true) + "\n";
  std::string gt_content = tagged_line("d0", "(abc)", false) + "\n" +
                           tagged_line("d1", "(xy)", false) + "\n";
  std::string preds = dir.file("preds.jsonl", pred_content);
  std::string gts = dir.file("gts.jsonl", gt_content);
  RunResult r = run_cli({"eval-layout", "--schema", schema, preds, gts});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"loer\":0.000000,\"map_cer\":1.000000,\"pper\":0.000000}\n");
}

TEST_CASE("eval-layout flags mismatched file lengths as usage errors") {
  TempDir dir;
  std::string schema = dir.file("schema.json", kSchemaJson);
  std::string preds = dir.file("p.jsonl", tagged_line("d0", "(a)", true) + "\n");
  std::string gts = dir.file("g.jsonl", "");
  RunResult r = run_cli({"eval-layout", "--schema", schema, preds, gts});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("decode reads a lattice file and prints the text") {
  TempDir dir;
  ctc::TokenDictionary dict = ctc::TokenDictionary::from_charset("ab");
  Matrix m(4, 3);
  m << 0.8, 0.1, 0.1,  // a
       0.1, 0.1, 0.8,  // blank
       0.1, 0.8, 0.1,  // b
       0.1, 0.8, 0.1;  // b (repeat collapses)
  std::string lat = dir.at("line.latt");
  ctc::write_lattice_file(lat, ctc::ProbLattice1D{m});
  RunResult r = run_cli({"decode", lat, "--charset", "ab"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"text\":\"ab\"") != std::string::npos);

  // JSON lattices decode through the same entry point.
  std::string json_lat = dir.file(
      "line.json", ctc::lattice_to_json(ctc::AnyLattice{ctc::ProbLattice1D{m}}));
  RunResult rj = run_cli({"decode", json_lat, "--charset", "ab"});
  CHECK(rj.code == 0);
  CHECK(rj.out.find("\"text\":\"ab\"") != std::string::npos);
}

TEST_CASE("decode joins paragraph lines under a policy") {
  TempDir dir;
  auto write_line = [&](const std::string& name, double a_weight) {
    Matrix m(3, 3);
    m << a_weight, 0.1, 0.9 - a_weight,
         0.1, 0.1, 0.8,
         0.1, 0.1, 0.8;
    std::string p = dir.at(name);
    ctc::write_lattice_file(p, ctc::ProbLattice1D{m});
    return p;
  };
  std::string l0 = write_line("l0.latt", 0.8);
  std::string l1 = write_line("l1.latt", 0.8);
  std::string l2 = write_line("l2.latt", 0.0);  // decodes empty
  RunResult r = run_cli({"decode", l0, l1, l2, "--charset", "ab", "--policy",
                         "early"});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"lines_used\":2,\"text\":\"a a\"}\n");
}

TEST_CASE("gen writes deterministic documents and valid ground truth") {
  TempDir dir;
  std::string sheet = dir.file("sheet.json", R"({
    "root": "D",
    "template": {"height": 1400, "width": 700},
    "classes": [
      {"name": "T", "begin": "<T>", "end": "</T>", "parents": [],
       "max_lines": 4, "max_chars_per_line": 30, "frequency": 1.0,
       "indent": [0, 16]}
    ],
    "corpus": {"T": ["a small line of text", "another synthetic line"]}
  })");
  RunResult a = run_cli({"gen", "--stylesheet", sheet, "--out", dir.at("out_a"),
                         "--count", "3", "--seed", "11", "--curriculum-l", "6"});
  REQUIRE(a.code == 0);
  RunResult b = run_cli({"gen", "--stylesheet", sheet, "--out", dir.at("out_b"),
                         "--count", "3", "--seed", "11", "--curriculum-l", "6"});
  REQUIRE(b.code == 0);

  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "doc_%05d.pgm", i);
    std::ifstream fa(dir.at("out_a") + "/" + name, std::ios::binary);
    std::ifstream fb(dir.at("out_b") + "/" + name, std::ios::binary);
    REQUIRE(fa.good());
    REQUIRE(fb.good());
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
  }
  std::ifstream gt(dir.at("out_a") + "/gt.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(gt, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("kernel-check reports success through the cli") {
  RunResult r = run_cli({"kernel-check"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("usage errors exit with code two") {
  CHECK(run_cli({"no-such-command"}).code == 2);
  CHECK(run_cli({"eval-text", "/nonexistent/file.jsonl"}).code == 2);
  CHECK(run_cli({"decode", "/nonexistent/file.latt", "--charset", "ab"}).code !=
        0);
  TempDir dir;
  std::string bad = dir.file("bad.jsonl", "{not json}\n");
  CHECK(run_cli({"eval-text", bad}).code == 2);
}

TEST_CASE("every subcommand exposes help text") {
  for (const char* sub :
       {"eval-text", "eval-seg", "eval-layout", "decode", "gen", "kernel-check"}) {
    RunResult r = run_cli({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
}
