// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <string>

#include "docrec/rng.hpp"
#include "docrec/textmetrics.hpp"
#include "oracles.hpp"

using namespace docrec;
using namespace docrec::textmetrics;

namespace {

std::string random_string(Rng& rng, std::size_t max_len,
                          const std::string& alphabet = "abc") {
  std::string s;
  std::size_t len = rng.next_below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i)
    s.push_back(alphabet[rng.next_below(alphabet.size())]);
  return s;
}

}  // namespace

TEST_CASE("levenshtein base cases and goldens") {
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein matches the recursive oracle on short strings") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a = random_string(rng, 6);
    std::string b = random_string(rng, 6);
    CHECK(levenshtein(a, b) == oracles::lev_recursive(a, b));
  }
}

TEST_CASE("levenshtein is symmetric, metric-like and bounded") {
  Rng rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a = random_string(rng, 8);
    std::string b = random_string(rng, 8);
    std::string c = random_string(rng, 8);
    long ab = levenshtein(a, b);
    CHECK(ab == levenshtein(b, a));
    CHECK(ab <= levenshtein(a, c) + levenshtein(c, b));
    CHECK(ab <= static_cast<long>(std::max(a.size(), b.size())));
    CHECK(ab >= std::labs(static_cast<long>(a.size()) -
                          static_cast<long>(b.size())));
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("levenshtein counts unicode scalars, not bytes") {
  CHECK(levenshtein("café", "cafe") == 1);
}

TEST_CASE("cer goldens") {
  CHECK(cer({{"abc", "abc"}}) == doctest::Approx(0.0));
  CHECK(cer({{"ab", "ab"}, {"cd", "ce"}}) == doctest::Approx(0.25));
  CHECK(cer({{"abcdefghij", ""}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cer({{"", "xyz"}}), UndefinedMetricError);
}

TEST_CASE("cer can exceed one") {
  CHECK(cer({{"a", "xyz"}}) == doctest::Approx(3.0));
}

TEST_CASE("cer is order invariant and length-weighted") {
  Rng rng(107);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 12; ++i)
    pairs.push_back({random_string(rng, 10) + "x", random_string(rng, 10)});
  double forward = cer(pairs);
  std::reverse(pairs.begin(), pairs.end());
  CHECK(cer(pairs) == doctest::Approx(forward).epsilon(1e-15));

  // Dataset-level CER is the |y|-weighted mean of per-pair CERs.
  double weighted = 0.0;
  long total = 0;
  for (const auto& p : pairs) {
    long len = static_cast<long>(decode_utf8(p.ground_truth).size());
    weighted += static_cast<double>(levenshtein(p.prediction, p.ground_truth));
    total += len;
  }
  CHECK(forward == doctest::Approx(weighted / static_cast<double>(total)));
}

TEST_CASE("wer treats punctuation per mode") {
  CHECK(wer({{"a cat.", "a cat."}}, WordMode::punct_as_word) == doctest::Approx(0.0));
  CHECK(wer({{"a cat.", "a cat."}}, WordMode::punct_attached) == doctest::Approx(0.0));

  // One substituted token out of three words (punctuation standalone)
  // or out of two words (punctuation attached).
  EvalPair pair{"a cat !", "a cat ."};
  CHECK(wer({pair}, WordMode::punct_as_word) == doctest::Approx(1.0 / 3.0));
  CHECK(wer({pair}, WordMode::punct_attached) == doctest::Approx(0.5));
}

TEST_CASE("word tokenization modes") {
  TextOptions opt;
  CHECK(tokenize_words("a cat.", WordMode::punct_as_word, opt) ==
        std::vector<std::string>{"a", "cat", "."});
  CHECK(tokenize_words("a cat.", WordMode::punct_attached, opt) ==
        std::vector<std::string>{"a", "cat."});
  CHECK(tokenize_words("a cat !", WordMode::punct_attached, opt) ==
        std::vector<std::string>{"a", "cat!"});
  CHECK(tokenize_words("cat.dog", WordMode::punct_as_word, opt) ==
        std::vector<std::string>{"cat", ".", "dog"});
  // Guillemets count as punctuation by default.
  CHECK(tokenize_words("«hi»", WordMode::punct_as_word, opt) ==
        std::vector<std::string>{"«", "hi", "»"});
  // Leading punctuation with nothing before it stands alone.
  CHECK(tokenize_words("...go", WordMode::punct_attached, opt) ==
        std::vector<std::string>{"...", "go"});
}

TEST_CASE("wer modes agree on punctuation-free text") {
  Rng rng(109);
  for (int trial = 0; trial < 50; ++trial) {
    std::string gt = random_string(rng, 8, "ab c");
    std::string pred = random_string(rng, 8, "ab c");
    if (tokenize_words(gt, WordMode::punct_as_word).empty()) continue;
    std::vector<EvalPair> pairs{{gt, pred}};
    CHECK(wer(pairs, WordMode::punct_as_word) ==
          doctest::Approx(wer(pairs, WordMode::punct_attached)));
  }
}

TEST_CASE("optional nfc composition only affects decomposed inputs") {
  // e + combining acute vs precomposed e-acute
  EvalPair pair{"café", "café"};
  TextOptions plain;
  TextOptions nfc;
  nfc.nfc = true;
  CHECK(levenshtein(pair.prediction, pair.ground_truth, plain) > 0);
  CHECK(levenshtein(pair.prediction, pair.ground_truth, nfc) == 0);
}

TEST_CASE("d_mean goldens") {
  CHECK(d_mean({{4, 4}, {9, 9}}) == doctest::Approx(0.0));
  CHECK(d_mean({{5, 7}, {3, 3}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(d_mean({}), UndefinedMetricError);
}

TEST_CASE("d_mean of a fixed-stop run plateaus at 20.32") {
  // 25 paragraphs whose true line counts sum to 242 (mean 9.68), all
  // decoded with the fixed policy at l_max = 30.
  std::vector<int> truth = {12, 12, 12, 12, 12, 10, 10, 10, 10, 10, 9, 9, 9,
                            9,  9,  8,  8,  8,  8,  8,  9,  9,  9,  10, 10};
  long sum = 0;
  for (int t : truth) sum += t;
  REQUIRE(sum == 242);
  std::vector<LineCountPair> pairs;
  for (int t : truth) pairs.push_back({t, 30});
  CHECK(d_mean(pairs) == doctest::Approx(20.32).epsilon(1e-9));
}
