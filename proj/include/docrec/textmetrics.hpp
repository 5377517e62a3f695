// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docrec/errors.hpp"

namespace docrec::textmetrics {

/// Ground truth / prediction pair, both UTF-8.
struct EvalPair {
  std::string ground_truth;
  std::string prediction;
};

/// Word tokenization mode for WER.
///   punct_as_word: every punctuation character is its own word token.
///   punct_attached: punctuation characters belong to the preceding word.
enum class WordMode { punct_as_word, punct_attached };

/// Actual vs recognized line counts for one image.
struct LineCountPair {
  int actual;
  int recognized;
};

struct TextOptions {
  /// Compose Latin letters with combining diacritics (NFC for the Latin
  /// range only). Off by default; no normalization is applied then.
  bool nfc = false;
  /// Characters treated as punctuation by the word tokenizers. ASCII
  /// punctuation plus French guillemets by default.
  std::u32string punctuation =
      U"!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~«»";
};

/// Decodes UTF-8 into unicode scalar values. Invalid bytes decode as
/// U+FFFD so metrics stay total.
std::u32string decode_utf8(std::string_view s);

/// Encodes unicode scalar values back to UTF-8.
std::string encode_utf8(std::u32string_view s);

/// Minimum number of unit-cost insertions, deletions and substitutions
/// transforming a into b.
long levenshtein(std::span<const char32_t> a, std::span<const char32_t> b);
long levenshtein(const std::vector<std::string>& a,
                 const std::vector<std::string>& b);
long levenshtein(std::string_view a, std::string_view b,
                 const TextOptions& opt = {});

/// Splits text into word tokens under the given mode.
std::vector<std::string> tokenize_words(std::string_view text, WordMode mode,
                                        const TextOptions& opt = {});

/// Dataset-level character error rate: sum of edit distances divided by
/// the total ground-truth length. Throws UndefinedMetricError when the
/// ground truth is empty overall.
double cer(const std::vector<EvalPair>& pairs, const TextOptions& opt = {});

/// Dataset-level word error rate under the given tokenization mode.
double wer(const std::vector<EvalPair>& pairs, WordMode mode,
           const TextOptions& opt = {});

/// Mean absolute difference between actual and recognized line counts.
double d_mean(const std::vector<LineCountPair>& pairs);

}  // namespace docrec::textmetrics
