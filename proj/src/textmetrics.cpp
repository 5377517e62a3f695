// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/textmetrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>

namespace docrec::textmetrics {
namespace {

// Canonical compositions for the Latin range: base letter + combining
// mark -> precomposed letter. Enough for the western-European corpora
// this toolkit targets; anything else is left untouched.
struct Composition {
  char32_t base;
  char32_t mark;
  char32_t composed;
};

constexpr char32_t kGrave = 0x300, kAcute = 0x301, kCirc = 0x302,
                   kTilde = 0x303, kDiaer = 0x308, kRing = 0x30a,
                   kCedilla = 0x327;

const Composition kCompositions[] = {
    {U'A', kGrave, U'À'},   {U'A', kAcute, U'Á'},
    {U'A', kCirc, U'Â'},    {U'A', kTilde, U'Ã'},
    {U'A', kDiaer, U'Ä'},   {U'A', kRing, U'Å'},
    {U'C', kCedilla, U'Ç'}, {U'E', kGrave, U'È'},
    {U'E', kAcute, U'É'},   {U'E', kCirc, U'Ê'},
    {U'E', kDiaer, U'Ë'},   {U'I', kGrave, U'Ì'},
    {U'I', kAcute, U'Í'},   {U'I', kCirc, U'Î'},
    {U'I', kDiaer, U'Ï'},   {U'N', kTilde, U'Ñ'},
    {U'O', kGrave, U'Ò'},   {U'O', kAcute, U'Ó'},
    {U'O', kCirc, U'Ô'},    {U'O', kTilde, U'Õ'},
    {U'O', kDiaer, U'Ö'},   {U'U', kGrave, U'Ù'},
    {U'U', kAcute, U'Ú'},   {U'U', kCirc, U'Û'},
    {U'U', kDiaer, U'Ü'},   {U'Y', kAcute, U'Ý'},
    {U'a', kGrave, U'à'},   {U'a', kAcute, U'á'},
    {U'a', kCirc, U'â'},    {U'a', kTilde, U'ã'},
    {U'a', kDiaer, U'ä'},   {U'a', kRing, U'å'},
    {U'c', kCedilla, U'ç'}, {U'e', kGrave, U'è'},
    {U'e', kAcute, U'é'},   {U'e', kCirc, U'ê'},
    {U'e', kDiaer, U'ë'},   {U'i', kGrave, U'ì'},
    {U'i', kAcute, U'í'},   {U'i', kCirc, U'î'},
    {U'i', kDiaer, U'ï'},   {U'n', kTilde, U'ñ'},
    {U'o', kGrave, U'ò'},   {U'o', kAcute, U'ó'},
    {U'o', kCirc, U'ô'},    {U'o', kTilde, U'õ'},
    {U'o', kDiaer, U'ö'},   {U'u', kGrave, U'ù'},
    {U'u', kAcute, U'ú'},   {U'u', kCirc, U'û'},
    {U'u', kDiaer, U'ü'},   {U'y', kAcute, U'ý'},
    {U'y', kDiaer, U'ÿ'},
};

std::u32string compose_latin(std::u32string s) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (!out.empty()) {
      bool composed = false;
      for (const auto& e : kCompositions) {
        if (e.base == out.back() && e.mark == c) {
          out.back() = e.composed;
          composed = true;
          break;
        }
      }
      if (composed) continue;
    }
    out.push_back(c);
  }
  return out;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v';
}

std::u32string prepare(std::string_view s, const TextOptions& opt) {
  std::u32string u = decode_utf8(s);
  if (opt.nfc) u = compose_latin(std::move(u));
  return u;
}

template <class Seq>
long lev_dp(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return static_cast<long>(m);
  if (m == 0) return static_cast<long>(n);
  std::vector<long> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    long diag = row[0];
    row[0] = static_cast<long>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      long sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[m];
}

}  // namespace

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xfffd;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = static_cast<char32_t>((c & 0x1f) << 6 |
                                 (static_cast<unsigned char>(s[i + 1]) & 0x3f));
      len = 2;
    } else if ((c >> 4) == 0xe && i + 2 < s.size()) {
      cp = static_cast<char32_t>(
          (c & 0x0f) << 12 |
          (static_cast<unsigned char>(s[i + 1]) & 0x3f) << 6 |
          (static_cast<unsigned char>(s[i + 2]) & 0x3f));
      len = 3;
    } else if ((c >> 3) == 0x1e && i + 3 < s.size()) {
      cp = static_cast<char32_t>(
          (c & 0x07) << 18 |
          (static_cast<unsigned char>(s[i + 1]) & 0x3f) << 12 |
          (static_cast<unsigned char>(s[i + 2]) & 0x3f) << 6 |
          (static_cast<unsigned char>(s[i + 3]) & 0x3f));
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

long levenshtein(std::span<const char32_t> a, std::span<const char32_t> b) {
  return lev_dp(a, b);
}

long levenshtein(const std::vector<std::string>& a,
                 const std::vector<std::string>& b) {
  return lev_dp(a, b);
}

long levenshtein(std::string_view a, std::string_view b,
                 const TextOptions& opt) {
  std::u32string ua = prepare(a, opt), ub = prepare(b, opt);
  return lev_dp(ua, ub);
}

std::vector<std::string> tokenize_words(std::string_view text, WordMode mode,
                                        const TextOptions& opt) {
  std::u32string u = prepare(text, opt);
  auto is_punct = [&](char32_t c) {
    return opt.punctuation.find(c) != std::u32string::npos;
  };
  std::vector<std::u32string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (char32_t c : u) {
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      if (mode == WordMode::punct_as_word) {
        flush();
        tokens.push_back(std::u32string(1, c));
      } else {
        // Attach to the preceding word, across whitespace. Leading
        // punctuation with no word before it forms its own token.
        flush();
        if (tokens.empty())
          tokens.push_back(std::u32string(1, c));
        else
          tokens.back().push_back(c);
      }
    } else {
      current.push_back(c);
    }
  }
  flush();
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(encode_utf8(t));
  return out;
}

double cer(const std::vector<EvalPair>& pairs, const TextOptions& opt) {
  long total_dist = 0;
  long total_len = 0;
  for (const auto& p : pairs) {
    std::u32string gt = prepare(p.ground_truth, opt);
    std::u32string pred = prepare(p.prediction, opt);
    total_dist += lev_dp(pred, gt);
    total_len += static_cast<long>(gt.size());
  }
  if (total_len == 0)
    throw UndefinedMetricError("cer undefined: empty ground truth");
  return static_cast<double>(total_dist) / static_cast<double>(total_len);
}

double wer(const std::vector<EvalPair>& pairs, WordMode mode,
           const TextOptions& opt) {
  long total_dist = 0;
  long total_len = 0;
  for (const auto& p : pairs) {
    auto gt = tokenize_words(p.ground_truth, mode, opt);
    auto pred = tokenize_words(p.prediction, mode, opt);
    total_dist += lev_dp(pred, gt);
    total_len += static_cast<long>(gt.size());
  }
  if (total_len == 0)
    throw UndefinedMetricError("wer undefined: empty ground truth");
  return static_cast<double>(total_dist) / static_cast<double>(total_len);
}

double d_mean(const std::vector<LineCountPair>& pairs) {
  if (pairs.empty()) throw UndefinedMetricError("d_mean undefined: no pairs");
  long sum = 0;
  for (const auto& p : pairs) sum += std::labs(p.actual - p.recognized);
  return static_cast<double>(sum) / static_cast<double>(pairs.size());
}

}  // namespace docrec::textmetrics
