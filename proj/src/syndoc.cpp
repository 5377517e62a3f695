// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/syndoc.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "docrec/errors.hpp"
#include "docrec/textmetrics.hpp"

namespace docrec::syndoc {
namespace {

std::uint8_t clamp_px(double v) {
  return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, std::round(v))));
}

int line_pad(int size) { return size; }

int line_height(const Font& font, int size) {
  return kGlyphHeight * font.scale_y * size + 2 * line_pad(size);
}

int cell_width(const Font& font, int size) {
  return (kGlyphWidth + 1) * font.scale_x * size;
}

}  // namespace

FontSet::FontSet(std::vector<Font> fonts, int size_min, int size_max)
    : fonts_(std::move(fonts)), size_min_(size_min), size_max_(size_max) {
  if (fonts_.empty()) throw ConfigError("font set cannot be empty");
  if (size_min_ < 1 || size_max_ < size_min_)
    throw ConfigError("invalid font size range");
}

FontSet FontSet::builtin() {
  return FontSet({{"mono", 1, 1, false},
                  {"mono-bold", 1, 1, true},
                  {"mono-wide", 2, 1, false}},
                 1, 2);
}

bool FontSet::supports(const std::string& utf8_text) {
  for (char32_t c : textmetrics::decode_utf8(utf8_text))
    if (!glyph_supported(c)) return false;
  return true;
}

LineImage generate_line(const std::string& text, const Font& font, int size,
                        std::uint64_t seed) {
  if (size < 1) throw ConfigError("font size must be >= 1");
  std::u32string chars = textmetrics::decode_utf8(text);
  for (char32_t c : chars)
    if (!glyph_supported(c))
      throw FontError("character not supported by the font atlas: U+" +
                      std::to_string(static_cast<unsigned>(c)));

  Rng rng(seed);
  const int pad = line_pad(size);
  const int h = line_height(font, size);
  const int cw = cell_width(font, size);
  const int jitter = static_cast<int>(rng.next_below(
      static_cast<std::uint64_t>(3 * size + 1)));

  if (chars.empty()) {
    ImageU8 img = ImageU8::Constant(h, 1, 255);
    return {std::move(img), text};
  }

  const int bold_extra = font.bold ? 1 : 0;
  const int w = jitter + static_cast<int>(chars.size()) * cw + pad + bold_extra;
  ImageU8 img = ImageU8::Constant(h, w, 255);

  int x = jitter;
  for (char32_t c : chars) {
    const std::uint8_t* rows = glyph_rows(c);
    for (int r = 0; r < kGlyphHeight; ++r) {
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (!(rows[r] & (1 << (kGlyphWidth - 1 - col)))) continue;
        int y0 = pad + r * font.scale_y * size;
        int x0 = x + col * font.scale_x * size;
        int bw = font.scale_x * size + bold_extra;
        for (int dy = 0; dy < font.scale_y * size; ++dy)
          for (int dx = 0; dx < bw; ++dx)
            if (x0 + dx < w) img(y0 + dy, x0 + dx) = 0;
      }
    }
    x += cw;
  }
  return {std::move(img), text};
}

StyleSheet::StyleSheet(layout::LayoutSchema schema,
                       std::vector<StyleClass> classes, int template_height,
                       int template_width)
    : schema_(std::move(schema)),
      classes_(std::move(classes)),
      template_height_(template_height),
      template_width_(template_width) {
  for (const auto& sc : classes_) {
    schema_.class_index(sc.name);  // throws on unknown classes
    if (sc.max_lines < 1 || sc.max_chars_per_line < 1)
      throw ConfigError("style class limits must be positive: " + sc.name);
    if (sc.indent_min < 0 || sc.indent_max < sc.indent_min)
      throw ConfigError("invalid indent range for class " + sc.name);
  }
  if (template_height_ < margin_top + kGlyphHeight + 2 ||
      template_width_ < margin_left + margin_right + kGlyphWidth + 2)
    throw ConfigError("template too small for any placement");
}

const StyleClass& StyleSheet::style_of(const std::string& name) const {
  for (const auto& sc : classes_)
    if (sc.name == name) return sc;
  throw ConfigError("no style entry for class " + name);
}

StyleSheet StyleSheet::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  layout::LayoutSchema schema = layout::LayoutSchema::from_json(json_text);
  std::vector<StyleClass> styles;
  for (const auto& c : j.at("classes")) {
    StyleClass sc;
    sc.name = c.at("name").get<std::string>();
    sc.max_lines = c.value("max_lines", 5);
    sc.max_chars_per_line = c.value("max_chars_per_line", 40);
    sc.frequency = c.value("frequency", 1.0);
    if (c.contains("indent")) {
      sc.indent_min = c["indent"][0].get<int>();
      sc.indent_max = c["indent"][1].get<int>();
    }
    styles.push_back(std::move(sc));
  }
  int th = 1600, tw = 900;
  if (j.contains("template")) {
    th = j["template"].value("height", th);
    tw = j["template"].value("width", tw);
  }
  StyleSheet sheet(std::move(schema), std::move(styles), th, tw);
  if (j.contains("line_spacing")) {
    sheet.line_spacing_min = j["line_spacing"][0].get<int>();
    sheet.line_spacing_max = j["line_spacing"][1].get<int>();
  }
  if (j.contains("entity_spacing")) {
    sheet.entity_spacing_min = j["entity_spacing"][0].get<int>();
    sheet.entity_spacing_max = j["entity_spacing"][1].get<int>();
  }
  sheet.crop_margin = j.value("crop_margin", sheet.crop_margin);
  return sheet;
}

namespace {

struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<int> open;  // class indices currently open

  void append_text(const layout::LayoutSchema&, const std::string& text) {
    for (char32_t c : textmetrics::decode_utf8(text))
      tokens.push_back(textmetrics::encode_utf8(std::u32string(1, c)));
  }

  // Closes entities not shared with the new ancestor path, opens the
  // missing ancestors, then wraps the entity text in fresh begin/end.
  void place_entity(const layout::LayoutSchema& schema, int cls,
                    const std::vector<std::string>& lines) {
    auto chain = schema.ancestor_chain(-1, cls);
    if (!chain) throw GenerationError("class unreachable from the root");
    std::size_t common = 0;
    while (common < open.size() && common < chain->size() &&
           open[common] == (*chain)[common])
      ++common;
    while (open.size() > common) {
      tokens.push_back(schema.cls(open.back()).end);
      open.pop_back();
    }
    for (std::size_t i = common; i < chain->size(); ++i) {
      tokens.push_back(schema.cls((*chain)[i]).begin);
      open.push_back((*chain)[i]);
    }
    tokens.push_back(schema.cls(cls).begin);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) tokens.push_back("\n");
      append_text(schema, lines[i]);
    }
    tokens.push_back(schema.cls(cls).end);
  }

  void close_all(const layout::LayoutSchema& schema) {
    while (!open.empty()) {
      tokens.push_back(schema.cls(open.back()).end);
      open.pop_back();
    }
  }
};

SynDoc generate_attempt(int H, int W, int curriculum_l, const StyleSheet& sheet,
                        const LineCorpus& corpus, const FontSet& fonts,
                        Rng rng) {
  const auto& schema = sheet.schema();
  const int l_doc = 1 + static_cast<int>(rng.next_below(
                            static_cast<std::uint64_t>(curriculum_l)));

  // Classes the generator can place text into.
  std::vector<const StyleClass*> candidates;
  for (const auto& sc : sheet.classes()) {
    auto it = corpus.by_class.find(sc.name);
    if (sc.frequency > 0.0 && it != corpus.by_class.end() && !it->second.empty())
      candidates.push_back(&sc);
  }
  if (candidates.empty())
    throw GenerationError("no class has both a frequency and corpus lines");

  const int worst_line_h =
      kGlyphHeight * 2 /*max scale_y*/ * fonts.size_max() + 2 * fonts.size_max();

  SynDoc doc;
  doc.image = ImageU8::Constant(H, W, 255);
  TokenStream stream;
  std::vector<double> credit(candidates.size(), 0.0);

  int cursor_y = sheet.margin_top;
  int placed_lines = 0;
  while (placed_lines < l_doc) {
    int spacing = doc.entities.empty()
                      ? 0
                      : static_cast<int>(rng.next_range(sheet.entity_spacing_min,
                                                        sheet.entity_spacing_max));
    int room = H - (cursor_y + spacing);
    if (room < worst_line_h + sheet.line_spacing_max)
      throw GenerationError("page full before reaching the line budget");

    // Smooth weighted round-robin over the candidates.
    double total_freq = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      credit[i] += candidates[i]->frequency;
      total_freq += candidates[i]->frequency;
    }
    std::size_t pick = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
      if (credit[i] > credit[pick]) pick = i;
    credit[pick] -= total_freq;
    const StyleClass& sc = *candidates[pick];

    int remaining = l_doc - placed_lines;
    int fit_lines = std::max(
        1, (room - sheet.line_spacing_max) / (worst_line_h + sheet.line_spacing_max));
    int cap = std::min({sc.max_lines, remaining, fit_lines});
    int l_entity = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cap)));

    const auto& texts = corpus.by_class.at(sc.name);
    PlacedEntity entity;
    entity.cls = sc.name;
    entity.y_top = cursor_y + spacing;
    entity.x_left = sheet.margin_left;
    entity.lines = l_entity;

    std::vector<std::string> line_texts;
    int y = entity.y_top;
    for (int k = 0; k < l_entity; ++k) {
      if (k > 0)
        y += static_cast<int>(rng.next_range(sheet.line_spacing_min,
                                             sheet.line_spacing_max));
      const Font& font = fonts.fonts()[static_cast<std::size_t>(
          rng.next_below(fonts.fonts().size()))];
      int size = static_cast<int>(rng.next_range(fonts.size_min(), fonts.size_max()));
      int indent = static_cast<int>(rng.next_range(sc.indent_min, sc.indent_max));
      int x_left = sheet.margin_left + indent;

      std::string text = texts[rng.next_below(texts.size())];
      std::u32string u = textmetrics::decode_utf8(text);
      int usable = W - sheet.margin_right - x_left;
      int max_fit = std::max(1, usable / cell_width(font, size) - 1);
      std::size_t keep = std::min<std::size_t>(
          u.size(), static_cast<std::size_t>(
                        std::min(sc.max_chars_per_line, max_fit)));
      text = textmetrics::encode_utf8(u.substr(0, keep));

      LineImage line = generate_line(text, font, size, rng.next_u64());
      if (y + line.image.rows() > H)
        throw GenerationError("line placement exceeds the template height");
      int w = std::min<int>(static_cast<int>(line.image.cols()), W - x_left);
      doc.image.block(y, x_left, line.image.rows(), w) =
          line.image.block(0, 0, line.image.rows(), w);
      y += static_cast<int>(line.image.rows());
      line_texts.push_back(line.text);
    }
    entity.y_bottom = y;
    stream.place_entity(schema, schema.class_index(sc.name), line_texts);
    doc.entities.push_back(entity);
    cursor_y = y;
    placed_lines += l_entity;
  }
  stream.close_all(schema);

  doc.image = crop_under_lowest(doc.image, doc.entities, sheet.crop_margin);
  doc.gt_tokens.tokens = std::move(stream.tokens);
  doc.gt_graph = layout::build_graph(doc.gt_tokens.tokens, schema);
  doc.line_count = placed_lines;
  return doc;
}

}  // namespace

SynDoc generate_document(int template_height, int template_width,
                         int curriculum_l, const StyleSheet& sheet,
                         const LineCorpus& corpus, const FontSet& fonts,
                         std::uint64_t seed) {
  if (curriculum_l < 1) throw ConfigError("curriculum line count must be >= 1");
  Rng master(seed);
  constexpr int kAttempts = 5;
  for (int attempt = 0;; ++attempt) {
    try {
      return generate_attempt(template_height, template_width, curriculum_l,
                              sheet, corpus, fonts, master.split());
    } catch (const GenerationError&) {
      if (attempt + 1 >= kAttempts) throw;
    }
  }
}

SynDoc generate_document(int curriculum_l, const StyleSheet& sheet,
                         const LineCorpus& corpus, const FontSet& fonts,
                         std::uint64_t seed) {
  return generate_document(sheet.template_height(), sheet.template_width(),
                           curriculum_l, sheet, corpus, fonts, seed);
}

ImageU8 crop_under_lowest(const ImageU8& image,
                          const std::vector<PlacedEntity>& entities,
                          int margin) {
  if (entities.empty())
    throw ConfigError("crop needs at least one placed entity");
  int lowest = 0;
  for (const auto& e : entities) lowest = std::max(lowest, e.y_bottom);
  Eigen::Index new_h = std::min<Eigen::Index>(image.rows(), lowest + margin);
  return image.topRows(new_h);
}

ImageU8 apply_gaussian_noise(const ImageU8& image, Rng& rng, double sigma) {
  ImageU8 out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      out(r, c) = clamp_px(image(r, c) + rng.next_gaussian() * sigma);
  return out;
}

ImageU8 apply_brightness(const ImageU8& image, int delta) {
  ImageU8 out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      out(r, c) = clamp_px(image(r, c) + delta);
  return out;
}

ImageU8 apply_contrast(const ImageU8& image, double factor) {
  ImageU8 out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      out(r, c) = clamp_px(128.0 + (image(r, c) - 128.0) * factor);
  return out;
}

namespace {

// Ink is dark, so growing strokes means a 3x3 minimum and shrinking
// them a 3x3 maximum.
template <class Cmp>
ImageU8 morph3x3(const ImageU8& image, Cmp cmp) {
  ImageU8 out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      std::uint8_t v = image(r, c);
      for (Eigen::Index dr = -1; dr <= 1; ++dr)
        for (Eigen::Index dc = -1; dc <= 1; ++dc) {
          Eigen::Index rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= image.rows() || cc >= image.cols())
            continue;
          if (cmp(image(rr, cc), v)) v = image(rr, cc);
        }
      out(r, c) = v;
    }
  return out;
}

}  // namespace

ImageU8 apply_dilation(const ImageU8& image) {
  return morph3x3(image, std::less<std::uint8_t>());
}

ImageU8 apply_erosion(const ImageU8& image) {
  return morph3x3(image, std::greater<std::uint8_t>());
}

ImageU8 apply_resolution_change(const ImageU8& image, int factor) {
  if (factor < 2) throw ConfigError("resolution factor must be >= 2");
  const Eigen::Index h = image.rows(), w = image.cols();
  const Eigen::Index dh = (h + factor - 1) / factor, dw = (w + factor - 1) / factor;
  Eigen::MatrixXd small(dh, dw);
  for (Eigen::Index r = 0; r < dh; ++r)
    for (Eigen::Index c = 0; c < dw; ++c) {
      double acc = 0.0;
      int n = 0;
      for (Eigen::Index dr = 0; dr < factor; ++dr)
        for (Eigen::Index dc = 0; dc < factor; ++dc) {
          Eigen::Index rr = r * factor + dr, cc = c * factor + dc;
          if (rr >= h || cc >= w) continue;
          acc += image(rr, cc);
          ++n;
        }
      small(r, c) = acc / n;
    }
  ImageU8 out(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c)
      out(r, c) = clamp_px(small(r / factor, c / factor));
  return out;
}

ImageU8 augment(const ImageU8& image, const std::set<AugmentOp>& ops,
                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AugmentOp> order(ops.begin(), ops.end());
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);

  ImageU8 out = image;
  for (AugmentOp op : order) {
    if (rng.next_double() >= 0.1) continue;
    switch (op) {
      case AugmentOp::gaussian_noise:
        out = apply_gaussian_noise(out, rng);
        break;
      case AugmentOp::brightness:
        out = apply_brightness(out, static_cast<int>(rng.next_range(-40, 40)));
        break;
      case AugmentOp::contrast:
        out = apply_contrast(out, 0.6 + 0.8 * rng.next_double());
        break;
      case AugmentOp::dilation:
        out = apply_dilation(out);
        break;
      case AugmentOp::erosion:
        out = apply_erosion(out);
        break;
      case AugmentOp::resolution_change:
        out = apply_resolution_change(out);
        break;
    }
  }
  return out;
}

}  // namespace docrec::syndoc
