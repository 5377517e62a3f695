// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "docrec/image.hpp"
#include "docrec/layout.hpp"
#include "docrec/rng.hpp"

namespace docrec::syndoc {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

/// Rows of the embedded 5x7 atlas for a codepoint, or nullptr when the
/// character is not covered. Lowercase letters reuse uppercase shapes.
const std::uint8_t* glyph_rows(char32_t c);
bool glyph_supported(char32_t c);

/// A font is a styling of the shared atlas: nearest-neighbor scaling
/// plus optional horizontal emboldening.
struct Font {
  std::string name;
  int scale_x = 1;
  int scale_y = 1;
  bool bold = false;
};

class FontSet {
 public:
  explicit FontSet(std::vector<Font> fonts, int size_min = 1, int size_max = 2);
  static FontSet builtin();

  const std::vector<Font>& fonts() const { return fonts_; }
  int size_min() const { return size_min_; }
  int size_max() const { return size_max_; }
  /// Every character of the text covered by the atlas.
  static bool supports(const std::string& utf8_text);

 private:
  std::vector<Font> fonts_;
  int size_min_, size_max_;
};

struct LineImage {
  ImageU8 image;
  std::string text;
};

/// Renders one text line: glyphs left to right with one blank column of
/// tracking, scaled by size, with a small seeded horizontal jitter.
/// Throws FontError on characters outside the font.
LineImage generate_line(const std::string& text, const Font& font, int size,
                        std::uint64_t seed);

/// Per-class generation constraints; the class set mirrors the layout
/// schema.
struct StyleClass {
  std::string name;
  int max_lines = 5;
  int max_chars_per_line = 40;
  double frequency = 1.0;
  int indent_min = 0;
  int indent_max = 40;
};

/// Layout classes, nesting, placement constraints and template size
/// driving the generator.
class StyleSheet {
 public:
  StyleSheet(layout::LayoutSchema schema, std::vector<StyleClass> classes,
             int template_height = 1600, int template_width = 900);

  /// Same JSON as the layout schema plus per-class generation fields, a
  /// "template" block, spacing ranges and an optional embedded corpus.
  static StyleSheet from_json(const std::string& json_text);

  const layout::LayoutSchema& schema() const { return schema_; }
  const std::vector<StyleClass>& classes() const { return classes_; }
  const StyleClass& style_of(const std::string& name) const;
  int template_height() const { return template_height_; }
  int template_width() const { return template_width_; }

  int line_spacing_min = 2, line_spacing_max = 8;
  int entity_spacing_min = 6, entity_spacing_max = 16;
  int margin_left = 20, margin_top = 20, margin_right = 20;
  int crop_margin = 16;

 private:
  layout::LayoutSchema schema_;
  std::vector<StyleClass> classes_;
  int template_height_, template_width_;
};

/// Text lines available per layout class.
struct LineCorpus {
  std::map<std::string, std::vector<std::string>> by_class;
};

struct PlacedEntity {
  std::string cls;
  int y_top = 0;
  int y_bottom = 0;  // exclusive
  int x_left = 0;
  int lines = 0;
};

struct SynDoc {
  ImageU8 image;
  layout::TaggedTranscription gt_tokens;
  layout::LayoutGraph gt_graph;
  int line_count = 0;
  std::vector<PlacedEntity> entities;
};

/// Generates one synthetic document: picks a line budget uniformly in
/// [1, curriculum_l], places entities top to bottom choosing classes by
/// smooth weighted round-robin over the feasible ones, renders corpus
/// lines, emits the tagged ground truth in placement order, and crops
/// under the lowest entity. Deterministic given the seed.
SynDoc generate_document(int template_height, int template_width,
                         int curriculum_l, const StyleSheet& sheet,
                         const LineCorpus& corpus, const FontSet& fonts,
                         std::uint64_t seed);

/// Convenience overload using the sheet's template size.
SynDoc generate_document(int curriculum_l, const StyleSheet& sheet,
                         const LineCorpus& corpus, const FontSet& fonts,
                         std::uint64_t seed);

/// Crops the image below the lowest entity plus a margin; content above
/// is untouched. Throws ConfigError when no entities are given.
ImageU8 crop_under_lowest(const ImageU8& image,
                          const std::vector<PlacedEntity>& entities,
                          int margin);

enum class AugmentOp {
  gaussian_noise,
  brightness,
  contrast,
  dilation,
  erosion,
  resolution_change,
};

/// Applies the requested operations in a seeded random order, each with
/// probability 0.1. Output stays in [0, 255].
ImageU8 augment(const ImageU8& image, const std::set<AugmentOp>& ops,
                std::uint64_t seed);

// Deterministic primitives behind augment, exposed for direct use.
ImageU8 apply_gaussian_noise(const ImageU8& image, Rng& rng, double sigma = 8.0);
ImageU8 apply_brightness(const ImageU8& image, int delta);
ImageU8 apply_contrast(const ImageU8& image, double factor);
ImageU8 apply_dilation(const ImageU8& image);
ImageU8 apply_erosion(const ImageU8& image);
ImageU8 apply_resolution_change(const ImageU8& image, int factor = 2);

}  // namespace docrec::syndoc
