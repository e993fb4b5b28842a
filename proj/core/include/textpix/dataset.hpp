#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textpix/image.hpp"

namespace textpix {

enum class Split : std::uint8_t { train, test };
std::string_view to_string(Split split);
Split split_from_string(std::string_view text);

enum class LayoutMode : std::uint8_t { single, pair, mixed };
std::string_view to_string(LayoutMode mode);
LayoutMode layout_mode_from_string(std::string_view text);

// Where the first-named digit D sits relative to the second digit E.
enum class Relation : std::uint8_t { alone, top, bottom, left, right };
std::string_view to_string(Relation relation);

// Glyph cell on the canvas; rows [y, y + height), columns [x, x + width).
struct GlyphPlacement {
  int digit = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;

  friend bool operator==(const GlyphPlacement&, const GlyphPlacement&) = default;
};

struct DatasetExample {
  std::string caption;
  ImageGrid image;
  Split split = Split::train;
  Relation relation = Relation::alone;
  std::vector<GlyphPlacement> glyphs;  // D first, then E

  friend bool operator==(const DatasetExample&, const DatasetExample&) = default;
};

struct GenConfig {
  std::size_t canvas = 12;  // square canvas side
  std::size_t glyph_width = 5;
  std::size_t glyph_height = 5;
  LayoutMode layout = LayoutMode::pair;
  double single_fraction = 1.0 / 3.0;  // share of single-digit examples in mixed mode
  std::size_t train_count = 64;
  std::size_t test_count = 16;
  std::size_t levels = 16;
  std::uint64_t seed = 7;
  // Optional MNIST-format glyph source; built-in bitmaps when empty.
  std::string idx_images;
  std::string idx_labels;

  void validate() const;
};

// Caption text for a relation; E is ignored for Relation::alone.
std::string caption_for(Relation relation, int d, int e);

// Train examples first, then test, all drawn from derive_seed(seed, "data").
std::vector<DatasetExample> gen_mnist_captions(const GenConfig& config);

// Every caption word the generator can emit.
std::vector<std::string> caption_grammar_words();

}  // namespace textpix
