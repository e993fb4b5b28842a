#include "textpix/dataset.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "textpix/error.hpp"
#include "textpix/glyphs.hpp"
#include "textpix/idx.hpp"
#include "textpix/rng.hpp"

namespace textpix {

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_string(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw ValueError("unknown split '" + std::string(text) + "'");
}

std::string_view to_string(LayoutMode mode) {
  switch (mode) {
    case LayoutMode::single: return "single";
    case LayoutMode::pair: return "pair";
    case LayoutMode::mixed: return "mixed";
  }
  return "pair";
}

LayoutMode layout_mode_from_string(std::string_view text) {
  if (text == "single") return LayoutMode::single;
  if (text == "pair") return LayoutMode::pair;
  if (text == "mixed") return LayoutMode::mixed;
  throw ValueError("unknown layout mode '" + std::string(text) + "'");
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::alone: return "alone";
    case Relation::top: return "top";
    case Relation::bottom: return "bottom";
    case Relation::left: return "left";
    case Relation::right: return "right";
  }
  return "alone";
}

void GenConfig::validate() const {
  if (glyph_width == 0 || glyph_height == 0) throw ValueError("glyph extents must be positive");
  if (glyph_width > canvas || glyph_height > canvas) {
    throw ValueError("glyph " + std::to_string(glyph_width) + "x" + std::to_string(glyph_height) +
                     " is larger than the " + std::to_string(canvas) + "x" + std::to_string(canvas) + " canvas");
  }
  if (layout != LayoutMode::single && (2 * glyph_width > canvas || 2 * glyph_height > canvas)) {
    throw ValueError("canvas " + std::to_string(canvas) + " is too small for two non-overlapping " +
                     std::to_string(glyph_width) + "x" + std::to_string(glyph_height) +
                     " glyphs side by side and stacked");
  }
  if (levels < 2) throw ValueError("quantization needs at least 2 levels");
  if (!(single_fraction >= 0.0 && single_fraction <= 1.0)) throw ValueError("single_fraction must lie in [0, 1]");
  if (idx_images.empty() != idx_labels.empty()) throw ValueError("IDX glyph source needs both images and labels");
}

std::string caption_for(Relation relation, int d, int e) {
  const std::string ds = std::to_string(d), es = std::to_string(e);
  switch (relation) {
    case Relation::alone: return "the digit " + ds + " is alone";
    case Relation::top: return "the digit " + ds + " is at the top of the digit " + es;
    case Relation::bottom: return "the digit " + ds + " is at the bottom of the digit " + es;
    case Relation::left: return "the digit " + ds + " is on the left of the digit " + es;
    case Relation::right: return "the digit " + ds + " is on the right of the digit " + es;
  }
  return {};
}

std::vector<std::string> caption_grammar_words() {
  std::vector<std::string> words = {"the", "digit", "is", "alone", "at", "top", "bottom", "of", "on", "left", "right"};
  for (int d = 0; d < 10; ++d) words.push_back(std::to_string(d));
  return words;
}

namespace {

struct Position {
  std::size_t x, y;
};

// Uniform choice over every (D, E) cell pair satisfying the relation: strictly separated
// along the relation's axis and overlapping along the other one.
std::pair<Position, Position> place_pair(Relation rel, const GenConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.canvas, gw = cfg.glyph_width, gh = cfg.glyph_height;
  const std::size_t xs = n - gw + 1, ys = n - gh + 1;
  auto overlap = [](std::size_t a, std::size_t b, std::size_t extent) {
    return (a > b ? a - b : b - a) < extent;
  };
  auto valid = [&](Position d, Position e) {
    switch (rel) {
      case Relation::top: return d.y + gh <= e.y && overlap(d.x, e.x, gw);
      case Relation::bottom: return e.y + gh <= d.y && overlap(d.x, e.x, gw);
      case Relation::left: return d.x + gw <= e.x && overlap(d.y, e.y, gh);
      case Relation::right: return e.x + gw <= d.x && overlap(d.y, e.y, gh);
      case Relation::alone: break;
    }
    return false;
  };
  auto visit = [&](auto&& fn) {
    for (std::size_t dy = 0; dy < ys; ++dy)
      for (std::size_t dx = 0; dx < xs; ++dx)
        for (std::size_t ey = 0; ey < ys; ++ey)
          for (std::size_t ex = 0; ex < xs; ++ex)
            if (valid({dx, dy}, {ex, ey}) && fn(Position{dx, dy}, Position{ex, ey})) return;
  };
  std::uint64_t count = 0;
  visit([&](Position, Position) { ++count; return false; });
  if (count == 0) throw ValueError("no placement satisfies relation '" + std::string(to_string(rel)) + "'");
  std::uint64_t target = rng.below(count);
  std::pair<Position, Position> chosen{};
  visit([&](Position d, Position e) {
    if (target-- == 0) {
      chosen = {d, e};
      return true;
    }
    return false;
  });
  return chosen;
}

class GlyphSource {
 public:
  explicit GlyphSource(const GenConfig& cfg) : cfg_(cfg) {
    if (cfg.idx_images.empty()) return;
    auto digits = load_idx(cfg.idx_images, cfg.idx_labels);
    for (auto& d : digits) {
      if (d.label > 9) throw FormatError("IDX label " + std::to_string(d.label) + " is not a digit");
      by_label_[d.label].push_back(std::move(d));
    }
    for (int k = 0; k < 10; ++k)
      if (by_label_[static_cast<std::size_t>(k)].empty())
        throw FormatError("IDX glyph source has no image of digit " + std::to_string(k));
  }

  std::vector<double> glyph(int digit, Rng& rng) const {
    if (cfg_.idx_images.empty()) return builtin_glyph(digit, cfg_.glyph_height, cfg_.glyph_width);
    const auto& pool = by_label_[static_cast<std::size_t>(digit)];
    const IdxDigit& d = pool[rng.below(pool.size())];
    return resample_nearest(d.values, d.rows, d.cols, cfg_.glyph_height, cfg_.glyph_width);
  }

 private:
  const GenConfig& cfg_;
  std::array<std::vector<IdxDigit>, 10> by_label_;
};

void paint(std::vector<double>& canvas, std::size_t n, const std::vector<double>& glyph,
           const GlyphPlacement& p) {
  for (std::size_t r = 0; r < p.height; ++r)
    for (std::size_t c = 0; c < p.width; ++c) {
      double& dst = canvas[(p.y + r) * n + (p.x + c)];
      dst = std::max(dst, glyph[r * p.width + c]);
    }
}

}  // namespace

std::vector<DatasetExample> gen_mnist_captions(const GenConfig& config) {
  config.validate();
  const GlyphSource source(config);
  Rng rng(derive_seed(config.seed, "data"));
  const std::size_t n = config.canvas;
  constexpr std::array<Relation, 4> kPairRelations = {Relation::top, Relation::bottom, Relation::left, Relation::right};

  std::vector<DatasetExample> out;
  out.reserve(config.train_count + config.test_count);
  for (std::size_t k = 0; k < config.train_count + config.test_count; ++k) {
    DatasetExample ex;
    ex.split = k < config.train_count ? Split::train : Split::test;
    bool single = config.layout == LayoutMode::single;
    if (config.layout == LayoutMode::mixed) single = rng.uniform() < config.single_fraction;

    std::vector<double> canvas(n * n, 0.0);
    const int d = static_cast<int>(rng.below(10));
    if (single) {
      ex.relation = Relation::alone;
      GlyphPlacement p{d, static_cast<std::size_t>(rng.below(n - config.glyph_width + 1)), 0,
                       config.glyph_width, config.glyph_height};
      p.y = static_cast<std::size_t>(rng.below(n - config.glyph_height + 1));
      paint(canvas, n, source.glyph(d, rng), p);
      ex.glyphs = {p};
      ex.caption = caption_for(Relation::alone, d, 0);
    } else {
      const int e = static_cast<int>(rng.below(10));
      ex.relation = kPairRelations[rng.below(kPairRelations.size())];
      const auto [pd, pe] = place_pair(ex.relation, config, rng);
      GlyphPlacement gd{d, pd.x, pd.y, config.glyph_width, config.glyph_height};
      GlyphPlacement ge{e, pe.x, pe.y, config.glyph_width, config.glyph_height};
      paint(canvas, n, source.glyph(d, rng), gd);
      paint(canvas, n, source.glyph(e, rng), ge);
      ex.glyphs = {gd, ge};
      ex.caption = caption_for(ex.relation, d, e);
    }
    ex.image = quantize(Intensities{n, n, std::move(canvas)}, config.levels);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace textpix
