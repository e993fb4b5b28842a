#include "textpix/glyphs.hpp"

#include <algorithm>
#include <string>

#include "textpix/error.hpp"

namespace textpix {

namespace {

using Bitmap = std::array<std::array<unsigned char, kGlyphSourceWidth>, kGlyphSourceHeight>;

constexpr std::array<Bitmap, 10> kDigits = {{
    {{{0, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {1, 0, 0, 1, 1}, {1, 0, 1, 0, 1}, {1, 1, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}}},
    {{{0, 0, 1, 0, 0}, {0, 1, 1, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 1, 0, 0}, {0, 1, 1, 1, 0}}},
    {{{0, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {0, 0, 0, 0, 1}, {0, 0, 0, 1, 0}, {0, 0, 1, 0, 0}, {0, 1, 0, 0, 0}, {1, 1, 1, 1, 1}}},
    {{{1, 1, 1, 1, 1}, {0, 0, 0, 1, 0}, {0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}}},
    {{{0, 0, 0, 1, 0}, {0, 0, 1, 1, 0}, {0, 1, 0, 1, 0}, {1, 0, 0, 1, 0}, {1, 1, 1, 1, 1}, {0, 0, 0, 1, 0}, {0, 0, 0, 1, 0}}},
    {{{1, 1, 1, 1, 1}, {1, 0, 0, 0, 0}, {1, 1, 1, 1, 0}, {0, 0, 0, 0, 1}, {0, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}}},
    {{{0, 0, 1, 1, 0}, {0, 1, 0, 0, 0}, {1, 0, 0, 0, 0}, {1, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}}},
    {{{1, 1, 1, 1, 1}, {0, 0, 0, 0, 1}, {0, 0, 0, 1, 0}, {0, 0, 1, 0, 0}, {0, 1, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 1, 0, 0, 0}}},
    {{{0, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 0}}},
    {{{0, 1, 1, 1, 0}, {1, 0, 0, 0, 1}, {1, 0, 0, 0, 1}, {0, 1, 1, 1, 1}, {0, 0, 0, 0, 1}, {0, 0, 0, 1, 0}, {0, 1, 1, 0, 0}}},
}};

}  // namespace

const Bitmap& digit_bitmap(int digit) {
  if (digit < 0 || digit > 9) throw ValueError("digit " + std::to_string(digit) + " outside 0-9");
  return kDigits[static_cast<std::size_t>(digit)];
}

std::vector<double> resample_nearest(const std::vector<double>& src, std::size_t src_h, std::size_t src_w,
                                     std::size_t dst_h, std::size_t dst_w) {
  if (src.size() != src_h * src_w) throw ValueError("resample_nearest: source size mismatch");
  if (dst_h == 0 || dst_w == 0) throw ValueError("resample_nearest: empty target");
  std::vector<double> out(dst_h * dst_w);
  for (std::size_t r = 0; r < dst_h; ++r) {
    // Centre of destination cell r mapped into the source grid.
    const std::size_t sr = std::min(src_h - 1, ((2 * r + 1) * src_h) / (2 * dst_h));
    for (std::size_t c = 0; c < dst_w; ++c) {
      const std::size_t sc = std::min(src_w - 1, ((2 * c + 1) * src_w) / (2 * dst_w));
      out[r * dst_w + c] = src[sr * src_w + sc];
    }
  }
  return out;
}

std::vector<double> builtin_glyph(int digit, std::size_t height, std::size_t width) {
  const Bitmap& bm = digit_bitmap(digit);
  std::vector<double> src;
  src.reserve(kGlyphSourceWidth * kGlyphSourceHeight);
  for (const auto& row : bm)
    for (unsigned char px : row) src.push_back(px ? 1.0 : 0.0);
  return resample_nearest(src, kGlyphSourceHeight, kGlyphSourceWidth, height, width);
}

}  // namespace textpix
