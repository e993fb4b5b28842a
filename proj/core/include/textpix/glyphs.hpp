#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace textpix {

inline constexpr std::size_t kGlyphSourceWidth = 5;
inline constexpr std::size_t kGlyphSourceHeight = 7;

// Built-in 5x7 bitmap of digit 0-9; row-major, 1 = ink.
const std::array<std::array<unsigned char, kGlyphSourceWidth>, kGlyphSourceHeight>& digit_bitmap(int digit);

// Nearest-neighbour resampling of a row-major intensity grid.
std::vector<double> resample_nearest(const std::vector<double>& src, std::size_t src_h, std::size_t src_w,
                                     std::size_t dst_h, std::size_t dst_w);

// Built-in digit scaled to height x width, intensities in {0, 1}.
std::vector<double> builtin_glyph(int digit, std::size_t height, std::size_t width);

}  // namespace textpix
