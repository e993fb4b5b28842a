#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "textpix/image.hpp"

namespace textpix {

// Binary P5 with maxval = Q - 1; samples are two bytes, big-endian, when maxval > 255.
std::string encode_pgm(const ImageGrid& image);
// expected_levels = 0 accepts whatever maxval the header carries.
ImageGrid decode_pgm(std::string_view bytes, std::size_t expected_levels = 0);

void write_pgm(const ImageGrid& image, const std::filesystem::path& path);
ImageGrid read_pgm(const std::filesystem::path& path, std::size_t expected_levels = 0);

}  // namespace textpix
