#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace textpix {

struct IdxDigit {
  std::uint8_t label = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // byte / 255, row-major
};

std::vector<IdxDigit> decode_idx(std::string_view images, std::string_view labels);
std::vector<IdxDigit> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

}  // namespace textpix
