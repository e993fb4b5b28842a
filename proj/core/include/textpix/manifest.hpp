#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "textpix/dataset.hpp"

namespace textpix {

struct ManifestEntry {
  std::string image_file;
  Split split = Split::train;
  std::string caption;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// One line per entry: image-file TAB split TAB caption.
std::string encode_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> decode_manifest(std::string_view text);

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace textpix
