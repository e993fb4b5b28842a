#include "textpix/manifest.hpp"

#include <string>

#include "file_io.hpp"
#include "textpix/error.hpp"

namespace textpix {

namespace {

void check_field(std::string_view field, const char* name, std::size_t index) {
  if (field.find_first_of("\t\n\r") != std::string_view::npos) {
    throw ValueError("manifest entry " + std::to_string(index) + ": " + name + " contains a tab or newline");
  }
}

}  // namespace

std::string encode_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    check_field(e.image_file, "image file", i);
    check_field(e.caption, "caption", i);
    if (e.image_file.empty()) throw ValueError("manifest entry " + std::to_string(i) + ": empty image file");
    out += e.image_file;
    out += '\t';
    out += to_string(e.split);
    out += '\t';
    out += e.caption;
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> decode_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": missing trailing newline");
    }
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    auto fail = [&](const std::string& why) {
      return FormatError("manifest line " + std::to_string(line_no) + ": " + why);
    };
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw fail("expected 3 tab-separated fields");
    if (line.find('\t', t2 + 1) != std::string_view::npos) throw fail("too many fields");
    ManifestEntry e;
    e.image_file = std::string(line.substr(0, t1));
    if (e.image_file.empty()) throw fail("empty image file");
    const std::string_view split = line.substr(t1 + 1, t2 - t1 - 1);
    if (split == "train") {
      e.split = Split::train;
    } else if (split == "test") {
      e.split = Split::test;
    } else {
      throw fail("unknown split '" + std::string(split) + "'");
    }
    e.caption = std::string(line.substr(t2 + 1));
    if (e.caption.find('\r') != std::string::npos) throw fail("carriage return in caption");
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  detail::write_bytes(path, encode_manifest(entries), "manifest");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return decode_manifest(detail::read_bytes(path, "manifest"));
}

}  // namespace textpix
