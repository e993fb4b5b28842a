#include "textpix/pgm.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "file_io.hpp"
#include "textpix/error.hpp"

namespace textpix {

std::string encode_pgm(const ImageGrid& image) {
  const std::size_t maxval = image.levels() - 1;
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n" +
                    std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  out.reserve(out.size() + image.size() * (wide ? 2 : 1));
  for (const Level v : image.pixels()) {
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : b_(bytes) {}

  std::size_t number(const char* field) {
    skip_space_and_comments();
    std::size_t value = 0;
    const char* begin = b_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(begin, b_.data() + b_.size(), value);
    if (ec != std::errc() || ptr == begin) throw FormatError(std::string("PGM header: bad ") + field);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      throw FormatError("PGM header: missing separator before raster");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageGrid decode_pgm(std::string_view bytes, std::size_t expected_levels) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw FormatError("not a binary PGM (expected P5 magic)");
  HeaderReader h(bytes.substr(2));
  const std::size_t width = h.number("width");
  const std::size_t height = h.number("height");
  const std::size_t maxval = h.number("maxval");
  h.single_space();
  if (width == 0 || height == 0) throw FormatError("PGM has zero extent");
  if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval " + std::to_string(maxval) + " out of range");
  if (expected_levels != 0 && maxval + 1 != expected_levels) {
    throw FormatError("PGM maxval " + std::to_string(maxval) + " does not match " +
                      std::to_string(expected_levels) + " levels");
  }
  const bool wide = maxval > 255;
  const std::size_t count = width * height;
  const std::size_t need = count * (wide ? 2 : 1);
  const std::string_view raster = bytes.substr(2 + h.pos());
  if (raster.size() < need) {
    throw FormatError("PGM raster truncated: " + std::to_string(raster.size()) + " of " + std::to_string(need) +
                      " bytes");
  }
  std::vector<Level> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned v = 0;
    if (wide) {
      v = (static_cast<unsigned char>(raster[2 * i]) << 8) | static_cast<unsigned char>(raster[2 * i + 1]);
    } else {
      v = static_cast<unsigned char>(raster[i]);
    }
    if (v > maxval) throw FormatError("PGM sample " + std::to_string(v) + " exceeds maxval");
    pixels[i] = static_cast<Level>(v);
  }
  return ImageGrid(height, width, maxval + 1, std::move(pixels));
}

void write_pgm(const ImageGrid& image, const std::filesystem::path& path) {
  detail::write_bytes(path, encode_pgm(image), "PGM");
}

ImageGrid read_pgm(const std::filesystem::path& path, std::size_t expected_levels) {
  try {
    return decode_pgm(detail::read_bytes(path, "PGM"), expected_levels);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace textpix
