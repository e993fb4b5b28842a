#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace textpix {

using Level = std::uint16_t;

// h x w grid of quantization levels in [0, Q), stored row-major. Pixel j of the decoder's
// sequence is pixels[j].
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t height, std::size_t width, std::size_t levels);  // all zero
  ImageGrid(std::size_t height, std::size_t width, std::size_t levels, std::vector<Level> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t levels() const { return levels_; }
  std::size_t size() const { return pixels_.size(); }

  Level operator[](std::size_t i) const { return pixels_[i]; }
  Level at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
  void set(std::size_t i, Level value);
  void set(std::size_t row, std::size_t col, Level value) { set(row * width_ + col, value); }
  std::span<const Level> pixels() const { return pixels_; }

  bool same_shape(const ImageGrid& other) const {
    return height_ == other.height_ && width_ == other.width_ && levels_ == other.levels_;
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t levels_ = 2;
  std::vector<Level> pixels_;
};

// Real-valued intensities in [0, 1], row-major.
struct Intensities {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
};

// level = min(floor(v * Q), Q - 1)
ImageGrid quantize(const Intensities& image, std::size_t levels);
Level quantize_value(double v, std::size_t levels);
// level -> (level + 0.5) / Q
Intensities dequantize(const ImageGrid& image);

}  // namespace textpix
