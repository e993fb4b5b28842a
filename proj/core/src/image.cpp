#include "textpix/image.hpp"

#include <cmath>
#include <string>

#include "textpix/error.hpp"

namespace textpix {

namespace {

void check_dims(std::size_t height, std::size_t width, std::size_t levels) {
  if (height == 0 || width == 0) throw ValueError("image extents must be positive");
  if (levels < 2 || levels > 65536) {
    throw ValueError("quantization levels must lie in [2, 65536], got " + std::to_string(levels));
  }
}

}  // namespace

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t levels)
    : height_(height), width_(width), levels_(levels), pixels_(height * width, 0) {
  check_dims(height, width, levels);
}

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t levels,
                     std::vector<Level> pixels)
    : height_(height), width_(width), levels_(levels), pixels_(std::move(pixels)) {
  check_dims(height, width, levels);
  if (pixels_.size() != height * width) {
    throw ValueError("image has " + std::to_string(pixels_.size()) + " pixels, expected " +
                     std::to_string(height * width));
  }
  for (Level p : pixels_)
    if (p >= levels_) throw ValueError("pixel level " + std::to_string(p) + " >= Q = " + std::to_string(levels_));
}

void ImageGrid::set(std::size_t i, Level value) {
  if (i >= pixels_.size()) throw ValueError("pixel index out of range");
  if (value >= levels_) throw ValueError("pixel level " + std::to_string(value) + " >= Q");
  pixels_[i] = value;
}

Level quantize_value(double v, std::size_t levels) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValueError("intensity " + std::to_string(v) + " outside [0, 1]");
  const double scaled = std::floor(v * static_cast<double>(levels));
  const auto level = static_cast<std::size_t>(scaled);
  return static_cast<Level>(level >= levels ? levels - 1 : level);
}

ImageGrid quantize(const Intensities& image, std::size_t levels) {
  if (image.values.size() != image.height * image.width) {
    throw ValueError("intensity grid size does not match its extents");
  }
  std::vector<Level> pixels;
  pixels.reserve(image.values.size());
  for (double v : image.values) pixels.push_back(quantize_value(v, levels));
  return ImageGrid(image.height, image.width, levels, std::move(pixels));
}

Intensities dequantize(const ImageGrid& image) {
  Intensities out{image.height(), image.width(), {}};
  out.values.reserve(image.size());
  const double q = static_cast<double>(image.levels());
  for (Level p : image.pixels()) out.values.push_back((static_cast<double>(p) + 0.5) / q);
  return out;
}

}  // namespace textpix
