#include "textpix/idx.hpp"

#include <string>

#include "file_io.hpp"
#include "textpix/error.hpp"

namespace textpix {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t be32(std::string_view b, std::size_t at, const char* what) {
  if (b.size() < at + 4) throw FormatError(std::string(what) + " IDX header truncated");
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < 4; ++k) v = (v << 8) | static_cast<unsigned char>(b[at + k]);
  return v;
}

}  // namespace

std::vector<IdxDigit> decode_idx(std::string_view images, std::string_view labels) {
  if (be32(images, 0, "images") != kImagesMagic) throw FormatError("images file has bad IDX magic");
  if (be32(labels, 0, "labels") != kLabelsMagic) throw FormatError("labels file has bad IDX magic");
  const std::size_t n = be32(images, 4, "images");
  const std::size_t rows = be32(images, 8, "images");
  const std::size_t cols = be32(images, 12, "images");
  const std::size_t n_labels = be32(labels, 4, "labels");
  if (n != n_labels) {
    throw FormatError("IDX count mismatch: " + std::to_string(n) + " images, " + std::to_string(n_labels) +
                      " labels");
  }
  if (n > 0 && (rows == 0 || cols == 0)) throw FormatError("IDX images have zero extent");
  const std::size_t px = rows * cols;
  if (images.size() - 16 < n * px) throw FormatError("IDX images payload truncated");
  if (labels.size() - 8 < n) throw FormatError("IDX labels payload truncated");

  std::vector<IdxDigit> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    IdxDigit& d = out[i];
    d.label = static_cast<std::uint8_t>(labels[8 + i]);
    d.rows = rows;
    d.cols = cols;
    d.values.resize(px);
    for (std::size_t p = 0; p < px; ++p)
      d.values[p] = static_cast<unsigned char>(images[16 + i * px + p]) / 255.0;
  }
  return out;
}

std::vector<IdxDigit> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  return decode_idx(detail::read_bytes(images_path, "IDX images"), detail::read_bytes(labels_path, "IDX labels"));
}

}  // namespace textpix
