#include "textpix/ssim.hpp"

#include <string>

#include "textpix/error.hpp"

namespace textpix {

SsimParams SsimParams::for_levels(std::size_t levels) {
  const double r = static_cast<double>(levels) - 1.0;
  return {(0.01 * r) * (0.01 * r), (0.03 * r) * (0.03 * r), r, 0};
}

void SsimParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ValueError("SSIM constants c1 and c2 must be positive");
}

namespace {

double patch_ssim(const ImageGrid& a, const ImageGrid& b, std::size_t row0, std::size_t col0,
                  std::size_t rows, std::size_t cols, const SsimParams& p) {
  const double n = static_cast<double>(rows * cols);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t r = row0; r < row0 + rows; ++r)
    for (std::size_t c = col0; c < col0 + cols; ++c) {
      sum_a += a.at(r, c);
      sum_b += b.at(r, c);
    }
  const double mu_a = sum_a / n;
  const double mu_b = sum_b / n;
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (std::size_t r = row0; r < row0 + rows; ++r)
    for (std::size_t c = col0; c < col0 + cols; ++c) {
      const double da = a.at(r, c) - mu_a;
      const double db = b.at(r, c) - mu_b;
      var_a += da * da;
      var_b += db * db;
      cov += da * db;
    }
  var_a /= n;
  var_b /= n;
  cov /= n;
  const double num = (2.0 * mu_a * mu_b + p.c1) * (2.0 * cov + p.c2);
  const double den = (mu_a * mu_a + mu_b * mu_b + p.c1) * (var_a + var_b + p.c2);
  return num / den;
}

}  // namespace

double ssim(const ImageGrid& a, const ImageGrid& b, const SsimParams& params) {
  params.validate();
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("ssim: images differ in shape (" + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
  }
  if (params.window == 0) return patch_ssim(a, b, 0, 0, a.height(), a.width(), params);

  const std::size_t k = params.window;
  if (k > a.height() || k > a.width()) throw ValueError("ssim: window larger than the image");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + k <= a.height(); ++r)
    for (std::size_t c = 0; c + k <= a.width(); ++c) {
      total += patch_ssim(a, b, r, c, k, k, params);
      ++count;
    }
  return total / static_cast<double>(count);
}

double ssim(const ImageGrid& a, const ImageGrid& b) {
  return ssim(a, b, SsimParams::for_levels(a.levels()));
}

}  // namespace textpix
