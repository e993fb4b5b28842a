#pragma once

#include <cstddef>

#include "textpix/image.hpp"

namespace textpix {

struct SsimParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double range = 1.0;      // dynamic range R of the pixel values
  std::size_t window = 0;  // 0: whole-image statistics; k: mean over all k x k windows

  // c1 = (0.01 R)^2, c2 = (0.03 R)^2 with R = Q - 1.
  static SsimParams for_levels(std::size_t levels);
  void validate() const;
};

// (2 mu_a mu_b + c1)(2 cov_ab + c2) / ((mu_a^2 + mu_b^2 + c1)(var_a + var_b + c2)) with
// population statistics over the integer levels.
double ssim(const ImageGrid& a, const ImageGrid& b, const SsimParams& params);
double ssim(const ImageGrid& a, const ImageGrid& b);  // for_levels(a.levels())

}  // namespace textpix
