#pragma once

#include <cstddef>

#include "textpix/image.hpp"

namespace ref {

// SSIM of two equal-size level grids from the textbook formula, population statistics,
// c1 = (0.01 R)^2, c2 = (0.03 R)^2, R = Q - 1. Deliberately naive.
inline double brute_ssim(const textpix::ImageGrid& a, const textpix::ImageGrid& b) {
  const double n = static_cast<double>(a.size());
  const double r = static_cast<double>(a.levels() - 1);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0, vb = 0, cov = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cov += (a[i] - ma) * (b[i] - mb);
  }
  va /= n;
  vb /= n;
  cov /= n;
  const double c1 = (0.01 * r) * (0.01 * r);
  const double c2 = (0.03 * r) * (0.03 * r);
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace ref
