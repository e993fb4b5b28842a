#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "textpix/autodiff.hpp"
#include "textpix/params.hpp"

namespace textpix {

// Builds a scalar loss on `tape` from leaves bound to the given parameter set.
using LossBuilder = std::function<Var(Tape& tape, const std::vector<Var>& params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

// Compares the tape gradient of every coordinate with (f(x+eps) - f(x-eps)) / (2 eps).
// The relative error of one coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const LossBuilder& loss, ParamSet params, double eps = 1e-5);

std::string describe(const GradCheckResult& r, const ParamSet& params);

}  // namespace textpix
