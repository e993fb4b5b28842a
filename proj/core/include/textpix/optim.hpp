#pragma once

#include <cstdint>

#include "textpix/params.hpp"

namespace textpix {

struct OptState {
  ParamSet accumulators;  // running mean of squared gradients, same layout as the params
  std::uint64_t step = 0;

  friend bool operator==(const OptState&, const OptState&) = default;
};

OptState make_opt_state(const ParamSet& params);

// Global L2 norm over every entry of every tensor.
double global_norm(const ParamSet& grads);

// Rescales all gradients by threshold / norm when the global norm exceeds the threshold.
// Returns the norm before clipping. Throws NumericalError naming the first tensor holding
// a non-finite entry.
double clip_gradients(ParamSet& grads, double threshold);

struct RmsPropOptions {
  double learning_rate = 0.001;
  double decay = 0.9;     // rho
  double epsilon = 1e-8;
};

// acc = rho * acc + (1 - rho) g^2;  theta -= lr * g / sqrt(acc + eps)
void rmsprop_update(ParamSet& params, const ParamSet& grads, OptState& opt,
                    const RmsPropOptions& options = {});

}  // namespace textpix
