#include "textpix/optim.hpp"

#include <cmath>

#include "textpix/error.hpp"

namespace textpix {

OptState make_opt_state(const ParamSet& params) { return {params.zeros_like(), 0}; }

double global_norm(const ParamSet& grads) {
  double total = 0.0;
  for (std::size_t t = 0; t < grads.size(); ++t)
    for (double g : grads[t].data()) total += g * g;
  return std::sqrt(total);
}

double clip_gradients(ParamSet& grads, double threshold) {
  if (!(threshold > 0.0)) throw ValueError("clip_gradients: threshold must be positive");
  for (std::size_t t = 0; t < grads.size(); ++t) {
    const auto data = grads[t].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i])) {
        throw NumericalError("non-finite gradient in '" + grads.name(t) + "' at index " +
                             std::to_string(i));
      }
    }
  }
  const double norm = global_norm(grads);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for (std::size_t t = 0; t < grads.size(); ++t)
      for (double& g : grads[t].data()) g *= factor;
  }
  return norm;
}

void rmsprop_update(ParamSet& params, const ParamSet& grads, OptState& opt,
                    const RmsPropOptions& options) {
  if (!params.same_layout(grads) || !params.same_layout(opt.accumulators)) {
    throw ShapeError("rmsprop_update: parameters, gradients and accumulators differ in layout");
  }
  const double rho = options.decay;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto theta = params[t].data();
    auto g = grads[t].data();
    auto acc = opt.accumulators[t].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      acc[i] = rho * acc[i] + (1.0 - rho) * g[i] * g[i];
      theta[i] -= options.learning_rate * g[i] / std::sqrt(acc[i] + options.epsilon);
    }
  }
  ++opt.step;
}

}  // namespace textpix
