#include "textpix/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "textpix/error.hpp"

namespace textpix {

namespace {

double evaluate(const LossBuilder& loss, const ParamSet& params) {
  Tape tape;
  const auto vars = bind_params(tape, params, false);
  const double value = loss(tape, vars).value()[0];
  if (!std::isfinite(value)) throw NumericalError("grad_check: loss is not finite");
  return value;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, ParamSet params, double eps) {
  if (!(eps > 0.0)) throw ValueError("grad_check: eps must be positive");

  Tape tape;
  const auto vars = bind_params(tape, params, true);
  Var out = loss(tape, vars);
  if (!std::isfinite(out.value()[0])) throw NumericalError("grad_check: loss is not finite");
  tape.backward(out);
  const ParamSet analytic = collect_gradients(tape, vars, params);

  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + eps;
      const double up = evaluate(loss, params);
      params[t][i] = saved - eps;
      const double down = evaluate(loss, params);
      params[t][i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = t;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

std::string describe(const GradCheckResult& r, const ParamSet& params) {
  std::ostringstream os;
  os << "max relative error " << r.max_relative_error << " over " << r.coordinates
     << " coordinates";
  if (r.coordinates > 0 && r.worst_tensor < params.size()) {
    os << " (worst: " << params.name(r.worst_tensor) << '[' << r.worst_index
       << "] analytic " << r.worst_analytic << " numeric " << r.worst_numeric << ')';
  }
  return os.str();
}

}  // namespace textpix
