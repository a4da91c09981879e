#include "acdc/core/signal.hpp"

#include "acdc/core/errors.hpp"

#include <string>

namespace acdc {

void require_finite(const Signal& s, std::string_view what, long step, long iteration) {
  if (s.allFinite()) return;
  std::string msg{what};
  msg += " produced a non-finite value";
  if (step >= 0) msg += " at step " + std::to_string(step);
  if (iteration >= 0) msg += " (iteration " + std::to_string(iteration) + ")";
  throw DivergenceError(msg, step, iteration);
}

}  // namespace acdc
