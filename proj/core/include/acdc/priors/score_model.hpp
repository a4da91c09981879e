#pragma once

#include "acdc/core/signal.hpp"

#include <optional>

namespace acdc {

/// Anything that can evaluate grad log p_sigma(x), the score of the data
/// density smoothed by N(0, sigma^2 I).
///
/// Implementations must be pure in (x, sigma) so that they can be shared
/// across threads.
class ScoreModel {
public:
  virtual ~ScoreModel() = default;

  virtual Index dim() const = 0;
  virtual Signal score(const Signal& x, double sigma) const = 0;

  /// Global smoothness constant M of grad log p_data, when known.
  virtual std::optional<double> smoothness() const { return std::nullopt; }
};

}  // namespace acdc
