#pragma once

#include <Eigen/Core>

#include <string_view>

namespace acdc {

/// Dense real vector used for x, z, u, y and every intermediate.
using Signal = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Signal& s) { return s.allFinite(); }

/// Throws DivergenceError naming `what` if `s` holds NaN or Inf.
void require_finite(const Signal& s, std::string_view what, long step = -1, long iteration = -1);

}  // namespace acdc
