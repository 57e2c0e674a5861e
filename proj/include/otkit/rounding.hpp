#pragma once

#include "otkit/core.hpp"

namespace otkit {

/// Moves an approximately feasible plan onto U(p, q).
///
/// Rows and columns carrying too much mass are scaled down, then the missing
/// mass is restored by the rank-one correction e_p e_q^T / ||e_p||_1. The
/// result satisfies ||out - plan||_1 <= ||plan 1 - p||_1 + ||plan^T 1 - q||_1.
TransportPlan round_to_polytope(const Matrix& plan, const DiscreteMeasure& p,
                                const DiscreteMeasure& q);

}  // namespace otkit
