#pragma once

#include <optional>

#include "bgsched/errors.hpp"

namespace bgsched {

// One step of the exponentially weighted moving average: the first observation
// seeds the state, later ones fold in with weight alpha.
inline double ewma_update(std::optional<double> prev, double y, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("ewma alpha must be in (0, 1]");
    if (!prev) return y;
    return alpha * y + (1.0 - alpha) * *prev;
}

}  // namespace bgsched
