#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bgsched/errors.hpp"

namespace bgsched {

// values[k] is the coefficient at lag k; values[0] == 1. A constant input is
// reported as degenerate with zeros past lag 0 rather than NaN.
struct CorrelationResult {
    std::vector<double> values;
    bool degenerate = false;
};

// Sample-mean-centered autocorrelation estimator.
inline CorrelationResult autocorrelation(std::span<const double> y, int max_lag) {
    if (max_lag < 1) throw ConfigError("max_lag must be at least 1");
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    if (n <= max_lag) throw ConfigError("series must be longer than max_lag");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);

    double denom = 0.0;
    for (double v : y) denom += (v - mean) * (v - mean);

    CorrelationResult res;
    res.values.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
    res.values[0] = 1.0;
    if (denom <= 0.0) {
        res.degenerate = true;
        return res;
    }
    for (int k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t t = k; t < n; ++t) acc += (y[t] - mean) * (y[t - k] - mean);
        res.values[static_cast<std::size_t>(k)] = acc / denom;
    }
    return res;
}

// Partial autocorrelation via the Durbin-Levinson recursion on the ACF.
// values[k] = phi_kk; values[0] == 1 by convention, values[1] equals ACF lag 1.
inline CorrelationResult partial_autocorrelation(std::span<const double> y, int max_lag) {
    CorrelationResult acf = autocorrelation(y, max_lag);
    CorrelationResult res;
    res.values.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
    res.values[0] = 1.0;
    if (acf.degenerate) {
        res.degenerate = true;
        return res;
    }

    const auto& r = acf.values;
    std::vector<double> phi_prev(static_cast<std::size_t>(max_lag) + 1, 0.0);
    std::vector<double> phi(static_cast<std::size_t>(max_lag) + 1, 0.0);

    phi_prev[1] = r[1];
    res.values[1] = r[1];
    for (int k = 2; k <= max_lag; ++k) {
        double num = r[static_cast<std::size_t>(k)];
        double den = 1.0;
        for (int j = 1; j < k; ++j) {
            num -= phi_prev[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(k - j)];
            den -= phi_prev[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)];
        }
        if (std::abs(den) < 1e-12) {
            res.degenerate = true;  // singular step: remaining lags stay zero
            return res;
        }
        const double pkk = num / den;
        res.values[static_cast<std::size_t>(k)] = pkk;
        for (int j = 1; j < k; ++j)
            phi[static_cast<std::size_t>(j)] = phi_prev[static_cast<std::size_t>(j)] -
                                               pkk * phi_prev[static_cast<std::size_t>(k - j)];
        phi[static_cast<std::size_t>(k)] = pkk;
        std::swap(phi, phi_prev);
    }
    return res;
}

}  // namespace bgsched
