#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bgsched/errors.hpp"

namespace bgsched {

// Classical additive decomposition. trend[t] + season[t % period] +
// residual[t] == y[t] at every index by construction; the trend is only
// meaningful inside [trend_valid_begin, trend_valid_end), outside it the
// nearest valid value is replicated.
struct Decomposition {
    int period = 0;
    std::vector<double> trend;     // same length as input
    std::vector<double> season;    // length = period, sums to ~0
    std::vector<double> residual;  // same length as input
    std::size_t trend_valid_begin = 0;
    std::size_t trend_valid_end = 0;  // one past the last valid index
};

// Centered moving-average trend (even periods use the standard 2xP filter with
// half-weight ends), per-phase seasonal means re-centered to sum zero.
inline Decomposition decompose_additive(std::span<const double> y, int period) {
    if (period < 2) throw ConfigError("decomposition period must be at least 2");
    const std::size_t n = y.size();
    if (n < 2 * static_cast<std::size_t>(period))
        throw DataError("series must cover at least two periods");

    Decomposition d;
    d.period = period;
    d.trend.assign(n, 0.0);
    d.residual.assign(n, 0.0);
    d.season.assign(static_cast<std::size_t>(period), 0.0);

    const int half = period / 2;
    const bool even = period % 2 == 0;
    d.trend_valid_begin = static_cast<std::size_t>(half);
    d.trend_valid_end = n - static_cast<std::size_t>(half);

    for (std::size_t t = d.trend_valid_begin; t < d.trend_valid_end; ++t) {
        const auto ti = static_cast<std::ptrdiff_t>(t);
        double acc = 0.0;
        if (even) {
            acc += 0.5 * (y[static_cast<std::size_t>(ti - half)] + y[static_cast<std::size_t>(ti + half)]);
            for (int j = -half + 1; j <= half - 1; ++j) acc += y[static_cast<std::size_t>(ti + j)];
        } else {
            for (int j = -half; j <= half; ++j) acc += y[static_cast<std::size_t>(ti + j)];
        }
        d.trend[t] = acc / static_cast<double>(period);
    }
    // Replicate ends so downstream code never sees NaN.
    for (std::size_t t = 0; t < d.trend_valid_begin; ++t) d.trend[t] = d.trend[d.trend_valid_begin];
    for (std::size_t t = d.trend_valid_end; t < n; ++t) d.trend[t] = d.trend[d.trend_valid_end - 1];

    std::vector<double> phase_sum(static_cast<std::size_t>(period), 0.0);
    std::vector<int> phase_count(static_cast<std::size_t>(period), 0);
    for (std::size_t t = d.trend_valid_begin; t < d.trend_valid_end; ++t) {
        const std::size_t phase = t % static_cast<std::size_t>(period);
        phase_sum[phase] += y[t] - d.trend[t];
        ++phase_count[phase];
    }
    double season_mean = 0.0;
    for (int i = 0; i < period; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        d.season[idx] = phase_count[idx] > 0 ? phase_sum[idx] / phase_count[idx] : 0.0;
        season_mean += d.season[idx];
    }
    season_mean /= static_cast<double>(period);
    for (double& s : d.season) s -= season_mean;

    for (std::size_t t = 0; t < n; ++t)
        d.residual[t] = y[t] - d.trend[t] - d.season[t % static_cast<std::size_t>(period)];
    return d;
}

}  // namespace bgsched
