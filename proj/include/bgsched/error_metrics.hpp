#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bgsched/errors.hpp"

namespace bgsched {

// Symmetric mean absolute percentage error, in percent. Bins where both
// series are zero contribute nothing instead of NaN.
inline double smape(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw ConfigError("smape: length mismatch");
    if (actual.empty()) throw ConfigError("smape: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
        if (denom > 0.0) acc += std::abs(predicted[i] - actual[i]) / denom;
    }
    return 100.0 * acc / static_cast<double>(actual.size());
}

struct MpeResult {
    std::optional<double> mpe;     // percent; empty when every actual is zero
    double cumulative_error = 0.0;  // sum of (actual - predicted) over all bins
    std::size_t excluded_bins = 0;  // bins skipped from MPE because actual == 0
};

// Mean percentage error keeps the sign, so over- and under-prediction offset;
// the cumulative error is the running bias of the forecast.
inline MpeResult mpe_and_cumulative(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw ConfigError("mpe: length mismatch");
    if (actual.empty()) throw ConfigError("mpe: empty input");
    MpeResult res;
    double acc = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double err = actual[i] - predicted[i];
        res.cumulative_error += err;
        if (actual[i] == 0.0) {
            ++res.excluded_bins;
            continue;
        }
        acc += err / actual[i];
        ++included;
    }
    if (included > 0) res.mpe = 100.0 * acc / static_cast<double>(included);
    return res;
}

struct ForecastErrors {
    double smape = 0.0;
    std::optional<double> mpe;
    double cumulative_error = 0.0;
    std::size_t excluded_bins = 0;
    std::vector<double> per_bin_error;  // actual - predicted
};

inline ForecastErrors evaluate_forecast(std::span<const double> actual, std::span<const double> predicted) {
    ForecastErrors e;
    e.smape = smape(actual, predicted);
    const MpeResult m = mpe_and_cumulative(actual, predicted);
    e.mpe = m.mpe;
    e.cumulative_error = m.cumulative_error;
    e.excluded_bins = m.excluded_bins;
    e.per_bin_error.reserve(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) e.per_bin_error.push_back(actual[i] - predicted[i]);
    return e;
}

}  // namespace bgsched
