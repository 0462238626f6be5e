#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "bgsched/errors.hpp"

namespace bgsched {

struct HoltWintersParams {
    double alpha = 0.3;  // level
    double beta = 0.1;   // trend
    double gamma = 0.3;  // season
    double phi = 1.0;    // trend damping, 1 = undamped
};

// Additive triple exponential smoothing with an optional damped trend.
// Parameters are grid-searched on in-sample one-step SSE when not supplied.
class HoltWinters {
public:
    static HoltWinters fit(std::span<const double> y, int period, bool damped,
                           std::optional<HoltWintersParams> params = std::nullopt) {
        if (period < 2) throw ConfigError("holt-winters period must be at least 2");
        if (y.size() < 2 * static_cast<std::size_t>(period))
            throw DataError("series must cover at least two periods");

        if (params) {
            HoltWinters m(*params, period);
            m.run(y);
            return m;
        }

        static const double kGrid[] = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
        static const double kPhi[] = {0.8, 0.9, 0.98};
        HoltWinters best({}, period);
        double best_sse = -1.0;
        for (double a : kGrid) {
            for (double b : kGrid) {
                for (double g : kGrid) {
                    const std::size_t n_phi = damped ? 3 : 1;
                    for (std::size_t pi = 0; pi < n_phi; ++pi) {
                        HoltWintersParams p{a, b, g, damped ? kPhi[pi] : 1.0};
                        HoltWinters m(p, period);
                        m.run(y);
                        if (best_sse < 0.0 || m.sse_ < best_sse) {
                            best_sse = m.sse_;
                            best = std::move(m);
                        }
                    }
                }
            }
        }
        return best;
    }

    std::vector<double> forecast(int horizon) const {
        if (horizon <= 0) throw ConfigError("forecast horizon must be positive");
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(horizon));
        double damp_sum = 0.0;
        double damp_pow = 1.0;
        for (int h = 1; h <= horizon; ++h) {
            damp_pow *= params_.phi;
            damp_sum += damp_pow;
            const std::size_t idx = (static_cast<std::size_t>(h) - 1) % static_cast<std::size_t>(period_);
            out.push_back(level_ + damp_sum * trend_ + last_season_[idx]);
        }
        return out;
    }

    const HoltWintersParams& params() const { return params_; }
    double sse() const { return sse_; }
    double level() const { return level_; }
    double trend() const { return trend_; }

private:
    HoltWinters(HoltWintersParams p, int period) : params_(p), period_(period) {}

    void run(std::span<const double> y) {
        const auto period = static_cast<std::size_t>(period_);
        const std::size_t n = y.size();

        double first = 0.0, second = 0.0;
        for (std::size_t i = 0; i < period; ++i) first += y[i];
        for (std::size_t i = period; i < 2 * period; ++i) second += y[i];
        first /= static_cast<double>(period);
        second /= static_cast<double>(period);

        double level = first;
        double trend = (second - first) / static_cast<double>(period);
        // season[i] holds the state for time i - period.
        std::vector<double> season(n + period, 0.0);
        double season_mean = 0.0;
        for (std::size_t i = 0; i < period; ++i) season_mean += y[i] - first;
        season_mean /= static_cast<double>(period);
        for (std::size_t i = 0; i < period; ++i) season[i] = y[i] - first - season_mean;

        const double a = params_.alpha, b = params_.beta, g = params_.gamma, phi = params_.phi;
        sse_ = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double s_prev = season[t];
            const double predicted = level + phi * trend + s_prev;
            const double err = y[t] - predicted;
            if (t >= period) sse_ += err * err;  // skip the warm-up cycle
            const double level_prev = level;
            level = a * (y[t] - s_prev) + (1.0 - a) * (level + phi * trend);
            trend = b * (level - level_prev) + (1.0 - b) * phi * trend;
            season[t + period] = g * (y[t] - level) + (1.0 - g) * s_prev;
        }
        level_ = level;
        trend_ = trend;
        last_season_.assign(season.begin() + static_cast<std::ptrdiff_t>(n),
                            season.begin() + static_cast<std::ptrdiff_t>(n + period));
    }

    HoltWintersParams params_;
    int period_;
    double level_ = 0.0;
    double trend_ = 0.0;
    std::vector<double> last_season_;
    double sse_ = 0.0;
};

}  // namespace bgsched
