#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bgsched/errors.hpp"
#include "bgsched/ewma.hpp"
#include "bgsched/kmeans.hpp"
#include "bgsched/series.hpp"

namespace bgsched {

struct ForecastConfig {
    int period = 144;          // bins per day
    double alpha_trend = 0.3;
    double alpha_season = 0.3;
    int epoch_day_of_week = 0;  // weekday of absolute day 0 (0 = Monday)
    std::set<long> holiday_days;  // absolute day indices that get their own label
    std::uint64_t cluster_seed = 1;
};

inline std::string day_label(long day_index, const ForecastConfig& cfg) {
    static const char* kNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    if (cfg.holiday_days.count(day_index)) return "holiday";
    const long dow = ((cfg.epoch_day_of_week + day_index) % 7 + 7) % 7;
    return kNames[dow];
}

struct ForecastResult {
    std::vector<double> values;
    bool unknown_label = false;  // some calendar label fell back to the nearest cluster
};

// Decomposes each observed day into a scalar level (its mean) and a per-phase
// deviation profile, groups day labels into clusters, and keeps one smoothed
// level plus one smoothed deviation profile per cluster. A day-ahead forecast
// is the cluster level plus its deviation at the bin's phase, so a history of
// identical days forecasts the next day exactly.
class ForecastModel {
public:
    struct ClusterState {
        std::vector<std::string> members;
        std::vector<double> centroid;      // 24-dim mean hourly level
        double trend_state = 0.0;          // smoothed daily mean
        std::vector<double> season_state;  // smoothed per-phase deviations
        int days_observed = 0;
    };

    static ForecastModel fit(const std::vector<double>& y, double interval_s, double start_epoch_s,
                             const ForecastConfig& cfg) {
        if (cfg.period < 1) throw ConfigError("forecast period must be positive");
        if (interval_s <= 0) throw ConfigError("interval must be positive");
        if (std::abs(interval_s * cfg.period - 86400.0) > 1e-6)
            throw ConfigError("interval times period must equal one day");

        ForecastModel m;
        m.cfg_ = cfg;

        const auto period = static_cast<std::size_t>(cfg.period);
        // First bin that starts exactly on a day boundary.
        const double first_day = std::ceil(start_epoch_s / 86400.0) * 86400.0;
        const auto k0 = static_cast<std::size_t>(std::llround((first_day - start_epoch_s) / interval_s));
        if (k0 >= y.size()) throw DataError("insufficient history: need at least two full days");
        const std::size_t n_days = (y.size() - k0) / period;
        if (n_days < 2) throw DataError("insufficient history: need at least two full days");
        const long day0 = std::lround(first_day / 86400.0);

        struct DayObs {
            long day_index;
            std::string label;
            double mean;
            std::vector<double> deviation;
            std::vector<double> hourly;
        };
        std::vector<DayObs> days;
        days.reserve(n_days);
        for (std::size_t d = 0; d < n_days; ++d) {
            DayObs obs;
            obs.day_index = day0 + static_cast<long>(d);
            obs.label = day_label(obs.day_index, cfg);
            const std::size_t base = k0 + d * period;
            double sum = 0.0;
            for (std::size_t i = 0; i < period; ++i) sum += y[base + i];
            obs.mean = sum / static_cast<double>(period);
            obs.deviation.resize(period);
            for (std::size_t i = 0; i < period; ++i) obs.deviation[i] = y[base + i] - obs.mean;
            obs.hourly.assign(24, 0.0);
            std::vector<int> counts(24, 0);
            for (std::size_t i = 0; i < period; ++i) {
                const auto hour = static_cast<std::size_t>(i * 24 / period);
                obs.hourly[hour] += y[base + i];
                ++counts[hour];
            }
            for (std::size_t h = 0; h < 24; ++h)
                if (counts[h] > 0) obs.hourly[h] /= counts[h];
            days.push_back(std::move(obs));
        }

        std::map<std::string, std::vector<double>> label_profiles;
        std::map<std::string, int> label_counts;
        for (const DayObs& d : days) {
            auto& acc = label_profiles[d.label];
            if (acc.empty()) acc.assign(24, 0.0);
            for (std::size_t h = 0; h < 24; ++h) acc[h] += d.hourly[h];
            ++label_counts[d.label];
        }
        for (auto& [label, profile] : label_profiles)
            for (double& v : profile) v /= label_counts[label];

        const auto clusters = cluster_days(label_profiles, cfg.cluster_seed);
        for (const DayCluster& c : clusters) {
            ClusterState state;
            state.members = c.members;
            state.centroid = c.centroid;
            state.season_state.assign(period, 0.0);
            m.clusters_.push_back(std::move(state));
        }
        for (std::size_t c = 0; c < m.clusters_.size(); ++c)
            for (const std::string& label : m.clusters_[c].members) m.label_to_cluster_[label] = c;

        // Fold each day's level and deviations into its cluster, oldest first.
        for (const DayObs& d : days) {
            ClusterState& c = m.clusters_[m.label_to_cluster_.at(d.label)];
            if (c.days_observed == 0) {
                c.trend_state = d.mean;
                c.season_state = d.deviation;
            } else {
                c.trend_state = ewma_update(c.trend_state, d.mean, cfg.alpha_trend);
                for (std::size_t i = 0; i < period; ++i)
                    c.season_state[i] = ewma_update(c.season_state[i], d.deviation[i], cfg.alpha_season);
            }
            ++c.days_observed;
        }

        // Fallback for labels never seen in history: the cluster nearest the
        // global mean day profile.
        std::vector<double> mean_day(24, 0.0);
        for (const DayObs& d : days)
            for (std::size_t h = 0; h < 24; ++h) mean_day[h] += d.hourly[h];
        for (double& v : mean_day) v /= static_cast<double>(days.size());
        double best = -1.0;
        for (std::size_t c = 0; c < m.clusters_.size(); ++c) {
            const double dist = detail::sq_dist(mean_day, m.clusters_[c].centroid);
            if (best < 0.0 || dist < best) {
                best = dist;
                m.fallback_cluster_ = c;
            }
        }
        m.days_observed_ = static_cast<int>(days.size());
        return m;
    }

    static ForecastModel fit(const IntensitySeries& history, Channel channel, const ForecastConfig& cfg) {
        return fit(channel_values(history, channel), history.interval, history.start_epoch, cfg);
    }

    // Read-only: the model is never mutated by forecasting. The calendar lists
    // the day label of each forecast day, starting with the day that contains
    // the first forecast bin; start_phase is that bin's position in its day.
    ForecastResult forecast(int horizon_bins, const std::vector<std::string>& calendar,
                            int start_phase = 0) const {
        if (horizon_bins <= 0) throw ConfigError("forecast horizon must be positive");
        if (start_phase < 0 || start_phase >= cfg_.period) throw ConfigError("start phase out of range");
        const auto period = static_cast<std::size_t>(cfg_.period);
        const std::size_t days_needed =
            (static_cast<std::size_t>(start_phase) + static_cast<std::size_t>(horizon_bins) + period - 1) / period;
        if (calendar.size() < days_needed) throw ConfigError("calendar does not cover the forecast horizon");

        ForecastResult out;
        out.values.reserve(static_cast<std::size_t>(horizon_bins));
        for (int h = 0; h < horizon_bins; ++h) {
            const std::size_t abs_bin = static_cast<std::size_t>(start_phase) + static_cast<std::size_t>(h);
            const std::size_t day = abs_bin / period;
            const std::size_t phase = abs_bin % period;
            std::size_t c;
            const auto it = label_to_cluster_.find(calendar[day]);
            if (it != label_to_cluster_.end()) {
                c = it->second;
            } else {
                c = fallback_cluster_;
                out.unknown_label = true;
            }
            out.values.push_back(clusters_[c].trend_state + clusters_[c].season_state[phase]);
        }
        return out;
    }

    int period() const { return cfg_.period; }
    const ForecastConfig& config() const { return cfg_; }
    const std::vector<ClusterState>& clusters() const { return clusters_; }
    int days_observed() const { return days_observed_; }
    int history_weeks() const { return (days_observed_ + 6) / 7; }

    nlohmann::json to_json() const {
        nlohmann::json clusters = nlohmann::json::array();
        for (const ClusterState& c : clusters_) {
            clusters.push_back({{"members", c.members},
                                {"centroid", c.centroid},
                                {"trend_state", c.trend_state},
                                {"season_state", c.season_state},
                                {"days_observed", c.days_observed}});
        }
        return nlohmann::json{{"period", cfg_.period},
                              {"alpha_trend", cfg_.alpha_trend},
                              {"alpha_season", cfg_.alpha_season},
                              {"epoch_day_of_week", cfg_.epoch_day_of_week},
                              {"holiday_days", std::vector<long>(cfg_.holiday_days.begin(), cfg_.holiday_days.end())},
                              {"fallback_cluster", fallback_cluster_},
                              {"days_observed", days_observed_},
                              {"clusters", clusters}};
    }

    static ForecastModel from_json(const nlohmann::json& j) {
        ForecastModel m;
        m.cfg_.period = j.at("period").get<int>();
        m.cfg_.alpha_trend = j.at("alpha_trend").get<double>();
        m.cfg_.alpha_season = j.at("alpha_season").get<double>();
        m.cfg_.epoch_day_of_week = j.at("epoch_day_of_week").get<int>();
        for (long d : j.at("holiday_days").get<std::vector<long>>()) m.cfg_.holiday_days.insert(d);
        m.fallback_cluster_ = j.at("fallback_cluster").get<std::size_t>();
        m.days_observed_ = j.at("days_observed").get<int>();
        for (const auto& jc : j.at("clusters")) {
            ClusterState c;
            c.members = jc.at("members").get<std::vector<std::string>>();
            c.centroid = jc.at("centroid").get<std::vector<double>>();
            c.trend_state = jc.at("trend_state").get<double>();
            c.season_state = jc.at("season_state").get<std::vector<double>>();
            c.days_observed = jc.at("days_observed").get<int>();
            m.clusters_.push_back(std::move(c));
        }
        for (std::size_t c = 0; c < m.clusters_.size(); ++c)
            for (const std::string& label : m.clusters_[c].members) m.label_to_cluster_[label] = c;
        if (m.clusters_.empty()) throw DataError("forecast model has no clusters");
        if (m.fallback_cluster_ >= m.clusters_.size()) throw DataError("bad fallback cluster index");
        return m;
    }

private:
    ForecastConfig cfg_;
    std::vector<ClusterState> clusters_;
    std::map<std::string, std::size_t> label_to_cluster_;
    std::size_t fallback_cluster_ = 0;
    int days_observed_ = 0;
};

// Per-channel day-ahead forecasts used by the capacity planner. Ratio channels
// are clamped to [0, 1].
struct ChannelForecasts {
    std::vector<double> total_iops;
    std::vector<double> write_blocks;
    std::vector<double> read_ratio;
    std::vector<double> unique_fraction;
    bool clamped = false;
    bool unknown_label = false;

    std::size_t size() const { return total_iops.size(); }
};

inline ChannelForecasts forecast_channels(const std::map<Channel, ForecastModel>& models, int horizon_bins,
                                          const std::vector<std::string>& calendar, int start_phase = 0) {
    ChannelForecasts out;
    auto run = [&](Channel ch) {
        const auto it = models.find(ch);
        if (it == models.end())
            throw ConfigError(std::string("missing forecast model for channel ") + channel_name(ch));
        ForecastResult r = it->second.forecast(horizon_bins, calendar, start_phase);
        out.unknown_label = out.unknown_label || r.unknown_label;
        return std::move(r.values);
    };
    out.total_iops = run(Channel::total_iops);
    out.write_blocks = run(Channel::write_blocks);
    out.read_ratio = run(Channel::read_ratio);
    out.unique_fraction = run(Channel::unique_fraction);
    for (auto* ratios : {&out.read_ratio, &out.unique_fraction}) {
        for (double& v : *ratios) {
            if (v < 0.0 || v > 1.0) {
                v = std::clamp(v, 0.0, 1.0);
                out.clamped = true;
            }
        }
    }
    for (auto* counts : {&out.total_iops, &out.write_blocks})
        for (double& v : *counts) v = std::max(0.0, v);
    return out;
}

}  // namespace bgsched
