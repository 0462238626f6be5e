#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bgsched/errors.hpp"
#include "bgsched/synth.hpp"  // SplitMix64

namespace bgsched {

// A group of day labels whose mean hourly intensity profiles behave alike.
struct DayCluster {
    std::vector<std::string> members;
    std::vector<double> centroid;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

struct KmeansRun {
    std::vector<int> assignment;
    std::vector<std::vector<double>> centroids;
    double sse = 0.0;
};

// Lloyd's iterations from a kmeans++ seeding; deterministic for a fixed seed.
inline KmeansRun kmeans_once(const std::vector<std::vector<double>>& points, int k, SplitMix64& rng) {
    const std::size_t n = points.size();
    KmeansRun run;
    run.centroids.reserve(static_cast<std::size_t>(k));
    run.centroids.push_back(points[rng.next_below(n)]);
    std::vector<double> dist(n);
    while (run.centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sq_dist(points[i], run.centroids[0]);
            for (std::size_t c = 1; c < run.centroids.size(); ++c)
                best = std::min(best, sq_dist(points[i], run.centroids[c]));
            dist[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            run.centroids.push_back(points[rng.next_below(n)]);
            continue;
        }
        double target = rng.next_real() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= dist[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        run.centroids.push_back(points[pick]);
    }

    run.assignment.assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], run.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], run.centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (run.assignment[i] != best) {
                run.assignment[i] = best;
                changed = true;
            }
        }
        const std::size_t dim = points[0].size();
        for (int c = 0; c < k; ++c) {
            std::vector<double> mean(dim, 0.0);
            int count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (run.assignment[i] != c) continue;
                ++count;
                for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
            }
            if (count > 0) {
                for (double& v : mean) v /= count;
                run.centroids[static_cast<std::size_t>(c)] = std::move(mean);
            }
        }
        if (!changed && iter > 0) break;
    }

    run.sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        run.sse += sq_dist(points[i], run.centroids[static_cast<std::size_t>(run.assignment[i])]);
    return run;
}

inline KmeansRun kmeans_best_of(const std::vector<std::vector<double>>& points, int k,
                                std::uint64_t seed, int restarts = 8) {
    SplitMix64 rng(seed);
    KmeansRun best;
    best.sse = -1.0;
    for (int r = 0; r < restarts; ++r) {
        KmeansRun run = kmeans_once(points, k, rng);
        if (best.sse < 0.0 || run.sse < best.sse) best = std::move(run);
    }
    return best;
}

}  // namespace detail

// Upper bound on the cluster count for n day labels.
inline int max_day_clusters(std::size_t n_labels) {
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_labels) / 2.0)));
}

// Groups day labels by profile similarity. k is chosen by an elbow rule: the
// sweep stops at the first k whose SSE improvement over k-1 drops below 10%,
// and never exceeds max_day_clusters(n).
inline std::vector<DayCluster> cluster_days(const std::map<std::string, std::vector<double>>& daily_profiles,
                                            std::uint64_t seed = 1) {
    if (daily_profiles.empty()) throw DataError("no day profiles to cluster");
    const std::size_t dim = daily_profiles.begin()->second.size();
    std::vector<std::string> labels;
    std::vector<std::vector<double>> points;
    for (const auto& [label, profile] : daily_profiles) {
        if (profile.size() != dim) throw ConfigError("day profiles must share one dimension");
        labels.push_back(label);
        points.push_back(profile);
    }

    const int k_max = std::min<int>(max_day_clusters(points.size()), static_cast<int>(points.size()));
    detail::KmeansRun chosen = detail::kmeans_best_of(points, 1, seed);
    double prev_sse = chosen.sse;
    for (int k = 2; k <= k_max; ++k) {
        if (prev_sse <= 1e-12) break;  // already a perfect fit
        detail::KmeansRun run = detail::kmeans_best_of(points, k, seed + static_cast<std::uint64_t>(k));
        const double reduction = (prev_sse - run.sse) / prev_sse;
        if (reduction < 0.10) break;
        chosen = std::move(run);
        prev_sse = chosen.sse;
    }

    const int k = static_cast<int>(chosen.centroids.size());
    std::vector<DayCluster> clusters(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        clusters[static_cast<std::size_t>(c)].centroid = chosen.centroids[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < labels.size(); ++i)
        clusters[static_cast<std::size_t>(chosen.assignment[i])].members.push_back(labels[i]);
    clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                  [](const DayCluster& c) { return c.members.empty(); }),
                   clusters.end());
    for (DayCluster& c : clusters) std::sort(c.members.begin(), c.members.end());
    std::sort(clusters.begin(), clusters.end(),
              [](const DayCluster& a, const DayCluster& b) { return a.members.front() < b.members.front(); });
    return clusters;
}

}  // namespace bgsched
