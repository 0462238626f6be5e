#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "bgsched/debt.hpp"
#include "bgsched/errors.hpp"
#include "bgsched/forecast.hpp"

namespace bgsched {

struct HardwareModel {
    int n_cores = 64;
    double fg_core_iops = 50.0;  // foreground ops/s one core sustains
    double bg_core_rate = 20.0;  // background ops/s one core sustains
    double interval = 600.0;     // seconds per scheduling bin

    void check() const {
        if (n_cores <= 0 || fg_core_iops <= 0 || bg_core_rate <= 0 || interval <= 0)
            throw ConfigError("hardware model values must be positive");
    }
    std::int64_t fg_bin_capacity(int c_fg) const {
        return static_cast<std::int64_t>(std::floor(c_fg * fg_core_iops * interval));
    }
    std::int64_t bg_bin_budget(int c_bg) const {
        return static_cast<std::int64_t>(std::floor(c_bg * bg_core_rate * interval));
    }
    // Cores needed to serve `ops` within one bin.
    int cores_for_ops(double ops) const {
        return static_cast<int>(std::ceil(ops / (fg_core_iops * interval)));
    }
};

struct CoreAllocation {
    int c_fg = 0;
    int c_bg = 0;
    int cff = 0;  // cores diverted from foreground for capacity reasons
    std::int64_t bin = 0;
};

// Foreground gets the cores its forecast demand needs, minus any capacity
// steal, clamped to [0, N]; everything else drains background debt.
inline CoreAllocation allocate_cores(double iops_forecast, const HardwareModel& hw, int cff,
                                     std::int64_t bin = 0) {
    hw.check();
    if (iops_forecast < 0) throw ConfigError("iops forecast must be non-negative");
    if (cff < 0) throw ConfigError("cff must be non-negative");
    const auto demanded = static_cast<int>(std::ceil(iops_forecast / hw.fg_core_iops));
    CoreAllocation a;
    a.c_fg = std::clamp(demanded - cff, 0, hw.n_cores);
    a.c_bg = hw.n_cores - a.c_fg;
    a.cff = cff;
    a.bin = bin;
    return a;
}

// A sustained stretch of low forecast demand, long enough to pay debt down.
struct IdleDef {
    int min_bins = 12;              // 2 hours at 10-minute bins
    double demand_fraction = 0.30;  // of total foreground capacity
};

// ---------------------------------------------------------------------------
// Forward projection ("dry run") over a forecast horizon. Shared by the CFF
// search and the dynamic planner: replay forecast arrivals, generate debt,
// drain with whatever cores are left over, and watch the capacity ledger.
// ---------------------------------------------------------------------------

struct DebtOutstanding {
    std::int64_t blocks = 0;
    std::int64_t tied = 0;
    std::int64_t ops = 0;
};

struct ProjectionInit {
    PoolState pool;
    std::array<DebtOutstanding, 3> debt{};  // indexed by DebtKind
    std::int64_t fg_backlog_ops = 0;
    std::int64_t start_bin = 0;  // absolute bin index of forecast[0]
    // Per-LUN write blocks for bins [0, start_bin); snapshot delete windows
    // reach into it. Missing history is treated as zero writes.
    std::vector<double> write_blocks_per_lun_history;
};

struct ProjectionConfig {
    HardwareModel hw;
    SnapPolicy snap;
    DebtCosts costs;
    double hard_limit_fraction = 0.95;
};

struct ProjectionOutcome {
    std::vector<bool> depleted;         // pool crossed the hard limit this bin
    std::vector<bool> oversubscribed;   // foreground demand got fewer cores than it needed
    std::vector<double> pool_fraction;  // (used + tied) / total after the bin
    bool safe_until(std::size_t guard_end) const {
        for (std::size_t b = 0; b < std::min(guard_end, depleted.size()); ++b)
            if (depleted[b]) return false;
        return true;
    }
};

inline ProjectionOutcome project_horizon(const ChannelForecasts& fc, const ProjectionInit& init,
                                         const ProjectionConfig& cfg, std::span<const int> bg_core_floor,
                                         int cff) {
    cfg.hw.check();
    const std::size_t horizon = fc.size();
    ProjectionOutcome out;
    out.depleted.assign(horizon, false);
    out.oversubscribed.assign(horizon, false);
    out.pool_fraction.assign(horizon, 0.0);

    PoolState pool = init.pool;
    std::array<DebtOutstanding, 3> debt = init.debt;
    double fg_backlog = static_cast<double>(init.fg_backlog_ops);

    std::vector<double> wb_history = init.write_blocks_per_lun_history;
    wb_history.resize(static_cast<std::size_t>(init.start_bin), 0.0);

    const std::int64_t hard_limit = pool.hard_limit_blocks();
    const double luns = std::max(1, cfg.snap.luns);

    for (std::size_t b = 0; b < horizon; ++b) {
        const double demand = fc.total_iops[b] + fg_backlog;
        const int needed = cfg.hw.cores_for_ops(demand);
        const int floor_bg = bg_core_floor.empty() ? 0 : bg_core_floor[b];
        const int c_fg = std::clamp(std::min(needed - cff, cfg.hw.n_cores - floor_bg), 0, cfg.hw.n_cores);
        const int c_bg = cfg.hw.n_cores - c_fg;
        out.oversubscribed[b] = c_fg < std::min(needed, cfg.hw.n_cores);

        const auto capacity = static_cast<double>(cfg.hw.fg_bin_capacity(c_fg));
        const double served = std::min(demand, capacity);
        fg_backlog = demand - served;

        // Debt and placement use the bin's forecast write blocks directly; a
        // planning model does not track per-op backlog composition.
        const double wb = fc.write_blocks[b];
        const double u = fc.unique_fraction[b];
        wb_history.push_back(wb / luns);

        pool.place_used(static_cast<std::int64_t>(std::llround(u * wb)));

        const auto ow_blocks = static_cast<std::int64_t>(std::llround((1.0 - u) * wb));
        if (ow_blocks > 0) {
            auto& d = debt[static_cast<std::size_t>(DebtKind::overwrite_gc)];
            d.blocks += ow_blocks;
            d.tied += pool.add_tied(ow_blocks);
            d.ops += static_cast<std::int64_t>(std::ceil(cfg.costs.overwrite_gc * static_cast<double>(ow_blocks)));
        }
        if (auto snap = gen_snap_delete_debt(cfg.snap, wb_history, cfg.hw.interval,
                                             init.start_bin + static_cast<std::int64_t>(b))) {
            auto& d = debt[static_cast<std::size_t>(DebtKind::snap_delete)];
            d.blocks += snap->blocks;
            d.tied += pool.add_tied(snap->tied_blocks);
            d.ops += service_cost(*snap, cfg.costs.snap_delete);
        }

        // Drain highest reclaim-per-op first.
        std::int64_t budget = cfg.hw.bg_bin_budget(c_bg);
        std::array<std::size_t, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) {
            const auto ratio = [&](std::size_t i) {
                return debt[i].ops > 0 ? static_cast<double>(debt[i].tied) / static_cast<double>(debt[i].ops)
                                       : 0.0;
            };
            const double ra = ratio(a), rb = ratio(b2);
            if (ra != rb) return ra > rb;
            return a < b2;
        });
        for (std::size_t idx : order) {
            if (budget <= 0) break;
            auto& d = debt[idx];
            if (d.ops <= 0) continue;
            const std::int64_t consumed = std::min(budget, d.ops);
            const std::int64_t rel_blocks = d.blocks * consumed / d.ops;
            const std::int64_t rel_tied = d.tied * consumed / d.ops;
            pool.reclaim(static_cast<DebtKind>(idx), rel_blocks, rel_tied);
            d.blocks -= rel_blocks;
            d.tied -= rel_tied;
            d.ops -= consumed;
            budget -= consumed;
        }

        out.depleted[b] = pool.used_blocks + pool.debt_tied_blocks > hard_limit;
        out.pool_fraction[b] = pool.used_fraction();
    }
    return out;
}

// First bin of the first long idle phase in the demand forecast, or the
// horizon length when none exists.
inline std::size_t find_idle_phase(const ChannelForecasts& fc, const HardwareModel& hw,
                                   const IdleDef& idle) {
    const double threshold = idle.demand_fraction * hw.n_cores * hw.fg_core_iops * hw.interval;
    int run = 0;
    for (std::size_t b = 0; b < fc.size(); ++b) {
        if (fc.total_iops[b] < threshold) {
            if (++run >= idle.min_bins) return b + 1 - static_cast<std::size_t>(idle.min_bins);
        } else {
            run = 0;
        }
    }
    return fc.size();
}

struct CffResult {
    int cff = 0;
    bool depletion_unavoidable = false;
    std::size_t idle_phase_bin = 0;         // end of the guarded window
    std::vector<bool> oversubscribed;       // bins where the steal squeezed foreground
};

// Smallest number of cores that must be stolen from foreground so the pool
// stays below its hard limit until the next long idle phase. Returns N with a
// depletion flag when even a full steal cannot save the pool.
inline CffResult compute_cff(const ChannelForecasts& fc, const ProjectionInit& init,
                             const ProjectionConfig& cfg, const IdleDef& idle = {}) {
    CffResult res;
    res.idle_phase_bin = find_idle_phase(fc, cfg.hw, idle);
    for (int cff = 0; cff <= cfg.hw.n_cores; ++cff) {
        ProjectionOutcome outcome = project_horizon(fc, init, cfg, {}, cff);
        if (outcome.safe_until(res.idle_phase_bin)) {
            res.cff = cff;
            res.oversubscribed = std::move(outcome.oversubscribed);
            return res;
        }
    }
    res.cff = cfg.hw.n_cores;
    res.depletion_unavoidable = true;
    res.oversubscribed = project_horizon(fc, init, cfg, {}, res.cff).oversubscribed;
    return res;
}

// ---------------------------------------------------------------------------
// Queue priorities and round-robin dispatch.
// ---------------------------------------------------------------------------

// Priority is the head item's reclaimable capacity per service op, times an
// SLA urgency factor (1 for every implemented kind). Returns queue indices in
// dispatch order; ties fall back to kind enum order.
inline std::vector<std::size_t> prioritize(std::vector<DebtQueue>& queues, double urgency = 1.0) {
    if (queues.empty()) throw ConfigError("prioritize needs at least one queue");
    for (DebtQueue& q : queues) {
        if (q.items.empty()) {
            q.priority = 0.0;
        } else {
            const DebtItem& head = q.items.front();
            q.priority = head.total_ops > 0
                             ? urgency * static_cast<double>(head.tied_blocks) /
                                   static_cast<double>(head.total_ops)
                             : 0.0;
        }
    }
    std::vector<std::size_t> order(queues.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (queues[a].priority != queues[b].priority) return queues[a].priority > queues[b].priority;
        return queues[a].kind < queues[b].kind;
    });
    return order;
}

struct DispatchEntry {
    DebtKind kind = DebtKind::overwrite_gc;
    std::int64_t ops = 0;
    std::int64_t blocks = 0;
    std::int64_t tied = 0;
    int items_completed = 0;
};

struct DispatchResult {
    std::vector<DispatchEntry> per_queue;
    std::int64_t ops_used = 0;
    std::int64_t leftover = 0;
};

// Weighted round robin: each round hands every non-empty queue a share of the
// remaining budget proportional to its priority (at least enough to advance
// one item), consuming items FIFO with partial progress allowed.
inline DispatchResult dispatch(std::vector<DebtQueue>& queues, std::span<const std::size_t> order,
                               std::int64_t budget_ops) {
    if (budget_ops < 0) throw ConfigError("dispatch budget must be non-negative");
    DispatchResult res;
    res.per_queue.resize(queues.size());
    for (std::size_t i = 0; i < queues.size(); ++i) res.per_queue[i].kind = queues[i].kind;

    std::int64_t remaining = budget_ops;
    while (remaining > 0) {
        double priority_sum = 0.0;
        int live = 0;
        for (const DebtQueue& q : queues) {
            if (q.items.empty()) continue;
            ++live;
            priority_sum += q.priority;
        }
        if (live == 0) break;

        const std::int64_t round_start = remaining;
        bool progressed = false;
        for (std::size_t qi : order) {
            if (remaining <= 0) break;
            DebtQueue& q = queues[qi];
            if (q.items.empty()) continue;
            const double weight = priority_sum > 0.0 ? q.priority / priority_sum : 1.0 / live;
            auto share = static_cast<std::int64_t>(std::floor(static_cast<double>(round_start) * weight));
            if (share <= 0) share = std::min(q.items.front().remaining_ops(), remaining);
            share = std::min(share, remaining);

            DispatchEntry& entry = res.per_queue[qi];
            while (share > 0 && !q.items.empty()) {
                DrainDelta d = consume_ops(q.items.front(), share);
                share -= d.ops;
                remaining -= d.ops;
                entry.ops += d.ops;
                entry.blocks += d.blocks;
                entry.tied += d.tied;
                if (d.completed) {
                    ++entry.items_completed;
                    q.items.pop_front();
                }
                if (d.ops > 0) progressed = true;
                if (d.ops == 0) break;
            }
        }
        if (!progressed) break;
    }
    res.ops_used = budget_ops - remaining;
    res.leftover = remaining;
    return res;
}

// ---------------------------------------------------------------------------
// Bucket policies.
// ---------------------------------------------------------------------------

// Static watermark policy: background pressure ramps from nothing at the low
// watermark to a full takeover at the high one, with hysteresis so a takeover
// holds until the debt fraction falls back below high - release_margin.
class FixedBucketPolicy {
public:
    struct Directive {
        int mandatory_bg_cores = 0;
        std::int64_t bucket_limit_blocks = 0;
        bool panic = false;
    };

    FixedBucketPolicy(double low = 0.40, double high = 0.50, double release_margin = 0.02)
        : low_(low), high_(high), margin_(release_margin) {
        if (!(0.0 < low && low < high && high < 1.0))
            throw ConfigError("fixed policy requires 0 < low < high < 1");
    }

    Directive step(const PoolState& pool, int n_cores) {
        const double f = static_cast<double>(pool.debt_tied_blocks) / static_cast<double>(pool.total_blocks);
        if (panic_ && f <= high_ - margin_) panic_ = false;
        if (!panic_ && f >= high_) panic_ = true;

        Directive d;
        d.bucket_limit_blocks = static_cast<std::int64_t>(high_ * static_cast<double>(pool.total_blocks));
        d.panic = panic_;
        if (panic_) {
            d.mandatory_bg_cores = n_cores;
        } else if (f < low_) {
            d.mandatory_bg_cores = 0;
        } else {
            d.mandatory_bg_cores =
                static_cast<int>(std::floor(n_cores * (f - low_) / (high_ - low_)));
        }
        return d;
    }

    double low() const { return low_; }
    double high() const { return high_; }

private:
    double low_, high_, margin_;
    bool panic_ = false;
};

struct PlanBin {
    std::int64_t bin = 0;  // absolute bin index
    int c_fg = 0;
    int c_bg = 0;                // mandatory cores plus forecast leftover idle
    int cff = 0;
    int mandatory_bg_cores = 0;  // floor foreground may not claim back
    std::int64_t bucket_limit_blocks = 0;
    std::int64_t drain_ops = 0;
    bool depletion_flag = false;
};

struct SchedulePlan {
    std::int64_t start_bin = 0;
    std::vector<PlanBin> bins;
    bool depletion_unavoidable = false;
    int iterations = 0;

    const PlanBin* at(std::int64_t absolute_bin) const {
        const std::int64_t off = absolute_bin - start_bin;
        if (off < 0 || off >= static_cast<std::int64_t>(bins.size())) return nullptr;
        return &bins[static_cast<std::size_t>(off)];
    }
};

// Forecast-driven planner. The debt bucket is opened up to the hard limit and
// the horizon is replayed against the forecast; whenever a future bin would
// cross the limit, the shortfall is spread over the cheapest (lowest-demand)
// earlier bins, raising each chosen bin's background core floor by one per
// pass, until the projection stays safe or 2N passes have run.
inline SchedulePlan dynamic_bucket_planner(const ChannelForecasts& fc, const ProjectionInit& init,
                                           const ProjectionConfig& cfg) {
    cfg.hw.check();
    const std::size_t horizon = fc.size();
    SchedulePlan plan;
    plan.start_bin = init.start_bin;
    if (horizon == 0) return plan;

    std::vector<int> bg_floor(horizon, 0);
    const std::int64_t hard_limit = init.pool.hard_limit_blocks();
    const auto per_core_ops = static_cast<double>(cfg.hw.bg_bin_budget(1));

    ProjectionOutcome outcome = project_horizon(fc, init, cfg, bg_floor, 0);
    const int max_iterations = 2 * cfg.hw.n_cores;
    int iter = 0;
    while (!outcome.safe_until(horizon) && iter < max_iterations) {
        ++iter;
        std::size_t depleted_bin = 0;
        for (std::size_t b = 0; b < horizon; ++b) {
            if (outcome.depleted[b]) {
                depleted_bin = b;
                break;
            }
        }
        const double overflow_fraction =
            outcome.pool_fraction[depleted_bin] -
            static_cast<double>(hard_limit) / static_cast<double>(init.pool.total_blocks);
        const double overflow_blocks =
            std::max(1.0, overflow_fraction * static_cast<double>(init.pool.total_blocks));
        // Ops needed to drain that overflow, at the configured worst-case cost.
        const double max_cost = std::max({cfg.costs.snap_delete, cfg.costs.overwrite_gc, cfg.costs.unmap});
        const double excess_ops = overflow_blocks * max_cost;

        // Cheapest prior bins first; spare capacity preferred over stealing.
        std::vector<std::size_t> candidates(depleted_bin);
        std::iota(candidates.begin(), candidates.end(), 0);
        std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            return fc.total_iops[a] < fc.total_iops[b];
        });

        double added_ops = 0.0;
        bool bumped = false;
        std::vector<bool> bumped_this_pass(horizon, false);  // at most +1 core per bin per pass
        for (int steal = 0; steal < 2 && added_ops < excess_ops; ++steal) {
            for (std::size_t b : candidates) {
                if (added_ops >= excess_ops) break;
                if (bumped_this_pass[b] || bg_floor[b] >= cfg.hw.n_cores) continue;
                const int needed = cfg.hw.cores_for_ops(fc.total_iops[b]);
                const int spare = cfg.hw.n_cores - bg_floor[b] - std::min(needed, cfg.hw.n_cores);
                if (steal == 0 && spare < 1) continue;  // first fill true idle, then steal
                ++bg_floor[b];
                bumped_this_pass[b] = true;
                added_ops += per_core_ops;
                bumped = true;
            }
        }
        if (!bumped) break;  // nothing left to raise anywhere
        outcome = project_horizon(fc, init, cfg, bg_floor, 0);
    }
    plan.iterations = iter;
    plan.depletion_unavoidable = !outcome.safe_until(horizon);

    plan.bins.reserve(horizon);
    for (std::size_t b = 0; b < horizon; ++b) {
        PlanBin pb;
        pb.bin = init.start_bin + static_cast<std::int64_t>(b);
        const int needed = cfg.hw.cores_for_ops(fc.total_iops[b]);
        pb.mandatory_bg_cores = bg_floor[b];
        pb.c_fg = std::clamp(std::min(needed, cfg.hw.n_cores - bg_floor[b]), 0, cfg.hw.n_cores);
        pb.c_bg = cfg.hw.n_cores - pb.c_fg;
        pb.cff = std::max(0, std::min(needed, cfg.hw.n_cores) - pb.c_fg);
        pb.bucket_limit_blocks = hard_limit;
        pb.drain_ops = cfg.hw.bg_bin_budget(pb.c_bg);
        pb.depletion_flag = outcome.depleted[b];
        plan.bins.push_back(pb);
    }
    return plan;
}

}  // namespace bgsched
