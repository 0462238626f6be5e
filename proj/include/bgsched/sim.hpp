#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bgsched/debt.hpp"
#include "bgsched/errors.hpp"
#include "bgsched/forecast.hpp"
#include "bgsched/scheduler.hpp"
#include "bgsched/series.hpp"

namespace bgsched {

enum class PolicyKind { fixed, dynamic };

inline const char* policy_name(PolicyKind p) { return p == PolicyKind::fixed ? "fixed" : "dynamic"; }

struct SimConfig {
    HardwareModel hw;
    PolicyKind policy = PolicyKind::fixed;
    SnapPolicy snap;
    std::int64_t pool_total_blocks = 0;
    double initial_used_fraction = 0.5;
    double dmd_ratio = 0.03;
    DebtCosts costs;
    double hard_limit_fraction = 0.95;
    double fixed_low = 0.40;
    double fixed_high = 0.50;
    ForecastConfig forecast;  // period is derived from the trace interval
    double train_days = 2.0;
    int replan_bins = 6;
    IdleDef idle;
    std::uint64_t block_size = 4096;
    std::uint64_t seed = 0;
    bool exclude_warmup = false;

    void check() const {
        hw.check();
        snap.check();
        if (pool_total_blocks <= 0) throw ConfigError("pool_total_blocks must be positive");
        if (initial_used_fraction < 0 || initial_used_fraction >= 1)
            throw ConfigError("initial_used_fraction must be in [0, 1)");
        if (hard_limit_fraction <= 0 || hard_limit_fraction > 1)
            throw ConfigError("hard_limit_fraction must be in (0, 1]");
        if (!(0.0 < fixed_low && fixed_low < fixed_high && fixed_high < 1.0))
            throw ConfigError("fixed watermarks require 0 < low < high < 1");
        if (train_days <= 0) throw ConfigError("train_days must be positive");
        if (replan_bins <= 0) throw ConfigError("replan_bins must be positive");
        if (block_size == 0) throw ConfigError("block_size must be positive");
    }
};

struct BinRecord {
    std::int64_t bin = 0;
    std::int64_t offered = 0;         // foreground read+write ops arriving
    std::int64_t served = 0;          // ops served this bin (backlog included)
    std::int64_t queued_latency = 0;  // arrivals that missed their bin
    std::int64_t queued_oor = 0;      // arrivals blocked on pool space
    std::int64_t pool_used = 0;
    std::int64_t debt_tied = 0;
    int c_fg = 0;
    int c_bg = 0;
    bool panic = false;
};

struct DebtLedgerRow {
    std::int64_t bin = 0;
    DebtKind kind = DebtKind::overwrite_gc;
    std::int64_t created_blocks = 0;
    std::int64_t processed_blocks = 0;
    std::int64_t outstanding_blocks = 0;
    std::int64_t tied_blocks = 0;
    std::int64_t pool_used = 0;
    std::int64_t pool_free = 0;
};

struct SimMetrics {
    std::vector<BinRecord> per_bin;
    std::vector<DebtLedgerRow> ledger;
    std::int64_t total_offered = 0;
    std::int64_t latency_violations = 0;
    std::int64_t oor_violations = 0;
    double slo_violation_fraction = 0.0;      // percent of offered ops
    double queued_oor_fraction = 0.0;         // percent of offered ops
    double violation_interval_fraction = 0.0;  // percent of bins with any violation
    std::int64_t debt_created_blocks = 0;
    std::int64_t debt_processed_blocks = 0;
    std::int64_t debt_outstanding_blocks = 0;
    std::optional<SchedulePlan> plan;  // last plan produced (dynamic policy)
    bool forecast_unknown_label = false;
    bool forecast_clamped = false;
};

namespace detail {

// Unserved foreground arrivals, kept with their write composition so debt is
// generated when (and only when) the ops are actually served.
struct LoadSlice {
    double ops = 0;
    double write_ops = 0;
    double write_blocks = 0;
    double unique_fraction = 1.0;
};

struct ServedPortion {
    double ops = 0;
    double write_ops = 0;
    double write_blocks = 0;
    double unique_blocks = 0;
};

inline ServedPortion serve_from(std::deque<LoadSlice>& backlog, double capacity) {
    ServedPortion total;
    while (capacity > 0 && !backlog.empty()) {
        LoadSlice& s = backlog.front();
        const double take = std::min(capacity, s.ops);
        const double frac = s.ops > 0 ? take / s.ops : 1.0;
        total.ops += take;
        total.write_ops += s.write_ops * frac;
        total.write_blocks += s.write_blocks * frac;
        total.unique_blocks += s.unique_fraction * s.write_blocks * frac;
        capacity -= take;
        s.ops -= take;
        s.write_ops *= 1.0 - frac;
        s.write_blocks *= 1.0 - frac;
        if (s.ops <= 1e-9) backlog.pop_front();
    }
    return total;
}

}  // namespace detail

// Deterministic discrete-time replay of an intensity series under one
// scheduling policy. Per-bin phases: read offered load, obtain the core
// allocation, serve foreground (backlog first), place unique writes against
// free capacity, generate and admit (or force inline) debt, drain background
// with the remaining cores, and record metrics.
inline SimMetrics run(const IntensitySeries& trace, const SimConfig& config,
                      const std::map<Channel, ForecastModel>* prefit = nullptr) {
    SimConfig cfg = config;
    cfg.hw.interval = trace.interval;  // the trace's binning is authoritative
    cfg.check();
    if (trace.bins.empty()) throw DataError("trace has no bins");

    const int n_cores = cfg.hw.n_cores;
    const auto n_bins = static_cast<std::int64_t>(trace.bins.size());
    const double interval = trace.interval;

    PoolState pool;
    pool.total_blocks = cfg.pool_total_blocks;
    pool.used_blocks = static_cast<std::int64_t>(cfg.initial_used_fraction *
                                                 static_cast<double>(cfg.pool_total_blocks));
    pool.hard_limit_fraction = cfg.hard_limit_fraction;

    std::vector<DebtQueue> queues(3);
    for (std::size_t i = 0; i < 3; ++i) queues[i].kind = static_cast<DebtKind>(i);
    std::deque<DebtItem> inline_backlog;  // bucket-rejected work, drained first

    FixedBucketPolicy fixed_policy(cfg.fixed_low, cfg.fixed_high);

    std::deque<detail::LoadSlice> fg_backlog;
    double retry_unique_blocks = 0.0;  // blocked unique writes awaiting space

    std::array<std::int64_t, 3> created{}, processed{};
    std::array<std::int64_t, 3> created_bin{}, processed_bin{};

    const auto train_bins = static_cast<std::int64_t>(std::llround(cfg.train_days * 86400.0 / interval));
    std::map<Channel, ForecastModel> models;
    bool models_ready = false;
    if (prefit) {
        models = *prefit;
        models_ready = true;
    }
    std::optional<SchedulePlan> plan;
    std::vector<double> wb_history_per_lun;  // physical write blocks per LUN, per bin
    wb_history_per_lun.reserve(trace.bins.size());
    const double luns = std::max(1, cfg.snap.luns);

    SimMetrics metrics;
    metrics.per_bin.reserve(trace.bins.size());
    std::int64_t violated_bins = 0;

    const auto day_of_bin = [&](std::int64_t b) {
        return static_cast<long>(
            std::floor((trace.start_epoch + static_cast<double>(b) * interval) / 86400.0));
    };

    auto fit_models = [&]() {
        IntensitySeries prefix;
        prefix.interval = interval;
        prefix.start_epoch = trace.start_epoch;
        prefix.bins.assign(trace.bins.begin(), trace.bins.begin() + static_cast<std::ptrdiff_t>(train_bins));
        ForecastConfig fcfg = cfg.forecast;
        fcfg.period = static_cast<int>(std::llround(86400.0 / interval));
        for (Channel ch : {Channel::total_iops, Channel::write_blocks, Channel::read_ratio,
                           Channel::unique_fraction})
            models.emplace(ch, ForecastModel::fit(prefix, ch, fcfg));
        models_ready = true;
    };

    auto replan = [&](std::int64_t now) {
        const auto horizon = static_cast<int>(n_bins - now);
        if (horizon <= 0) return;
        const long first_day = day_of_bin(now);
        const long last_day = day_of_bin(n_bins - 1);
        std::vector<std::string> calendar;
        const ForecastConfig& fcfg = models.begin()->second.config();
        for (long d = first_day; d <= last_day; ++d) calendar.push_back(day_label(d, fcfg));
        const double day_start = static_cast<double>(first_day) * 86400.0;
        const int start_phase = static_cast<int>(
            std::llround((trace.start_epoch + static_cast<double>(now) * interval - day_start) / interval));

        ChannelForecasts fc = forecast_channels(models, horizon, calendar, start_phase);
        metrics.forecast_unknown_label = metrics.forecast_unknown_label || fc.unknown_label;
        metrics.forecast_clamped = metrics.forecast_clamped || fc.clamped;

        ProjectionInit init;
        init.pool = pool;
        for (std::size_t i = 0; i < 3; ++i) {
            for (const DebtItem& it : queues[i].items) {
                init.debt[i].blocks += it.blocks - it.reclaimed_blocks;
                init.debt[i].tied += it.remaining_tied();
                init.debt[i].ops += it.remaining_ops();
            }
        }
        for (const DebtItem& it : inline_backlog) {
            const auto i = static_cast<std::size_t>(it.kind);
            init.debt[i].blocks += it.blocks - it.reclaimed_blocks;
            init.debt[i].tied += it.remaining_tied();
            init.debt[i].ops += it.remaining_ops();
        }
        double backlog_ops = 0;
        for (const auto& s : fg_backlog) backlog_ops += s.ops;
        init.fg_backlog_ops = static_cast<std::int64_t>(std::llround(backlog_ops));
        init.start_bin = now;
        init.write_blocks_per_lun_history = wb_history_per_lun;

        ProjectionConfig pc;
        pc.hw = cfg.hw;
        pc.snap = cfg.snap;
        pc.costs = cfg.costs;
        pc.hard_limit_fraction = cfg.hard_limit_fraction;
        plan = dynamic_bucket_planner(fc, init, pc);
    };

    for (std::int64_t b = 0; b < n_bins; ++b) {
        const BinStats& bin = trace.bins[static_cast<std::size_t>(b)];
        const auto offered = static_cast<std::int64_t>(bin.read_iops + bin.write_iops);

        // Phase 1-2: dynamic policy bookkeeping, then the core allocation.
        if (cfg.policy == PolicyKind::dynamic && !models_ready && b >= train_bins) fit_models();
        if (cfg.policy == PolicyKind::dynamic && models_ready &&
            (b == train_bins || (b > train_bins && (b - train_bins) % cfg.replan_bins == 0)))
            replan(b);

        double backlog_ops = 0;
        for (const auto& s : fg_backlog) backlog_ops += s.ops;
        const double demand_ops = backlog_ops + static_cast<double>(offered);
        const int needed = cfg.hw.cores_for_ops(demand_ops);

        int mandatory_bg = 0;
        std::int64_t queue_limit = 0;
        std::int64_t global_limit = 0;
        bool panic = false;
        if (cfg.policy == PolicyKind::fixed) {
            const auto dir = fixed_policy.step(pool, n_cores);
            mandatory_bg = dir.mandatory_bg_cores;
            queue_limit = dir.bucket_limit_blocks;
            global_limit = dir.bucket_limit_blocks;
            panic = dir.panic;
        } else {
            const PlanBin* pb = plan ? plan->at(b) : nullptr;
            mandatory_bg = pb ? pb->mandatory_bg_cores : 0;
            queue_limit = pool.hard_limit_blocks();
            global_limit = pool.hard_limit_blocks();
        }
        const int c_fg = std::clamp(std::min(needed, n_cores - mandatory_bg), 0, n_cores);
        const int c_bg = n_cores - c_fg;
        for (DebtQueue& q : queues) q.bucket_limit = queue_limit;

        // Phase 3: serve foreground, backlog first.
        const auto capacity = static_cast<double>(cfg.hw.fg_bin_capacity(c_fg));
        detail::ServedPortion from_backlog = detail::serve_from(fg_backlog, capacity);
        double cap_left = capacity - from_backlog.ops;

        detail::LoadSlice fresh;
        fresh.ops = static_cast<double>(offered);
        fresh.write_ops = static_cast<double>(bin.write_iops);
        fresh.write_blocks = static_cast<double>(bin.write_blocks);
        fresh.unique_fraction = bin.unique_write_fraction;
        std::deque<detail::LoadSlice> fresh_q{fresh};
        detail::ServedPortion from_fresh = detail::serve_from(fresh_q, cap_left);
        if (!fresh_q.empty() && fresh_q.front().ops > 1e-9) fg_backlog.push_back(fresh_q.front());

        const auto served_total =
            static_cast<std::int64_t>(std::llround(from_backlog.ops + from_fresh.ops));
        const auto latency_queued =
            offered - static_cast<std::int64_t>(std::llround(from_fresh.ops));

        // Phase 4: place unique writes against free space. Retries and backlog
        // writes go first and are not re-counted; only fresh arrivals blocked
        // here count as out-of-resource queueing.
        std::int64_t oor_ops = 0;
        {
            const double retry = retry_unique_blocks;
            const double backlog_unique = from_backlog.unique_blocks;
            const double fresh_unique = from_fresh.unique_blocks;
            double placeable = static_cast<double>(pool.free_blocks());
            const double place_retry = std::min(retry, placeable);
            placeable -= place_retry;
            const double place_backlog = std::min(backlog_unique, placeable);
            placeable -= place_backlog;
            const double place_fresh = std::min(fresh_unique, placeable);
            const double blocked_fresh = fresh_unique - place_fresh;

            pool.place_used(static_cast<std::int64_t>(std::llround(place_retry + place_backlog + place_fresh)));
            retry_unique_blocks = (retry - place_retry) + (backlog_unique - place_backlog) + blocked_fresh;

            if (blocked_fresh > 0 && from_fresh.write_blocks > 0) {
                const double blocks_per_op = from_fresh.write_blocks / std::max(1.0, from_fresh.write_ops);
                oor_ops = std::min(static_cast<std::int64_t>(std::llround(from_fresh.write_ops)),
                                   static_cast<std::int64_t>(std::llround(blocked_fresh / blocks_per_op)));
            }
        }

        // Phase 5: generate debt from the served portion; admit or force inline.
        const double served_wb = from_backlog.write_blocks + from_fresh.write_blocks;
        const double served_unique = from_backlog.unique_blocks + from_fresh.unique_blocks;
        wb_history_per_lun.push_back(served_wb / luns);

        created_bin.fill(0);
        processed_bin.fill(0);
        std::int64_t global_tied = 0;
        for (const DebtQueue& q : queues) global_tied += q.tied_total();
        for (const DebtItem& it : inline_backlog) global_tied += it.remaining_tied();

        auto intake = [&](DebtItem item) {
            item.total_ops = service_cost(item, cfg.costs.of(item.kind));
            const auto ki = static_cast<std::size_t>(item.kind);
            created[ki] += item.blocks;
            created_bin[ki] += item.blocks;
            item.pool_tied = pool.add_tied(item.tied_blocks);
            const AdmitResult r = admit(queues[ki], item, global_tied, global_limit);
            if (r == AdmitResult::admitted) {
                global_tied += item.tied_blocks;
            } else {
                inline_backlog.push_back(item);  // mandatory work this interval
            }
        };

        {
            BinStats served_bin_stats;  // overwrite debt reflects what was served
            served_bin_stats.write_blocks = static_cast<std::uint64_t>(std::llround(served_wb));
            served_bin_stats.unique_write_fraction =
                served_wb > 0 ? std::clamp(served_unique / served_wb, 0.0, 1.0) : 1.0;
            if (auto item = gen_overwrite_debt(served_bin_stats, b)) intake(*item);
        }
        if (auto item = gen_unmap_debt(bin, cfg.block_size, cfg.dmd_ratio, b)) intake(*item);
        if (auto item = gen_snap_delete_debt(cfg.snap, wb_history_per_lun, interval, b)) intake(*item);

        // Phase 6: drain background. Inline (rejected) work preempts the
        // queues, then weighted round robin over the rest of the budget.
        std::int64_t budget = cfg.hw.bg_bin_budget(c_bg);
        while (budget > 0 && !inline_backlog.empty()) {
            DebtItem& item = inline_backlog.front();
            const DrainDelta d = consume_ops(item, budget);
            budget -= d.ops;
            pool.reclaim(item.kind, d.blocks, d.tied);
            const auto ki = static_cast<std::size_t>(item.kind);
            processed[ki] += d.blocks;
            processed_bin[ki] += d.blocks;
            if (d.completed) inline_backlog.pop_front();
            if (d.ops == 0) break;
        }
        if (budget > 0) {
            const auto order = prioritize(queues);
            const DispatchResult dr = dispatch(queues, order, budget);
            for (std::size_t i = 0; i < dr.per_queue.size(); ++i) {
                const DispatchEntry& e = dr.per_queue[i];
                if (e.ops == 0) continue;
                pool.reclaim(e.kind, e.blocks, e.tied);
                const auto ki = static_cast<std::size_t>(e.kind);
                processed[ki] += e.blocks;
                processed_bin[ki] += e.blocks;
            }
        }

        pool.check();  // capacity invariant holds after every bin

        // Phase 7: record.
        BinRecord rec;
        rec.bin = b;
        rec.offered = offered;
        rec.served = served_total;
        rec.queued_latency = latency_queued;
        rec.queued_oor = oor_ops;
        rec.pool_used = pool.used_blocks;
        rec.debt_tied = pool.debt_tied_blocks;
        rec.c_fg = c_fg;
        rec.c_bg = c_bg;
        rec.panic = panic;
        metrics.per_bin.push_back(rec);

        for (std::size_t i = 0; i < 3; ++i) {
            DebtLedgerRow row;
            row.bin = b;
            row.kind = static_cast<DebtKind>(i);
            row.created_blocks = created_bin[i];
            row.processed_blocks = processed_bin[i];
            row.outstanding_blocks = created[i] - processed[i];
            row.tied_blocks = queues[i].tied_total();
            for (const DebtItem& it : inline_backlog)
                if (static_cast<std::size_t>(it.kind) == i) row.tied_blocks += it.remaining_tied();
            row.pool_used = pool.used_blocks;
            row.pool_free = pool.free_blocks();
            metrics.ledger.push_back(row);
        }

        const bool count_bin = !cfg.exclude_warmup || cfg.policy != PolicyKind::dynamic || b >= train_bins;
        if (count_bin) {
            metrics.total_offered += offered;
            metrics.latency_violations += latency_queued;
            metrics.oor_violations += oor_ops;
            if (latency_queued > 0 || oor_ops > 0) ++violated_bins;
        }
    }

    for (std::size_t i = 0; i < 3; ++i) {
        metrics.debt_created_blocks += created[i];
        metrics.debt_processed_blocks += processed[i];
    }
    for (const DebtQueue& q : queues)
        for (const DebtItem& it : q.items) metrics.debt_outstanding_blocks += it.blocks - it.reclaimed_blocks;
    for (const DebtItem& it : inline_backlog)
        metrics.debt_outstanding_blocks += it.blocks - it.reclaimed_blocks;

    if (metrics.total_offered > 0) {
        metrics.slo_violation_fraction =
            100.0 * static_cast<double>(metrics.latency_violations + metrics.oor_violations) /
            static_cast<double>(metrics.total_offered);
        metrics.queued_oor_fraction = 100.0 * static_cast<double>(metrics.oor_violations) /
                                      static_cast<double>(metrics.total_offered);
    }
    metrics.violation_interval_fraction =
        100.0 * static_cast<double>(violated_bins) / static_cast<double>(n_bins);
    metrics.plan = plan;
    return metrics;
}

struct ComparisonReport {
    SimMetrics fixed;
    SimMetrics dynamic_policy;
    double reduction_ratio = 1.0;  // fixed violation fraction over dynamic
    bool degenerate = false;       // both sides violation-free
};

// Runs both policies on the identical trace and hardware.
inline ComparisonReport compare_policies(const IntensitySeries& trace, SimConfig config) {
    ComparisonReport report;
    config.policy = PolicyKind::fixed;
    report.fixed = run(trace, config);
    config.policy = PolicyKind::dynamic;
    report.dynamic_policy = run(trace, config);

    const double f = report.fixed.slo_violation_fraction;
    const double d = report.dynamic_policy.slo_violation_fraction;
    if (f == 0.0 && d == 0.0) {
        report.reduction_ratio = 1.0;
        report.degenerate = true;
    } else if (d == 0.0) {
        report.reduction_ratio = std::numeric_limits<double>::infinity();
    } else {
        report.reduction_ratio = f / d;
    }
    return report;
}

}  // namespace bgsched
