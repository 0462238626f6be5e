#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bgsched/errors.hpp"
#include "bgsched/series.hpp"

namespace bgsched {

// Enum order doubles as the priority tie-break.
enum class DebtKind : std::uint8_t { snap_delete = 0, overwrite_gc = 1, unmap = 2 };
inline constexpr DebtKind kDebtKinds[] = {DebtKind::snap_delete, DebtKind::overwrite_gc, DebtKind::unmap};

inline const char* debt_kind_name(DebtKind k) {
    switch (k) {
        case DebtKind::snap_delete: return "snap_delete";
        case DebtKind::overwrite_gc: return "overwrite_gc";
        case DebtKind::unmap: return "unmap";
    }
    return "?";
}

// Ops required to read and manipulate one block, per kind.
struct DebtCosts {
    double snap_delete = 1.0;
    double overwrite_gc = 1.0;
    double unmap = 1.0;

    double of(DebtKind k) const {
        switch (k) {
            case DebtKind::snap_delete: return snap_delete;
            case DebtKind::overwrite_gc: return overwrite_gc;
            case DebtKind::unmap: return unmap;
        }
        return 1.0;
    }
};

// A unit of deferred background work. Items may be drained across several
// intervals; block reclaim follows consumed ops pro rata so that the totals
// balance exactly on completion.
struct DebtItem {
    DebtKind kind = DebtKind::overwrite_gc;
    std::int64_t blocks = 0;       // blocks this item must process
    std::int64_t created_at = 0;   // bin index
    std::int64_t tied_blocks = 0;  // capacity claim while outstanding
    std::int64_t pool_tied = 0;    // portion of tied_blocks actually charged to the pool
    std::int64_t total_ops = 0;    // service cost; set when the item is costed
    std::int64_t done_ops = 0;
    std::int64_t reclaimed_blocks = 0;
    std::int64_t released_tied = 0;
    bool partial_window = false;

    bool complete() const { return total_ops > 0 && done_ops >= total_ops; }
    std::int64_t remaining_ops() const { return total_ops - done_ops; }
    std::int64_t remaining_tied() const { return pool_tied - released_tied; }
};

// ops = ceil(cost_per_block * blocks); converts to service time at the
// background per-core rate.
inline std::int64_t service_cost(const DebtItem& item, double cost_per_block) {
    if (cost_per_block <= 0.0) throw ConfigError("cost per block must be positive");
    return static_cast<std::int64_t>(std::ceil(cost_per_block * static_cast<double>(item.blocks)));
}

struct DrainDelta {
    std::int64_t ops = 0;
    std::int64_t blocks = 0;  // newly processed blocks
    std::int64_t tied = 0;    // pool-tied blocks newly released
    bool completed = false;
};

// Advances an item by up to `ops`; returns what that consumed and released.
inline DrainDelta consume_ops(DebtItem& item, std::int64_t ops) {
    DrainDelta d;
    if (item.total_ops <= 0) throw InternalError("debt item was never costed");
    d.ops = std::min(ops, item.remaining_ops());
    item.done_ops += d.ops;
    const std::int64_t cum_blocks = item.blocks * item.done_ops / item.total_ops;
    const std::int64_t cum_tied = item.pool_tied * item.done_ops / item.total_ops;
    d.blocks = cum_blocks - item.reclaimed_blocks;
    d.tied = cum_tied - item.released_tied;
    item.reclaimed_blocks = cum_blocks;
    item.released_tied = cum_tied;
    d.completed = item.complete();
    return d;
}

struct DebtQueue {
    DebtKind kind = DebtKind::overwrite_gc;
    std::deque<DebtItem> items;
    std::int64_t bucket_limit = 0;  // max tied blocks this queue may defer
    double priority = 0.0;

    std::int64_t tied_total() const {
        std::int64_t acc = 0;
        for (const DebtItem& it : items) acc += it.remaining_tied();
        return acc;
    }
    std::int64_t pending_ops() const {
        std::int64_t acc = 0;
        for (const DebtItem& it : items) acc += it.remaining_ops();
        return acc;
    }
};

enum class AdmitResult { admitted, rejected_queue_limit, rejected_global_limit };

// Bucket admission: both the queue's own limit and the global tied limit must
// hold after the item. Rejection is a normal outcome; the caller processes a
// rejected item as mandatory inline work.
inline AdmitResult admit(DebtQueue& queue, DebtItem item, std::int64_t global_tied_total,
                         std::int64_t global_limit) {
    if (queue.tied_total() + item.tied_blocks > queue.bucket_limit) return AdmitResult::rejected_queue_limit;
    if (global_tied_total + item.tied_blocks > global_limit) return AdmitResult::rejected_global_limit;
    queue.items.push_back(std::move(item));
    return AdmitResult::admitted;
}

// Capacity ledger: live data plus debt-tied blocks never exceed the pool.
// Utilization accumulates the unique share of writes plus newly deferred debt;
// draining debt releases its tied claim, and overwrite/unmap processing also
// frees the dead data blocks it cleaned up.
struct PoolState {
    std::int64_t total_blocks = 0;
    std::int64_t used_blocks = 0;
    std::int64_t debt_tied_blocks = 0;
    double hard_limit_fraction = 0.95;

    std::int64_t free_blocks() const { return total_blocks - used_blocks - debt_tied_blocks; }
    double used_fraction() const {
        return static_cast<double>(used_blocks + debt_tied_blocks) / static_cast<double>(total_blocks);
    }
    std::int64_t hard_limit_blocks() const {
        return static_cast<std::int64_t>(hard_limit_fraction * static_cast<double>(total_blocks));
    }

    void check() const {
        if (used_blocks < 0 || debt_tied_blocks < 0 || used_blocks + debt_tied_blocks > total_blocks)
            throw InternalError("pool ledger out of range");
    }

    // Releases a drained item's claims. Kinds that clean up dead data free
    // used blocks as well; saturates at zero since repeated overwrite cycles
    // can otherwise drive the model ledger negative.
    void reclaim(DebtKind kind, std::int64_t blocks, std::int64_t tied) {
        debt_tied_blocks = std::max<std::int64_t>(0, debt_tied_blocks - tied);
        if (kind == DebtKind::overwrite_gc || kind == DebtKind::unmap)
            used_blocks = std::max<std::int64_t>(0, used_blocks - blocks);
    }

    // Charges a new item's tied claim, clamped to the remaining capacity.
    std::int64_t add_tied(std::int64_t blocks) {
        const std::int64_t added = std::clamp<std::int64_t>(blocks, 0, free_blocks());
        debt_tied_blocks += added;
        return added;
    }

    // Places unique write blocks; returns how many fit, the rest are blocked.
    std::int64_t place_used(std::int64_t blocks) {
        const std::int64_t placed = std::clamp<std::int64_t>(blocks, 0, free_blocks());
        used_blocks += placed;
        return placed;
    }
};

// Scheduled snapshots: one per schedule_interval across a LUN group, deleted
// retention seconds after creation.
struct SnapPolicy {
    int luns = 10;
    double schedule_interval = 3600.0;
    double retention = 3600.0;

    void check() const {
        if (!(schedule_interval > 0) || retention < schedule_interval)
            throw ConfigError("snap policy requires retention >= schedule_interval > 0");
    }
};

// Splits foreground ops into (read, write) loads by the bin's read ratio.
inline std::pair<double, double> split_load(const BinStats& bin) {
    const double l_fg = static_cast<double>(bin.read_iops + bin.write_iops);
    const double r = bin.read_ratio;
    return {r * l_fg, (1.0 - r) * l_fg};
}

// Overwritten (non-unique) blocks awaiting garbage collection.
inline std::optional<DebtItem> gen_overwrite_debt(const BinStats& bin, std::int64_t created_at) {
    const auto blocks = static_cast<std::int64_t>(
        std::llround((1.0 - bin.unique_write_fraction) * static_cast<double>(bin.write_blocks)));
    if (blocks <= 0) return std::nullopt;
    DebtItem item;
    item.kind = DebtKind::overwrite_gc;
    item.blocks = blocks;
    item.tied_blocks = blocks;
    item.created_at = created_at;
    return item;
}

// Unmapped address space awaiting release, inflated by the data-to-metadata
// overhead ratio.
inline std::optional<DebtItem> gen_unmap_debt(const BinStats& bin, std::uint64_t block_size,
                                              double dmd_ratio, std::int64_t created_at) {
    if (dmd_ratio < 0.02 || dmd_ratio > 0.05)
        throw ConfigError("dmd_ratio must be within [0.02, 0.05]");
    if (bin.unmap_len == 0) return std::nullopt;
    const double raw = static_cast<double>(bin.unmap_len) / static_cast<double>(block_size) * (1.0 + dmd_ratio);
    DebtItem item;
    item.kind = DebtKind::unmap;
    item.blocks = static_cast<std::int64_t>(std::ceil(raw));
    item.tied_blocks = item.blocks;
    item.created_at = created_at;
    return item;
}

// Emits the delete debt for any snapshot expiring inside bin `now`. Snapshots
// are created at multiples of the schedule interval; the deleted snapshot ties
// the writes that landed on the LUN group during its lifetime window.
// write_blocks_per_lun is indexed by bin and holds the per-LUN write rate.
inline std::optional<DebtItem> gen_snap_delete_debt(const SnapPolicy& policy,
                                                    std::span<const double> write_blocks_per_lun,
                                                    double interval, std::int64_t now) {
    policy.check();
    if (interval <= 0) throw ConfigError("interval must be positive");
    const double bin_start = static_cast<double>(now) * interval;
    const double bin_end = bin_start + interval;

    double total = 0.0;
    bool partial = false;
    bool any = false;
    // Snapshot k is created at k*schedule and expires at k*schedule+retention.
    const auto k_lo = static_cast<std::int64_t>(
        std::ceil((bin_start - policy.retention) / policy.schedule_interval));
    for (std::int64_t k = std::max<std::int64_t>(0, k_lo);; ++k) {
        const double expiry = static_cast<double>(k) * policy.schedule_interval + policy.retention;
        if (expiry >= bin_end) break;
        if (expiry < bin_start) continue;
        any = true;
        const auto win_begin = static_cast<std::int64_t>(
            std::floor(static_cast<double>(k) * policy.schedule_interval / interval));
        const auto win_end = static_cast<std::int64_t>(std::floor(expiry / interval));
        for (std::int64_t b = win_begin; b < win_end; ++b) {
            if (b < 0 || b >= static_cast<std::int64_t>(write_blocks_per_lun.size())) {
                partial = true;
                continue;
            }
            total += write_blocks_per_lun[static_cast<std::size_t>(b)];
        }
    }
    if (!any) return std::nullopt;
    const auto blocks = static_cast<std::int64_t>(std::llround(static_cast<double>(policy.luns) * total));
    if (blocks <= 0) return std::nullopt;
    DebtItem item;
    item.kind = DebtKind::snap_delete;
    item.blocks = blocks;
    item.tied_blocks = blocks;
    item.created_at = now;
    item.partial_window = partial;
    return item;
}

struct ProcessedDelta {
    DebtKind kind = DebtKind::overwrite_gc;
    std::int64_t blocks = 0;
    std::int64_t tied = 0;
};

struct ApplyResult {
    PoolState pool;
    std::int64_t blocked_write_blocks = 0;  // unique writes that found no free space
    std::int64_t tied_clamped_blocks = 0;   // tied claims truncated at capacity
};

// One interval of capacity accounting: release what background processing
// reclaimed, charge the newly deferred debt, then place this bin's unique
// writes. Writes that would push past total_blocks are returned as blocked.
inline ApplyResult apply_interval(PoolState pool, const BinStats& bin, std::span<const DebtItem> new_items,
                                  std::span<const ProcessedDelta> processed) {
    ApplyResult res;
    for (const ProcessedDelta& p : processed) pool.reclaim(p.kind, p.blocks, p.tied);
    for (const DebtItem& item : new_items) {
        const std::int64_t added = pool.add_tied(item.tied_blocks);
        res.tied_clamped_blocks += item.tied_blocks - added;
    }
    const auto unique_new = static_cast<std::int64_t>(
        std::llround(bin.unique_write_fraction * static_cast<double>(bin.write_blocks)));
    const std::int64_t placed = pool.place_used(unique_new);
    res.blocked_write_blocks = unique_new - placed;
    pool.check();
    res.pool = pool;
    return res;
}

}  // namespace bgsched
