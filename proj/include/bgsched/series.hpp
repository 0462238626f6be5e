#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bgsched/errors.hpp"
#include "bgsched/io_util.hpp"
#include "bgsched/trace.hpp"

namespace bgsched {

// Per-interval aggregate counters of a trace.
struct BinStats {
    std::uint64_t total_iops = 0;  // all ops in the interval, unmaps included
    std::uint64_t read_iops = 0;
    std::uint64_t write_iops = 0;
    std::uint64_t unmap_len = 0;      // bytes unmapped
    std::uint64_t write_blocks = 0;   // blocks touched by writes
    double unique_write_fraction = 1.0;
    double read_ratio = 0.0;
};

// Contiguous fixed-interval bins: bin k covers
// [start_epoch + k*interval, start_epoch + (k+1)*interval).
struct IntensitySeries {
    double interval = 600.0;
    double start_epoch = 0.0;
    std::vector<BinStats> bins;
};

enum class Channel { total_iops, write_blocks, read_ratio, unique_fraction };

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::total_iops: return "total_iops";
        case Channel::write_blocks: return "write_blocks";
        case Channel::read_ratio: return "read_ratio";
        case Channel::unique_fraction: return "unique_fraction";
    }
    return "?";
}

inline std::vector<double> channel_values(const IntensitySeries& s, Channel c) {
    std::vector<double> out;
    out.reserve(s.bins.size());
    for (const BinStats& b : s.bins) {
        switch (c) {
            case Channel::total_iops: out.push_back(static_cast<double>(b.total_iops)); break;
            case Channel::write_blocks: out.push_back(static_cast<double>(b.write_blocks)); break;
            case Channel::read_ratio: out.push_back(b.read_ratio); break;
            case Channel::unique_fraction: out.push_back(b.unique_write_fraction); break;
        }
    }
    return out;
}

struct BinningOptions {
    double interval = 600.0;        // seconds per bin
    std::uint64_t block_size = 4096;
    int dedup_window_bins = 6;      // window for the unique-write estimator
};

// Bins a trace into an IntensitySeries. unique_write_fraction is estimated
// over a sliding window of dedup_window_bins bins: a written (lun, block)
// address already seen in-window marks that block non-unique. Memory stays
// bounded by the writes inside the window.
inline IntensitySeries bin_series(const Trace& trace, const BinningOptions& options = {}) {
    if (options.interval <= 0) throw ConfigError("bin interval must be positive");
    if (options.block_size == 0) throw ConfigError("block size must be positive");
    if (options.dedup_window_bins < 1) throw ConfigError("dedup window must be at least one bin");

    IntensitySeries series;
    series.interval = options.interval;
    if (trace.records.empty()) return series;

    series.start_epoch =
        std::floor(trace.records.front().timestamp / options.interval) * options.interval;
    const double t_last = trace.records.back().timestamp;
    const auto n_bins = static_cast<std::size_t>(
        std::floor((t_last - series.start_epoch) / options.interval)) + 1;
    series.bins.assign(n_bins, BinStats{});

    std::vector<std::uint64_t> unique_blocks(n_bins, 0);

    // One address set per window bin; (lun, block) packed into 64 bits.
    std::deque<std::unordered_set<std::uint64_t>> window;
    window.emplace_back();
    auto address_key = [](std::uint32_t lun, std::uint64_t block) {
        return (static_cast<std::uint64_t>(lun) << 48) ^ (block & 0xFFFFFFFFFFFFULL);
    };

    std::size_t current_bin = 0;
    for (const TraceRecord& rec : trace.records) {
        const auto bin = static_cast<std::size_t>(
            std::floor((rec.timestamp - series.start_epoch) / options.interval));
        if (bin >= n_bins) throw InternalError("record maps outside the computed bin range");
        while (current_bin < bin) {
            ++current_bin;
            window.emplace_back();
            if (window.size() > static_cast<std::size_t>(options.dedup_window_bins)) window.pop_front();
        }

        BinStats& b = series.bins[bin];
        ++b.total_iops;
        switch (rec.op) {
            case OpType::read:
                ++b.read_iops;
                break;
            case OpType::unmap:
                b.unmap_len += rec.length;
                break;
            case OpType::write: {
                ++b.write_iops;
                const std::uint64_t first = rec.offset / options.block_size;
                const std::uint64_t last = (rec.offset + rec.length - 1) / options.block_size;
                for (std::uint64_t blk = first; blk <= last; ++blk) {
                    ++b.write_blocks;
                    const std::uint64_t key = address_key(rec.lun, blk);
                    bool seen = false;
                    for (const auto& s : window) {
                        if (s.count(key)) {
                            seen = true;
                            break;
                        }
                    }
                    if (!seen) ++unique_blocks[bin];
                    window.back().insert(key);
                }
                break;
            }
        }
    }

    for (std::size_t k = 0; k < n_bins; ++k) {
        BinStats& b = series.bins[k];
        b.read_ratio = static_cast<double>(b.read_iops) /
                       static_cast<double>(std::max<std::uint64_t>(1, b.read_iops + b.write_iops));
        b.unique_write_fraction =
            b.write_blocks == 0
                ? 1.0
                : static_cast<double>(unique_blocks[k]) / static_cast<double>(b.write_blocks);
    }
    return series;
}

inline void write_series_csv(const IntensitySeries& s, std::ostream& out) {
    out << "bin,total_iops,read_iops,write_iops,unmap_len,write_blocks,unique_write_fraction,read_ratio\n";
    for (std::size_t k = 0; k < s.bins.size(); ++k) {
        const BinStats& b = s.bins[k];
        out << k << ',' << b.total_iops << ',' << b.read_iops << ',' << b.write_iops << ',' << b.unmap_len
            << ',' << b.write_blocks << ',' << format_double(b.unique_write_fraction) << ','
            << format_double(b.read_ratio) << '\n';
    }
}

inline nlohmann::json series_to_json(const IntensitySeries& s) {
    nlohmann::json bins = nlohmann::json::array();
    for (const BinStats& b : s.bins) {
        bins.push_back({{"total_iops", b.total_iops},
                        {"read_iops", b.read_iops},
                        {"write_iops", b.write_iops},
                        {"unmap_len", b.unmap_len},
                        {"write_blocks", b.write_blocks},
                        {"unique_write_fraction", b.unique_write_fraction},
                        {"read_ratio", b.read_ratio}});
    }
    return nlohmann::json{{"interval", s.interval}, {"start_epoch", s.start_epoch}, {"bins", bins}};
}

}  // namespace bgsched
