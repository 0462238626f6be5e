#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bgsched/errors.hpp"
#include "bgsched/trace.hpp"

namespace bgsched {

// Self-contained generator state so output is identical across platforms and
// standard-library versions for a given seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Box-Muller standard normal.
    double next_gauss() {
        double u1 = next_real();
        while (u1 <= 0.0) u1 = next_real();
        const double u2 = next_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t state_;
};

// Daily workload shape for the synthetic trace generator. Curves are sampled
// over 24 hours and linearly interpolated (periodic); a single element means a
// flat curve. Intensity is in ops per second.
struct SyntheticProfile {
    int days = 1;
    std::vector<double> intensity_curve{100.0};
    std::vector<double> read_ratio_curve{0.7};
    std::vector<double> unique_fraction_curve{1.0};
    double unmap_fraction = 0.0;           // fraction of ops issued as unmaps
    std::uint64_t unmap_len_bytes = 1 << 20;
    double noise = 0.0;                    // per-bin multiplicative sigma
    double noise_bin_s = 600.0;            // granularity of the noise multiplier
    int luns = 1;
    std::array<double, 7> day_scale{1, 1, 1, 1, 1, 1, 1};
    int epoch_day_of_week = 0;             // 0 = Monday
    std::uint64_t io_length_bytes = 4096;
    std::uint64_t block_size = 4096;
    std::uint64_t device_blocks_per_lun = 1ULL << 32;
};

inline double curve_at(const std::vector<double>& curve, double hour_of_day) {
    if (curve.empty()) throw ConfigError("profile curve must not be empty");
    if (curve.size() == 1) return curve[0];
    const double pos = hour_of_day / 24.0 * static_cast<double>(curve.size());
    const auto i = static_cast<std::size_t>(pos) % curve.size();
    const auto j = (i + 1) % curve.size();
    const double frac = pos - std::floor(pos);
    return curve[i] * (1.0 - frac) + curve[j] * frac;
}

// Generates a block IO trace following a repeating daily profile. Deterministic
// for a fixed seed. With noise = 0 every day emits the identical per-second op
// counts (the fractional-rate carry resets at day boundaries), so binned
// intensity is exactly periodic.
inline Trace synthesize_trace(const SyntheticProfile& profile, std::uint64_t seed) {
    if (profile.days <= 0) throw ConfigError("profile days must be positive");
    if (profile.luns <= 0) throw ConfigError("profile luns must be positive");
    if (profile.noise < 0) throw ConfigError("profile noise must be non-negative");
    if (profile.io_length_bytes == 0 || profile.block_size == 0)
        throw ConfigError("io length and block size must be positive");

    SplitMix64 noise_rng(seed ^ 0xA5A5A5A5ULL);
    SplitMix64 op_rng(seed * 0x9E3779B97F4A7C15ULL + 1);

    Trace trace;
    for (int l = 0; l < profile.luns; ++l) trace.intern_lun("lun" + std::to_string(l));

    // Recently written block addresses per LUN; overwrites re-draw from here.
    const std::size_t kRecentCap = 4096;
    std::vector<std::vector<std::uint64_t>> recent(static_cast<std::size_t>(profile.luns));
    std::vector<std::uint64_t> next_fresh(static_cast<std::size_t>(profile.luns), 0);

    const auto total_seconds = static_cast<std::int64_t>(profile.days) * 86400;
    const auto noise_bin = static_cast<std::int64_t>(profile.noise_bin_s);
    double noise_mult = 1.0;
    std::int64_t noise_bin_start = -1;

    double carry = 0.0;
    for (std::int64_t sec = 0; sec < total_seconds; ++sec) {
        if (sec % 86400 == 0) carry = 0.0;
        if (noise_bin_start < 0 || sec - noise_bin_start >= noise_bin) {
            noise_bin_start = sec;
            noise_mult = profile.noise == 0.0
                             ? 1.0
                             : std::max(0.0, 1.0 + profile.noise * noise_rng.next_gauss());
        }
        const double hour = static_cast<double>(sec % 86400) / 3600.0;
        const int dow = (profile.epoch_day_of_week + static_cast<int>(sec / 86400)) % 7;
        const double rate = curve_at(profile.intensity_curve, hour) *
                            profile.day_scale[static_cast<std::size_t>(dow)] * noise_mult;
        carry += rate;
        const auto count = static_cast<std::int64_t>(std::floor(carry));
        carry -= static_cast<double>(count);
        if (count <= 0) continue;

        const double read_ratio = curve_at(profile.read_ratio_curve, hour);
        const double unique_fraction = curve_at(profile.unique_fraction_curve, hour);
        for (std::int64_t i = 0; i < count; ++i) {
            TraceRecord rec;
            rec.timestamp = static_cast<double>(sec) +
                            (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            rec.lun = static_cast<std::uint32_t>(op_rng.next_below(static_cast<std::uint64_t>(profile.luns)));
            const double roll = op_rng.next_real();
            if (roll < profile.unmap_fraction) {
                rec.op = OpType::unmap;
                rec.length = profile.unmap_len_bytes;
                rec.offset = op_rng.next_below(profile.device_blocks_per_lun) * profile.block_size;
            } else if (op_rng.next_real() < read_ratio) {
                rec.op = OpType::read;
                rec.length = profile.io_length_bytes;
                rec.offset = op_rng.next_below(profile.device_blocks_per_lun) * profile.block_size;
            } else {
                rec.op = OpType::write;
                rec.length = profile.io_length_bytes;
                auto& ring = recent[rec.lun];
                std::uint64_t block;
                if (!ring.empty() && op_rng.next_real() >= unique_fraction) {
                    block = ring[op_rng.next_below(ring.size())];
                } else {
                    block = next_fresh[rec.lun]++ % profile.device_blocks_per_lun;
                }
                rec.offset = block * profile.block_size;
                if (ring.size() < kRecentCap) {
                    ring.push_back(block);
                } else {
                    ring[op_rng.next_below(kRecentCap)] = block;
                }
            }
            trace.records.push_back(rec);
        }
    }
    return trace;
}

}  // namespace bgsched
