#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bgsched/errors.hpp"
#include "bgsched/io_util.hpp"

namespace bgsched {

enum class OpType : std::uint8_t { read = 0, write = 1, unmap = 2 };

inline const char* op_name(OpType op) {
    switch (op) {
        case OpType::read: return "read";
        case OpType::write: return "write";
        case OpType::unmap: return "unmap";
    }
    return "?";
}

// One block IO event. Timestamps are seconds since the trace epoch; LUNs are
// interned into the owning Trace's name table.
struct TraceRecord {
    double timestamp = 0.0;
    std::uint32_t lun = 0;
    OpType op = OpType::read;
    std::uint64_t offset = 0;  // bytes
    std::uint64_t length = 0;  // bytes, > 0
};

struct Trace {
    std::vector<std::string> lun_names;
    std::vector<TraceRecord> records;
    std::size_t malformed_rows = 0;
    std::size_t first_bad_line = 0;  // 1-based source line, 0 = none
    std::string first_bad_text;
    bool sort_applied = false;

    std::uint32_t intern_lun(const std::string& name) {
        auto it = lun_index_.find(name);
        if (it != lun_index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(lun_names.size());
        lun_names.push_back(name);
        lun_index_.emplace(name, id);
        return id;
    }

private:
    std::map<std::string, std::uint32_t> lun_index_;
};

enum class TraceFormat { csv_generic, csv_snia };

struct ParseOptions {
    TraceFormat format = TraceFormat::csv_generic;
    // Fraction of rows that may be malformed before parsing fails outright.
    double malformed_threshold = 0.001;
    // When set, records reaching past this device size are malformed.
    std::optional<std::uint64_t> device_bytes;
};

namespace detail {

inline std::optional<double> parse_real(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_u64(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    int base = 10;
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
        t = t.substr(2);
        base = 16;
    }
    std::uint64_t v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v, base);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

inline std::optional<OpType> parse_op(const std::string& raw) {
    const std::string s = lower(trim(raw));
    if (s == "read" || s == "r" || s == "rs") return OpType::read;
    if (s == "write" || s == "w" || s == "ws") return OpType::write;
    if (s == "unmap" || s == "trim" || s == "discard" || s == "ta") return OpType::unmap;
    return std::nullopt;
}

struct ColumnMap {
    int timestamp = -1, lun = -1, op = -1, offset = -1, length = -1;
    bool complete() const { return timestamp >= 0 && lun >= 0 && op >= 0 && offset >= 0 && length >= 0; }
    int width() const { return std::max({timestamp, lun, op, offset, length}) + 1; }
};

inline bool match_any(const std::string& name, std::initializer_list<const char*> aliases) {
    for (const char* a : aliases)
        if (name == a) return true;
    return false;
}

inline ColumnMap map_header(const std::vector<std::string>& cols, TraceFormat format) {
    ColumnMap m;
    for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
        const std::string name = lower(trim(cols[i]));
        if (format == TraceFormat::csv_generic) {
            if (name == "timestamp_s") m.timestamp = i;
            else if (name == "lun") m.lun = i;
            else if (name == "op") m.op = i;
            else if (name == "offset_bytes") m.offset = i;
            else if (name == "length_bytes") m.length = i;
        } else {
            if (m.timestamp < 0 && match_any(name, {"timestamp", "timestamp_s", "time", "ts"})) m.timestamp = i;
            else if (m.lun < 0 && match_any(name, {"lun", "lun_id", "disknumber", "disk", "device", "dev", "volume"})) m.lun = i;
            else if (m.op < 0 && match_any(name, {"op", "type", "optype", "io_type", "operation"})) m.op = i;
            else if (m.offset < 0 && match_any(name, {"offset", "offset_bytes", "byteoffset"})) m.offset = i;
            else if (m.length < 0 && match_any(name, {"length", "length_bytes", "size", "bytes", "iosize", "io_size"})) m.length = i;
        }
    }
    return m;
}

}  // namespace detail

// Parses a CSV block IO trace. The first row must be a header naming the five
// required columns (csv_generic: exact names; csv_snia: common block-trace
// aliases, extra columns ignored). Malformed rows are counted and skipped;
// parsing fails only when their fraction exceeds options.malformed_threshold.
// SNIA-style timestamps in Windows filetime ticks are rebased to seconds from
// the first record. Records are sorted by timestamp if the source is unordered.
template <class LineSource>
Trace parse_trace_lines(LineSource&& next_line, const ParseOptions& options = {}) {
    Trace trace;
    std::string line;
    if (!next_line(line)) return trace;  // empty input: empty trace

    const auto header = split_csv(line);
    const auto cols = detail::map_header(header, options.format);
    if (!cols.complete())
        throw DataError("trace header does not identify timestamp/lun/op/offset/length columns");

    const bool filetime = options.format == TraceFormat::csv_snia;
    std::optional<double> ts_base;
    bool rebase = false;

    std::size_t line_no = 1;
    std::size_t total_rows = 0;
    auto reject = [&](const std::string& text) {
        ++trace.malformed_rows;
        if (trace.first_bad_line == 0) {
            trace.first_bad_line = line_no;
            trace.first_bad_text = text;
        }
    };

    while (next_line(line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++total_rows;
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) < cols.width()) {
            reject(line);
            continue;
        }
        const auto ts = detail::parse_real(fields[cols.timestamp]);
        const auto op = detail::parse_op(fields[cols.op]);
        const auto offset = detail::parse_u64(fields[cols.offset]);
        const auto length = detail::parse_u64(fields[cols.length]);
        if (!ts || !op || !offset || !length || *length == 0 || *ts < 0.0) {
            reject(line);
            continue;
        }
        if (options.device_bytes && *offset + *length > *options.device_bytes) {
            reject(line);
            continue;
        }
        double t = *ts;
        if (filetime) {
            if (!ts_base) {
                ts_base = t;
                rebase = t > 1e12;  // Windows filetime / ns-scale epochs
            }
            if (rebase) t = (t - *ts_base) * 1e-7;
        }
        TraceRecord rec;
        rec.timestamp = t;
        rec.lun = trace.intern_lun(trim(fields[cols.lun]));
        rec.op = *op;
        rec.offset = *offset;
        rec.length = *length;
        trace.records.push_back(rec);
    }

    if (total_rows > 0 &&
        static_cast<double>(trace.malformed_rows) > options.malformed_threshold * static_cast<double>(total_rows)) {
        throw DataError("too many malformed trace rows (" + std::to_string(trace.malformed_rows) + "/" +
                        std::to_string(total_rows) + "), first at line " + std::to_string(trace.first_bad_line) +
                        ": " + trace.first_bad_text);
    }

    if (!std::is_sorted(trace.records.begin(), trace.records.end(),
                        [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; })) {
        std::stable_sort(trace.records.begin(), trace.records.end(),
                         [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; });
        trace.sort_applied = true;
    }
    return trace;
}

inline Trace parse_trace(std::istream& in, const ParseOptions& options = {}) {
    return parse_trace_lines([&in](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
                             options);
}

inline Trace parse_trace_file(const std::string& path, const ParseOptions& options = {}) {
    LineReader reader(path);
    return parse_trace_lines([&reader](std::string& line) { return reader.next(line); }, options);
}

// Writes the generic CSV schema; doubles use shortest round-trip formatting so
// parse -> write -> parse is the identity on record values.
inline void write_trace_csv(const Trace& trace, std::ostream& out) {
    out << "timestamp_s,lun,op,offset_bytes,length_bytes\n";
    for (const TraceRecord& r : trace.records) {
        out << format_double(r.timestamp) << ',' << trace.lun_names[r.lun] << ',' << op_name(r.op) << ','
            << r.offset << ',' << r.length << '\n';
    }
}

}  // namespace bgsched
