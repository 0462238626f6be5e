#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "bgsched/errors.hpp"

namespace bgsched {

// Line-oriented reader over a plain or gzip-compressed file (picked by the
// ".gz" extension). Single consumer; not seekable.
class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path) {
        if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
            gz_ = gzopen(path.c_str(), "rb");
            if (!gz_) throw DataError("cannot open " + path);
        } else {
            plain_.open(path);
            if (!plain_) throw DataError("cannot open " + path);
        }
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;
    ~LineReader() {
        if (gz_) gzclose(gz_);
    }

    bool next(std::string& line) {
        if (gz_) return next_gz(line);
        return static_cast<bool>(std::getline(plain_, line));
    }

    const std::string& path() const { return path_; }

private:
    bool next_gz(std::string& line) {
        line.clear();
        char buf[4096];
        bool got = false;
        while (gzgets(gz_, buf, sizeof(buf))) {
            got = true;
            line += buf;
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                return true;
            }
        }
        return got;
    }

    std::string path_;
    std::ifstream plain_;
    gzFile gz_ = nullptr;
};

// Buffers output and publishes it with a rename, so a failed run never leaves
// a partial file behind.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& target) : target_(target) {}
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;
    ~AtomicFile() {
        if (!committed_) {
            std::error_code ec;
            std::filesystem::remove(tmp_path(), ec);
        }
    }

    std::ostream& stream() { return buf_; }

    void commit() {
        const auto tmp = tmp_path();
        if (target_.has_parent_path()) std::filesystem::create_directories(target_.parent_path());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + tmp.string());
            out << buf_.str();
            if (!out) throw DataError("write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, target_);
        committed_ = true;
    }

private:
    std::filesystem::path tmp_path() const {
        return target_.string() + ".tmp";
    }

    std::filesystem::path target_;
    std::ostringstream buf_;
    bool committed_ = false;
};

// Shortest representation that round-trips the exact double value.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace bgsched
