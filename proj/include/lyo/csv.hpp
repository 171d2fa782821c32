#pragma once

#include <charconv>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "lyo/common.hpp"

namespace lyo {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

/// Row-oriented CSV writer. Every file starts with a header row naming
/// columns (units belong in the column names, e.g. "t_s").
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path), ncols_(columns.size()) {
        if (!out_) throw ConfigError("cannot open for writing: " + path);
        for (size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    void row(std::span<const double> values) {
        if (values.size() != ncols_)
            throw std::runtime_error("CsvWriter: row width mismatch");
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
    size_t ncols_;
};

} // namespace lyo
