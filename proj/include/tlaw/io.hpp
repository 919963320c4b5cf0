#pragma once

// CSV ingestion of abundance panels and small output helpers.
//
// Wide layout: one row per site, one column per time. With a header the first
// row holds time labels (after a corner cell) and the first column holds site
// labels. Long layout: one (site, time, value) triple per row; sites and times
// are ordered by first appearance and every combination must be present.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlaw/error.hpp"
#include "tlaw/panel.hpp"

namespace tlaw {

enum class Layout { wide, long_format };

inline const char* to_string(Layout l) { return l == Layout::wide ? "wide" : "long"; }

struct DatasetFile {
    std::string path;
    Layout layout = Layout::wide;
    char delimiter = ',';
    bool header = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Row {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> cells;
};

inline std::vector<Row> read_rows(const std::string& text, char delim) {
    std::vector<Row> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view v = trim(line);
        if (v.empty() || v.front() == '#') continue;
        rows.push_back({number, split(line, delim)});
    }
    return rows;
}

inline double parse_value(const std::string& cell, std::size_t line, std::size_t column) {
    const auto where = [&] {
        return " at line " + std::to_string(line) + ", column " + std::to_string(column);
    };
    if (cell.empty()) throw Error(ErrorCode::parse, "missing value" + where());
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorCode::parse, "cannot parse '" + cell + "' as a number" + where());
    if (!std::isfinite(v)) throw Error(ErrorCode::parse, "non-finite value" + where());
    if (v < 0.0) throw Error(ErrorCode::parse, "negative value " + cell + where());
    return v;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline Panel parse_wide(const std::vector<Row>& rows, bool header) {
    if (rows.empty()) throw Error(ErrorCode::parse, "empty input");
    std::vector<std::string> time_labels, site_labels;
    std::size_t first = 0;
    std::size_t offset = 0;  // first value column
    if (header) {
        time_labels.assign(rows[0].cells.begin() + 1, rows[0].cells.end());
        first = 1;
        offset = 1;
    }
    const std::size_t width = header ? rows[0].cells.size() : rows[first].cells.size();
    std::vector<std::vector<double>> values;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.cells.size() != width)
            throw Error(ErrorCode::parse, "ragged row at line " + std::to_string(row.line) +
                                              ": expected " + std::to_string(width) +
                                              " cells, found " + std::to_string(row.cells.size()));
        if (header) site_labels.push_back(row.cells[0]);
        std::vector<double> v;
        v.reserve(width - offset);
        for (std::size_t c = offset; c < width; ++c)
            v.push_back(parse_value(row.cells[c], row.line, c + 1));
        values.push_back(std::move(v));
    }
    if (values.empty()) throw Error(ErrorCode::parse, "no data rows");
    try {
        return Panel::from_rows(values, std::move(site_labels), std::move(time_labels));
    } catch (const Error& e) {
        throw Error(ErrorCode::parse, e.what());
    }
}

inline Panel parse_long(const std::vector<Row>& rows, bool header) {
    if (rows.empty()) throw Error(ErrorCode::parse, "empty input");
    std::size_t site_col = 0, time_col = 1, value_col = 2, first = 0;
    if (header) {
        const auto& h = rows[0].cells;
        auto find = [&](const char* name) {
            for (std::size_t i = 0; i < h.size(); ++i)
                if (lower(h[i]) == name) return i;
            throw Error(ErrorCode::parse, std::string("long layout header lacks a '") + name +
                                              "' column");
        };
        site_col = find("site");
        time_col = find("time");
        value_col = find("value");
        first = 1;
    }
    const std::size_t need = std::max({site_col, time_col, value_col}) + 1;

    std::vector<std::string> sites, times;
    std::map<std::string, std::size_t> site_index, time_index;
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.cells.size() < need)
            throw Error(ErrorCode::parse, "short row at line " + std::to_string(row.line));
        const std::string& s = row.cells[site_col];
        const std::string& t = row.cells[time_col];
        if (!site_index.count(s)) {
            site_index[s] = sites.size();
            sites.push_back(s);
        }
        if (!time_index.count(t)) {
            time_index[t] = times.size();
            times.push_back(t);
        }
        const double v = parse_value(row.cells[value_col], row.line, value_col + 1);
        if (!cells.emplace(std::make_pair(site_index[s], time_index[t]), v).second)
            throw Error(ErrorCode::parse, "duplicate entry for site '" + s + "', time '" + t +
                                              "' at line " + std::to_string(row.line));
    }

    std::string missing;
    std::size_t missing_count = 0;
    std::vector<std::vector<double>> values(sites.size(), std::vector<double>(times.size()));
    for (std::size_t j = 0; j < sites.size(); ++j)
        for (std::size_t t = 0; t < times.size(); ++t) {
            const auto it = cells.find({j, t});
            if (it == cells.end()) {
                if (missing_count++ < 20) missing += " (" + sites[j] + ", " + times[t] + ")";
                continue;
            }
            values[j][t] = it->second;
        }
    if (missing_count > 0)
        throw Error(ErrorCode::parse, "long layout is missing " + std::to_string(missing_count) +
                                          " (site, time) cells:" + missing);
    try {
        return Panel::from_rows(values, std::move(sites), std::move(times));
    } catch (const Error& e) {
        throw Error(ErrorCode::parse, e.what());
    }
}

} // namespace detail

inline Panel parse_csv(const std::string& text, Layout layout, char delimiter = ',',
                       bool header = true) {
    const auto rows = detail::read_rows(text, delimiter);
    return layout == Layout::wide ? detail::parse_wide(rows, header)
                                  : detail::parse_long(rows, header);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Panel load_csv(const DatasetFile& file) {
    return parse_csv(read_file(file.path), file.layout, file.delimiter, file.header);
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

// 17 significant digits: every double survives a text round trip.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string default_label(const char* prefix, std::size_t i) {
    return prefix + std::to_string(i + 1);
}

inline std::string write_csv(const Panel& panel, Layout layout = Layout::wide,
                             char delimiter = ',') {
    const auto site = [&](std::size_t j) {
        return panel.site_labels().empty() ? default_label("site", j) : panel.site_labels()[j];
    };
    const auto time = [&](std::size_t t) {
        return panel.time_labels().empty() ? default_label("t", t) : panel.time_labels()[t];
    };
    std::string out;
    if (layout == Layout::wide) {
        out += "site";
        for (std::size_t t = 0; t < panel.n_times(); ++t) (out += delimiter) += time(t);
        out += '\n';
        for (std::size_t j = 0; j < panel.n_sites(); ++j) {
            out += site(j);
            for (std::size_t t = 0; t < panel.n_times(); ++t)
                (out += delimiter) += format_double(panel(j, t));
            out += '\n';
        }
    } else {
        out += std::string("site") + delimiter + "time" + delimiter + "value\n";
        for (std::size_t j = 0; j < panel.n_sites(); ++j)
            for (std::size_t t = 0; t < panel.n_times(); ++t)
                out += site(j) + delimiter + time(t) + delimiter + format_double(panel(j, t)) + '\n';
    }
    return out;
}

// FNV-1a 64-bit digest, hex encoded; identifies the exact input bytes.
inline std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Writes through a temporary sibling file and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::usage, "cannot write '" + tmp + "'");
        out << content;
        if (!out) throw Error(ErrorCode::usage, "write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::usage, "cannot rename '" + tmp + "' to '" + path + "'");
}

} // namespace tlaw
