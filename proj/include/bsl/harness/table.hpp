#pragma once

#include <bsl/error.hpp>

#include <charconv>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsl {

using Cell = std::variant<double, std::string>;

/// Column-ordered result table. Numbers print with %.17g so export/parse round-trips exactly.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        fail(ErrorKind::Format, "no column named " + name);
    }
    double number(std::size_t row, const std::string& name) const {
        const auto& c = rows.at(row).at(column(name));
        require(std::holds_alternative<double>(c), ErrorKind::Format, "column " + name + " is not numeric");
        return std::get<double>(c);
    }
    const std::string& text(std::size_t row, const std::string& name) const {
        const auto& c = rows.at(row).at(column(name));
        require(std::holds_alternative<std::string>(c), ErrorKind::Format, "column " + name + " is not text");
        return std::get<std::string>(c);
    }
    void add(std::vector<Cell> row) {
        require(row.size() == columns.size(), ErrorKind::Format, "row width does not match header");
        rows.push_back(std::move(row));
    }
};

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty()) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline bool parse_double(const std::string& s, double& x) {
    if (s.empty()) return false;
    if (s == "nan" || s == "-nan") {
        x = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (s == "inf" || s == "-inf") {
        x = s[0] == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        return true;
    }
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, x);
    return ec == std::errc() && p == e;
}

/// Splits one CSV record; quoted fields may contain separators, quotes and newlines.
inline bool read_record(std::istream& is, std::vector<std::string>& fields, std::vector<char>& quoted) {
    fields.clear();
    quoted.clear();
    int c = is.peek();
    if (c == EOF) return false;
    std::string cur;
    bool q = false, was_q = false;
    while (true) {
        c = is.get();
        if (c == EOF) break;
        if (q) {
            if (c == '"') {
                if (is.peek() == '"') {
                    cur += '"';
                    is.get();
                } else {
                    q = false;
                }
            } else {
                cur += char(c);
            }
            continue;
        }
        if (c == '"') {
            q = was_q = true;
        } else if (c == ',') {
            fields.push_back(cur);
            quoted.push_back(was_q);
            cur.clear();
            was_q = false;
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cur += char(c);
        }
    }
    require(!q, ErrorKind::Format, "unterminated quoted CSV field");
    fields.push_back(cur);
    quoted.push_back(was_q);
    return true;
}

} // namespace detail

/// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        require(bool(os), ErrorKind::Io, "cannot write " + tmp.string());
        os << content;
        os.flush();
        require(bool(os), ErrorKind::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    require(!ec, ErrorKind::Io, "cannot rename into " + path.string() + ": " + ec.message());
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + detail::csv_escape(t.columns[i]);
    out += '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            // text cells are always quoted so that "1" survives a round trip as text
            out += std::holds_alternative<double>(r[i]) ? format_number(std::get<double>(r[i]))
                                                        : detail::csv_quote(std::get<std::string>(r[i]));
        }
        out += '\n';
    }
    return out;
}

inline Table parse_csv(std::istream& is) {
    Table t;
    std::vector<std::string> f;
    std::vector<char> q;
    require(detail::read_record(is, f, q), ErrorKind::Format, "empty CSV");
    t.columns = f;
    while (detail::read_record(is, f, q)) {
        if (f.size() == 1 && f[0].empty() && !q[0]) continue;
        require(f.size() == t.columns.size(), ErrorKind::Format, "CSV row width does not match header");
        std::vector<Cell> row;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double x;
            if (!q[i] && detail::parse_double(f[i], x))
                row.emplace_back(x);
            else
                row.emplace_back(f[i]);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table parse_csv_string(const std::string& s) {
    std::istringstream is(s);
    return parse_csv(is);
}

inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorKind::Io, "cannot read " + path.string());
    return parse_csv(is);
}

inline void write_csv(const Table& t, const std::filesystem::path& path) { write_file_atomic(path, to_csv(t)); }

/// Structured-text export: {"columns": [...], "rows": [[...], ...]}.
inline nlohmann::json to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& c : r) {
            if (std::holds_alternative<std::string>(c))
                row.push_back(std::get<std::string>(c));
            else if (std::isfinite(std::get<double>(c)))
                row.push_back(std::get<double>(c));
            else
                row.push_back(format_number(std::get<double>(c)));
        }
        rows.push_back(std::move(row));
    }
    return {{"columns", t.columns}, {"rows", rows}};
}

inline void write_json(const Table& t, const std::filesystem::path& path) {
    write_file_atomic(path, to_json(t).dump(1) + "\n");
}

enum class ExportFormat { csv, json };

inline void export_table(const Table& t, const std::filesystem::path& path, ExportFormat fmt) {
    if (fmt == ExportFormat::csv)
        write_csv(t, path);
    else
        write_json(t, path);
}

} // namespace bsl
