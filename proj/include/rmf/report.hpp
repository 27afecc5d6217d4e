#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmf/bigint.hpp"

namespace rmf {

// Shortest round-trip decimal form; identical output for identical bits, so
// emitted files are byte-reproducible.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw std::invalid_argument("unknown output format: " + s);
}

// Rectangular result table. CSV (RFC 4180 quoting) is the canonical format;
// JSON mirrors it cell for cell as an array of row objects, emitting numeric
// cells unquoted.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    class RowBuilder {
    public:
        explicit RowBuilder(Table& t) : table_(t) {}
        RowBuilder& text(const std::string& v) {
            cells_.push_back(v);
            numeric_.push_back(false);
            return *this;
        }
        RowBuilder& num(double v) {
            cells_.push_back(format_double(v));
            numeric_.push_back(true);
            return *this;
        }
        RowBuilder& num(std::uint64_t v) {
            cells_.push_back(std::to_string(v));
            numeric_.push_back(true);
            return *this;
        }
        RowBuilder& num(std::int64_t v) {
            cells_.push_back(std::to_string(v));
            numeric_.push_back(true);
            return *this;
        }
        RowBuilder& num(int v) { return num(static_cast<std::int64_t>(v)); }
        RowBuilder& num(const BigInt& v) {
            cells_.push_back(v.str());
            numeric_.push_back(true);
            return *this;
        }
        ~RowBuilder() { table_.push_row(std::move(cells_), std::move(numeric_)); }

    private:
        Table& table_;
        std::vector<std::string> cells_;
        std::vector<bool> numeric_;
    };

    RowBuilder row() { return RowBuilder(*this); }

    void push_row(std::vector<std::string> cells, std::vector<bool> numeric) {
        if (cells.size() != columns_.size())
            throw std::logic_error("Table: row width does not match header");
        rows_.push_back(std::move(cells));
        numeric_.push_back(std::move(numeric));
    }

    void write(std::ostream& out, OutputFormat fmt) const {
        if (fmt == OutputFormat::csv) write_csv(out);
        else write_json(out);
    }

    std::size_t row_count() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::string>& row_cells(std::size_t i) const { return rows_[i]; }

private:
    static void write_csv_cell(std::ostream& out, const std::string& cell) {
        if (cell.find_first_of(",\"\n\r") == std::string::npos) {
            out << cell;
            return;
        }
        out << '"';
        for (char ch : cell) {
            if (ch == '"') out << '"';
            out << ch;
        }
        out << '"';
    }

    static void write_json_string(std::ostream& out, const std::string& s) {
        out << '"';
        for (char ch : s) {
            switch (ch) {
                case '"': out << "\\\""; break;
                case '\\': out << "\\\\"; break;
                case '\n': out << "\\n"; break;
                case '\r': out << "\\r"; break;
                case '\t': out << "\\t"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(ch) & 0xff);
                        out << buf;
                    } else {
                        out << ch;
                    }
            }
        }
        out << '"';
    }

    static bool is_json_number(const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = s[0] == '-' ? 1 : 0;
        if (i >= s.size()) return false;
        bool digits = false, dot = false, exp = false;
        for (; i < s.size(); ++i) {
            const char ch = s[i];
            if (ch >= '0' && ch <= '9') { digits = true; continue; }
            if (ch == '.' && !dot && !exp) { dot = true; continue; }
            if ((ch == 'e' || ch == 'E') && digits && !exp) {
                exp = true;
                if (i + 1 < s.size() && (s[i + 1] == '+' || s[i + 1] == '-')) ++i;
                continue;
            }
            return false;
        }
        return digits;
    }

    void write_csv(std::ostream& out) const {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            if (c) out << ',';
            write_csv_cell(out, columns_[c]);
        }
        out << '\n';
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                write_csv_cell(out, row[c]);
            }
            out << '\n';
        }
    }

    void write_json(std::ostream& out) const {
        out << "[\n";
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            out << "  {";
            for (std::size_t c = 0; c < columns_.size(); ++c) {
                if (c) out << ", ";
                write_json_string(out, columns_[c]);
                out << ": ";
                const std::string& cell = rows_[r][c];
                if (numeric_[r][c] && is_json_number(cell)) out << cell;
                else write_json_string(out, cell);
            }
            out << (r + 1 < rows_.size() ? "},\n" : "}\n");
        }
        out << "]\n";
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::vector<bool>> numeric_;
};

}  // namespace rmf
