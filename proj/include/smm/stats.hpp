#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "smm/csv.hpp"

namespace smm {

inline double vector_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 denominator); 0 for a single sample.
inline double sample_stddev(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("stddev: empty sample");
    if (v.size() == 1) return 0.0;
    const double m = vector_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace detail {
inline double median_of_sorted(const double* data, std::size_t n) {
    if (n == 0) throw std::invalid_argument("median: empty sample");
    if (n % 2 == 1) return data[n / 2];
    return 0.5 * (data[n / 2 - 1] + data[n / 2]);
}
}  // namespace detail

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return detail::median_of_sorted(v.data(), v.size());
}

/// First and third quartiles as Tukey hinges: medians of the lower/upper
/// halves of the sorted sample, where an odd-length sample includes the
/// median in both halves. For {1,2,3,4} this gives (1.5, 3.5).
struct Quartiles {
    double q1 = 0.0, q2 = 0.0, q3 = 0.0;
};

inline Quartiles quartiles(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("quartiles: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    Quartiles out;
    out.q2 = detail::median_of_sorted(v.data(), n);
    if (n == 1) {
        out.q1 = out.q3 = v[0];
        return out;
    }
    const std::size_t half = n / 2 + (n % 2);  // odd n: halves include the median
    out.q1 = detail::median_of_sorted(v.data(), half);
    out.q3 = detail::median_of_sorted(v.data() + (n - half), half);
    return out;
}

struct Summary {
    std::size_t count = 0;
    double mean = 0.0, stddev = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
};

inline Summary summarize(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("summarize: empty sample");
    Summary s;
    s.count = v.size();
    s.mean = vector_mean(v);
    s.stddev = sample_stddev(v);
    std::sort(v.begin(), v.end());
    s.min = v.front();
    s.max = v.back();
    s.median = detail::median_of_sorted(v.data(), v.size());
    const Quartiles q = quartiles(v);
    s.q1 = q.q1;
    s.q3 = q.q3;
    return s;
}

/// A cell is either a number or a label; a Table is a named-column record
/// list. This is the exchange format between experiment runners, the
/// aggregator and the CSV writers.
using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    Eigen::Index column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<Eigen::Index>(i);
        throw std::invalid_argument("table: no column named '" + name + "'");
    }

    void push_row(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("table: row width does not match column count");
        rows.push_back(std::move(row));
    }
};

inline std::string cell_to_string(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    return std::get<std::string>(c);
}

inline void write_table_csv(std::ostream& os, const Table& table) {
    write_csv_row(os, table.columns);
    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (const Cell& c : row) cells.push_back(cell_to_string(c));
        write_csv_row(os, cells);
    }
}

/// Group rows by the named key columns and summarize every other numeric
/// column. Output columns: the keys, then for each numeric value column c
/// the five statistics c_mean, c_std, c_median, c_q1, c_q3, then a final
/// `count`. Groups are emitted in sorted key order and values are sorted
/// before aggregation, so the result is byte-identical regardless of the
/// ordering of the input rows. Columns that contain any non-numeric cell
/// are dropped (with their name recorded nowhere -- they are labels, not
/// measurements).
inline Table aggregate(const Table& records, const std::vector<std::string>& keys) {
    if (records.rows.empty()) throw std::invalid_argument("aggregate: no rows to aggregate");
    std::vector<Eigen::Index> key_idx;
    key_idx.reserve(keys.size());
    for (const auto& k : keys) key_idx.push_back(records.column_index(k));

    // Value columns: numeric in every row and not a key.
    std::vector<Eigen::Index> val_idx;
    for (std::size_t c = 0; c < records.columns.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        if (std::find(key_idx.begin(), key_idx.end(), ci) != key_idx.end()) continue;
        bool numeric = true;
        for (const auto& row : records.rows)
            if (!std::holds_alternative<double>(row[c])) {
                numeric = false;
                break;
            }
        if (numeric) val_idx.push_back(ci);
    }

    std::map<std::vector<std::string>, std::vector<std::vector<double>>> groups;
    for (const auto& row : records.rows) {
        std::vector<std::string> key;
        key.reserve(key_idx.size());
        for (Eigen::Index ki : key_idx) key.push_back(cell_to_string(row[static_cast<std::size_t>(ki)]));
        auto& vals = groups[key];
        if (vals.empty()) vals.resize(val_idx.size());
        for (std::size_t v = 0; v < val_idx.size(); ++v)
            vals[v].push_back(std::get<double>(row[static_cast<std::size_t>(val_idx[v])]));
    }

    Table out;
    for (Eigen::Index ki : key_idx) out.columns.push_back(records.columns[static_cast<std::size_t>(ki)]);
    for (Eigen::Index vi : val_idx) {
        const std::string& name = records.columns[static_cast<std::size_t>(vi)];
        for (const char* stat : {"_mean", "_std", "_median", "_q1", "_q3"})
            out.columns.push_back(name + stat);
    }
    out.columns.push_back("count");

    for (auto& [key, vals] : groups) {
        std::vector<Cell> row;
        row.reserve(out.columns.size());
        for (const auto& k : key) row.emplace_back(k);
        std::size_t count = 0;
        for (std::size_t v = 0; v < vals.size(); ++v) {
            std::sort(vals[v].begin(), vals[v].end());
            const Summary s = summarize(vals[v]);
            count = s.count;
            row.emplace_back(s.mean);
            row.emplace_back(s.stddev);
            row.emplace_back(s.median);
            row.emplace_back(s.q1);
            row.emplace_back(s.q3);
        }
        if (vals.empty())
            for (const auto& r : records.rows) {
                std::vector<std::string> k2;
                for (Eigen::Index ki : key_idx)
                    k2.push_back(cell_to_string(r[static_cast<std::size_t>(ki)]));
                if (k2 == key) ++count;
            }
        row.emplace_back(static_cast<double>(count));
        out.push_row(std::move(row));
    }
    return out;
}

}  // namespace smm
