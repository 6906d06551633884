#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace smm {

/// Shortest decimal that round-trips a double exactly (17 significant
/// digits is always enough; %g drops the trailing noise for short values).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

/// Matrix round-trip format: first line "# rows cols", then one CSV row per
/// matrix row, full double precision.
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    os << "# " << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    auto os = open_output(path);
    write_matrix_csv(os, m);
}

inline Eigen::MatrixXd read_matrix_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.size() < 2 || header[0] != '#')
        throw std::runtime_error("matrix csv: missing '# rows cols' header");
    Eigen::Index rows = 0, cols = 0;
    {
        std::stringstream ss(header.substr(1));
        if (!(ss >> rows >> cols) || rows < 0 || cols < 0)
            throw std::runtime_error("matrix csv: malformed '# rows cols' header");
    }
    Eigen::MatrixXd m(rows, cols);
    std::string line;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("matrix csv: truncated file");
        const auto cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != cols)
            throw std::runtime_error("matrix csv: row with wrong cell count");
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::stod(cells[j]);
    }
    return m;
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    auto is = open_input(path);
    return read_matrix_csv(is);
}

}  // namespace smm
