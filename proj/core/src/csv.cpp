#include "mrp/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrp/errors.hpp"

namespace mrp::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    t.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != t.header.size())
            throw DataError("row " + std::to_string(t.rows.size() + 2) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(t.header.size()) + " in " + path);
        t.rows.push_back(std::move(fields));
    }
    return t;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << (j < static_cast<Eigen::Index>(labels.size()) ? labels[j]
                                                             : "c" + std::to_string(j));
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix(const std::string& path, std::vector<std::string>* labels) {
    Table t = read_table(path);
    const auto cols = static_cast<Eigen::Index>(t.header.size());
    const auto rows = static_cast<Eigen::Index>(t.rows.size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = std::stod(t.rows[i][j]);
    if (labels) *labels = t.header;
    return m;
}

}  // namespace mrp::csv
