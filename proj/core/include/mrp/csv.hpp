#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mrp::csv {

// Splits one CSV line on commas. No quoting support; the data formats here
// never embed commas in fields.
std::vector<std::string> split_line(const std::string& line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
};

Table read_table(const std::string& path);

// Square matrix with the asset list as header row and one row per asset.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& labels);
Eigen::MatrixXd read_matrix(const std::string& path, std::vector<std::string>* labels = nullptr);

// Deterministic number formatting so repeated runs are byte-identical.
std::string format_double(double v);

}  // namespace mrp::csv
