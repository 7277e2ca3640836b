#include "mbc/data.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mbc {

namespace {

std::string strip(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(strip(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, const std::string& path,
                  size_t row, size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ", column " + std::to_string(col) +
                                 ": cannot parse '" + cell + "' as a finite number");
    }
    return v;
}

} // namespace

DataMatrix load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t lineno = 0;
    size_t p = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (has_header && names.empty() && rows.empty()) {
            names = fields;
            p = names.size();
            continue;
        }
        if (p == 0) p = fields.size();
        if (fields.size() != p) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     " has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(p));
        }
        std::vector<double> row(p);
        for (size_t j = 0; j < p; ++j)
            row[j] = parse_cell(fields[j], path, lineno, j + 1);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw std::runtime_error(path + ": need at least 2 data rows");
    if (p == 0) throw std::runtime_error(path + ": no columns");

    if (names.empty()) {
        for (size_t j = 1; j <= p; ++j) names.push_back("v" + std::to_string(j));
    }
    std::set<std::string> uniq(names.begin(), names.end());
    if (uniq.size() != names.size())
        throw std::runtime_error(path + ": duplicate column names in header");

    DataMatrix out;
    out.column_names = std::move(names);
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(p));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < p; ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

std::vector<std::string> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto s = strip(line);
        if (!s.empty()) out.push_back(s);
    }
    if (out.empty()) throw std::runtime_error(path + ": no labels");
    return out;
}

VectorXd column_means(const MatrixXd& x) {
    return x.colwise().mean();
}

VectorXd column_sds(const MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    MatrixXd c = x.rowwise() - x.colwise().mean();
    return (c.array().square().colwise().sum() / n).sqrt();
}

MatrixXd sample_covariance(const MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    MatrixXd c = x.rowwise() - x.colwise().mean();
    MatrixXd cov = c.transpose() * c / n;
    return (cov + cov.transpose()) / 2.0;
}

namespace {

CenteredDecomposition decompose(const MatrixXd& values,
                                const VectorXd& mean) {
    CenteredDecomposition d;
    d.mean = mean;
    d.centered = values.rowwise() - mean.transpose();

    Eigen::BDCSVD<MatrixXd> svd(d.centered,
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double lead = sv.size() ? sv(0) : 0.0;
    if (lead <= 0.0) throw std::runtime_error("degenerate data: all rows identical");

    const double cut = lead * std::max(values.rows(), values.cols()) *
                       std::numeric_limits<double>::epsilon();
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;

    d.rank = r;
    d.singular_values = sv.head(r);
    d.left_vectors = svd.matrixU().leftCols(r);
    d.right_vectors = svd.matrixV().leftCols(r);

    for (int j = 0; j < r; ++j) {
        Eigen::Index imax;
        d.right_vectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (d.right_vectors(imax, j) < 0.0) {
            d.right_vectors.col(j) = -d.right_vectors.col(j);
            d.left_vectors.col(j) = -d.left_vectors.col(j);
        }
    }
    return d;
}

} // namespace

CenteredDecomposition center_decompose(const DataMatrix& x) {
    return decompose(x.values, column_means(x.values));
}

ScaledDecomposition scale_decompose(const DataMatrix& x) {
    VectorXd sds = column_sds(x.values);
    for (Eigen::Index j = 0; j < sds.size(); ++j) {
        if (!(sds(j) > 0.0)) {
            throw std::runtime_error("zero-variance column '" +
                                     x.column_names[static_cast<size_t>(j)] +
                                     "' cannot be scaled");
        }
    }
    MatrixXd scaled = x.values.array().rowwise() / sds.transpose().array();
    ScaledDecomposition d;
    static_cast<CenteredDecomposition&>(d) =
        decompose(scaled, column_means(scaled));
    d.scale = sds;
    return d;
}

MatrixXd standardized(const MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    MatrixXd c = x.rowwise() - x.colwise().mean();
    VectorXd sd = (c.array().square().colwise().sum() / (n - 1.0)).sqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (!(sd(j) > 0.0))
            throw std::runtime_error("zero-variance column " + std::to_string(j + 1));
    }
    return c.array().rowwise() / sd.transpose().array();
}

} // namespace mbc
