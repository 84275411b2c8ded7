#include "lprel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"

namespace lprel {

void Dataset::validate() const {
    if (z.size() < 2) throw data_error("dataset: need at least 2 rows");
    if (x.rows() != z.size())
        throw data_error("dataset: covariate rows (" + std::to_string(x.rows()) +
                         ") != score rows (" + std::to_string(z.size()) + ")");
    if (x.cols() < 1) throw data_error("dataset: need at least one covariate column");
    if (!z.allFinite() || !x.allFinite())
        throw data_error("dataset: non-finite entry in x or z");
    if (truth) {
        if (truth->size() != z.size()) throw data_error("dataset: truth length mismatch");
        if (!truth->allFinite()) throw data_error("dataset: non-finite truth entry");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != z.size())
        throw data_error("dataset: label count mismatch");
}

namespace {

// One CSV record, honoring quoted fields; may consume multiple physical
// lines when a quoted field contains newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') { field += '"'; in.get(); }
                else in_quotes = false;
            } else {
                if (c == '\n') ++line_no;
                field += static_cast<char>(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line_no;
            fields.push_back(std::move(field));
            return true;
        } else if (c != '\r') {
            field += static_cast<char>(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string s = trim(raw);
    if (s.empty())
        throw data_error("csv: empty cell at row " + std::to_string(row) + ", column '" + col + "'");
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw data_error("csv: non-numeric cell '" + s + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    }
    if (pos != s.size())
        throw data_error("csv: non-numeric cell '" + s + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("csv: cannot open '" + path + "'");

    std::size_t line_no = 1;
    std::vector<std::string> header;
    if (!read_record(in, header, line_no) || header.empty())
        throw data_error("csv: empty file '" + path + "'");
    for (auto& h : header) h = trim(h);

    auto find_col = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };

    const int z_col = find_col(schema.z_column);
    if (z_col < 0)
        throw data_error("csv: missing required column '" + schema.z_column + "' in '" + path + "'");
    const int truth_col = schema.truth_column.empty() ? -1 : find_col(schema.truth_column);
    const int label_col = schema.label_column.empty() ? -1 : find_col(schema.label_column);

    std::vector<int> x_cols;
    std::vector<std::string> x_names;
    if (!schema.covariate_columns.empty()) {
        for (const auto& name : schema.covariate_columns) {
            const int c = find_col(name);
            if (c < 0) throw data_error("csv: missing covariate column '" + name + "'");
            x_cols.push_back(c);
            x_names.push_back(name);
        }
    } else {
        for (int c = 0; c < static_cast<int>(header.size()); ++c) {
            if (c == z_col || c == truth_col || c == label_col) continue;
            x_cols.push_back(c);
            x_names.push_back(header[c]);
        }
    }
    if (x_cols.empty()) throw data_error("csv: no covariate columns found in '" + path + "'");

    std::vector<std::vector<double>> x_rows;
    std::vector<double> z_vals, truth_vals;
    std::vector<std::string> labels;
    std::vector<std::string> fields;
    std::size_t row = 1;
    while (read_record(in, fields, line_no)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        ++row;
        if (fields.size() != header.size())
            throw data_error("csv: ragged row " + std::to_string(row) + " (got " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()) + ")");
        std::vector<double> xr(x_cols.size());
        for (std::size_t k = 0; k < x_cols.size(); ++k)
            xr[k] = parse_cell(fields[x_cols[k]], row, x_names[k]);
        x_rows.push_back(std::move(xr));
        z_vals.push_back(parse_cell(fields[z_col], row, schema.z_column));
        if (truth_col >= 0)
            truth_vals.push_back(parse_cell(fields[truth_col], row, schema.truth_column));
        if (label_col >= 0) labels.push_back(trim(fields[label_col]));
    }
    if (z_vals.empty()) throw data_error("csv: no data rows in '" + path + "'");

    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(x_rows.size()), static_cast<Eigen::Index>(x_cols.size()));
    for (std::size_t i = 0; i < x_rows.size(); ++i)
        for (std::size_t k = 0; k < x_cols.size(); ++k)
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x_rows[i][k];
    out.z = Eigen::Map<Eigen::VectorXd>(z_vals.data(), static_cast<Eigen::Index>(z_vals.size()));
    if (truth_col >= 0)
        out.truth = Eigen::Map<Eigen::VectorXd>(truth_vals.data(),
                                                static_cast<Eigen::Index>(truth_vals.size()));
    out.labels = std::move(labels);
    out.covariate_names = std::move(x_names);
    out.validate();
    return out;
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("csv: cannot write '" + path + "'");
    for (Eigen::Index c = 0; c < data.p(); ++c) {
        const std::string name = c < static_cast<Eigen::Index>(data.covariate_names.size())
                                     ? data.covariate_names[c]
                                     : "x" + std::to_string(c + 1);
        out << name << ',';
    }
    out << 'z';
    if (data.truth) out << ",theta";
    out << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index c = 0; c < data.p(); ++c) out << format_double(data.x(i, c)) << ',';
        out << format_double(data.z[i]);
        if (data.truth) out << ',' << format_double((*data.truth)[i]);
        out << '\n';
    }
}

}  // namespace lprel
