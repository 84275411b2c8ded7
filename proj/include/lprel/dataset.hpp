#ifndef LPREL_DATASET_HPP
#define LPREL_DATASET_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace lprel {

/// Paired records (covariate row x_i, score z_i), plus an optional
/// simulation truth column of effect sizes. Immutable after construction
/// (validate() is called by every producer) and safe to share across tasks.
struct Dataset {
    Eigen::MatrixXd x;                      // N x p covariates
    Eigen::VectorXd z;                      // N scores
    std::optional<Eigen::VectorXd> truth;   // N effect sizes, when known
    std::vector<std::string> labels;        // optional row identifiers
    std::vector<std::string> covariate_names;

    Eigen::Index n() const { return z.size(); }
    Eigen::Index p() const { return x.cols(); }

    /// Throws data_error unless N >= 2, shapes agree, and all entries are
    /// finite.
    void validate() const;
};

struct CsvSchema {
    std::string z_column = "z";
    std::vector<std::string> covariate_columns;  // empty = all other numeric
    std::string truth_column = "theta";
    std::string label_column;  // empty = none
};

/// Reads an RFC-4180-style CSV (header row, UTF-8, '.' decimal separator)
/// into a Dataset, preserving row order. Parse failures report the
/// offending row and column.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

/// Writes a dataset as CSV: covariates, then z, then theta when present.
void write_csv(const std::string& path, const Dataset& data);

}  // namespace lprel

#endif  // LPREL_DATASET_HPP
