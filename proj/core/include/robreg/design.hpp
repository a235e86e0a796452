#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robreg/csv.hpp"

namespace robreg {

/// Response vector and full-rank design matrix. Construction validates
/// n >= p >= 1, finiteness and full column rank.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_labels,
          std::vector<std::string> row_ids);
  /// Row ids default to "1".."n", labels to "x1".."xp".
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd X);

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const std::vector<std::string>& column_labels() const { return column_labels_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

  /// Index of a column label; throws DataError if absent.
  Eigen::Index column_index(const std::string& label) const;
  /// Index of a row id; throws DataError if absent.
  Eigen::Index row_index(const std::string& id) const;

  /// Same design with a different response (length must match).
  Dataset with_response(Eigen::VectorXd y) const;
  /// Drops the given rows; the rank is re-checked (DataError on loss).
  Dataset without_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  std::vector<std::string> column_labels_;
  std::vector<std::string> row_ids_;
};

struct CategoricalColumn {
  std::string column;
  /// Declared level set in dummy order. Empty: the distinct values found in
  /// the data, sorted numerically when all of them parse as numbers.
  std::vector<std::string> levels;
  /// Dropped level; defaults to the first level.
  std::optional<std::string> reference;
};

struct DesignSpec {
  std::string response;
  bool log_response = false;
  bool intercept = true;
  std::vector<std::string> numeric_columns;
  std::vector<CategoricalColumn> categorical_columns;
  /// Columns whose values form each row id ("AY2_DY5"); empty: "1".."n".
  std::vector<std::string> id_columns;
};

/// One-hot expands categoricals (reference level dropped) and orders
/// columns as intercept, numerics, dummies in level order. Dummy labels are
/// "<column>=<level>".
///
/// Throws DataError on an unseen level, a non-positive response under the
/// log transform, or a rank-deficient result.
Dataset build_design(const Table& records, const DesignSpec& spec);

}  // namespace robreg
