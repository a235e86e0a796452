#include "robreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "robreg/error.hpp"
#include "robreg/format.hpp"

namespace robreg {

namespace {

std::vector<std::string> default_labels(Eigen::Index p) {
  std::vector<std::string> labels;
  for (Eigen::Index j = 0; j < p; ++j) labels.push_back("x" + std::to_string(j + 1));
  return labels;
}

std::vector<std::string> default_row_ids(Eigen::Index n) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i + 1));
  return ids;
}

std::vector<std::string> observed_levels(const std::vector<std::string>& values) {
  std::vector<std::string> levels(values.begin(), values.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const bool all_numeric = std::all_of(levels.begin(), levels.end(), [](const std::string& v) {
    try {
      parse_double(v);
      return true;
    } catch (const DataError&) {
      return false;
    }
  });
  if (all_numeric) {
    std::stable_sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
      return parse_double(a) < parse_double(b);
    });
  }
  return levels;
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_labels,
                 std::vector<std::string> row_ids)
    : y_(std::move(y)),
      X_(std::move(X)),
      column_labels_(std::move(column_labels)),
      row_ids_(std::move(row_ids)) {
  const Eigen::Index n = X_.rows();
  const Eigen::Index p = X_.cols();
  if (p < 1) throw DataError("design has no columns");
  if (n < p) {
    throw DataError("need at least as many observations (" + std::to_string(n) +
                    ") as coefficients (" + std::to_string(p) + ")");
  }
  if (y_.size() != n) throw DataError("response length does not match design rows");
  if (static_cast<Eigen::Index>(column_labels_.size()) != p) {
    throw DataError("column label count does not match design columns");
  }
  if (static_cast<Eigen::Index>(row_ids_.size()) != n) {
    throw DataError("row id count does not match design rows");
  }
  if (!y_.allFinite() || !X_.allFinite()) throw DataError("non-finite entry in data");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X_);
  if (qr.rank() < p) {
    throw DataError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                    " < " + std::to_string(p) + ")");
  }
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X)
    : Dataset(y, X, default_labels(X.cols()), default_row_ids(X.rows())) {}

Eigen::Index Dataset::column_index(const std::string& label) const {
  const auto it = std::find(column_labels_.begin(), column_labels_.end(), label);
  if (it == column_labels_.end()) throw DataError("no design column '" + label + "'");
  return static_cast<Eigen::Index>(it - column_labels_.begin());
}

Eigen::Index Dataset::row_index(const std::string& id) const {
  const auto it = std::find(row_ids_.begin(), row_ids_.end(), id);
  if (it == row_ids_.end()) throw DataError("no row with id '" + id + "'");
  return static_cast<Eigen::Index>(it - row_ids_.begin());
}

Dataset Dataset::with_response(Eigen::VectorXd y) const {
  return Dataset(std::move(y), X_, column_labels_, row_ids_);
}

Dataset Dataset::without_rows(const std::vector<Eigen::Index>& rows) const {
  const std::set<Eigen::Index> drop(rows.begin(), rows.end());
  for (const auto r : drop) {
    if (r < 0 || r >= n()) throw DataError("row index out of range");
  }
  const Eigen::Index keep = n() - static_cast<Eigen::Index>(drop.size());
  Eigen::VectorXd y(keep);
  Eigen::MatrixXd X(keep, p());
  std::vector<std::string> ids;
  Eigen::Index out = 0;
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (drop.count(i)) continue;
    y(out) = y_(i);
    X.row(out) = X_.row(i);
    ids.push_back(row_ids_[static_cast<std::size_t>(i)]);
    ++out;
  }
  return Dataset(std::move(y), std::move(X), column_labels_, std::move(ids));
}

Dataset build_design(const Table& records, const DesignSpec& spec) {
  const auto n = static_cast<Eigen::Index>(records.num_rows());
  if (spec.response.empty()) throw DataError("design has no response column");

  std::vector<double> response = records.numeric(spec.response);
  if (spec.log_response) {
    for (std::size_t i = 0; i < response.size(); ++i) {
      if (!(response[i] > 0.0)) {
        throw DataError("row " + std::to_string(i + 1) + ": response '" + spec.response +
                        "' must be positive under the log transform");
      }
      response[i] = std::log(response[i]);
    }
  }

  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;
  if (spec.intercept) {
    labels.emplace_back("(Intercept)");
    columns.emplace_back(static_cast<std::size_t>(n), 1.0);
  }
  for (const auto& name : spec.numeric_columns) {
    labels.push_back(name);
    columns.push_back(records.numeric(name));
  }
  for (const auto& cat : spec.categorical_columns) {
    const auto values = records.text(cat.column);
    std::vector<std::string> levels = cat.levels.empty() ? observed_levels(values) : cat.levels;
    if (levels.empty()) throw DataError("categorical '" + cat.column + "' has no levels");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (std::find(levels.begin(), levels.end(), values[i]) == levels.end()) {
        throw DataError("row " + std::to_string(i + 1) + ": unseen level '" + values[i] +
                        "' for categorical '" + cat.column + "'");
      }
    }
    const std::string reference = cat.reference.value_or(levels.front());
    if (std::find(levels.begin(), levels.end(), reference) == levels.end()) {
      throw DataError("reference level '" + reference + "' is not a level of '" + cat.column +
                      "'");
    }
    for (const auto& level : levels) {
      if (level == reference) continue;
      labels.push_back(cat.column + "=" + level);
      std::vector<double> dummy(values.size(), 0.0);
      for (std::size_t i = 0; i < values.size(); ++i) dummy[i] = values[i] == level ? 1.0 : 0.0;
      columns.push_back(std::move(dummy));
    }
  }

  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    X.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(columns[j].data(), n);
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response.data(), n);

  std::vector<std::string> ids;
  if (spec.id_columns.empty()) {
    ids = default_row_ids(n);
  } else {
    std::vector<std::vector<std::string>> parts;
    for (const auto& c : spec.id_columns) parts.push_back(records.text(c));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::string id;
      for (std::size_t c = 0; c < parts.size(); ++c) {
        if (c) id += '_';
        id += spec.id_columns[c] + parts[c][static_cast<std::size_t>(i)];
      }
      ids.push_back(std::move(id));
    }
  }
  return Dataset(std::move(y), std::move(X), std::move(labels), std::move(ids));
}

}  // namespace robreg
