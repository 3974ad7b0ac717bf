#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "epso/core.hpp"

namespace epso::data {

/// Labeled table: O observations (rows) by F features (columns), C classes.
struct Dataset {
  Matrix features;
  std::vector<int> labels;               // dense class ids in [0, class_count)
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // class_names[id]
  std::string name;

  Index observations() const { return features.rows(); }
  Index feature_count() const { return features.cols(); }
  int class_count() const { return static_cast<int>(class_names.size()); }

  // Throws DatasetError if shapes disagree, values are non-finite, C < 2, or a class is empty.
  void validate() const;
};

class ParseError : public DatasetError {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : DatasetError("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

struct FirstColumn {};
struct LastColumn {};
struct NamedColumn {
  std::string name;
};
using LabelColumn = std::variant<FirstColumn, LastColumn, NamedColumn>;

/// "first", "last", or a header name.
LabelColumn parse_label_column(const std::string& spec);

struct CsvLoad {
  Dataset dataset;
  std::size_t rejected_rows = 0;  // rows with empty cells or too few columns
};

/// Comma-separated, optional header (detected by a non-numeric first row).
/// Class labels are mapped to ids in order of first occurrence. Rows with
/// missing cells are dropped and counted; unparseable cells throw ParseError
/// with 1-based row and column.
CsvLoad load_csv_report(const std::filesystem::path& path, const LabelColumn& label);

/// load_csv_report, warning on stderr if rows were dropped.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label);

/// Each column mapped to [0, 1] by its own min and max; constant columns become 0.
Dataset normalize_minmax(const Dataset& d);

using Fold = std::vector<std::size_t>;

/// k disjoint, stratified folds covering every row. Within each class rows are
/// shuffled by `seed` and dealt round-robin, continuing across classes, so
/// per-class counts differ by at most one between folds. When some class has
/// fewer than k rows (and k < O), k drops to the smallest class size with a
/// warning. k == O yields leave-one-out folds.
std::vector<Fold> stratified_folds(const Dataset& d, std::size_t k, std::uint64_t seed);

/// C * F / O.
double complexity_index(const Dataset& d);
double complexity_index(int classes, Index features, Index observations);

/// Gaussian noise features plus n_informative features whose class means are
/// spread over [-1.5, 1.5]. Labels cycle through classes. The informative
/// indices are written into the name, e.g. "synthetic[informative=3,17]".
Dataset synth_dataset(std::size_t n_samples, std::size_t n_features, std::size_t n_informative,
                      int class_count, std::uint64_t seed);

/// Recovers the informative indices from a synth_dataset name.
std::vector<std::size_t> informative_features(const std::string& name);

}  // namespace epso::data
