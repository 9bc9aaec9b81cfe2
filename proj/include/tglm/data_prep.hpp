#pragma once

#include <Eigen/Dense>

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tglm {

enum class ColumnKind { numeric, categorical, binary };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

struct Column {
  std::string name{};
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> text;  // raw token, empty when missing
  std::vector<double> value;      // parsed number, NaN when missing or non-numeric
  std::vector<bool> missing;

  bool has_missing() const;
  /// Distinct observed tokens, sorted.
  std::vector<std::string> levels() const;
};

/// Parsed tabular data. Column order is the order of the header row.
struct DataTable {
  std::vector<Column> columns;
  std::size_t n_rows = 0;
  std::string outcome;
  std::optional<std::string> trials;

  const Column* find(const std::string& name) const;
  const Column& at(const std::string& name) const;

  /// Outcome successes (or responses) as numbers. Throws if missing.
  Eigen::VectorXd outcome_values() const;
  /// Binomial denominators, all ones without a trials column.
  Eigen::VectorXd trial_counts() const;

  /// Rows selected by index, in the given order.
  DataTable subset(const std::vector<std::size_t>& rows) const;
};

struct IngestOptions {
  std::string outcome;                 // empty: no outcome (prediction input)
  std::optional<std::string> trials;
  std::map<std::string, ColumnKind> kind_overrides;
};

DataTable ingest_table(std::istream& source, const IngestOptions& options);
DataTable ingest_table_file(const std::string& path, const IngestOptions& options);

enum class TermKind { intercept, centered_binary, scaled_numeric, dummy, missing_indicator };

const char* to_string(TermKind kind);

/// One design-matrix column and the constants that produce it.
///
/// centered_binary: value = [x == upper] - offset, `level` holds the upper
///   token and `reference` the lower one.
/// scaled_numeric: value = (x - center) / half_spread; `sd` is the sample
///   standard deviation of the training column.
/// dummy: value = [x == level].
/// missing_indicator: value = [x is missing].
struct Term {
  TermKind kind = TermKind::intercept;
  std::string name{};
  std::string source{};
  std::string level{};
  std::string reference{};
  double offset = 0.0;
  double center = 0.0;
  double half_spread = 1.0;
  double sd = 0.0;
  bool numeric_levels = false;  // binary levels compared as numbers

  bool operator==(const Term&) const = default;
};

struct OutcomeTransform {
  double center = 0.0;
  double scale = 1.0;  // y_std = (y - center) / scale

  bool operator==(const OutcomeTransform&) const = default;
};

struct RecipeOptions {
  bool standardize = true;
  bool add_missing_indicators = true;
  bool intercept = true;
  /// Rescale the outcome to mean 0, sd 0.5 (linear regression).
  bool standardize_outcome = false;
  /// Skip constant numeric and single-level categorical columns instead of
  /// failing. Used when recipes are rebuilt on cross-validation folds.
  bool skip_degenerate = false;
};

struct DesignRecipe {
  static constexpr int kVersion = 1;

  std::vector<Term> terms;
  std::optional<OutcomeTransform> outcome_transform;
  bool standardized = true;

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> intercept_index() const;
  std::vector<std::string> predictor_names() const;
  /// Source columns the recipe reads, in first-use order.
  std::vector<std::string> sources() const;

  bool operator==(const DesignRecipe&) const = default;
};

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> predictor_names;
  std::optional<std::size_t> intercept_index;
};

DesignRecipe build_recipe(const DataTable& table, const RecipeOptions& options = {});

/// Applies frozen constants. Unseen categorical levels produce all-zero dummy
/// rows and one warning per column.
DesignMatrix apply_recipe(const DesignRecipe& recipe, const DataTable& table,
                          std::vector<std::string>* warnings = nullptr);

/// Same terms with no centering or scaling: the raw-scale counterpart of
/// apply_recipe. Missing numeric cells take the training center.
DesignMatrix apply_recipe_raw(const DesignRecipe& recipe, const DataTable& table);

/// Outcome on the scale used for fitting (identity unless the recipe carries
/// an outcome transform).
Eigen::VectorXd transform_outcome(const DesignRecipe& recipe, const Eigen::VectorXd& y);

struct RawCoefficients {
  Eigen::VectorXd beta;
  Eigen::MatrixXd V;
};

/// Maps standardized-scale coefficients back to raw inputs so that
/// apply_recipe_raw(...) * beta_raw == apply_recipe(...) * beta_std, with the
/// outcome transform (if any) undone as well.
RawCoefficients unstandardize_coefficients(const DesignRecipe& recipe,
                                           const Eigen::VectorXd& beta_std,
                                           const Eigen::MatrixXd& V_std);

}  // namespace tglm
