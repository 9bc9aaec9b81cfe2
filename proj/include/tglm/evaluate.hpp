#pragma once

#include "tglm/data_prep.hpp"
#include "tglm/glm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tglm {

inline constexpr double kProbabilityFloor = 1e-12;

/// -log p_y with p_y clamped to [1e-12, 1].
double log_score(double p_y);

/// (1 - p_y)^2 / 2.
double brier_score(double p_y);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Seeded Fisher-Yates permutation dealt round-robin into k folds.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct PriorGridPoint {
  enum class Kind { t, flat, bbr };

  Kind kind = Kind::t;
  double df = 1.0;
  double scale = 2.5;

  static PriorGridPoint student(double df, double scale) { return {Kind::t, df, scale}; }
  static PriorGridPoint flat_prior() { return {Kind::flat, kInf, kInf}; }
  /// Gaussian prior with sd sqrt(bbr_scale_heuristic) from the training fold.
  static PriorGridPoint bbr() { return {Kind::bbr, kInf, 0.0}; }

  std::string df_label() const;
  std::string scale_label() const;
  std::string label() const;

  bool operator==(const PriorGridPoint&) const = default;
};

/// Parses "1:0.75,7:2.5,inf:10,flat,bbr".
std::vector<PriorGridPoint> parse_grid(const std::string& spec);
std::vector<PriorGridPoint> default_grid();

/// Intercept prior held fixed across grid points.
inline constexpr double kGridInterceptScale = 10.0;

struct FoldScore {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  double mean_log_score = 0.0;
  double mean_brier_score = 0.0;
  int fit_failures = 0;
};

struct GridScore {
  PriorGridPoint point;
  std::vector<FoldScore> folds;
  std::size_t n_test = 0;
  double mean_log_score = 0.0;    // pooled over all test rows
  double mean_brier_score = 0.0;
  int fit_failures = 0;
};

struct ScoreReport {
  std::string dataset;
  std::vector<GridScore> grid;

  const GridScore& best_by_log_score() const;
};

struct CvOptions {
  std::size_t k = 5;
  std::uint64_t seed = 1;
  FitControls controls;
};

/// k-fold cross-validated log and Brier scores of logistic fits, one per grid
/// point. Recipes are rebuilt on each training split.
ScoreReport cross_validate(const DataTable& table, const std::vector<PriorGridPoint>& grid,
                           const CvOptions& options);

/// Across-dataset summary of one grid point.
struct CorpusScore {
  PriorGridPoint point;
  double equal_weight_log_score = 0.0;
  double equal_weight_brier_score = 0.0;
  double size_weighted_log_score = 0.0;
  double size_weighted_brier_score = 0.0;
  int fit_failures = 0;
};

/// Reports must share the same grid.
std::vector<CorpusScore> aggregate_corpus(const std::vector<ScoreReport>& reports);

/// Number of columns divided by the mean squared row norm.
double bbr_scale_heuristic(const Eigen::MatrixXd& X);

/// Per-fold rows followed by one "pooled" row per grid point. Columns:
/// nu,scale,fold,n_test,mean_log_score,mean_brier_score,fit_failures
std::string score_report_csv(const ScoreReport& report);

/// score_report_csv for one report; with several, each row gains a leading
/// dataset column.
std::string score_reports_csv(const std::vector<ScoreReport>& reports);

/// dataset,aggregation,nu,scale,n_test,mean_log_score,mean_brier_score,fit_failures
std::string corpus_summary_csv(const std::vector<ScoreReport>& reports);

}  // namespace tglm
