#include "tglm/evaluate.hpp"

#include "tglm/csv.hpp"
#include "tglm/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace tglm {

double log_score(double p_y) { return -std::log(std::clamp(p_y, kProbabilityFloor, 1.0)); }

double brier_score(double p_y) {
  const double miss = 1.0 - std::clamp(p_y, 0.0, 1.0);
  return 0.5 * miss * miss;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) rows.push_back(i);
  return rows;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::invalid_argument, "cross-validation needs at least 2 folds");
  if (k > n)
    throw Error(ErrorKind::invalid_argument,
                "cannot split " + std::to_string(n) + " rows into " + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Explicit Fisher-Yates: std::shuffle is not specified bit-for-bit across
  // standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  FoldPlan plan{k, seed, std::vector<std::size_t>(n)};
  for (std::size_t r = 0; r < n; ++r) plan.assignment[perm[r]] = r % k;
  return plan;
}

std::string PriorGridPoint::df_label() const {
  switch (kind) {
    case Kind::flat: return "flat";
    case Kind::bbr: return "bbr";
    case Kind::t: return df == kInf ? "inf" : format_double(df);
  }
  return "?";
}

std::string PriorGridPoint::scale_label() const {
  switch (kind) {
    case Kind::flat: return "inf";
    case Kind::bbr: return "auto";
    case Kind::t: return format_double(scale);
  }
  return "?";
}

std::string PriorGridPoint::label() const {
  switch (kind) {
    case Kind::flat: return "flat";
    case Kind::bbr: return "bbr";
    case Kind::t: return df_label() + ":" + scale_label();
  }
  return "?";
}

namespace {

double parse_positive(const std::string& token, const std::string& what) {
  if (token == "inf") return kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorKind::invalid_argument, "invalid " + what + " '" + token + "' in prior grid");
  return v;
}

}  // namespace

std::vector<PriorGridPoint> parse_grid(const std::string& spec) {
  std::vector<PriorGridPoint> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    if (item == "flat") {
      grid.push_back(PriorGridPoint::flat_prior());
    } else if (item == "bbr") {
      grid.push_back(PriorGridPoint::bbr());
    } else {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw Error(ErrorKind::invalid_argument, "grid point '" + item + "' is not of the form df:scale");
      const double df = parse_positive(item.substr(0, colon), "degrees of freedom");
      const double scale = parse_positive(item.substr(colon + 1), "scale");
      grid.push_back(scale == kInf ? PriorGridPoint::flat_prior() : PriorGridPoint::student(df, scale));
    }
  }
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "prior grid is empty");
  return grid;
}

std::vector<PriorGridPoint> default_grid() {
  std::vector<PriorGridPoint> grid;
  for (double df : {1.0, 7.0, kInf})
    for (double scale : {0.75, 2.5, 10.0}) grid.push_back(PriorGridPoint::student(df, scale));
  grid.push_back(PriorGridPoint::flat_prior());
  return grid;
}

const GridScore& ScoreReport::best_by_log_score() const {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "score report is empty");
  auto best = grid.begin();
  for (auto it = grid.begin(); it != grid.end(); ++it)
    if (it->mean_log_score < best->mean_log_score) best = it;
  return *best;
}

double bbr_scale_heuristic(const Eigen::MatrixXd& X) {
  if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorKind::invalid_argument, "BBR heuristic needs a nonempty design");
  const double mean_norm2 = X.rowwise().squaredNorm().mean();
  if (!(mean_norm2 > 0.0)) throw Error(ErrorKind::data, "BBR heuristic is undefined for an all-zero design");
  return static_cast<double>(X.cols()) / mean_norm2;
}

namespace {

PriorSpec grid_prior(const PriorGridPoint& point, const DesignRecipe& recipe, const Eigen::MatrixXd& X) {
  switch (point.kind) {
    case PriorGridPoint::Kind::flat:
      return make_prior(recipe, kInf, kInf, kInf, kInf);
    case PriorGridPoint::Kind::t:
      return make_prior(recipe, point.scale, point.df, kGridInterceptScale, 1.0);
    case PriorGridPoint::Kind::bbr: {
      Eigen::MatrixXd slopes(X.rows(), 0);
      if (auto icpt = recipe.intercept_index()) {
        slopes.resize(X.rows(), X.cols() - 1);
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j)
          if (j != static_cast<Eigen::Index>(*icpt)) slopes.col(c++) = X.col(j);
      } else {
        slopes = X;
      }
      double sd = 1.0;
      if (slopes.cols() > 0 && slopes.squaredNorm() > 0.0) sd = std::sqrt(bbr_scale_heuristic(slopes));
      return make_prior(recipe, sd, kInf, kGridInterceptScale, 1.0);
    }
  }
  return {};
}

void check_binary_outcome(const DataTable& table) {
  if (table.trials) throw Error(ErrorKind::data, "cross-validation scores single binary outcomes; drop the trials column");
  const Eigen::VectorXd y = table.outcome_values();
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0)
      throw Error(ErrorKind::data, "outcome '" + table.outcome + "' must be binary (0/1); row " +
                                       std::to_string(i + 1) + " is " + format_double(y(i)));
}

}  // namespace

ScoreReport cross_validate(const DataTable& table, const std::vector<PriorGridPoint>& grid, const CvOptions& options) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "prior grid is empty");
  check_binary_outcome(table);
  const FoldPlan plan = make_folds(table.n_rows, options.k, options.seed);

  ScoreReport report;
  report.grid.resize(grid.size());
  std::vector<double> log_sum(grid.size(), 0.0), brier_sum(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) report.grid[g].point = grid[g];

  RecipeOptions ropts;
  ropts.standardize = true;
  ropts.skip_degenerate = true;

  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const DataTable train = table.subset(plan.train_rows(fold));
    const DataTable test = table.subset(plan.test_rows(fold));
    const DesignRecipe recipe = build_recipe(train, ropts);
    const Eigen::MatrixXd Xtr = apply_recipe(recipe, train).X;
    const Eigen::MatrixXd Xte = apply_recipe(recipe, test).X;
    const Eigen::VectorXd ytr = train.outcome_values();
    const Eigen::VectorXd yte = test.outcome_values();
    const Eigen::VectorXd ntr = Eigen::VectorXd::Ones(ytr.size());

    for (std::size_t g = 0; g < grid.size(); ++g) {
      const PriorSpec prior = grid_prior(grid[g], recipe, Xtr);
      Eigen::VectorXd beta;
      int failures = 0;
      try {
        FitResult fr = fit(Xtr, ytr, ntr, Family::logistic, prior, options.controls);
        beta = fr.beta;
        if (!fr.converged) failures = 1;
      } catch (const FitError& e) {
        beta = e.last_beta();
        failures = 1;
      }

      const Eigen::VectorXd eta = Xte * beta;
      FoldScore fs;
      fs.fold = fold;
      fs.n_test = static_cast<std::size_t>(yte.size());
      fs.fit_failures = failures;
      double ls = 0.0, bs = 0.0;
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = std::clamp(eta(i), -kEtaClamp, kEtaClamp);
        const double p_y = yte(i) == 1.0 ? 1.0 / (1.0 + std::exp(-e)) : 1.0 / (1.0 + std::exp(e));
        ls += log_score(p_y);
        bs += brier_score(p_y);
      }
      fs.mean_log_score = ls / static_cast<double>(fs.n_test);
      fs.mean_brier_score = bs / static_cast<double>(fs.n_test);
      log_sum[g] += ls;
      brier_sum[g] += bs;

      GridScore& gs = report.grid[g];
      gs.folds.push_back(fs);
      gs.n_test += fs.n_test;
      gs.fit_failures += failures;
    }
  }

  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridScore& gs = report.grid[g];
    gs.mean_log_score = log_sum[g] / static_cast<double>(gs.n_test);
    gs.mean_brier_score = brier_sum[g] / static_cast<double>(gs.n_test);
  }
  return report;
}

std::vector<CorpusScore> aggregate_corpus(const std::vector<ScoreReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::invalid_argument, "no reports to aggregate");
  const std::size_t G = reports.front().grid.size();
  for (const auto& r : reports) {
    if (r.grid.size() != G) throw Error(ErrorKind::invalid_argument, "reports were built on different grids");
    for (std::size_t g = 0; g < G; ++g)
      if (!(r.grid[g].point == reports.front().grid[g].point))
        throw Error(ErrorKind::invalid_argument, "reports were built on different grids");
  }

  std::vector<CorpusScore> out(G);
  for (std::size_t g = 0; g < G; ++g) {
    CorpusScore& cs = out[g];
    cs.point = reports.front().grid[g].point;
    double total_n = 0.0;
    for (const auto& r : reports) {
      const GridScore& gs = r.grid[g];
      const double n = static_cast<double>(gs.n_test);
      cs.equal_weight_log_score += gs.mean_log_score;
      cs.equal_weight_brier_score += gs.mean_brier_score;
      cs.size_weighted_log_score += n * gs.mean_log_score;
      cs.size_weighted_brier_score += n * gs.mean_brier_score;
      cs.fit_failures += gs.fit_failures;
      total_n += n;
    }
    const double D = static_cast<double>(reports.size());
    cs.equal_weight_log_score /= D;
    cs.equal_weight_brier_score /= D;
    cs.size_weighted_log_score /= total_n;
    cs.size_weighted_brier_score /= total_n;
  }
  return out;
}

std::string score_report_csv(const ScoreReport& report) {
  std::ostringstream out;
  out << "nu,scale,fold,n_test,mean_log_score,mean_brier_score,fit_failures\n";
  for (const auto& gs : report.grid)
    for (const auto& fs : gs.folds)
      out << gs.point.df_label() << ',' << gs.point.scale_label() << ',' << fs.fold << ',' << fs.n_test << ','
          << format_double(fs.mean_log_score) << ',' << format_double(fs.mean_brier_score) << ','
          << fs.fit_failures << '\n';
  for (const auto& gs : report.grid)
    out << gs.point.df_label() << ',' << gs.point.scale_label() << ",pooled," << gs.n_test << ','
        << format_double(gs.mean_log_score) << ',' << format_double(gs.mean_brier_score) << ',' << gs.fit_failures
        << '\n';
  return out.str();
}

std::string score_reports_csv(const std::vector<ScoreReport>& reports) {
  if (reports.size() == 1) return score_report_csv(reports.front());
  std::ostringstream out;
  bool header = true;
  for (const auto& r : reports) {
    std::istringstream lines(score_report_csv(r));
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
      if (first) {
        first = false;
        if (header) out << "dataset," << line << '\n';
        header = false;
        continue;
      }
      out << csv_escape(r.dataset) << ',' << line << '\n';
    }
  }
  return out.str();
}

std::string corpus_summary_csv(const std::vector<ScoreReport>& reports) {
  std::ostringstream out;
  out << "dataset,aggregation,nu,scale,n_test,mean_log_score,mean_brier_score,fit_failures\n";
  std::size_t total_n = 0;
  for (const auto& r : reports) {
    for (const auto& gs : r.grid)
      out << csv_escape(r.dataset) << ",pooled," << gs.point.df_label() << ',' << gs.point.scale_label() << ','
          << gs.n_test << ',' << format_double(gs.mean_log_score) << ',' << format_double(gs.mean_brier_score)
          << ',' << gs.fit_failures << '\n';
    if (!r.grid.empty()) total_n += r.grid.front().n_test;
  }
  if (reports.size() > 1) {
    for (const auto& cs : aggregate_corpus(reports)) {
      out << "corpus,equal_weight," << cs.point.df_label() << ',' << cs.point.scale_label() << ',' << total_n << ','
          << format_double(cs.equal_weight_log_score) << ',' << format_double(cs.equal_weight_brier_score) << ','
          << cs.fit_failures << '\n';
      out << "corpus,size_weighted," << cs.point.df_label() << ',' << cs.point.scale_label() << ',' << total_n
          << ',' << format_double(cs.size_weighted_log_score) << ',' << format_double(cs.size_weighted_brier_score)
          << ',' << cs.fit_failures << '\n';
    }
  }
  return out.str();
}

}  // namespace tglm
