// Acceptance checks. Prints one PASS/FAIL line per criterion; with an
// argument (e.g. "A4") runs only that one. Exit status is nonzero if any
// selected criterion fails.

#include "helpers.hpp"
#include "oracles.hpp"

#include "tglm/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace tglm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome bioassay_bayes() {
  const auto t = testing::bioassay();
  const auto t0 = Clock::now();
  const auto f = testing::fit_table(t);
  const double secs = seconds_since(t0);
  const double b = f.fit.beta(1), se = f.fit.std_errors()(1);
  const bool ok = f.fit.converged && std::abs(b - 5.4) <= 0.15 && std::abs(se - 2.2) <= 0.15 && secs < 0.1;
  return {ok, fmt("slope %.4f (want 5.4 +/- 0.15), se %.4f (want 2.2 +/- 0.15), %.4f s (limit 0.1)", b, se, secs)};
}

Outcome bioassay_mle() {
  const auto t = testing::bioassay();
  const auto flat = testing::flat_prior(2);
  const auto f = testing::fit_table(t, &flat);
  const double b = f.fit.beta(1), se = f.fit.std_errors()(1);
  const bool ok = f.fit.converged && std::abs(b - 10.2) <= 0.15 && std::abs(se - 6.4) <= 0.15;
  return {ok, fmt("slope %.4f (want 10.2 +/- 0.15), se %.4f (want 6.4 +/- 0.15)", b, se)};
}

Outcome second_dose_prediction() {
  const auto t = testing::bioassay();
  const auto f = testing::fit_table(t);
  const double p = predict(f.fit, f.recipe, t, PredictScale::response)(1);
  return {std::abs(p - 0.27) <= 0.01, fmt("predicted probability %.4f at log dose -0.30 (want 0.27 +/- 0.01)", p)};
}

Outcome separation_robustness() {
  std::mt19937_64 rng(4242);
  const auto t0 = Clock::now();
  int bad_default = 0, bad_flat = 0;
  double worst_beta = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = oracle::separated_dataset(rng);
    const auto J = static_cast<std::size_t>(d.X.cols());
    const Eigen::VectorXd n = Eigen::VectorXd::Ones(d.X.rows());
    PriorSpec prior(J, CoefPrior{});
    prior[0].scale = 10.0;
    const auto f = fit(d.X, d.y, n, Family::logistic, prior);
    worst_beta = std::max(worst_beta, f.beta.cwiseAbs().maxCoeff());
    if (!f.converged || !(f.beta.cwiseAbs().maxCoeff() < 15.0) || !f.std_errors().allFinite()) ++bad_default;
    try {
      const auto m = fit(d.X, d.y, n, Family::logistic, testing::flat_prior(J));
      if (m.converged && !(m.beta.cwiseAbs().maxCoeff() > 50.0)) ++bad_flat;
    } catch (const FitError&) {
      // no estimate: counts as failing to converge
    }
  }
  const double secs = seconds_since(t0);
  return {bad_default == 0 && bad_flat == 0 && secs < 5.0,
          fmt("default prior: %d/20 violations (max |beta| %.3f < 15); flat prior sane on %d/20; %.3f s (limit 5)",
              bad_default, worst_beta, bad_flat, secs)};
}

Outcome normal_prior_oracle() {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> jd(1, 3), nd(5, 40), bit(0, 1);
  std::normal_distribution<double> g;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int nonconverged = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int J = jd(rng), n = nd(rng);
    const double s = bit(rng) ? 1.0 : 2.5;
    Eigen::MatrixXd X(n, J);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < J; ++j) X(i, j) = g(rng);
      y(i) = bit(rng);
    }
    const Eigen::VectorXd trials = Eigen::VectorXd::Ones(n);
    const auto f = fit(X, y, trials, Family::logistic, PriorSpec(J, CoefPrior{0.0, s, kInf}));
    if (!f.converged) ++nonconverged;
    const auto ref = oracle::normal_prior_mode(X, y, trials, std::vector<double>(J, s));
    for (int j = 0; j < J; ++j)
      worst = std::max(worst, std::abs(f.beta(j) - static_cast<double>(ref[static_cast<std::size_t>(j)])));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && nonconverged == 0 && secs < 30.0,
          fmt("max |beta - optimizer| %.3g over 50 problems (want < 1e-4), %d nonconverged, %.2f s (limit 30)", worst,
              nonconverged, secs)};
}

Outcome cauchy_grid_oracle() {
  std::mt19937_64 rng(6174);
  std::uniform_int_distribution<int> nd(10, 40);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0), bd(-3.0, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = nd(rng);
    const double b = bd(rng);
    const bool separated = rep % 4 == 0;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = g(rng) * 0.5;
      y(i) = separated ? (X(i, 0) > 0) : (u(rng) < 1.0 / (1.0 + std::exp(-b * X(i, 0))));
    }
    const Eigen::VectorXd trials = Eigen::VectorXd::Ones(n);
    const auto f = fit(X, y, trials, Family::logistic, {{0.0, 2.5, 1.0}});
    worst = std::max(worst, std::abs(f.beta(0) - oracle::cauchy_grid_mode(X.col(0), y, trials, 2.5)));
  }
  return {worst <= 0.1, fmt("max |beta - grid maximizer| %.4f over 20 problems (want <= 0.1)", worst)};
}

Outcome em_algebra() {
  std::mt19937_64 rng(8128);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> pos(0.01, 20.0);
  int mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double beta = g(rng) * 5.0, mu = g(rng), v = pos(rng) * (rep % 10 == 0 ? 0.0 : 1.0);
    const double s = pos(rng), nu = pos(rng);
    const double want = ((beta - mu) * (beta - mu) + v + nu * s * s) / (1.0 + nu);
    if (em_sigma_update(beta, v, {mu, s, nu}) != want) ++mismatches;
  }
  return {mismatches == 0, fmt("%d/1000 inputs differ from the reference formula", mismatches)};
}

Outcome scoring_propriety() {
  int misplaced = 0, out_of_bounds = 0;
  for (int qi = 1; qi <= 9; ++qi) {
    const double q = qi / 10.0;
    int best_log = 0, best_brier = 0;
    double min_log = kInf, min_brier = kInf;
    for (int k = 0; k <= 1000; ++k) {
      const double p = k / 1000.0;
      const double el = q * log_score(p) + (1 - q) * log_score(1 - p);
      const double eb = q * brier_score(p) + (1 - q) * brier_score(1 - p);
      if (el < min_log) min_log = el, best_log = k;
      if (eb < min_brier) min_brier = eb, best_brier = k;
      if (brier_score(p) < 0.0 || brier_score(p) > 0.5) ++out_of_bounds;
    }
    if (best_log != qi * 100) ++misplaced;
    if (best_brier != qi * 100) ++misplaced;
  }
  return {misplaced == 0 && out_of_bounds == 0,
          fmt("%d of 18 expected-score minima off p = q; %d Brier values outside [0, 0.5]", misplaced, out_of_bounds)};
}

Outcome corpus_ordering() {
  const auto t0 = Clock::now();
  std::vector<ScoreReport> reports;
  for (const char* name : {"moderate.csv", "sparse.csv", "separable.csv"}) {
    IngestOptions opt;
    opt.outcome = "y";
    auto r = cross_validate(ingest_table_file(testing::data_path(std::string("corpus/") + name), opt), default_grid(),
                            CvOptions{});
    r.dataset = name;
    reports.push_back(std::move(r));
  }
  const auto corpus = aggregate_corpus(reports);
  const double secs = seconds_since(t0);
  double cauchy = kInf, flat = kInf, best_10 = kInf, best_small = kInf;
  std::string best_small_label;
  for (const auto& c : corpus) {
    const auto& p = c.point;
    const double s = c.equal_weight_log_score;
    if (p.kind == PriorGridPoint::Kind::flat) flat = s;
    if (p.kind != PriorGridPoint::Kind::t) continue;
    if (p.df == 1.0 && p.scale == 2.5) cauchy = s;
    if (p.scale == 10.0) best_10 = std::min(best_10, s);
    if (p.scale < 10.0 && s < best_small) best_small = s, best_small_label = p.label();
  }
  return {cauchy < flat && best_small < best_10 && secs < 60.0,
          fmt("mean log score: Cauchy 2.5 %.4f vs flat %.4f; best finite %s %.4f vs best scale-10 %.4f; %.2f s "
              "(limit 60)",
              cauchy, flat, best_small_label.c_str(), best_small, best_10, secs)};
}

Outcome invariance_suite() {
  const std::string filter =
      "P2*,P3*,P4*,P5*,P6*,P7*,recipe idempotence,scale invariance*,dummy-coding property*,"
      "recipe building is deterministic,standardized predictors*,agreement with*,solution invariants*,"
      "weight scaling*,prior rows*";
  const std::string base = "'" + std::string(TGLM_UNIT_TESTS_PATH) + "' --test-case='" + filter + "'";
  int selected = 0;
  if (FILE* p = popen((base + " --count --no-version").c_str(), "r")) {
    char line[256];
    while (std::fgets(line, sizeof line, p))
      if (const char* c = std::strstr(line, "filters: ")) selected = std::atoi(c + 9);
    pclose(p);
  }
  const auto t0 = Clock::now();
  const int status = std::system((base + " --minimal --no-version > /dev/null 2>&1").c_str());
  const double secs = seconds_since(t0);
  return {status == 0 && selected == 15 && secs < 60.0,
          fmt("%d/15 property cases selected, exit status %d, %.2f s (limit 60)", selected, status, secs)};
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"A1", "bioassay, default prior", bioassay_bayes},
      {"A2", "bioassay, flat prior", bioassay_mle},
      {"A3", "bioassay, second-dose prediction", second_dose_prediction},
      {"A4", "separation robustness", separation_robustness},
      {"A5", "normal prior vs numerical optimizer", normal_prior_oracle},
      {"A6", "Cauchy prior vs grid search", cauchy_grid_oracle},
      {"A7", "scale update algebra", em_algebra},
      {"A8", "scoring propriety and bounds", scoring_propriety},
      {"A9", "mini-corpus prior ordering", corpus_ordering},
      {"A10", "invariance suite", invariance_suite},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.id) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    if (!o.pass) ++failures;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
