// Command-line front end: fit, predict and cross-validate through the C API.

#include "tglm/tglm.h"

#include "CLI11.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(tglm_status status) {
  if (status == TGLM_OK) return;
  const std::string msg = tglm_last_error();
  if (status == TGLM_ERR_INVALID_ARGUMENT) throw UsageError(msg);
  throw DataError(msg);
}

void flush_warnings() {
  for (size_t i = 0; i < tglm_warning_count(); ++i) std::cerr << "warning: " << tglm_warning(i) << '\n';
}

struct TableDeleter {
  void operator()(tglm_table* t) const { tglm_table_free(t); }
};
struct ModelDeleter {
  void operator()(tglm_model* m) const { tglm_model_free(m); }
};
struct ReportDeleter {
  void operator()(tglm_cv_report* r) const { tglm_cv_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { tglm_string_free(s); }
};
using TablePtr = std::unique_ptr<tglm_table, TableDeleter>;
using ModelPtr = std::unique_ptr<tglm_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<tglm_cv_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_scale(const std::string& s, const char* flag) {
  if (s == "inf" || s == "Inf" || s == "infinity") return INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0) || !std::isfinite(v))
    throw UsageError(std::string(flag) + " expects a positive number or 'inf', got '" + s + "'");
  return v;
}

std::string join_kinds(const std::vector<std::string>& kinds) {
  std::string out;
  for (const auto& k : kinds) out += (out.empty() ? "" : ";") + k;
  return out;
}

TablePtr read_table(const std::string& path, const std::string& outcome, const std::string& trials,
                    const std::vector<std::string>& kinds) {
  const std::string kind_spec = join_kinds(kinds);
  tglm_ingest_options opts{outcome.empty() ? nullptr : outcome.c_str(), trials.empty() ? nullptr : trials.c_str(),
                           kind_spec.empty() ? nullptr : kind_spec.c_str()};
  tglm_table* raw = nullptr;
  check(tglm_table_read_file(path.c_str(), &opts, &raw));
  return TablePtr(raw);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// stdout when path is empty or "-", else temp file + rename.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out.flush()) throw DataError("cannot write '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot move output into place at '" + path + "'");
  }
}

struct FitArgs {
  std::string input, outcome, trials, family = "logistic", format = "table", output;
  std::string prior_scale = "2.5", prior_df = "1", intercept_scale = "10", intercept_df = "1";
  std::string em_variance = "plug_in";
  std::vector<std::string> kinds;
  bool no_standardize = false, no_missing_indicators = false, no_intercept = false;
  int max_iter = 100;
  double tol = 1e-8;
};

struct PredictArgs {
  std::string model, input, output;
  std::vector<std::string> kinds;
  bool link_scale = false;
};

struct CvArgs {
  std::vector<std::string> inputs;
  std::string outcome, grid, output, summary;
  std::vector<std::string> kinds;
  int folds = 5;
  std::uint64_t seed = 1;
};

int run_fit(const FitArgs& a) {
  tglm_fit_options o;
  tglm_fit_options_init(&o);
  if (a.family == "logistic")
    o.family = TGLM_FAMILY_LOGISTIC;
  else if (a.family == "linear")
    o.family = TGLM_FAMILY_LINEAR;
  else if (a.family == "poisson")
    o.family = TGLM_FAMILY_POISSON;
  else
    throw UsageError("unknown family '" + a.family + "'");
  o.standardize = a.no_standardize ? 0 : 1;
  o.add_missing_indicators = a.no_missing_indicators ? 0 : 1;
  o.intercept = a.no_intercept ? 0 : 1;
  o.prior_scale = parse_scale(a.prior_scale, "--prior-scale");
  o.prior_df = parse_scale(a.prior_df, "--prior-df");
  o.intercept_scale = parse_scale(a.intercept_scale, "--intercept-scale");
  o.intercept_df = parse_scale(a.intercept_df, "--intercept-df");
  o.max_iter = a.max_iter;
  o.tol = a.tol;
  o.em_variance = a.em_variance == "posterior" ? TGLM_EM_POSTERIOR : TGLM_EM_PLUG_IN;

  TablePtr table = read_table(a.input, a.outcome, a.trials, a.kinds);
  tglm_model* raw = nullptr;
  const tglm_status st = tglm_fit(table.get(), &o, &raw);
  flush_warnings();
  check(st);
  ModelPtr model(raw);

  std::string content;
  if (a.format == "csv") {
    std::ostringstream out;
    out << "predictor,coef.est,coef.sd\n";
    for (size_t j = 0; j < tglm_model_coef_count(model.get()); ++j) {
      const char* name = nullptr;
      double est = 0.0, se = 0.0;
      check(tglm_model_coef(model.get(), j, &name, &est, &se));
      std::string n = name;
      if (n.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char c : n) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        n = q + "\"";
      }
      out << n << ',' << shortest(est) << ',' << shortest(se) << '\n';
    }
    content = out.str();
  } else {
    char* text = nullptr;
    check(tglm_model_render(model.get(), a.format == "json" ? TGLM_FORMAT_JSON : TGLM_FORMAT_TABLE, &text));
    content = StringPtr(text).get();
  }
  emit(a.output, content);
  return 0;
}

int run_predict(const PredictArgs& a) {
  const std::string json = read_file(a.model);
  tglm_model* raw_model = nullptr;
  check(tglm_model_from_json(json.data(), json.size(), &raw_model));
  ModelPtr model(raw_model);

  TablePtr table = read_table(a.input, "", "", a.kinds);
  std::vector<double> values(tglm_table_rows(table.get()));
  const tglm_status st =
      tglm_predict(model.get(), table.get(), a.link_scale ? TGLM_SCALE_LINK : TGLM_SCALE_RESPONSE, values.data(),
                   values.size());
  flush_warnings();
  check(st);

  std::ostringstream out;
  out << "row," << (a.link_scale ? "linear_predictor" : "prediction") << '\n';
  for (size_t i = 0; i < values.size(); ++i) out << (i + 1) << ',' << shortest(values[i]) << '\n';
  emit(a.output, out.str());
  return 0;
}

int run_cv(const CvArgs& a) {
  if (a.folds < 2) throw UsageError("--folds must be at least 2");
  std::vector<TablePtr> tables;
  std::vector<const tglm_table*> handles;
  std::vector<std::string> names;
  for (const auto& path : a.inputs) {
    tables.push_back(read_table(path, a.outcome, "", a.kinds));
    handles.push_back(tables.back().get());
    const auto slash = path.find_last_of('/');
    names.push_back(slash == std::string::npos ? path : path.substr(slash + 1));
  }
  std::vector<const char*> name_ptrs;
  for (const auto& n : names) name_ptrs.push_back(n.c_str());

  tglm_cv_report* raw = nullptr;
  const tglm_status st = tglm_cv_run(handles.data(), name_ptrs.data(), handles.size(),
                                     a.grid.empty() ? nullptr : a.grid.c_str(), static_cast<size_t>(a.folds), a.seed,
                                     &raw);
  flush_warnings();
  check(st);
  ReportPtr report(raw);

  char* csv = nullptr;
  check(tglm_cv_report_csv(report.get(), &csv));
  emit(a.output, StringPtr(csv).get());

  if (!a.summary.empty()) {
    char* summary = nullptr;
    check(tglm_cv_summary_csv(report.get(), &summary));
    emit(a.summary, StringPtr(summary).get());
  }

  char* label = nullptr;
  double best = 0.0;
  check(tglm_cv_best(report.get(), &label, &best));
  StringPtr owned(label);
  const std::string line = std::string("best prior by mean log score: ") + label + " (" + shortest(best) + ")\n";
  // Keep stdout clean when it carries the CSV.
  if (a.output.empty() || a.output == "-")
    std::cerr << line;
  else
    std::cout << line;
  return 0;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TGLM_SEED")) {
    std::uint64_t v = 0;
    const std::string s = env;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
    std::cerr << "warning: ignoring malformed TGLM_SEED '" << s << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression with weakly informative t priors"};
  app.require_subcommand(1, 1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a model and print its coefficients");
  fit->add_option("-i,--input", fa.input, "CSV input")->required();
  fit->add_option("-y,--outcome", fa.outcome, "Outcome column")->required();
  fit->add_option("--trials", fa.trials, "Binomial trials column");
  fit->add_option("--family", fa.family, "logistic, linear or poisson")
      ->check(CLI::IsMember({"logistic", "linear", "poisson"}));
  fit->add_option("--prior-scale", fa.prior_scale, "Prior scale for non-intercept terms ('inf' = flat)");
  fit->add_option("--prior-df", fa.prior_df, "Prior degrees of freedom ('inf' = normal)");
  fit->add_option("--intercept-scale", fa.intercept_scale, "Prior scale for the intercept");
  fit->add_option("--intercept-df", fa.intercept_df, "Prior degrees of freedom for the intercept");
  fit->add_flag("--no-standardize", fa.no_standardize, "Do not center and scale inputs");
  fit->add_flag("--no-missing-indicators", fa.no_missing_indicators, "Do not add missingness indicators");
  fit->add_flag("--no-intercept", fa.no_intercept, "Suppress the intercept");
  fit->add_option("--max-iter", fa.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  fit->add_option("--tol", fa.tol, "Relative convergence tolerance")->check(CLI::PositiveNumber);
  fit->add_option("--em-variance", fa.em_variance, "plug_in or posterior")
      ->check(CLI::IsMember({"plug_in", "posterior"}));
  fit->add_option("--kind", fa.kinds, "Column kind override, name=numeric|categorical|binary");
  fit->add_option("-f,--format", fa.format, "table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
  fit->add_option("-o,--output", fa.output, "Output path (default stdout)");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Apply a saved fit to new data");
  predict->add_option("-m,--model", pa.model, "Fit saved with --format json")->required();
  predict->add_option("-i,--input", pa.input, "CSV input")->required();
  predict->add_flag("--link-scale", pa.link_scale, "Emit linear predictors instead of responses");
  predict->add_option("--kind", pa.kinds, "Column kind override, name=kind");
  predict->add_option("-o,--output", pa.output, "Output path (default stdout)");

  CvArgs ca;
  ca.seed = default_seed();
  auto* cv = app.add_subcommand("cv", "Cross-validate a grid of priors");
  cv->add_option("-i,--input", ca.inputs, "CSV input (repeat for a corpus)")->required();
  cv->add_option("-y,--outcome", ca.outcome, "Binary outcome column")->required();
  cv->add_option("--folds", ca.folds, "Number of folds (>= 2)");
  cv->add_option("--seed", ca.seed, "Fold seed (default $TGLM_SEED or 1)");
  cv->add_option("--grid", ca.grid, "df:scale,... plus 'flat' and 'bbr'");
  cv->add_option("--kind", ca.kinds, "Column kind override, name=kind");
  cv->add_option("-o,--output", ca.output, "Per-fold score CSV (default stdout)");
  cv->add_option("--summary", ca.summary, "Pooled summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*fit) return run_fit(fa);
    if (*predict) return run_predict(pa);
    if (*cv) return run_cv(ca);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
