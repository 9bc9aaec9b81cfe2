#include "tglm/tglm.h"

#include "tglm/data_prep.hpp"
#include "tglm/error.hpp"
#include "tglm/evaluate.hpp"
#include "tglm/glm.hpp"
#include "tglm/serialize.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

struct tglm_table {
  tglm::DataTable table;
};

struct tglm_model {
  tglm::SavedModel model;
  std::vector<std::string> names;
};

struct tglm_cv_report {
  std::vector<tglm::ScoreReport> reports;
};

namespace {

thread_local std::string g_last_error;
thread_local std::vector<std::string> g_warnings;

tglm_status status_for(tglm::ErrorKind kind) {
  switch (kind) {
    case tglm::ErrorKind::invalid_argument: return TGLM_ERR_INVALID_ARGUMENT;
    case tglm::ErrorKind::parse: return TGLM_ERR_PARSE;
    case tglm::ErrorKind::data: return TGLM_ERR_DATA;
    case tglm::ErrorKind::numeric: return TGLM_ERR_NUMERIC;
    case tglm::ErrorKind::version: return TGLM_ERR_VERSION;
  }
  return TGLM_ERR_INTERNAL;
}

template <typename Fn>
tglm_status guarded(Fn&& fn) {
  g_last_error.clear();
  g_warnings.clear();
  try {
    fn();
    return TGLM_OK;
  } catch (const tglm::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return TGLM_ERR_INTERNAL;
}

void require(bool cond, const char* what) {
  if (!cond) throw tglm::Error(tglm::ErrorKind::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

tglm::IngestOptions ingest_options(const tglm_ingest_options* o) {
  tglm::IngestOptions opts;
  if (!o) return opts;
  if (o->outcome) opts.outcome = o->outcome;
  if (o->trials && *o->trials) opts.trials = std::string(o->trials);
  if (o->kinds) {
    std::stringstream ss(o->kinds);
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw tglm::Error(tglm::ErrorKind::invalid_argument, "column kind '" + item + "' is not name=kind");
      opts.kind_overrides[item.substr(0, eq)] = tglm::column_kind_from_string(item.substr(eq + 1));
    }
  }
  return opts;
}

tglm::Family family_of(tglm_family f) {
  switch (f) {
    case TGLM_FAMILY_LOGISTIC: return tglm::Family::logistic;
    case TGLM_FAMILY_LINEAR: return tglm::Family::linear;
    case TGLM_FAMILY_POISSON: return tglm::Family::poisson;
  }
  throw tglm::Error(tglm::ErrorKind::invalid_argument, "unknown family");
}

tglm_model* wrap(tglm::SavedModel m) {
  auto* h = new tglm_model{std::move(m), {}};
  h->names = h->model.recipe.predictor_names();
  return h;
}

}  // namespace

extern "C" {

const char* tglm_version(void) { return "1.0.0"; }

const char* tglm_last_error(void) { return g_last_error.c_str(); }

const char* tglm_status_string(tglm_status status) {
  switch (status) {
    case TGLM_OK: return "ok";
    case TGLM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TGLM_ERR_PARSE: return "parse error";
    case TGLM_ERR_DATA: return "data error";
    case TGLM_ERR_NUMERIC: return "numerical failure";
    case TGLM_ERR_VERSION: return "unsupported version";
    case TGLM_ERR_IO: return "i/o error";
    case TGLM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t tglm_warning_count(void) { return g_warnings.size(); }

const char* tglm_warning(size_t index) { return index < g_warnings.size() ? g_warnings[index].c_str() : nullptr; }

void tglm_string_free(char* s) { std::free(s); }

tglm_status tglm_table_read_file(const char* path, const tglm_ingest_options* options, tglm_table** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new tglm_table{tglm::ingest_table_file(path, ingest_options(options))};
  });
}

tglm_status tglm_table_read_buffer(const char* data, size_t size, const tglm_ingest_options* options,
                                   tglm_table** out) {
  return guarded([&] {
    require((data || size == 0) && out, "null argument");
    *out = nullptr;
    std::istringstream in(std::string(data ? data : "", size));
    *out = new tglm_table{tglm::ingest_table(in, ingest_options(options))};
  });
}

void tglm_table_free(tglm_table* table) { delete table; }

size_t tglm_table_rows(const tglm_table* table) { return table ? table->table.n_rows : 0; }

size_t tglm_table_columns(const tglm_table* table) { return table ? table->table.columns.size() : 0; }

void tglm_fit_options_init(tglm_fit_options* o) {
  if (!o) return;
  o->family = TGLM_FAMILY_LOGISTIC;
  o->standardize = 1;
  o->add_missing_indicators = 1;
  o->intercept = 1;
  o->prior_scale = 2.5;
  o->prior_df = 1.0;
  o->intercept_scale = 10.0;
  o->intercept_df = 1.0;
  o->max_iter = 100;
  o->tol = 1e-8;
  o->em_variance = TGLM_EM_PLUG_IN;
}

tglm_status tglm_fit(const tglm_table* table, const tglm_fit_options* options, tglm_model** out) {
  return guarded([&] {
    require(table && out, "null argument");
    *out = nullptr;
    tglm_fit_options o;
    tglm_fit_options_init(&o);
    if (options) o = *options;

    const tglm::DataTable& t = table->table;
    if (t.outcome.empty()) throw tglm::Error(tglm::ErrorKind::invalid_argument, "fitting requires an outcome column");
    const tglm::Family family = family_of(o.family);

    tglm::RecipeOptions ropts;
    ropts.standardize = o.standardize != 0;
    ropts.add_missing_indicators = o.add_missing_indicators != 0;
    ropts.intercept = o.intercept != 0;
    ropts.standardize_outcome = ropts.standardize && family == tglm::Family::linear;

    tglm::SavedModel m;
    m.outcome = t.outcome;
    m.trials = t.trials;
    m.recipe = tglm::build_recipe(t, ropts);
    const tglm::DesignMatrix dm = tglm::apply_recipe(m.recipe, t, &g_warnings);
    const Eigen::VectorXd y = tglm::transform_outcome(m.recipe, t.outcome_values());
    const Eigen::VectorXd n = t.trial_counts();

    const tglm::PriorSpec prior =
        tglm::make_prior(m.recipe, o.prior_scale, o.prior_df, o.intercept_scale, o.intercept_df);
    tglm::FitControls controls;
    controls.max_iter = o.max_iter;
    controls.tol = o.tol;
    controls.em_variance = o.em_variance == TGLM_EM_POSTERIOR ? tglm::EmVariance::posterior
                                                              : tglm::EmVariance::plug_in;
    m.fit = tglm::fit(dm.X, y, n, family, prior, controls);
    if (!m.fit.converged)
      g_warnings.push_back("fit did not converge in " + std::to_string(m.fit.n_iter) +
                           " iterations; estimates are the last iterate");
    *out = wrap(std::move(m));
  });
}

void tglm_model_free(tglm_model* model) { delete model; }

tglm_status tglm_model_render(const tglm_model* model, tglm_format format, char** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = nullptr;
    switch (format) {
      case TGLM_FORMAT_TABLE: *out = dup_string(tglm::render_table(model->model)); break;
      case TGLM_FORMAT_JSON: *out = dup_string(tglm::model_to_json(model->model).dump(2) + "\n"); break;
      default: throw tglm::Error(tglm::ErrorKind::invalid_argument, "unknown output format");
    }
  });
}

tglm_status tglm_model_from_json(const char* data, size_t size, tglm_model** out) {
  return guarded([&] {
    require(data && out, "null argument");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(data, data + size);
    } catch (const nlohmann::json::exception& e) {
      throw tglm::Error(tglm::ErrorKind::parse, std::string("invalid JSON: ") + e.what());
    }
    *out = wrap(tglm::model_from_json(j));
  });
}

size_t tglm_model_coef_count(const tglm_model* model) { return model ? model->names.size() : 0; }

tglm_status tglm_model_coef(const tglm_model* model, size_t index, const char** name, double* estimate,
                            double* std_error) {
  return guarded([&] {
    require(model != nullptr, "null argument");
    if (index >= model->names.size()) throw tglm::Error(tglm::ErrorKind::invalid_argument, "coefficient index out of range");
    const auto j = static_cast<Eigen::Index>(index);
    if (name) *name = model->names[index].c_str();
    if (estimate) *estimate = model->model.fit.beta(j);
    if (std_error) *std_error = std::sqrt(model->model.fit.V(j, j));
  });
}

int tglm_model_converged(const tglm_model* model) { return model && model->model.fit.converged ? 1 : 0; }

int tglm_model_iterations(const tglm_model* model) { return model ? model->model.fit.n_iter : 0; }

tglm_status tglm_predict(const tglm_model* model, const tglm_table* table, tglm_scale scale, double* out,
                         size_t out_size) {
  return guarded([&] {
    require(model && table && out, "null argument");
    if (out_size < table->table.n_rows)
      throw tglm::Error(tglm::ErrorKind::invalid_argument, "output buffer is smaller than the table");
    const Eigen::VectorXd p =
        tglm::predict(model->model.fit, model->model.recipe, table->table,
                      scale == TGLM_SCALE_LINK ? tglm::PredictScale::link : tglm::PredictScale::response,
                      &g_warnings);
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = p(i);
  });
}

tglm_status tglm_cv_run(const tglm_table* const* tables, const char* const* names, size_t count, const char* grid,
                        size_t folds, uint64_t seed, tglm_cv_report** out) {
  return guarded([&] {
    require(tables && out && count > 0, "null argument");
    *out = nullptr;
    const auto points = grid ? tglm::parse_grid(grid) : tglm::default_grid();
    tglm::CvOptions cv;
    cv.k = folds;
    cv.seed = seed;
    auto report = std::make_unique<tglm_cv_report>();
    for (size_t d = 0; d < count; ++d) {
      require(tables[d] != nullptr, "null table");
      tglm::ScoreReport r = tglm::cross_validate(tables[d]->table, points, cv);
      r.dataset = names && names[d] ? names[d] : "dataset" + std::to_string(d + 1);
      for (const auto& gs : r.grid)
        if (gs.fit_failures > 0)
          g_warnings.push_back(r.dataset + ": " + std::to_string(gs.fit_failures) + " fold fit(s) failed for prior " +
                               gs.point.label() + "; scored with the last iterate");
      report->reports.push_back(std::move(r));
    }
    *out = report.release();
  });
}

void tglm_cv_report_free(tglm_cv_report* report) { delete report; }

tglm_status tglm_cv_report_csv(const tglm_cv_report* report, char** out) {
  return guarded([&] {
    require(report && out, "null argument");
    *out = dup_string(tglm::score_reports_csv(report->reports));
  });
}

tglm_status tglm_cv_summary_csv(const tglm_cv_report* report, char** out) {
  return guarded([&] {
    require(report && out, "null argument");
    *out = dup_string(tglm::corpus_summary_csv(report->reports));
  });
}

tglm_status tglm_cv_best(const tglm_cv_report* report, char** label, double* mean_log_score) {
  return guarded([&] {
    require(report && label, "null argument");
    *label = nullptr;
    const auto agg = tglm::aggregate_corpus(report->reports);
    auto best = agg.begin();
    for (auto it = agg.begin(); it != agg.end(); ++it)
      if (it->equal_weight_log_score < best->equal_weight_log_score) best = it;
    *label = dup_string(best->point.label());
    if (mean_log_score) *mean_log_score = best->equal_weight_log_score;
  });
}

}  // extern "C"
