#pragma once

#include "tglm/data_prep.hpp"
#include "tglm/glm.hpp"

#include <sstream>
#include <string>

namespace testing {

inline tglm::DataTable table_from(const std::string& csv, const std::string& outcome = "",
                                  std::optional<std::string> trials = std::nullopt) {
  std::istringstream in(csv);
  tglm::IngestOptions opt;
  opt.outcome = outcome;
  opt.trials = std::move(trials);
  return tglm::ingest_table(in, opt);
}

inline std::string data_path(const std::string& rel) { return std::string(TGLM_DATA_DIR) + "/" + rel; }

inline tglm::DataTable bioassay() {
  tglm::IngestOptions opt;
  opt.outcome = "deaths";
  opt.trials = "animals";
  return tglm::ingest_table_file(data_path("bioassay.csv"), opt);
}

struct TableFit {
  tglm::DesignRecipe recipe;
  tglm::DesignMatrix design;
  tglm::FitResult fit;
};

inline TableFit fit_table(const tglm::DataTable& table, const tglm::PriorSpec* prior = nullptr,
                          tglm::RecipeOptions ropt = {}, tglm::FitControls controls = {},
                          tglm::Family family = tglm::Family::logistic) {
  TableFit out;
  out.recipe = tglm::build_recipe(table, ropt);
  out.design = tglm::apply_recipe(out.recipe, table);
  const tglm::PriorSpec p = prior ? *prior : tglm::default_prior(out.recipe, ropt.standardize);
  out.fit = tglm::fit(out.design.X, tglm::transform_outcome(out.recipe, table.outcome_values()),
                      table.trial_counts(), family, p, controls);
  return out;
}

inline tglm::PriorSpec flat_prior(std::size_t J) {
  return tglm::PriorSpec(J, tglm::CoefPrior{0.0, tglm::kInf, tglm::kInf});
}

}  // namespace testing
