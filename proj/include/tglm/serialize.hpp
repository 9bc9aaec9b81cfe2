#pragma once

#include "tglm/data_prep.hpp"
#include "tglm/glm.hpp"

#include "json.hpp"

#include <string>

namespace tglm {

inline constexpr int kFitFormatMajor = 1;
inline constexpr int kFitFormatMinor = 0;

nlohmann::json recipe_to_json(const DesignRecipe& recipe);
DesignRecipe recipe_from_json(const nlohmann::json& j);

/// A fitted model together with the recipe that produced its design.
struct SavedModel {
  DesignRecipe recipe;
  FitResult fit;
  std::string outcome;
  std::optional<std::string> trials;
};

nlohmann::json model_to_json(const SavedModel& model);
/// Rejects documents whose major version differs from kFitFormatMajor.
SavedModel model_from_json(const nlohmann::json& j);

/// Coefficient table: predictor, coef.est, coef.sd with two decimals, then a
/// footer with family, prior, n and iterations.
std::string render_table(const SavedModel& model);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace tglm
