#pragma once

#include "tglm/data_prep.hpp"
#include "tglm/error.hpp"
#include "tglm/wls.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tglm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Linear predictors are clamped to this range before exponentiation.
inline constexpr double kEtaClamp = 30.0;

enum class Family { logistic, linear, poisson };

const char* to_string(Family family);
Family family_from_string(const std::string& s);

/// Independent t prior on one coefficient. scale = inf is a flat prior,
/// df = inf a normal one.
struct CoefPrior {
  double center = 0.0;
  double scale = 2.5;
  double df = 1.0;

  bool flat() const { return scale == kInf; }
  bool operator==(const CoefPrior&) const = default;
};

using PriorSpec = std::vector<CoefPrior>;

/// Cauchy(0, 10) on the intercept and Cauchy(0, 2.5) elsewhere. Without
/// standardization, scaled-numeric terms get 2.5 / (2 sd).
PriorSpec default_prior(const DesignRecipe& recipe, bool standardized);

/// Same layout with a uniform scale/df for non-intercept terms.
PriorSpec make_prior(const DesignRecipe& recipe, double scale, double df,
                     double intercept_scale = 10.0, double intercept_df = 1.0);

struct PseudoData {
  Eigen::VectorXd z;
  Eigen::VectorXd sigma2;
};

/// Working response and pseudo-variance of one IWLS step. `y` holds
/// successes (logistic), counts (poisson) or responses (linear); `trials`
/// the binomial denominators or exposures. `residual_variance` is used only
/// by the linear family.
PseudoData pseudo_data(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& trials, const Eigen::VectorXd& beta,
                       double residual_variance = 1.0);

/// Stacks one unit prior row per non-flat coefficient under the data rows.
WlsProblem augment(const PseudoData& pseudo, const Eigen::MatrixXd& X, const PriorSpec& prior,
                   const Eigen::VectorXd& sigma);

/// M-step for the scale-mixture variance of one coefficient:
/// ((beta - mu)^2 + V_jj + nu s^2) / (1 + nu).
double em_sigma_update(double beta_hat, double V_jj, const CoefPrior& prior);

/// What the E-step adds to (beta_j - mu_j)^2 before the M-step.
enum class EmVariance {
  /// Nothing. The fixed point is then the exact posterior mode under the t
  /// prior.
  plug_in,
  /// The current (V_beta)_jj, i.e. the expectation under the normal
  /// approximation. Converges to a slightly less shrunk estimate.
  posterior,
};

struct FitControls {
  int max_iter = 100;
  double tol = 1e-8;
  std::optional<Eigen::VectorXd> beta_init;
  EmVariance em_variance = EmVariance::plug_in;
};

struct FitResult {
  Family family = Family::logistic;
  Eigen::VectorXd beta;
  Eigen::MatrixXd V;
  Eigen::VectorXd sigma;  // converged EM prior scales, s_j where df = inf
  int n_iter = 0;
  bool converged = false;
  std::vector<double> deviance_trace;
  double residual_variance = 1.0;  // linear family only
  PriorSpec prior;
  EmVariance em_variance = EmVariance::plug_in;
  std::size_t n_obs = 0;

  Eigen::VectorXd std_errors() const { return V.diagonal().cwiseSqrt(); }
};

/// Raised when no estimate can be produced. Carries the last iterate so
/// callers that must score anyway can.
class FitError : public Error {
 public:
  FitError(const std::string& what, Eigen::VectorXd last_beta)
      : Error(ErrorKind::numeric, what), last_beta_(std::move(last_beta)) {}

  const Eigen::VectorXd& last_beta() const { return last_beta_; }

 private:
  Eigen::VectorXd last_beta_;
};

/// Alternates one IWLS step on the prior-augmented pseudo-data with one EM
/// update of the prior scales until max_j |d beta_j| < tol * max(1, |beta_j|).
/// Nonconvergence is reported through `converged`, not thrown.
FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& trials,
              Family family, const PriorSpec& prior, const FitControls& controls = {});

/// Deviance-like fit statistic (-2 log-likelihood up to a constant for the
/// count families, RSS for linear).
double deviance(Family family, const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                const Eigen::VectorXd& trials);

enum class PredictScale { link, response };

Eigen::VectorXd inverse_link(Family family, const Eigen::VectorXd& eta);

/// Applies the recipe to `table` and returns linear predictors or responses.
/// Linear-family responses are mapped back through the outcome transform.
Eigen::VectorXd predict(const FitResult& fit, const DesignRecipe& recipe, const DataTable& table,
                        PredictScale scale, std::vector<std::string>* warnings = nullptr);

}  // namespace tglm
