#include "tglm/glm.hpp"

#include <algorithm>
#include <cmath>

namespace tglm {

namespace {

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

// log(1 + exp(x)) without overflow
double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double xlogx_ratio(double a, double b) { return a > 0.0 ? a * std::log(a / b) : 0.0; }

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& trials) {
  if (y.size() != X.rows() || trials.size() != X.rows())
    throw Error(ErrorKind::invalid_argument, "design, outcome and trials must have the same number of rows");
}

void check_family_data(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& trials) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y(i), ni = trials(i);
    if (!std::isfinite(yi)) throw Error(ErrorKind::data, "outcome on row " + std::to_string(i + 1) + " is not finite");
    if (!(ni > 0.0) || !std::isfinite(ni))
      throw Error(ErrorKind::data, "trials on row " + std::to_string(i + 1) + " must be positive");
    switch (family) {
      case Family::logistic:
        if (yi < 0.0 || yi > ni)
          throw Error(ErrorKind::data, "logistic outcome on row " + std::to_string(i + 1) + " is outside [0, trials]");
        break;
      case Family::poisson:
        if (yi < 0.0 || yi != std::floor(yi))
          throw Error(ErrorKind::data, "poisson outcome on row " + std::to_string(i + 1) +
                                           " must be a non-negative integer");
        break;
      case Family::linear:
        break;
    }
  }
}

void check_prior(const PriorSpec& prior, Eigen::Index J) {
  if (static_cast<Eigen::Index>(prior.size()) != J)
    throw Error(ErrorKind::invalid_argument, "prior has " + std::to_string(prior.size()) + " entries for " +
                                                 std::to_string(J) + " coefficients");
  for (const auto& p : prior) {
    if (!(p.scale > 0.0) || !(p.df > 0.0) || !std::isfinite(p.center))
      throw Error(ErrorKind::invalid_argument, "prior scales and degrees of freedom must be positive");
  }
}

double residual_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& trials,
                         const Eigen::VectorXd& beta) {
  if (X.rows() == 0) return 1.0;
  const Eigen::VectorXd r = y - X * beta;
  const double rss = (trials.array() * r.array().square()).sum();
  const double v = rss / static_cast<double>(X.rows());
  return std::max(v, 1e-300);
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::logistic: return "logistic";
    case Family::linear: return "linear";
    case Family::poisson: return "poisson";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "logistic" || s == "binomial") return Family::logistic;
  if (s == "linear" || s == "gaussian") return Family::linear;
  if (s == "poisson") return Family::poisson;
  throw Error(ErrorKind::invalid_argument, "unknown family '" + s + "'");
}

PriorSpec default_prior(const DesignRecipe& recipe, bool standardized) {
  PriorSpec prior;
  prior.reserve(recipe.size());
  for (const auto& t : recipe.terms) {
    if (t.kind == TermKind::intercept) {
      prior.push_back({0.0, 10.0, 1.0});
    } else if (!standardized && t.kind == TermKind::scaled_numeric) {
      prior.push_back({0.0, 2.5 / (2.0 * t.sd), 1.0});
    } else {
      prior.push_back({0.0, 2.5, 1.0});
    }
  }
  return prior;
}

PriorSpec make_prior(const DesignRecipe& recipe, double scale, double df, double intercept_scale,
                     double intercept_df) {
  PriorSpec prior;
  prior.reserve(recipe.size());
  for (const auto& t : recipe.terms) {
    if (t.kind == TermKind::intercept) {
      prior.push_back({0.0, intercept_scale, intercept_df});
    } else if (!recipe.standardized && t.kind == TermKind::scaled_numeric) {
      prior.push_back({0.0, scale / (2.0 * t.sd), df});
    } else {
      prior.push_back({0.0, scale, df});
    }
  }
  return prior;
}

PseudoData pseudo_data(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& trials, const Eigen::VectorXd& beta, double residual_var) {
  if (!beta.allFinite()) throw Error(ErrorKind::numeric, "pseudo-data requested at a non-finite coefficient vector");
  check_shapes(X, y, trials);
  const Eigen::VectorXd eta = X * beta;
  const auto n = eta.size();
  PseudoData pd{Eigen::VectorXd(n), Eigen::VectorXd(n)};

  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = clamp_eta(eta(i));
    switch (family) {
      case Family::logistic: {
        // (1 + e^eta)^2 / e^eta, written to stay finite at both ends
        const double curvature = 2.0 + std::exp(e) + std::exp(-e);
        const double p = 1.0 / (1.0 + std::exp(-e));
        pd.z(i) = eta(i) + curvature * (y(i) / trials(i) - p);
        pd.sigma2(i) = curvature / trials(i);
        break;
      }
      case Family::poisson: {
        const double mu = trials(i) * std::exp(e);
        pd.z(i) = eta(i) + (y(i) - mu) / mu;
        pd.sigma2(i) = 1.0 / mu;
        break;
      }
      case Family::linear:
        pd.z(i) = y(i);
        pd.sigma2(i) = residual_var / trials(i);
        break;
    }
  }
  return pd;
}

WlsProblem augment(const PseudoData& pseudo, const Eigen::MatrixXd& X, const PriorSpec& prior,
                   const Eigen::VectorXd& sigma) {
  const auto n = X.rows();
  const auto J = X.cols();
  check_prior(prior, J);
  if (sigma.size() != J) throw Error(ErrorKind::invalid_argument, "prior scale vector has the wrong length");

  Eigen::Index proper = 0;
  for (const auto& p : prior)
    if (!p.flat()) ++proper;

  WlsProblem prob{Eigen::MatrixXd::Zero(n + proper, J), Eigen::VectorXd(n + proper), Eigen::VectorXd(n + proper)};
  prob.X.topRows(n) = X;
  prob.z.head(n) = pseudo.z;
  prob.w.head(n) = pseudo.sigma2.cwiseInverse();

  Eigen::Index row = n;
  for (Eigen::Index j = 0; j < J; ++j) {
    const CoefPrior& p = prior[static_cast<std::size_t>(j)];
    if (p.flat()) continue;
    if (!(sigma(j) > 0.0) || !std::isfinite(sigma(j)))
      throw Error(ErrorKind::invalid_argument, "prior scale for coefficient " + std::to_string(j) + " must be finite and positive");
    prob.X(row, j) = 1.0;
    prob.z(row) = p.center;
    prob.w(row) = 1.0 / (sigma(j) * sigma(j));
    ++row;
  }
  return prob;
}

double em_sigma_update(double beta_hat, double V_jj, const CoefPrior& prior) {
  const double d = beta_hat - prior.center;
  return (d * d + V_jj + prior.df * prior.scale * prior.scale) / (1.0 + prior.df);
}

double deviance(Family family, const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const Eigen::VectorXd& trials) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = clamp_eta(eta(i));
    switch (family) {
      case Family::logistic: {
        // y log(y / (n p)) + (n - y) log((n - y) / (n (1 - p)))
        const double log_p = -log1p_exp(-e);
        const double log_q = -log1p_exp(e);
        const double yi = y(i), fi = trials(i) - y(i);
        if (yi > 0.0) dev += yi * (std::log(yi / trials(i)) - log_p);
        if (fi > 0.0) dev += fi * (std::log(fi / trials(i)) - log_q);
        break;
      }
      case Family::poisson: {
        const double mu = trials(i) * std::exp(e);
        dev += xlogx_ratio(y(i), mu) - (y(i) - mu);
        break;
      }
      case Family::linear: {
        const double r = y(i) - eta(i);
        dev += 0.5 * trials(i) * r * r;
        break;
      }
    }
  }
  return 2.0 * dev;
}

FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& trials, Family family,
              const PriorSpec& prior, const FitControls& controls) {
  check_shapes(X, y, trials);
  const auto J = X.cols();
  check_prior(prior, J);
  check_family_data(family, y, trials);
  if (controls.max_iter < 1) throw Error(ErrorKind::invalid_argument, "max_iter must be at least 1");
  if (!(controls.tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");

  FitResult res;
  res.family = family;
  res.prior = prior;
  res.em_variance = controls.em_variance;
  res.n_obs = static_cast<std::size_t>(X.rows());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(J);
  if (controls.beta_init) {
    if (controls.beta_init->size() != J) throw Error(ErrorKind::invalid_argument, "beta_init has the wrong length");
    beta = *controls.beta_init;
  }

  Eigen::VectorXd sigma(J);
  bool any_proper = false;
  for (Eigen::Index j = 0; j < J; ++j) {
    sigma(j) = prior[static_cast<std::size_t>(j)].scale;
    any_proper = any_proper || !prior[static_cast<std::size_t>(j)].flat();
  }
  if (X.rows() == 0 && !any_proper) throw FitError("no data rows and no proper prior", beta);

  double rv = 1.0;
  if (family == Family::linear) rv = residual_variance(X, y, trials, beta);

  auto solve_step = [&](const Eigen::VectorXd& at) {
    const PseudoData pd = pseudo_data(family, X, y, trials, at, rv);
    WlsSolution sol = solve_wls(augment(pd, X, prior, sigma));
    if (!sol.rank_ok)
      throw FitError(any_proper ? "augmented system is numerically rank deficient"
                                : "design is rank deficient or separated under a flat prior; "
                                  "use a proper (finite-scale) prior",
                     at);
    return sol;
  };

  WlsSolution sol;
  for (int iter = 1; iter <= controls.max_iter; ++iter) {
    sol = solve_step(beta);
    if (!sol.beta.allFinite()) throw FitError("coefficients became non-finite", beta);

    bool small_step = true;
    for (Eigen::Index j = 0; j < J; ++j)
      if (std::abs(sol.beta(j) - beta(j)) >= controls.tol * std::max(1.0, std::abs(sol.beta(j)))) small_step = false;
    beta = sol.beta;

    for (Eigen::Index j = 0; j < J; ++j) {
      const CoefPrior& p = prior[static_cast<std::size_t>(j)];
      if (p.flat() || p.df == kInf) continue;
      const double vjj = controls.em_variance == EmVariance::posterior ? sol.V(j, j) : 0.0;
      sigma(j) = std::sqrt(em_sigma_update(beta(j), vjj, p));
    }
    if (family == Family::linear) rv = residual_variance(X, y, trials, beta);

    res.deviance_trace.push_back(deviance(family, X * beta, y, trials));
    res.n_iter = iter;
    if (small_step) {
      res.converged = true;
      break;
    }
  }

  // Curvature of the converged augmented system.
  try {
    res.V = solve_step(beta).V;
  } catch (const FitError&) {
    if (res.converged) throw;
    res.V = sol.V;  // the last step's system is the best curvature we have
  }
  res.beta = beta;
  res.sigma = sigma;
  res.residual_variance = rv;
  return res;
}

Eigen::VectorXd inverse_link(Family family, const Eigen::VectorXd& eta) {
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = clamp_eta(eta(i));
    switch (family) {
      case Family::logistic: out(i) = 1.0 / (1.0 + std::exp(-e)); break;
      case Family::poisson: out(i) = std::exp(e); break;
      case Family::linear: out(i) = eta(i); break;
    }
  }
  return out;
}

Eigen::VectorXd predict(const FitResult& fit, const DesignRecipe& recipe, const DataTable& table, PredictScale scale,
                        std::vector<std::string>* warnings) {
  if (static_cast<std::size_t>(fit.beta.size()) != recipe.size())
    throw Error(ErrorKind::invalid_argument, "fit and recipe disagree on the number of coefficients");
  const DesignMatrix dm = apply_recipe(recipe, table, warnings);
  const Eigen::VectorXd eta = dm.X * fit.beta;
  if (scale == PredictScale::link) return eta;
  Eigen::VectorXd response = inverse_link(fit.family, eta);
  if (fit.family == Family::linear && recipe.outcome_transform)
    response = (response.array() * recipe.outcome_transform->scale + recipe.outcome_transform->center).matrix();
  return response;
}

}  // namespace tglm
