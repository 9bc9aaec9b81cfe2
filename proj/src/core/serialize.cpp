#include "tglm/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tglm {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error(ErrorKind::parse, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Eigen::VectorXd read_vector(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i]);
  return v;
}

TermKind term_kind_from_string(const std::string& s) {
  for (auto k : {TermKind::intercept, TermKind::centered_binary, TermKind::scaled_numeric, TermKind::dummy,
                 TermKind::missing_indicator})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::parse, "unknown term kind '" + s + "'");
}

const char* to_string(EmVariance v) { return v == EmVariance::plug_in ? "plug_in" : "posterior"; }

EmVariance em_variance_from_string(const std::string& s) {
  if (s == "plug_in") return EmVariance::plug_in;
  if (s == "posterior") return EmVariance::posterior;
  throw Error(ErrorKind::parse, "unknown em_variance '" + s + "'");
}

int major_version(const json& v) {
  const std::string s = v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>());
  try {
    return std::stoi(s.substr(0, s.find('.')));
  } catch (const std::exception&) {
    throw Error(ErrorKind::parse, "malformed version '" + s + "'");
  }
}

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string describe(const CoefPrior& p) {
  if (p.flat()) return "flat";
  const std::string args = "(" + format_double(p.center) + ", " + format_double(p.scale) + ")";
  if (p.df == kInf) return "normal" + args;
  if (p.df == 1.0) return "Cauchy" + args;
  return "t_" + format_double(p.df) + args;
}

}  // namespace

json recipe_to_json(const DesignRecipe& recipe) {
  json terms = json::array();
  for (const auto& t : recipe.terms) {
    json jt = {{"kind", to_string(t.kind)}, {"name", t.name}};
    switch (t.kind) {
      case TermKind::intercept:
        break;
      case TermKind::centered_binary:
        jt["source"] = t.source;
        jt["level"] = t.level;
        jt["reference"] = t.reference;
        jt["offset"] = t.offset;
        jt["numeric_levels"] = t.numeric_levels;
        break;
      case TermKind::scaled_numeric:
        jt["source"] = t.source;
        jt["center"] = t.center;
        jt["half_spread"] = t.half_spread;
        jt["sd"] = t.sd;
        break;
      case TermKind::dummy:
        jt["source"] = t.source;
        jt["level"] = t.level;
        jt["reference"] = t.reference;
        break;
      case TermKind::missing_indicator:
        jt["source"] = t.source;
        break;
    }
    terms.push_back(std::move(jt));
  }
  json j = {{"version", DesignRecipe::kVersion}, {"standardized", recipe.standardized}, {"terms", terms}};
  if (recipe.outcome_transform)
    j["outcome_transform"] = {{"center", recipe.outcome_transform->center},
                              {"scale", recipe.outcome_transform->scale}};
  else
    j["outcome_transform"] = nullptr;
  return j;
}

DesignRecipe recipe_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != DesignRecipe::kVersion)
      throw Error(ErrorKind::version, "unsupported recipe version " + j.at("version").dump());
    DesignRecipe r;
    r.standardized = j.at("standardized").get<bool>();
    for (const auto& jt : j.at("terms")) {
      Term t;
      t.kind = term_kind_from_string(jt.at("kind").get<std::string>());
      t.name = jt.at("name").get<std::string>();
      t.source = jt.value("source", std::string());
      t.level = jt.value("level", std::string());
      t.reference = jt.value("reference", std::string());
      t.offset = jt.value("offset", 0.0);
      t.center = jt.value("center", 0.0);
      t.half_spread = jt.value("half_spread", 1.0);
      t.sd = jt.value("sd", 0.0);
      t.numeric_levels = jt.value("numeric_levels", false);
      if (t.kind == TermKind::scaled_numeric && !(t.half_spread > 0.0))
        throw Error(ErrorKind::parse, "term '" + t.name + "' has a non-positive half-spread");
      r.terms.push_back(std::move(t));
    }
    if (j.contains("outcome_transform") && !j.at("outcome_transform").is_null())
      r.outcome_transform = OutcomeTransform{j["outcome_transform"].at("center").get<double>(),
                                             j["outcome_transform"].at("scale").get<double>()};
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed recipe: ") + e.what());
  }
}

json model_to_json(const SavedModel& m) {
  const FitResult& f = m.fit;
  json prior = json::array();
  for (const auto& p : f.prior)
    prior.push_back({{"center", number(p.center)}, {"scale", number(p.scale)}, {"df", number(p.df)}});

  json V = json::array();
  for (Eigen::Index i = 0; i < f.V.rows(); ++i) V.push_back(vector_json(f.V.row(i).transpose()));

  json j = {
      {"format", "tglm-fit"},
      {"version", std::to_string(kFitFormatMajor) + "." + std::to_string(kFitFormatMinor)},
      {"family", to_string(f.family)},
      {"outcome", m.outcome},
      {"trials", m.trials ? json(*m.trials) : json(nullptr)},
      {"recipe", recipe_to_json(m.recipe)},
      {"predictors", m.recipe.predictor_names()},
      {"beta", vector_json(f.beta)},
      {"se", vector_json(f.std_errors())},
      {"V", V},
      {"sigma_hat", vector_json(f.sigma)},
      {"prior", prior},
      {"n_iter", f.n_iter},
      {"converged", f.converged},
      {"deviance_trace", f.deviance_trace},
      {"residual_variance", f.residual_variance},
      {"n_obs", f.n_obs},
      {"em_variance", to_string(f.em_variance)},
  };
  try {
    const RawCoefficients raw = unstandardize_coefficients(m.recipe, f.beta, f.V);
    j["beta_raw"] = vector_json(raw.beta);
    j["se_raw"] = vector_json(raw.V.diagonal().cwiseSqrt());
  } catch (const Error&) {
    j["beta_raw"] = nullptr;
    j["se_raw"] = nullptr;
  }
  return j;
}

SavedModel model_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "tglm-fit") throw Error(ErrorKind::parse, "not a tglm fit document");
    const int major = major_version(j.at("version"));
    if (major != kFitFormatMajor)
      throw Error(ErrorKind::version, "unsupported fit format major version " + std::to_string(major));

    SavedModel m;
    m.recipe = recipe_from_json(j.at("recipe"));
    m.outcome = j.value("outcome", std::string());
    if (j.contains("trials") && !j["trials"].is_null()) m.trials = j["trials"].get<std::string>();

    FitResult& f = m.fit;
    f.family = family_from_string(j.at("family").get<std::string>());
    f.beta = read_vector(j.at("beta"));
    const auto J = f.beta.size();
    if (static_cast<std::size_t>(J) != m.recipe.size())
      throw Error(ErrorKind::parse, "coefficient count does not match the recipe");
    f.V.resize(J, J);
    const json& V = j.at("V");
    if (V.size() != static_cast<std::size_t>(J)) throw Error(ErrorKind::parse, "covariance has the wrong shape");
    for (Eigen::Index r = 0; r < J; ++r) {
      const Eigen::VectorXd row = read_vector(V[static_cast<std::size_t>(r)]);
      if (row.size() != J) throw Error(ErrorKind::parse, "covariance has the wrong shape");
      f.V.row(r) = row.transpose();
    }
    f.sigma = read_vector(j.at("sigma_hat"));
    for (const auto& p : j.at("prior"))
      f.prior.push_back({read_number(p.at("center")), read_number(p.at("scale")), read_number(p.at("df"))});
    f.n_iter = j.at("n_iter").get<int>();
    f.converged = j.at("converged").get<bool>();
    f.deviance_trace = j.at("deviance_trace").get<std::vector<double>>();
    f.residual_variance = j.value("residual_variance", 1.0);
    f.n_obs = j.value("n_obs", std::size_t{0});
    f.em_variance = em_variance_from_string(j.value("em_variance", std::string("plug_in")));
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed fit document: ") + e.what());
  }
}

std::string render_table(const SavedModel& model) {
  const FitResult& f = model.fit;
  const auto names = model.recipe.predictor_names();
  const Eigen::VectorXd se = f.std_errors();

  std::size_t width = 0;
  for (const auto& n : names) width = std::max(width, n.size());

  std::vector<std::string> est(names.size()), sd(names.size());
  std::size_t est_w = 8, sd_w = 7;  // "coef.est", "coef.sd"
  for (std::size_t j = 0; j < names.size(); ++j) {
    est[j] = two_decimals(f.beta(static_cast<Eigen::Index>(j)));
    sd[j] = two_decimals(se(static_cast<Eigen::Index>(j)));
    est_w = std::max(est_w, est[j].size());
    sd_w = std::max(sd_w, sd[j].size());
  }

  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };
  auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };

  std::ostringstream out;
  out << pad_right("", width) << ' ' << pad_left("coef.est", est_w) << ' ' << pad_left("coef.sd", sd_w) << '\n';
  for (std::size_t j = 0; j < names.size(); ++j)
    out << pad_right(names[j], width) << ' ' << pad_left(est[j], est_w) << ' ' << pad_left(sd[j], sd_w) << '\n';

  out << "---\n";
  out << "family: " << to_string(f.family) << '\n';

  std::string prior_line;
  const auto icpt = model.recipe.intercept_index();
  if (icpt && *icpt < f.prior.size()) prior_line += "intercept " + describe(f.prior[*icpt]);
  std::vector<std::string> others;
  for (std::size_t j = 0; j < f.prior.size(); ++j) {
    if (icpt && j == *icpt) continue;
    const std::string d = describe(f.prior[j]);
    if (std::find(others.begin(), others.end(), d) == others.end()) others.push_back(d);
  }
  if (!others.empty()) {
    if (!prior_line.empty()) prior_line += "; ";
    prior_line += "coefficients ";
    for (std::size_t i = 0; i < others.size(); ++i) prior_line += (i ? ", " : "") + others[i];
  }
  out << "prior: " << (prior_line.empty() ? "none" : prior_line) << '\n';
  out << "n = " << f.n_obs << ", iterations = " << f.n_iter << (f.converged ? "" : " (not converged)") << '\n';
  if (f.family == Family::linear) out << "residual sd (standardized scale) = " << two_decimals(std::sqrt(f.residual_variance)) << '\n';
  return out.str();
}

}  // namespace tglm
