#include "doctest.h"
#include "helpers.hpp"

#include "tglm/serialize.hpp"

#include <cmath>

using namespace tglm;
using testing::table_from;

namespace {

SavedModel small_model() {
  SavedModel m;
  m.recipe.terms = {Term{.kind = TermKind::intercept, .name = "(Intercept)"},
                    Term{.kind = TermKind::scaled_numeric, .name = "z.dose", .source = "dose"}};
  m.recipe.terms[1].center = 0.5;
  m.recipe.terms[1].half_spread = 2.0;
  m.recipe.terms[1].sd = 1.0;
  m.fit.family = Family::logistic;
  m.fit.beta = Eigen::Vector2d(-0.204, 5.355);
  m.fit.V = Eigen::Matrix2d{{0.25, 0.01}, {0.01, 4.84}};
  m.fit.sigma = Eigen::Vector2d(10.0, 3.9);
  m.fit.prior = {{0.0, 10.0, 1.0}, {0.0, 2.5, 1.0}};
  m.fit.n_iter = 17;
  m.fit.converged = true;
  m.fit.n_obs = 4;
  m.outcome = "deaths";
  m.trials = "animals";
  return m;
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("coefficient table layout") {
    const std::string want =
        "            coef.est coef.sd\n"
        "(Intercept)    -0.20    0.50\n"
        "z.dose          5.36    2.20\n"
        "---\n"
        "family: logistic\n"
        "prior: intercept Cauchy(0, 10); coefficients Cauchy(0, 2.5)\n"
        "n = 4, iterations = 17\n";
    CHECK(render_table(small_model()) == want);
  }

  TEST_CASE("table reports nonconvergence and non-default priors") {
    auto m = small_model();
    m.fit.converged = false;
    m.fit.prior = {{0.0, kInf, kInf}, {0.0, kInf, kInf}};
    const auto s = render_table(m);
    CHECK(s.find("flat") != std::string::npos);
    CHECK(s.find("not converged") != std::string::npos);
  }

  TEST_CASE("recipe round trip") {
    const auto t = table_from("x,b,g,y\n1,0,p,0\n,1,q,1\n3,1,p,1\n7,0,r,0\n", "y");
    const auto r = build_recipe(t);
    const auto j = recipe_to_json(r);
    CHECK(recipe_from_json(j) == r);
    CHECK(recipe_from_json(nlohmann::json::parse(j.dump())) == r);
    auto bad = j;
    bad["version"] = 2;
    CHECK_THROWS_AS(recipe_from_json(bad), Error);
  }

  TEST_CASE("model round trip is bit-exact") {
    const auto t = testing::bioassay();
    const auto f = testing::fit_table(t);
    SavedModel m{f.recipe, f.fit, "deaths", "animals"};
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    CHECK(back.recipe == m.recipe);
    CHECK(back.fit.beta == m.fit.beta);
    CHECK(back.fit.V == m.fit.V);
    CHECK(back.fit.sigma == m.fit.sigma);
    CHECK(back.fit.prior == m.fit.prior);
    CHECK(back.fit.deviance_trace == m.fit.deviance_trace);
    CHECK(back.fit.n_iter == m.fit.n_iter);
    CHECK(back.trials == m.trials);
    CHECK(predict(back.fit, back.recipe, t, PredictScale::response) ==
          predict(m.fit, m.recipe, t, PredictScale::response));
  }

  TEST_CASE("model document carries both coefficient scales and infinities") {
    const auto t = testing::bioassay();
    const auto flat = testing::flat_prior(2);
    const auto f = testing::fit_table(t, &flat);
    const auto j = model_to_json({f.recipe, f.fit, "deaths", "animals"});
    CHECK(j["format"] == "tglm-fit");
    CHECK(j["version"] == "1.0");
    CHECK(j["prior"][1]["scale"] == "inf");
    CHECK(j["sigma_hat"][1] == "inf");
    CHECK(j["beta_raw"].size() == 2);
    CHECK(j["se"][1].get<double>() == doctest::Approx(f.fit.std_errors()(1)));
    const auto back = model_from_json(j);
    CHECK(back.fit.prior[1].scale == kInf);
  }

  TEST_CASE("readers reject other major versions") {
    auto j = model_to_json(small_model());
    j["version"] = "1.7";
    CHECK_NOTHROW(model_from_json(j));
    j["version"] = "2.0";
    try {
      model_from_json(j);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::version);
    }
    j["version"] = "1.0";
    j["format"] = "other";
    CHECK_THROWS_AS(model_from_json(j), Error);
  }

  TEST_CASE("shortest round-trip numbers") {
    for (double v : {0.1, -0.20895472729041364, 1e-300, 12345.678, 5.0})
      CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
  }
}
