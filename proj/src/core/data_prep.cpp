#include "tglm/data_prep.hpp"

#include "tglm/csv.hpp"
#include "tglm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace tglm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing_token(const std::string& token) { return token.empty() || token == "NA"; }

std::optional<double> parse_number(const std::string& token) {
  std::string_view sv = token;
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  if (sv.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool all_numeric(const Column& col) {
  for (std::size_t i = 0; i < col.text.size(); ++i)
    if (!col.missing[i] && std::isnan(col.value[i])) return false;
  return true;
}

std::size_t distinct_numbers(const Column& col) {
  std::set<double> seen;
  for (std::size_t i = 0; i < col.value.size(); ++i)
    if (!col.missing[i]) seen.insert(col.value[i]);
  return seen.size();
}

void classify(Column& col, const std::optional<ColumnKind>& forced) {
  const bool numeric = all_numeric(col);
  if (!forced) {
    if (!numeric)
      col.kind = ColumnKind::categorical;
    else
      col.kind = distinct_numbers(col) == 2 ? ColumnKind::binary : ColumnKind::numeric;
    return;
  }
  switch (*forced) {
    case ColumnKind::numeric:
      if (!numeric) throw Error(ErrorKind::data, "column '" + col.name + "' has non-numeric values");
      break;
    case ColumnKind::binary: {
      const std::size_t distinct = numeric ? distinct_numbers(col) : col.levels().size();
      if (distinct != 2)
        throw Error(ErrorKind::data, "column '" + col.name + "' declared binary but has " +
                                         std::to_string(distinct) + " distinct values");
      break;
    }
    case ColumnKind::categorical:
      break;
  }
  col.kind = *forced;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Moments observed_moments(const Column& col) {
  Moments m;
  double sum = 0.0;
  for (std::size_t i = 0; i < col.value.size(); ++i) {
    if (col.missing[i]) continue;
    sum += col.value[i];
    ++m.n;
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n < 2) return m;
  double ss = 0.0;
  for (std::size_t i = 0; i < col.value.size(); ++i) {
    if (col.missing[i]) continue;
    const double d = col.value[i] - m.mean;
    ss += d * d;
  }
  m.sd = std::sqrt(ss / static_cast<double>(m.n - 1));
  return m;
}

bool binary_matches(const Term& term, const Column& col, std::size_t row, const std::string& token) {
  if (term.numeric_levels) {
    const auto level = parse_number(token);
    return level && !std::isnan(col.value[row]) && col.value[row] == *level;
  }
  return col.text[row] == token;
}

void check_sources(const DesignRecipe& recipe, const DataTable& table) {
  std::string missing;
  for (const auto& s : recipe.sources())
    if (!table.find(s)) missing += (missing.empty() ? "" : ", ") + s;
  if (!missing.empty()) throw Error(ErrorKind::data, "missing source column(s): " + missing);
}

const Column& require_source(const DataTable& table, const std::string& name) {
  const Column* col = table.find(name);
  if (!col) throw Error(ErrorKind::data, "missing source column '" + name + "'");
  return *col;
}

}  // namespace

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::binary: return "binary";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "binary") return ColumnKind::binary;
  throw Error(ErrorKind::invalid_argument, "unknown column kind '" + s + "'");
}

const char* to_string(TermKind kind) {
  switch (kind) {
    case TermKind::intercept: return "intercept";
    case TermKind::centered_binary: return "centered_binary";
    case TermKind::scaled_numeric: return "scaled_numeric";
    case TermKind::dummy: return "dummy";
    case TermKind::missing_indicator: return "missing_indicator";
  }
  return "?";
}

bool Column::has_missing() const { return std::find(missing.begin(), missing.end(), true) != missing.end(); }

std::vector<std::string> Column::levels() const {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!missing[i]) seen.insert(text[i]);
  return {seen.begin(), seen.end()};
}

const Column* DataTable::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

const Column& DataTable::at(const std::string& name) const {
  const Column* c = find(name);
  if (!c) throw Error(ErrorKind::data, "no column named '" + name + "'");
  return *c;
}

Eigen::VectorXd DataTable::outcome_values() const {
  if (outcome.empty()) throw Error(ErrorKind::invalid_argument, "table has no outcome column");
  const Column& col = at(outcome);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_rows));
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (col.missing[i])
      throw Error(ErrorKind::data, "outcome '" + outcome + "' is missing on row " + std::to_string(i + 1));
    if (std::isnan(col.value[i]))
      throw Error(ErrorKind::data, "outcome '" + outcome + "' must be numeric (row " +
                                       std::to_string(i + 1) + ": '" + col.text[i] + "')");
    y(static_cast<Eigen::Index>(i)) = col.value[i];
  }
  return y;
}

Eigen::VectorXd DataTable::trial_counts() const {
  Eigen::VectorXd n = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_rows));
  if (!trials) return n;
  const Column& col = at(*trials);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double v = col.value[i];
    if (col.missing[i] || std::isnan(v) || v < 1.0 || v != std::floor(v))
      throw Error(ErrorKind::data, "trials '" + *trials + "' must be a positive integer on row " +
                                       std::to_string(i + 1));
    n(static_cast<Eigen::Index>(i)) = v;
  }
  return n;
}

DataTable DataTable::subset(const std::vector<std::size_t>& rows) const {
  DataTable out;
  out.n_rows = rows.size();
  out.outcome = outcome;
  out.trials = trials;
  out.columns.reserve(columns.size());
  for (const auto& c : columns) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    nc.text.reserve(rows.size());
    nc.value.reserve(rows.size());
    nc.missing.reserve(rows.size());
    for (auto r : rows) {
      nc.text.push_back(c.text.at(r));
      nc.value.push_back(c.value.at(r));
      nc.missing.push_back(c.missing.at(r));
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

DataTable ingest_table(std::istream& source, const IngestOptions& options) {
  auto records = read_csv_records(source);
  if (records.empty()) throw Error(ErrorKind::parse, "empty input: no header row");

  const auto& header = records.front();
  DataTable table;
  std::set<std::string> names;
  for (const auto& raw : header.fields) {
    const std::string name = trim(raw);
    if (name.empty()) throw Error(ErrorKind::parse, "empty column name in header");
    if (!names.insert(name).second) throw Error(ErrorKind::parse, "duplicate column name '" + name + "'");
    Column c;
    c.name = name;
    table.columns.push_back(std::move(c));
  }
  if (records.size() == 1) throw Error(ErrorKind::data, "table has a header but no rows");

  const std::size_t width = table.columns.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width)
      throw Error(ErrorKind::parse, "row " + std::to_string(r) + " (line " + std::to_string(rec.line) +
                                        ") has " + std::to_string(rec.fields.size()) + " fields, expected " +
                                        std::to_string(width));
    for (std::size_t j = 0; j < width; ++j) {
      Column& c = table.columns[j];
      const std::string token = trim(rec.fields[j]);
      const bool missing = is_missing_token(token);
      c.missing.push_back(missing);
      c.text.push_back(missing ? std::string() : token);
      c.value.push_back(missing ? kNaN : parse_number(token).value_or(kNaN));
    }
  }
  table.n_rows = records.size() - 1;

  for (const auto& [name, kind] : options.kind_overrides)
    if (!table.find(name)) throw Error(ErrorKind::data, "kind override for unknown column '" + name + "'");

  for (auto& c : table.columns) {
    std::optional<ColumnKind> forced;
    if (auto it = options.kind_overrides.find(c.name); it != options.kind_overrides.end()) forced = it->second;
    classify(c, forced);
  }

  if (!options.outcome.empty()) {
    if (!table.find(options.outcome))
      throw Error(ErrorKind::data, "outcome column '" + options.outcome + "' not found");
    table.outcome = options.outcome;
  }
  if (options.trials) {
    if (!table.find(*options.trials))
      throw Error(ErrorKind::data, "trials column '" + *options.trials + "' not found");
    if (*options.trials == options.outcome)
      throw Error(ErrorKind::invalid_argument, "trials and outcome must be different columns");
    table.trials = options.trials;
  }
  if (!table.outcome.empty()) {
    const Eigen::VectorXd y = table.outcome_values();
    const Eigen::VectorXd n = table.trial_counts();
    if (table.trials) {
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y(i) < 0.0 || y(i) > n(i))
          throw Error(ErrorKind::data, "outcome on row " + std::to_string(i + 1) + " is outside [0, trials]");
    }
  }
  return table;
}

DataTable ingest_table_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "cannot open '" + path + "'");
  return ingest_table(in, options);
}

std::optional<std::size_t> DesignRecipe::intercept_index() const {
  for (std::size_t j = 0; j < terms.size(); ++j)
    if (terms[j].kind == TermKind::intercept) return j;
  return std::nullopt;
}

std::vector<std::string> DesignRecipe::predictor_names() const {
  std::vector<std::string> names;
  names.reserve(terms.size());
  for (const auto& t : terms) names.push_back(t.name);
  return names;
}

std::vector<std::string> DesignRecipe::sources() const {
  std::vector<std::string> out;
  for (const auto& t : terms)
    if (t.kind != TermKind::intercept && std::find(out.begin(), out.end(), t.source) == out.end())
      out.push_back(t.source);
  return out;
}

DesignRecipe build_recipe(const DataTable& table, const RecipeOptions& options) {
  DesignRecipe recipe;
  recipe.standardized = options.standardize;
  if (options.intercept) recipe.terms.push_back(Term{.kind = TermKind::intercept, .name = "(Intercept)"});

  for (const auto& col : table.columns) {
    if (col.name == table.outcome || (table.trials && col.name == *table.trials)) continue;

    switch (col.kind) {
      case ColumnKind::binary: {
        Term t{.kind = TermKind::centered_binary, .source = col.name};
        t.numeric_levels = all_numeric(col);
        std::vector<std::string> levels;
        if (t.numeric_levels) {
          std::map<double, std::string> by_value;
          for (std::size_t i = 0; i < col.text.size(); ++i)
            if (!col.missing[i]) by_value.emplace(col.value[i], col.text[i]);
          for (const auto& [v, token] : by_value) levels.push_back(token);
        } else {
          levels = col.levels();
        }
        if (levels.size() != 2) {
          if (options.skip_degenerate) continue;
          throw Error(ErrorKind::data, "binary column '" + col.name + "' does not have two observed values");
        }
        t.reference = levels[0];
        t.level = levels[1];
        std::size_t hits = 0, observed = 0;
        for (std::size_t i = 0; i < col.text.size(); ++i) {
          if (col.missing[i]) continue;
          ++observed;
          if (binary_matches(t, col, i, t.level)) ++hits;
        }
        t.offset = options.standardize ? static_cast<double>(hits) / static_cast<double>(observed) : 0.0;
        t.name = options.standardize ? "c." + col.name : col.name;
        recipe.terms.push_back(t);
        break;
      }
      case ColumnKind::numeric: {
        const Moments m = observed_moments(col);
        if (m.n < 2 || !(m.sd > 0.0) || !std::isfinite(m.sd)) {
          if (options.skip_degenerate) continue;
          throw Error(ErrorKind::data, "column '" + col.name + "' has zero standard deviation; cannot scale a constant");
        }
        Term t{.kind = TermKind::scaled_numeric, .source = col.name};
        t.sd = m.sd;
        if (options.standardize) {
          t.center = m.mean;
          t.half_spread = 2.0 * m.sd;
          t.name = "z." + col.name;
        } else {
          t.name = col.name;
        }
        recipe.terms.push_back(t);
        break;
      }
      case ColumnKind::categorical: {
        std::map<std::string, std::size_t> counts;
        for (std::size_t i = 0; i < col.text.size(); ++i)
          if (!col.missing[i]) ++counts[col.text[i]];
        if (counts.size() < 2) {
          if (options.skip_degenerate) continue;
          throw Error(ErrorKind::data, "categorical column '" + col.name + "' has only one level");
        }
        // std::map iterates in lexicographic order, so the first maximum wins ties.
        auto dropped = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it)
          if (it->second > dropped->second) dropped = it;
        for (const auto& [level, count] : counts) {
          if (level == dropped->first) continue;
          Term t{.kind = TermKind::dummy, .name = col.name + "=" + level, .source = col.name};
          t.level = level;
          t.reference = dropped->first;
          recipe.terms.push_back(t);
        }
        break;
      }
    }
    if (options.add_missing_indicators && col.has_missing())
      recipe.terms.push_back(
          Term{.kind = TermKind::missing_indicator, .name = col.name + ".missing", .source = col.name});
  }

  if (options.standardize_outcome) {
    const Column& y = table.at(table.outcome);
    const Moments m = observed_moments(y);
    if (!(m.sd > 0.0)) throw Error(ErrorKind::data, "outcome '" + y.name + "' is constant; cannot standardize");
    recipe.outcome_transform = OutcomeTransform{m.mean, 2.0 * m.sd};
  }
  return recipe;
}

namespace {

template <typename CellFn>
DesignMatrix build_design(const DesignRecipe& recipe, const DataTable& table, CellFn&& cell) {
  DesignMatrix dm;
  const auto n = static_cast<Eigen::Index>(table.n_rows);
  dm.X.resize(n, static_cast<Eigen::Index>(recipe.size()));
  dm.predictor_names = recipe.predictor_names();
  dm.intercept_index = recipe.intercept_index();
  for (std::size_t j = 0; j < recipe.terms.size(); ++j) {
    const Term& t = recipe.terms[j];
    const Column* col = t.kind == TermKind::intercept ? nullptr : &require_source(table, t.source);
    for (std::size_t i = 0; i < table.n_rows; ++i)
      dm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cell(t, col, i);
  }
  return dm;
}

double binary_indicator(const Term& t, const Column& col, std::size_t i) {
  if (binary_matches(t, col, i, t.level)) return 1.0;
  if (binary_matches(t, col, i, t.reference)) return 0.0;
  throw Error(ErrorKind::data, "column '" + col.name + "' row " + std::to_string(i + 1) + ": value '" +
                                   col.text[i] + "' is neither '" + t.reference + "' nor '" + t.level + "'");
}

double numeric_cell(const Term& t, const Column& col, std::size_t i) {
  const double v = col.value[i];
  if (std::isnan(v))
    throw Error(ErrorKind::data, "column '" + col.name + "' row " + std::to_string(i + 1) + ": non-numeric value '" +
                                     col.text[i] + "'");
  (void)t;
  return v;
}

}  // namespace

DesignMatrix apply_recipe(const DesignRecipe& recipe, const DataTable& table, std::vector<std::string>* warnings) {
  check_sources(recipe, table);

  DesignMatrix dm = build_design(recipe, table, [](const Term& t, const Column* col, std::size_t i) -> double {
    switch (t.kind) {
      case TermKind::intercept: return 1.0;
      case TermKind::missing_indicator: return col->missing[i] ? 1.0 : 0.0;
      case TermKind::centered_binary:
        return col->missing[i] ? 0.0 : binary_indicator(t, *col, i) - t.offset;
      case TermKind::scaled_numeric:
        return col->missing[i] ? 0.0 : (numeric_cell(t, *col, i) - t.center) / t.half_spread;
      case TermKind::dummy: return !col->missing[i] && col->text[i] == t.level ? 1.0 : 0.0;
    }
    return 0.0;
  });

  if (warnings) {
    std::map<std::string, std::set<std::string>> known;
    for (const auto& t : recipe.terms) {
      if (t.kind != TermKind::dummy) continue;
      known[t.source].insert(t.level);
      known[t.source].insert(t.reference);
    }
    for (const auto& [source, levels] : known) {
      const Column& col = table.at(source);
      std::set<std::string> unseen;
      for (std::size_t i = 0; i < table.n_rows; ++i)
        if (!col.missing[i] && !levels.count(col.text[i])) unseen.insert(col.text[i]);
      if (unseen.empty()) continue;
      std::string msg = "column '" + source + "': unseen level(s)";
      for (const auto& u : unseen) msg += " '" + u + "'";
      msg += " coded as all-zero dummies";
      warnings->push_back(msg);
    }
  }
  return dm;
}

DesignMatrix apply_recipe_raw(const DesignRecipe& recipe, const DataTable& table) {
  check_sources(recipe, table);
  return build_design(recipe, table, [](const Term& t, const Column* col, std::size_t i) -> double {
    switch (t.kind) {
      case TermKind::intercept: return 1.0;
      case TermKind::missing_indicator: return col->missing[i] ? 1.0 : 0.0;
      case TermKind::centered_binary: return col->missing[i] ? t.offset : binary_indicator(t, *col, i);
      case TermKind::scaled_numeric: return col->missing[i] ? t.center : numeric_cell(t, *col, i);
      case TermKind::dummy: return !col->missing[i] && col->text[i] == t.level ? 1.0 : 0.0;
    }
    return 0.0;
  });
}

Eigen::VectorXd transform_outcome(const DesignRecipe& recipe, const Eigen::VectorXd& y) {
  if (!recipe.outcome_transform) return y;
  const auto& ot = *recipe.outcome_transform;
  return (y.array() - ot.center) / ot.scale;
}

RawCoefficients unstandardize_coefficients(const DesignRecipe& recipe, const Eigen::VectorXd& beta_std,
                                           const Eigen::MatrixXd& V_std) {
  const auto J = static_cast<Eigen::Index>(recipe.size());
  if (beta_std.size() != J || V_std.rows() != J || V_std.cols() != J)
    throw Error(ErrorKind::invalid_argument, "coefficient dimension does not match the recipe (" +
                                                 std::to_string(beta_std.size()) + " vs " + std::to_string(J) + ")");

  const auto icpt = recipe.intercept_index();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(J, J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const Term& t = recipe.terms[static_cast<std::size_t>(j)];
    double shift = 0.0;
    if (t.kind == TermKind::scaled_numeric) {
      T(j, j) = 1.0 / t.half_spread;
      shift = t.center / t.half_spread;
    } else if (t.kind == TermKind::centered_binary) {
      shift = t.offset;
    }
    if (shift == 0.0) continue;
    if (!icpt)
      throw Error(ErrorKind::data, "term '" + t.name + "' is centered but the recipe has no intercept to absorb it");
    T(static_cast<Eigen::Index>(*icpt), j) = -shift;
  }

  RawCoefficients raw{T * beta_std, T * V_std * T.transpose()};
  if (recipe.outcome_transform) {
    const auto& ot = *recipe.outcome_transform;
    raw.beta *= ot.scale;
    raw.V *= ot.scale * ot.scale;
    if (ot.center != 0.0) {
      if (!icpt) throw Error(ErrorKind::data, "outcome is centered but the recipe has no intercept");
      raw.beta(static_cast<Eigen::Index>(*icpt)) += ot.center;
    }
  }
  return raw;
}

}  // namespace tglm
