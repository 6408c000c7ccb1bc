#pragma once

// JSON and CSV surfaces: measure and function specs, classification
// reports, Wegner experiment configs and reports, inequality CSVs.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracemono/anderson_wegner.hpp"
#include "tracemono/class_l.hpp"
#include "tracemono/monotone.hpp"
#include "tracemono/trace_laws.hpp"

namespace tracemono::io {

using Json = nlohmann::json;

/// %.17g, round-trips every double.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, "missing field '" + key + "'");
  return *it;
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

inline double number_field(const Json& obj, const std::string& key, const std::string& where) {
  return number(field(obj, key, where), where + "." + key);
}

inline double number_or(const Json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), where + "." + key);
}

inline std::int64_t integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::vector<std::pair<double, double>> pairs(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) schema_error(at, "expected a two-element array");
    out.emplace_back(number(j[i][0], at + "[0]"), number(j[i][1], at + "[1]"));
  }
  return out;
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LaplaceMeasure: {"atoms": [[t, w], ...], "density": {"kind": ..., ...}}

inline Json to_json(const PowerLawTerm& t) {
  return Json{{"alpha", t.alpha}, {"scale", t.scale}, {"decay", t.decay}};
}

inline Json to_json(const LaplaceMeasure& m) {
  Json atoms = Json::array();
  for (const Atom& a : m.atoms) atoms.push_back({a.t, a.w});
  Json out{{"atoms", atoms}};
  if (const auto* p = std::get_if<PowerLawDensity>(&m.density)) {
    if (p->terms.size() == 1) {
      Json d = to_json(p->terms[0]);
      d["kind"] = "power-law";
      out["density"] = d;
    } else {
      Json terms = Json::array();
      for (const PowerLawTerm& t : p->terms) terms.push_back(to_json(t));
      out["density"] = Json{{"kind", "power-law-sum"}, {"terms", terms}};
    }
  } else if (const auto* tab = std::get_if<TabulatedDensity>(&m.density)) {
    out["density"] = Json{{"kind", "tabulated"}, {"grid", tab->grid}, {"values", tab->values}};
  }
  return out;
}

inline PowerLawTerm power_term_from_json(const Json& j, const std::string& where) {
  return PowerLawTerm{detail::number_field(j, "alpha", where), detail::number_or(j, "scale", 1.0, where),
                      detail::number_or(j, "decay", 0.0, where)};
}

/// Parses and validates a measure; schema and domain violations are both
/// reported as ConfigError with the offending location.
inline LaplaceMeasure measure_from_json(const Json& j, const std::string& where = "measure") {
  if (!j.is_object()) detail::schema_error(where, "expected an object");
  LaplaceMeasure m;
  if (j.contains("atoms"))
    for (const auto& [t, w] : detail::pairs(j.at("atoms"), where + ".atoms")) m.atoms.push_back({t, w});
  if (j.contains("density") && !j.at("density").is_null()) {
    const Json& d = j.at("density");
    const std::string at = where + ".density";
    const Json& kind = detail::field(d, "kind", at);
    if (!kind.is_string()) detail::schema_error(at + ".kind", "expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "power-law") {
      m.density = PowerLawDensity{{power_term_from_json(d, at)}};
    } else if (k == "power-law-sum") {
      const Json& terms = detail::field(d, "terms", at);
      if (!terms.is_array()) detail::schema_error(at + ".terms", "expected an array");
      PowerLawDensity p;
      for (std::size_t i = 0; i < terms.size(); ++i)
        p.terms.push_back(power_term_from_json(terms[i], at + ".terms[" + std::to_string(i) + "]"));
      m.density = std::move(p);
    } else if (k == "tabulated") {
      m.density = TabulatedDensity{detail::numbers(detail::field(d, "grid", at), at + ".grid"),
                                   detail::numbers(detail::field(d, "values", at), at + ".values")};
    } else {
      detail::schema_error(at + ".kind", "unknown density kind '" + k + "'");
    }
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    detail::schema_error(where, e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Function specs for classification.

struct FunctionSpec {
  ScalarFunction function;
  Direction direction = Direction::decreasing;
  std::optional<ClassLFunction> class_l;
};

/// {"constructor": "power", "beta": b} | {"constructor": "exponential", "a": a}
/// | {"constructor": "shifted_power", "rho": r, "a": a}
/// | {"constructor": "hansen", "atoms": [[lambda, w], ...]}   (the 𝓓 form)
/// | {"constructor": "hansen_tilde", "atoms": [[lambda, w], ...]}  (the 𝓘 form)
/// | {"measure": {...}, "label": "..."}
/// Optional "direction": "decreasing" (default) | "increasing".
inline FunctionSpec function_spec_from_json(const Json& j) {
  const std::string where = "spec";
  if (!j.is_object()) detail::schema_error(where, "expected an object");
  FunctionSpec spec;
  auto wrap = [&](ClassLFunction g) {
    spec.function = ScalarFunction::from_class_l(g);
    spec.class_l = std::move(g);
  };
  try {
    if (j.contains("measure")) {
      std::string label = "measure";
      if (j.contains("label")) {
        if (!j.at("label").is_string()) detail::schema_error(where + ".label", "expected a string");
        label = j.at("label").get<std::string>();
      }
      wrap(ClassLFunction(measure_from_json(j.at("measure"), where + ".measure"), label));
    } else {
      const Json& c = detail::field(j, "constructor", where);
      if (!c.is_string()) detail::schema_error(where + ".constructor", "expected a string");
      const std::string name = c.get<std::string>();
      if (name == "power") {
        wrap(ClassLFunction::power(detail::number_field(j, "beta", where)));
      } else if (name == "exponential") {
        wrap(ClassLFunction::exponential(detail::number_field(j, "a", where)));
      } else if (name == "shifted_power") {
        wrap(ClassLFunction::shifted_power(detail::number_field(j, "rho", where), detail::number_field(j, "a", where)));
      } else if (name == "hansen" || name == "hansen_tilde") {
        HansenMeasure mu;
        for (const auto& [lambda, w] : detail::pairs(detail::field(j, "atoms", where), where + ".atoms"))
          mu.atoms.push_back({lambda, w});
        if (name == "hansen") {
          wrap(hansen_to_classL(mu.atoms));
        } else {
          spec.function = hansen_build(mu);
          spec.direction = Direction::increasing;
        }
      } else {
        detail::schema_error(where + ".constructor", "unknown constructor '" + name + "'");
      }
    }
  } catch (const DomainError& e) {
    detail::schema_error(where, e.what());
  }
  if (j.contains("direction")) {
    const Json& d = j.at("direction");
    if (d == "increasing") spec.direction = Direction::increasing;
    else if (d == "decreasing") spec.direction = Direction::decreasing;
    else detail::schema_error(where + ".direction", "expected \"increasing\" or \"decreasing\"");
  }
  return spec;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json to_json(const ClassificationReport& r) {
  Json loewner{{"verdict", r.loewner.refuted ? "refuted" : "consistent-with-monotone"},
               {"sets_run", r.loewner.sets_run}};
  if (r.loewner.refuted) {
    loewner["witness_points"] = r.loewner.points;
    loewner["witness_matrix_min_eig"] = r.loewner.min_eig;
  }
  Json pair{{"verdict", r.pair.violated ? "violated" : "no violation"}, {"trials_run", r.pair.trials_run}};
  if (r.pair.violated) {
    pair["trial_index"] = r.pair.trial_index;
    pair["trial_seed"] = r.pair.trial_seed;
    pair["A"] = matrix_json(r.pair.A);
    pair["B"] = matrix_json(r.pair.B);
    pair["margin"] = r.pair.margin;
  }
  return Json{{"label", r.label},
              {"direction", to_string(r.direction)},
              {"seed", r.seed},
              {"verdict", to_string(r.verdict)},
              {"loewner", loewner},
              {"pair_test", pair},
              {"tests_disagree", r.tests_disagree},
              {"in_class_L", r.in_class_L},
              {"class_L_construction", r.class_L_construction}};
}

// ---------------------------------------------------------------------------
// Wegner experiment config:
// {"L": 8 | [8, 16], "mesh_per_cell": 8, "coupling": 4, "intervals": [[lo, hi], ...],
//  "eta_pad": 0.1, "trials": 500, "master_seed": 1}

struct WegnerConfig {
  std::vector<int> box_sizes;
  int mesh_per_cell = 8;
  double coupling = 4.0;
  std::vector<EnergyInterval> intervals;
  double eta_pad = 0.1;
  int trials = 500;
  std::uint64_t master_seed = 1;
};

inline WegnerConfig wegner_config_from_json(const Json& j) {
  const std::string where = "config";
  WegnerConfig c;
  const Json& l = detail::field(j, "L", where);
  if (l.is_array()) {
    for (std::size_t i = 0; i < l.size(); ++i)
      c.box_sizes.push_back(static_cast<int>(detail::integer(l[i], where + ".L[" + std::to_string(i) + "]")));
  } else {
    c.box_sizes.push_back(static_cast<int>(detail::integer(l, where + ".L")));
  }
  if (c.box_sizes.empty()) detail::schema_error(where + ".L", "needs at least one box size");
  for (int L : c.box_sizes)
    if (L < 1) detail::schema_error(where + ".L", "box sizes must be positive");
  if (j.contains("mesh_per_cell")) c.mesh_per_cell = static_cast<int>(detail::integer(j.at("mesh_per_cell"), where + ".mesh_per_cell"));
  if (c.mesh_per_cell < 2) detail::schema_error(where + ".mesh_per_cell", "must be >= 2");
  c.coupling = detail::number_or(j, "coupling", c.coupling, where);
  if (!(c.coupling >= 0.0)) detail::schema_error(where + ".coupling", "must be >= 0");
  c.eta_pad = detail::number_or(j, "eta_pad", c.eta_pad, where);
  if (!(c.eta_pad >= 0.0)) detail::schema_error(where + ".eta_pad", "must be >= 0");
  for (const auto& [lo, hi] : detail::pairs(detail::field(j, "intervals", where), where + ".intervals")) {
    if (!(lo <= hi)) detail::schema_error(where + ".intervals", "each interval needs lo <= hi");
    c.intervals.push_back({lo, hi, c.eta_pad});
  }
  if (c.intervals.empty()) detail::schema_error(where + ".intervals", "needs at least one interval");
  c.trials = static_cast<int>(detail::integer(detail::field(j, "trials", where), where + ".trials"));
  if (c.trials < 1) detail::schema_error(where + ".trials", "must be >= 1");
  if (j.contains("master_seed")) {
    const Json& s = j.at("master_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      detail::schema_error(where + ".master_seed", "expected a nonnegative integer");
    c.master_seed = s.get<std::uint64_t>();
  }
  return c;
}

inline Json to_json(const WegnerConfig& c) {
  Json iv = Json::array();
  for (const EnergyInterval& i : c.intervals) iv.push_back({i.lo, i.hi});
  return Json{{"L", c.box_sizes},       {"mesh_per_cell", c.mesh_per_cell}, {"coupling", c.coupling},
              {"intervals", iv},        {"eta_pad", c.eta_pad},             {"trials", c.trials},
              {"master_seed", c.master_seed}};
}

inline Json to_json(const InequalityResult& r) {
  return Json{{"suite", r.suite}, {"seed", r.seed},   {"param", r.param},
              {"lhs", r.lhs},     {"rhs", r.rhs},     {"slack", r.slack},
              {"pass", r.pass},   {"log_domain", r.log_domain}, {"note", r.note}};
}

inline Json to_json(const WegnerReport& r, const WegnerConfig& cfg) {
  Json grid = Json::array();
  for (const WegnerRow& row : r.grid) {
    grid.push_back(Json{{"width", row.width},
                        {"lo", row.lo},
                        {"hi", row.hi},
                        {"L", row.L},
                        {"trials", row.trials},
                        {"hits", row.hits},
                        {"p_hat", row.p_hat},
                        {"ci_lo", row.ci_lo},
                        {"ci_hi", row.ci_hi},
                        {"expected_count", row.mean_count},
                        {"uninformative", row.uninformative}});
  }
  Json fit{{"points", r.fit.points}, {"slope", r.fit.slope}, {"intercept", r.fit.intercept}};
  fit["r_squared"] = r.fit.valid() ? Json(r.fit.r_squared) : Json(nullptr);
  Json failures = Json::array();
  for (const InequalityResult& f : r.first_failures) failures.push_back(to_json(f));
  return Json{{"config", to_json(cfg)},
              {"grid", grid},
              {"fit", fit},
              {"chain_checks", r.chain_checks},
              {"chain_failures", r.chain_failures},
              {"first_failures", failures}};
}

// ---------------------------------------------------------------------------
// CSV

inline void write_results_csv_header(std::ostream& out) { out << "suite,seed,n_or_beta_or_t,lhs,rhs,slack,pass\n"; }

inline void write_result_csv(std::ostream& out, const InequalityResult& r) {
  out << r.suite << ',' << r.seed << ',' << num(r.param) << ',' << num(r.lhs) << ',' << num(r.rhs) << ','
      << num(r.slack) << ',' << (r.pass ? 1 : 0) << '\n';
}

inline void write_wegner_csv(std::ostream& out, const WegnerReport& r) {
  out << "width,L,trials,hits,p_hat,ci_lo,ci_hi,mean_count\n";
  for (const WegnerRow& row : r.grid) {
    out << num(row.width) << ',' << row.L << ',' << row.trials << ',' << row.hits << ',' << num(row.p_hat) << ','
        << num(row.ci_lo) << ',' << num(row.ci_hi) << ',' << num(row.mean_count) << '\n';
  }
}

}  // namespace tracemono::io
