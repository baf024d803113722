#pragma once

// JSON scenario files: a group, named measure recipes, exponents, solver
// settings and one or more tasks (bounds, verify, demo, matrix, sweep).
// The runner only dispatches; every number it emits comes from a library call.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pqframe/bounds.hpp"
#include "pqframe/errors.hpp"
#include "pqframe/group.hpp"
#include "pqframe/measure.hpp"
#include "pqframe/theorems.hpp"
#include "pqframe/transform.hpp"

namespace pqframe {

/// Schema violation; `path` locates the offending field, e.g. "task.mu".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace scenario_detail {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
inline std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(join(path, key), "missing field");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ScenarioError(path, "expected a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ScenarioError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ScenarioError(path, "expected a string");
  return v.get<std::string>();
}

inline double number_or(const json& obj, const std::string& key, double dflt, const std::string& path) {
  return obj.contains(key) ? number(obj.at(key), join(path, key)) : dflt;
}

/// Coordinates as an integer (rank one) or an integer list; reduced mod n.
template <class P>
P coords(const json& v, const FiniteAbelianGroup& g, const std::string& path) {
  std::vector<std::int64_t> c;
  if (v.is_number_integer()) {
    c.push_back(v.get<std::int64_t>());
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) c.push_back(integer(v[i], join(path, i)));
  } else {
    throw ScenarioError(path, "expected coordinates (integer or integer list)");
  }
  if (c.size() != g.rank()) {
    throw ScenarioError(path, "expected " + std::to_string(g.rank()) + " coordinates, got " + std::to_string(c.size()));
  }
  return g.make<P>(std::move(c));
}

template <class P>
std::set<P> point_set(const json& v, const FiniteAbelianGroup& g, const std::string& path) {
  if (!v.is_array()) throw ScenarioError(path, "expected a list of coordinates");
  std::set<P> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.insert(coords<P>(v[i], g, join(path, i)));
  return out;
}

/// {"constant": c} or a list of [coords, value] pairs.
template <class P>
DensityFunction<P> density(const json& v, const FiniteAbelianGroup& g, const std::string& path) {
  try {
    if (v.is_object() && v.contains("constant")) {
      return DensityFunction<P>::constant(g.enumerate<P>(), number(v.at("constant"), join(path, "constant")));
    }
    const json& list = v.is_object() ? field(v, "values", path) : v;
    const std::string lpath = v.is_object() ? join(path, "values") : path;
    if (!list.is_array()) throw ScenarioError(lpath, "expected a list of [coords, value] pairs");
    std::map<P, double> vals;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& e = list[i];
      const auto epath = join(lpath, i);
      if (!e.is_array() || e.size() != 2) throw ScenarioError(epath, "expected [coords, value]");
      vals[coords<P>(e[0], g, join(epath, 0))] = number(e[1], join(epath, 1));
    }
    return DensityFunction<P>(std::move(vals));
  } catch (const DomainError& e) {
    throw ScenarioError(path, e.what());
  }
}

inline cplx complex_entry(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {number(v[0], join(path, 0)), number(v[1], join(path, 1))};
  throw ScenarioError(path, "expected a real number or [re, im]");
}

/// "identity", {"scale": c}, {"diagonal": [...]} or {"rows": [[...], ...]}.
inline Eigen::MatrixXcd operator_matrix(const json& v, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() != "identity") throw ScenarioError(path, "unknown operator \"" + v.get<std::string>() + "\"");
    if (rows != cols) throw ScenarioError(path, "identity needs equal support sizes");
    return Eigen::MatrixXcd::Identity(rows, cols);
  }
  if (!v.is_object()) throw ScenarioError(path, "expected an operator description");
  if (v.contains("scale")) {
    if (rows != cols) throw ScenarioError(path, "scaled identity needs equal support sizes");
    return complex_entry(v.at("scale"), join(path, "scale")) * Eigen::MatrixXcd::Identity(rows, cols);
  }
  if (v.contains("diagonal")) {
    const auto& d = v.at("diagonal");
    const auto dpath = join(path, "diagonal");
    if (!d.is_array() || static_cast<Eigen::Index>(d.size()) != rows || rows != cols) {
      throw ScenarioError(dpath, "expected " + std::to_string(rows) + " diagonal entries");
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
    for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = complex_entry(d[i], join(dpath, i));
    return m;
  }
  const auto& r = field(v, "rows", path);
  const auto rpath = join(path, "rows");
  if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != rows) {
    throw ScenarioError(rpath, "expected " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXcd m(rows, cols);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto ipath = join(rpath, i);
    if (!r[i].is_array() || static_cast<Eigen::Index>(r[i].size()) != cols) {
      throw ScenarioError(ipath, "expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t j = 0; j < r[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = complex_entry(r[i][j], join(ipath, j));
    }
  }
  return m;
}

inline int exit_code(const std::vector<VerificationReport>& reports) {
  bool failed = false, passed = false;
  for (const auto& r : reports) {
    failed = failed || r.outcome == Outcome::failed;
    passed = passed || r.outcome == Outcome::passed;
  }
  if (failed) return 1;
  if (!reports.empty() && !passed) return 3;
  return 0;
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace scenario_detail

/// Resolves named or inline measure recipes against one group.
class MeasureBook {
 public:
  using json = nlohmann::json;

  MeasureBook(FiniteAbelianGroup g, json defs) : group_(std::move(g)), defs_(std::move(defs)) {
    if (!defs_.is_null() && !defs_.is_object()) throw ScenarioError("measures", "expected an object of named recipes");
  }

  const FiniteAbelianGroup& group() const noexcept { return group_; }

  /// `ref` is a recipe name or an inline recipe object.
  template <class P>
  AtomicMeasure<P> get(const json& ref, const std::string& path) {
    using namespace scenario_detail;
    if (ref.is_string()) {
      const auto name = ref.get<std::string>();
      if (!defs_.is_object() || !defs_.contains(name)) throw ScenarioError(path, "unknown measure \"" + name + "\"");
      if (std::find(stack_.begin(), stack_.end(), name) != stack_.end()) {
        throw ScenarioError(join("measures", name), "recipe refers to itself");
      }
      stack_.push_back(name);
      auto out = build<P>(defs_.at(name), join("measures", name));
      stack_.pop_back();
      return out;
    }
    return build<P>(ref, path);
  }

 private:
  template <class P>
  AtomicMeasure<P> build(const json& r, const std::string& path) {
    using namespace scenario_detail;
    if (!r.is_object()) throw ScenarioError(path, "expected a measure recipe object");
    const std::string want = std::is_same_v<P, GroupElement> ? "group" : "dual";
    if (r.contains("side")) {
      const auto side = text(r.at("side"), join(path, "side"));
      if (side != "group" && side != "dual") throw ScenarioError(join(path, "side"), "expected \"group\" or \"dual\"");
      if (side != want) throw ScenarioError(join(path, "side"), "measure lives on the " + side + " side, " + want + " expected");
    }
    std::string kind = r.contains("kind") ? text(r.at("kind"), join(path, "kind")) : "atoms";
    try {
      AtomicMeasure<P> m = make<P>(kind, r, path);
      if (r.contains("scale") && kind != "haar") m = m.scaled(number(r.at("scale"), join(path, "scale")));
      return m;
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(path, e.what());
    }
  }

  template <class P>
  std::vector<AtomicMeasure<P>> operands(const json& r, const std::string& path) {
    using namespace scenario_detail;
    const auto& of = field(r, "of", path);
    const auto opath = join(path, "of");
    std::vector<AtomicMeasure<P>> out;
    if (of.is_array()) {
      if (of.empty()) throw ScenarioError(opath, "needs at least one operand");
      for (std::size_t i = 0; i < of.size(); ++i) out.push_back(get<P>(of[i], join(opath, i)));
    } else {
      out.push_back(get<P>(of, opath));
    }
    return out;
  }

  template <class P>
  AtomicMeasure<P> make(const std::string& kind, const json& r, const std::string& path) {
    using namespace scenario_detail;
    const auto& g = group_;
    if (kind == "atoms") {
      const auto& atoms = field(r, "atoms", path);
      const auto apath = join(path, "atoms");
      if (!atoms.is_array()) throw ScenarioError(apath, "expected a list of [coords, weight] pairs");
      AtomicMeasure<P> m(g);
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& a = atoms[i];
        const auto ipath = join(apath, i);
        if (!a.is_array() || a.size() != 2) throw ScenarioError(ipath, "expected [coords, weight]");
        try {
          m.add_mass(coords<P>(a[0], g, join(ipath, 0)), number(a[1], join(ipath, 1)));
        } catch (const DomainError& e) {
          throw ScenarioError(join(ipath, 1), e.what());
        }
      }
      return m;
    }
    if (kind == "haar") {
      const std::string norm = r.contains("normalization") ? text(r.at("normalization"), join(path, "normalization")) : "counting";
      HaarNormalization n;
      if (norm == "counting") n = HaarNormalization::counting;
      else if (norm == "probability") n = HaarNormalization::probability;
      else throw ScenarioError(join(path, "normalization"), "expected \"counting\" or \"probability\"");
      auto m = haar<P>(g, n);
      if (r.contains("scale")) m = m.scaled(number(r.at("scale"), join(path, "scale")));
      return m;
    }
    if (kind == "dirac") return dirac<P>(g, coords<P>(field(r, "at", path), g, join(path, "at")));
    if (kind == "convolve" || kind == "add") {
      auto ops = operands<P>(r, path);
      auto acc = ops.front();
      for (std::size_t i = 1; i < ops.size(); ++i) acc = kind == "add" ? add(acc, ops[i]) : convolve(acc, ops[i]);
      return acc;
    }
    if (kind == "translate") {
      auto base = get<P>(field(r, "of", path), join(path, "of"));
      return translate(base, coords<P>(field(r, "by", path), g, join(path, "by")));
    }
    if (kind == "restrict") {
      auto base = get<P>(field(r, "of", path), join(path, "of"));
      return restrict(base, point_set<P>(field(r, "to", path), g, join(path, "to")));
    }
    if (kind == "reweight") {
      auto base = get<P>(field(r, "of", path), join(path, "of"));
      return reweight(base, density<P>(field(r, "density", path), g, join(path, "density")));
    }
    if (kind == "scale") {
      return get<P>(field(r, "of", path), join(path, "of")).scaled(number(field(r, "by", path), join(path, "by")));
    }
    if (kind == "random") {
      const auto n = integer(field(r, "support_size", path), join(path, "support_size"));
      const auto seed = integer(field(r, "seed", path), join(path, "seed"));
      const double lo = number_or(r, "lo", 0.25, path), hi = number_or(r, "hi", 2.0, path);
      std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
      return random_measure<P>(g, static_cast<std::size_t>(n), rng, lo, hi);
    }
    throw ScenarioError(join(path, "kind"), "unknown measure kind \"" + kind + "\"");
  }

  FiniteAbelianGroup group_;
  json defs_;
  std::vector<std::string> stack_;
};

struct RunResult {
  nlohmann::json document;
  std::string csv;
  int exit_code = 0;
};

class Scenario {
 public:
  using json = nlohmann::json;

  static Scenario from_json(const json& doc, std::string fallback_name = "scenario") {
    using namespace scenario_detail;
    if (!doc.is_object()) throw ScenarioError("", "scenario must be a JSON object");
    Scenario s(doc);
    s.name_ = doc.contains("name") ? text(doc.at("name"), "name") : std::move(fallback_name);

    const auto& gj = field(doc, "group", "");
    if (!gj.is_array() || gj.empty()) throw ScenarioError("group", "expected a nonempty list of moduli");
    std::vector<std::int64_t> moduli;
    for (std::size_t i = 0; i < gj.size(); ++i) moduli.push_back(integer(gj[i], join("group", i)));
    try {
      s.group_ = FiniteAbelianGroup(moduli);
    } catch (const DomainError& e) {
      throw ScenarioError("group", e.what());
    }

    s.p_ = exponent(doc, "p");
    s.q_ = exponent(doc, "q");

    const auto& sj = field(doc, "solver", "");
    s.solver_.seed = static_cast<std::uint64_t>(integer(field(sj, "seed", "solver"), "solver.seed"));
    if (sj.contains("restarts")) s.solver_.restarts = static_cast<int>(integer(sj.at("restarts"), "solver.restarts"));
    if (sj.contains("max_iterations")) {
      s.solver_.max_iterations = static_cast<int>(integer(sj.at("max_iterations"), "solver.max_iterations"));
    }
    if (sj.contains("tolerance")) s.solver_.tolerance = number(sj.at("tolerance"), "solver.tolerance");
    try {
      s.solver_.validate();
    } catch (const DomainError& e) {
      throw ScenarioError("solver", e.what());
    }

    s.measures_ = doc.contains("measures") ? doc.at("measures") : json::object();
    if (doc.contains("tasks")) {
      const auto& t = doc.at("tasks");
      if (!t.is_array() || t.empty()) throw ScenarioError("tasks", "expected a nonempty list of tasks");
      s.tasks_ = t;
      s.tasks_path_ = "tasks";
    } else {
      s.tasks_ = json::array({field(doc, "task", "")});
      s.tasks_path_ = "task";
    }
    return s;
  }

  static Scenario load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("file", "cannot open " + path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ScenarioError("file", std::string("invalid JSON: ") + e.what());
    }
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return from_json(doc, stem);
  }

  const std::string& name() const noexcept { return name_; }
  const FiniteAbelianGroup& group() const noexcept { return group_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  const SolverConfig& solver() const noexcept { return solver_; }
  void override_seed(std::uint64_t seed) { solver_.seed = seed; }

  bool has_sweep() const {
    for (const auto& t : tasks_) {
      if (t.is_object() && t.contains("type") && t.at("type") == "sweep") return true;
    }
    return false;
  }

  /// Runs every task; reports are ordered by theorem id, then scenario id.
  RunResult run() const {
    RunResult out;
    std::vector<VerificationReport> reports;
    json tasks = json::array();
    std::ostringstream csv;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto path = tasks_path_ == "task" ? std::string("task") : scenario_detail::join(tasks_path_, i);
      auto part = run_task(tasks_[i], path, p_, q_, solver_, reports);
      tasks.push_back(part.document);
      csv << part.csv;
    }
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
      return std::tie(a.theorem, a.scenario) < std::tie(b.theorem, b.scenario);
    });
    json rep = json::array();
    for (const auto& r : reports) rep.push_back(to_json(r));
    out.exit_code = scenario_detail::exit_code(reports);
    out.document = {{"scenario", name_}, {"group", group_.moduli()}, {"p", p_}, {"q", q_},
                    {"seed", solver_.seed}, {"tasks", tasks}, {"reports", rep}, {"exit_code", out.exit_code}};
    out.csv = csv.str();
    return out;
  }

 private:
  explicit Scenario(json doc) : doc_(std::move(doc)), solver_(0) {}

  static double exponent(const json& doc, const std::string& key) {
    using namespace scenario_detail;
    const double v = number(field(doc, key, ""), key);
    if (!(v > 1.0) || !std::isfinite(v)) {
      throw ScenarioError(key, "exponent must lie in (1, inf), got " + csv_number(v));
    }
    return v;
  }

  VerifyConfig verify_config(double p, double q, const SolverConfig& solver) const {
    return VerifyConfig(PNormConfig(p, q), solver, name_);
  }

  RunResult run_task(const json& t, const std::string& path, double p, double q, const SolverConfig& solver,
                     std::vector<VerificationReport>& reports) const {
    using namespace scenario_detail;
    const auto type = text(field(t, "type", path), join(path, "type"));
    if (type == "bounds") return task_bounds(t, path, p, q, solver);
    if (type == "matrix") return task_matrix(t, path, p, q);
    if (type == "verify") {
      auto r = task_verify(t, path, p, q, solver);
      RunResult out;
      out.document = {{"type", "verify"}, {"report", to_json(r)}};
      out.csv = verify_csv(r);
      reports.push_back(std::move(r));
      return out;
    }
    if (type == "demo") return task_demo(t, path, p, q, solver, reports);
    if (type == "sweep") return task_sweep(t, path, p, q, solver, reports);
    throw ScenarioError(join(path, "type"), "unknown task type \"" + type + "\"");
  }

  RunResult task_bounds(const json& t, const std::string& path, double p, double q, const SolverConfig& solver) const {
    using namespace scenario_detail;
    MeasureBook book(group_, measures_);
    const auto mu = book.get<GroupElement>(field(t, "mu", path), join(path, "mu"));
    const auto nu = book.get<DualCharacter>(field(t, "nu", path), join(path, "nu"));
    const PNormConfig pq(p, q);
    const auto est = guarded([&] { return frame_bounds(mu, nu, pq, solver); }, path);
    RunResult out;
    out.document = {{"type", "bounds"}, {"bounds", to_json(est)},
                    {"bessel_certificate", bessel_certificate(mu, nu, pq)}};
    out.csv = "A,B,exact,p,q\n" + csv_number(est.lower) + "," + csv_number(est.upper) + "," +
              (est.exact ? "1" : "0") + "," + csv_number(p) + "," + csv_number(q) + "\n";
    return out;
  }

  RunResult task_matrix(const json& t, const std::string& path, double p, double q) const {
    using namespace scenario_detail;
    MeasureBook book(group_, measures_);
    const auto mu = book.get<GroupElement>(field(t, "mu", path), join(path, "mu"));
    const auto nu = book.get<DualCharacter>(field(t, "nu", path), join(path, "nu"));
    const auto m = guarded([&] { return analysis_matrix(mu, nu, PNormConfig(p, q)); }, path);
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.n_rows(); ++i) rows.push_back(vector_to_json(m.entries.row(i).transpose()));
    json rlab = json::array(), clab = json::array();
    for (const auto& r : m.rows) rlab.push_back(r.c);
    for (const auto& c : m.cols) clab.push_back(c.c);
    RunResult out;
    out.document = {{"type", "matrix"}, {"dual", rlab}, {"group", clab}, {"entries", rows}};
    out.csv = m.to_csv();
    return out;
  }

  template <class F>
  static auto guarded(F&& f, const std::string& path) -> decltype(f()) {
    try {
      return f();
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path, e.what());
    } catch (const std::domain_error& e) {
      throw ScenarioError(path, e.what());
    }
  }

  VerificationReport task_verify(const json& t, const std::string& path, double p, double q,
                                 const SolverConfig& solver) const {
    using namespace scenario_detail;
    const auto theorem = text(field(t, "theorem", path), join(path, "theorem"));
    const auto cfg = verify_config(p, q, solver);
    MeasureBook book(group_, measures_);
    const auto& g = group_;
    auto gm = [&](const char* key) { return book.get<GroupElement>(field(t, key, path), join(path, key)); };
    auto dm = [&](const char* key) { return book.get<DualCharacter>(field(t, key, path), join(path, key)); };
    auto samples = [&](int dflt) {
      return t.contains("samples") ? static_cast<int>(integer(t.at("samples"), join(path, "samples"))) : dflt;
    };
    auto op = [&](Eigen::Index rows, Eigen::Index cols) {
      return operator_matrix(field(t, "S", path), rows, cols, join(path, "S"));
    };
    auto rows_of = [](const auto& m) { return static_cast<Eigen::Index>(m.support_size()); };

    return guarded([&]() -> VerificationReport {
      if (theorem == "translation-invariance") {
        return verify_translation(gm("mu"), dm("nu"), coords<GroupElement>(field(t, "x", path), g, join(path, "x")),
                                  coords<DualCharacter>(field(t, "omega", path), g, join(path, "omega")), cfg);
      }
      if (theorem == "convolution") return verify_convolution_frame(gm("mu"), dm("nu"), dm("rho"), cfg);
      if (theorem == "density") {
        auto phi = t.contains("phi") ? density<GroupElement>(t.at("phi"), g, join(path, "phi"))
                                     : DensityFunction<GroupElement>::constant(g.elements(), 1.0);
        auto psi = t.contains("psi") ? density<DualCharacter>(t.at("psi"), g, join(path, "psi"))
                                     : DensityFunction<DualCharacter>::constant(g.characters(), 1.0);
        return verify_density(gm("mu"), dm("nu"), phi, psi, cfg);
      }
      if (theorem == "sum-split") return verify_sum_split(gm("mu"), gm("lambda"), dm("nu"), cfg);
      if (theorem == "restriction") {
        return verify_restriction(gm("mu"), dm("nu"), point_set<GroupElement>(field(t, "set", path), g, join(path, "set")), cfg);
      }
      if (theorem == "uniformity") {
        return verify_uniformity(gm("mu"), dm("nu"), point_set<GroupElement>(field(t, "set", path), g, join(path, "set")),
                                 coords<GroupElement>(field(t, "a", path), g, join(path, "a")), cfg);
      }
      if (theorem == "ac-ratio") return verify_ac_ratio(gm("mu"), dm("nu"), cfg);
      if (theorem == "translate-overlap") {
        return verify_translate_overlap(point_set<GroupElement>(field(t, "X", path), g, join(path, "X")),
                                        point_set<GroupElement>(field(t, "Y", path), g, join(path, "Y")), g, cfg);
      }
      if (theorem == "perturbation-hilbert") {
        const auto nu = dm("nu");
        const auto rho = dm("rho");
        return verify_perturbation_hilbert(gm("mu"), nu, rho, op(rows_of(nu), rows_of(rho)), cfg);
      }
      if (theorem == "perturbation-pq") {
        const auto mu = gm("mu");
        const auto lambda = gm("lambda");
        std::optional<PerturbationConstants> k;
        if (t.contains("constants")) k = constants(t.at("constants"), join(path, "constants"));
        return verify_perturbation_pq(mu, lambda, dm("nu"), op(rows_of(mu), rows_of(lambda)), k, cfg, samples(200));
      }
      if (theorem == "equivalence") {
        const auto mu = gm("mu");
        const auto lambda = gm("lambda");
        return verify_equivalence(mu, lambda, dm("nu"), op(rows_of(mu), rows_of(lambda)), cfg, samples(500));
      }
      if (theorem == "frame-operator") return frame_operator_spectrum(gm("mu"), dm("nu"), cfg).report;
      if (theorem == "spectrum-conversion") return verify_spectrum_conversion(gm("mu"), dm("nu"), cfg, samples(100));
      if (theorem == "duality") return verify_duality(gm("mu"), dm("nu"), cfg, samples(1000));
      if (theorem == "bessel-certificate") return verify_bessel_certificate(gm("mu"), dm("nu"), cfg);
      if (theorem == "local-finiteness") {
        return verify_local_finiteness(gm("mu"), dm("nu"),
                                       point_set<DualCharacter>(field(t, "window", path), g, join(path, "window")), cfg);
      }
      throw ScenarioError(join(path, "theorem"), "unknown theorem id \"" + theorem + "\"");
    }, path);
  }

  static PerturbationConstants constants(const json& c, const std::string& path) {
    using namespace scenario_detail;
    PerturbationConstants k;
    k.c = number_or(c, "C", 0.0, path);
    k.d = number_or(c, "D", 0.0, path);
    k.m = number_or(c, "M", 0.0, path);
    if (k.c < 0 || k.d < 0 || k.m < 0) throw ScenarioError(path, "constants must be nonnegative");
    if (c.contains("form")) {
      const auto f = text(c.at("form"), join(path, "form"));
      if (f == "quadratic") k.form = PerturbationConstants::Form::quadratic;
      else if (f != "linear") throw ScenarioError(join(path, "form"), "expected \"linear\" or \"quadratic\"");
    }
    return k;
  }

  static std::vector<int> k_range(const json& v, const std::string& path) {
    using namespace scenario_detail;
    std::vector<int> ks;
    if (v.is_number_integer()) {
      ks.push_back(static_cast<int>(v.get<std::int64_t>()));
    } else if (v.is_object()) {
      const auto from = integer(field(v, "from", path), join(path, "from"));
      const auto to = integer(field(v, "to", path), join(path, "to"));
      for (auto k = from; k <= to; ++k) ks.push_back(static_cast<int>(k));
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) ks.push_back(static_cast<int>(integer(v[i], join(path, i))));
    } else {
      throw ScenarioError(path, "expected an integer, a list, or {from, to}");
    }
    if (ks.empty()) throw ScenarioError(path, "empty k range");
    return ks;
  }

  RunResult task_demo(const json& t, const std::string& path, double p, double q, const SolverConfig& solver,
                      std::vector<VerificationReport>& reports) const {
    using namespace scenario_detail;
    const auto demo = text(field(t, "demo", path), join(path, "demo"));
    if (demo != "packing-blowup") throw ScenarioError(join(path, "demo"), "unknown demo \"" + demo + "\"");
    const auto ks = k_range(field(t, "k", path), join(path, "k"));
    BlowupOptions opt;
    if (t.contains("base")) opt.base = integer(t.at("base"), join(path, "base"));
    if (t.contains("g")) opt.g = integer(t.at("g"), join(path, "g"));
    if (t.contains("nu")) {
      const json recipe = t.at("nu");
      const json defs = measures_;
      const auto npath = join(path, "nu");
      opt.nu_recipe = [recipe, defs, npath](const FiniteAbelianGroup& g) {
        MeasureBook book(g, defs);
        return book.get<DualCharacter>(recipe, npath);
      };
    }
    GrowthTable table;
    auto rep = guarded([&] { return packing_blowup_demo(ks, opt, verify_config(p, q, solver), &table); }, path);
    json rows = json::array();
    for (const auto& r : table.rows) {
      rows.push_back({{"k", r.k}, {"g", r.g}, {"disjoint", r.disjoint}, {"A", r.lower}, {"B", r.upper},
                      {"ratio", r.ratio}, {"chain_ratio", r.chain_ratio}, {"floor", r.floor}});
    }
    RunResult out;
    out.document = {{"type", "demo"}, {"demo", demo}, {"base", opt.base}, {"table", rows}, {"report", to_json(rep)}};
    out.csv = table.to_csv();
    reports.push_back(std::move(rep));
    return out;
  }

  /// One row per grid point, grid keys varying last-fastest in sorted order.
  RunResult task_sweep(const json& t, const std::string& path, double p, double q, const SolverConfig& solver,
                       std::vector<VerificationReport>& reports) const {
    using namespace scenario_detail;
    const auto& grid = field(t, "grid", path);
    const auto gpath = join(path, "grid");
    if (!grid.is_object() || grid.empty()) throw ScenarioError(gpath, "grid must be a nonempty object");
    const auto& inner = field(t, "task", path);
    const auto ipath = join(path, "task");
    if (inner.is_object() && inner.contains("type") && inner.at("type") == "sweep") {
      throw ScenarioError(ipath, "sweeps do not nest");
    }
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (const auto& [key, vals] : grid.items()) {
      if (key != "p" && key != "q" && key != "seed" && key != "k") {
        throw ScenarioError(join(gpath, key), "unknown grid axis (expected p, q, seed or k)");
      }
      if (!vals.is_array() || vals.empty()) throw ScenarioError(join(gpath, key), "grid axis must be a nonempty list");
      std::vector<double> v;
      for (std::size_t i = 0; i < vals.size(); ++i) v.push_back(number(vals[i], join(join(gpath, key), i)));
      axes.emplace_back(key, std::move(v));
    }

    std::vector<std::map<std::string, double>> rows;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (bool done = false; !done;) {
      double pp = p, qq = q;
      SolverConfig sc = solver;
      json task = inner;
      std::map<std::string, double> row;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const double v = axes[a].second[idx[a]];
        row[axes[a].first] = v;
        if (axes[a].first == "p") pp = v;
        else if (axes[a].first == "q") qq = v;
        else if (axes[a].first == "seed") sc.seed = static_cast<std::uint64_t>(v);
        else task["k"] = static_cast<std::int64_t>(v);
      }
      if (!(pp > 1.0) || !std::isfinite(pp)) throw ScenarioError(join(gpath, "p"), "exponent must lie in (1, inf)");
      if (!(qq > 1.0) || !std::isfinite(qq)) throw ScenarioError(join(gpath, "q"), "exponent must lie in (1, inf)");
      std::vector<VerificationReport> local;
      auto part = run_task(task, ipath, pp, qq, sc, local);
      collect(part.document, row);
      for (auto& r : local) reports.push_back(std::move(r));
      rows.push_back(std::move(row));

      for (std::size_t a = axes.size();;) {
        if (a == 0) {
          done = true;
          break;
        }
        --a;
        if (++idx[a] < axes[a].second.size()) break;
        idx[a] = 0;
      }
    }

    // Grid columns first, then every reported quantity.
    std::vector<std::string> cols;
    for (const auto& ax : axes) cols.push_back(ax.first);
    std::set<std::string> rest;
    for (const auto& r : rows) {
      for (const auto& kv : r) {
        if (std::find(cols.begin(), cols.end(), kv.first) == cols.end()) rest.insert(kv.first);
      }
    }
    cols.insert(cols.end(), rest.begin(), rest.end());
    std::ostringstream csv;
    for (std::size_t c = 0; c < cols.size(); ++c) csv << (c ? "," : "") << cols[c];
    csv << "\n";
    json jrows = json::array();
    for (const auto& r : rows) {
      json jr = json::object();
      for (std::size_t c = 0; c < cols.size(); ++c) {
        auto it = r.find(cols[c]);
        csv << (c ? "," : "");
        if (it != r.end()) {
          csv << csv_number(it->second);
          jr[cols[c]] = it->second;
        }
      }
      csv << "\n";
      jrows.push_back(jr);
    }
    RunResult out;
    out.document = {{"type", "sweep"}, {"columns", cols}, {"rows", jrows}};
    out.csv = csv.str();
    return out;
  }

  /// Flattens the numeric content of a task document into one sweep row.
  static void collect(const json& doc, std::map<std::string, double>& row) {
    const auto type = doc.at("type").get<std::string>();
    auto flag = [](bool b) { return b ? 1.0 : 0.0; };
    if (type == "bounds") {
      const auto& b = doc.at("bounds");
      row["A"] = b.at("A_est").get<double>();
      row["B"] = b.at("B_est").get<double>();
      row["exact"] = flag(b.at("exact").get<bool>());
      row["iterations"] = b.at("iterations").get<double>();
      row["warning"] = flag(b.at("warning").get<bool>());
      row["bessel_certificate"] = doc.at("bessel_certificate").get<double>();
    } else if (type == "verify" || type == "demo") {
      const auto& r = doc.at("report");
      row["passed"] = flag(r.at("passed").get<bool>());
      row["inconclusive"] = flag(r.at("outcome") == "inconclusive");
      row["exact"] = flag(r.at("exact").get<bool>());
      if (type == "demo" && doc.at("table").size() == 1) {
        const auto& t = doc.at("table")[0];
        for (const char* k : {"A", "B", "ratio", "chain_ratio", "floor", "g"}) row[k] = t.at(k).get<double>();
        row["disjoint"] = flag(t.at("disjoint").get<bool>());
      } else {
        for (const auto& [k, v] : r.at("quantities").items()) {
          if (v.is_number()) row[k] = v.get<double>();
        }
      }
    }
  }

  static std::string verify_csv(const VerificationReport& r) {
    std::ostringstream os;
    os << "theorem,scenario,outcome,quantity,value\n";
    for (const auto& [k, v] : r.quantities) {
      os << r.theorem << "," << r.scenario << "," << to_string(r.outcome) << "," << k << ","
         << scenario_detail::csv_number(v) << "\n";
    }
    return os.str();
  }

  json doc_;
  std::string name_;
  FiniteAbelianGroup group_;
  double p_ = 2.0, q_ = 2.0;
  SolverConfig solver_;
  json measures_;
  json tasks_;
  std::string tasks_path_;
};

}  // namespace pqframe
