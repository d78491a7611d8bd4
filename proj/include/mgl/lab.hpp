#ifndef MGL_LAB_HPP
#define MGL_LAB_HPP

// Config-driven analyses, the verification corpus and truncation sweeps:
// JSON reports, CSV sidecars and a ledger of checks.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgl/chainspace.hpp"
#include "mgl/check.hpp"
#include "mgl/detail/parallel.hpp"
#include "mgl/detail/rng.hpp"
#include "mgl/generators.hpp"
#include "mgl/inequalities.hpp"
#include "mgl/isoperimetry.hpp"
#include "mgl/spectral.hpp"
#include "mgl/submarkov.hpp"
#include "mgl/tails.hpp"

namespace mgl::lab {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericalError = 3 };

// ---------------------------------------------------------------------------
// Formatting

/// Shortest round-trip decimal; non-finite values as nan, inf, -inf.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }
  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// JSON number, or null when not finite.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline json tuple_json(const DisjointTuple& t, const ProbabilitySpace& mu) {
  json sets = json::array();
  for (const auto& s : t.sets) {
    json labels = json::array();
    for (auto x : s) labels.push_back(mu.labels()[x]);
    sets.push_back(std::move(labels));
  }
  return sets;
}

inline std::string level_tag(const char* name, double v) { return std::string(name) + "=" + csv_number(v); }

// ---------------------------------------------------------------------------
// Ledger

struct LedgerEntry {
  std::string case_id;
  std::string check;
  std::string anchor;
  bool asserted = true;
  bool pass = true;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

class Ledger {
 public:
  void record(const std::string& case_id, const std::string& check, const std::string& anchor, const CheckResult& r,
              bool asserted = true, std::string note = {}) {
    entries_.push_back({case_id, check, anchor, asserted, r.pass, r.lhs, r.rhs, r.tolerance, std::move(note)});
  }

  void record_flag(const std::string& case_id, const std::string& check, const std::string& anchor, bool pass,
                   bool asserted = true, std::string note = {}) {
    LedgerEntry e{case_id, check, anchor, asserted, pass};
    e.note = std::move(note);
    entries_.push_back(std::move(e));
  }

  /// Runs `body` (returning a CheckResult); library errors become failed
  /// entries carrying the error text.
  template <class Body>
  void guarded(const std::string& case_id, const std::string& check, const std::string& anchor, Body&& body,
               bool asserted = true) {
    try {
      record(case_id, check, anchor, body(), asserted);
    } catch (const Error& e) {
      record_flag(case_id, check, anchor, false, asserted, e.what());
    }
  }

  void append(const Ledger& other) { entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end()); }

  void canonicalize() {
    std::stable_sort(entries_.begin(), entries_.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
      return std::tie(a.case_id, a.check) < std::tie(b.case_id, b.check);
    });
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::size_t asserted() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.asserted; }));
  }
  std::size_t failed() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.asserted && !e.pass; }));
  }
  bool passed() const { return failed() == 0; }

  json to_json() const {
    json a = json::array();
    for (const auto& e : entries_)
      a.push_back({{"case", e.case_id},
                   {"check", e.check},
                   {"anchor", e.anchor},
                   {"kind", e.asserted ? "asserted" : "diagnostic"},
                   {"pass", e.pass},
                   {"lhs", num(e.lhs)},
                   {"rhs", num(e.rhs)},
                   {"tolerance", num(e.tolerance)},
                   {"note", e.note}});
    return a;
  }

  json summary() const {
    return {{"entries", entries_.size()}, {"asserted", asserted()}, {"failed", failed()}, {"pass", passed()}};
  }

  std::string to_csv() const {
    CsvTable t({"case", "check", "anchor", "kind", "pass", "lhs", "rhs", "tolerance", "note"});
    for (const auto& e : entries_)
      t.row({e.case_id, e.check, e.anchor, e.asserted ? "asserted" : "diagnostic", e.pass ? "true" : "false",
             csv_number(e.lhs), csv_number(e.rhs), csv_number(e.tolerance), e.note});
    return t.str();
  }

 private:
  std::vector<LedgerEntry> entries_;
};

/// The entry with the largest violation lhs - rhs - tolerance.
inline CheckResult worst_of(const std::vector<CheckResult>& checks) {
  CheckResult worst = checks.front();
  double margin = -std::numeric_limits<double>::infinity();
  for (const auto& c : checks) {
    const double m = c.lhs - c.rhs - c.tolerance;
    if (!c.pass) return c;
    if (m > margin) {
      margin = m;
      worst = c;
    }
  }
  return worst;
}

// Anchor strings name the statement a check exercises.
namespace anchor {
inline const std::string invariance = "mu is invariant: mu P = mu";
inline const std::string ergodicity = "ergodicity by strong connectivity agrees with simplicity of eigenvalue 1";
inline const std::string lumping = "lumping preserves boundary flows of unions of blocks";
inline const std::string cheeger_upper = "easy higher-order Cheeger bound lambda_n <= 2 kappa_n";
inline const std::string cheeger_lower = "Cheeger lower bound kappa_2^2 / 2 <= lambda_2";
inline const std::string kappa_vs_lambda = "kappa_n >= lambda_n (diagnostic comparison)";
inline const std::string gap_tail = "spectral gap bounds tau(P,R) by theta' + (1 - theta')/R + 1/sqrt(R)";
inline const std::string symmetrization = "tau functional of P is dominated by that of P-hat pointwise";
inline const std::string power = "tau functional is monotone along odd powers of a reversible kernel";
inline const std::string schwarz = "tau(P,R) <= tail2(P,R) by Cauchy-Schwarz";
inline const std::string certificate = "indicator certificate from a disjoint tuple lower-bounds tau";
inline const std::string mean_zero_tail = "tail2(P,R)^2 <= top of spectrum of P-hat^2 on mean-zero functions, R >= 1";
inline const std::string defective_zero = "defective constant at C1 = 0 equals 1/mu_min";
inline const std::string defective_tight = "defective constant equals 1 once C1 reaches the Poincare constant";
inline const std::string weak_poincare = "weak Poincare alpha(r) is at most the Poincare constant";
inline const std::string lo_decomposition = "decomposition of mu(f^2) - ||f||_p^2 around the mean";
inline const std::string lo_split = "Var_phi(f) <= c_phi mu(g^2) + Var_phi(g), g = f - mu(f)";
inline const std::string lo_tightening = "defective Var_phi inequality tightens to the Poincare form";
inline const std::string pp_identity = "E(f,f) = mu(f^2) - mu((Pf)^2) for the form of P*P";
inline const std::string irreducible_norm = "trivial kernel of 1 - P*P iff ||P||_2 < 1";
inline const std::string norm_identity = "||P||_2^2 <= (C - 1)/C with C = 1/lambda_min(1 - P*P)";
inline const std::string tail_to_defective = "tail bound eps < 1 gives mu(f^2) <= 2/(1-eps) E + R^2/(1-eps)^2 mu(|f|)^2";
inline const std::string weak_finite = "irreducible non-conservative forms have finite weak Poincare alpha";
inline const std::string weak_diverges = "a closed Markov block makes weak Poincare alpha(r) diverge";
}  // namespace anchor

// ---------------------------------------------------------------------------
// Config reading with field paths

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw Error(Errc::ConfigError, path + ": " + what);
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
  return j;
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) config_fail(join(path, it.key()), "unknown key");
  }
}

inline double get_number(const json& j, const std::string& path, const std::string& key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    config_fail(join(path, key), "required number is missing");
  }
  const json& v = j.at(key);
  if (!v.is_number()) config_fail(join(path, key), "expected a number");
  return v.get<double>();
}

inline std::uint64_t get_count(const json& j, const std::string& path, const std::string& key,
                               std::optional<std::uint64_t> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    config_fail(join(path, key), "required integer is missing");
  }
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    config_fail(join(path, key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::string get_string(const json& j, const std::string& path, const std::string& key,
                              std::optional<std::string> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    config_fail(join(path, key), "required string is missing");
  }
  const json& v = j.at(key);
  if (!v.is_string()) config_fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) config_fail(join(path, key), "required list is missing");
  const json& v = j.at(key);
  if (!v.is_array()) config_fail(join(path, key), "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline void require_range(bool ok, const std::string& path, const std::string& what) {
  if (!ok) config_fail(path, what);
}

}  // namespace detail

/// Reads a "chain" stanza. Relative kernel paths resolve against `base`.
inline FamilySpec parse_family(const json& j, const std::string& path, std::uint64_t default_seed,
                               const std::filesystem::path& base = {}) {
  using F = FamilySpec::Family;
  using namespace detail;
  require_object(j, path);
  FamilySpec s;
  s.seed = default_seed;
  const std::string family = get_string(j, path, "family");
  const std::string fpath = join(path, "family");
  auto size = [&](std::uint64_t least) {
    const auto n = get_count(j, path, "size");
    require_range(n >= least, join(path, "size"), "must be at least " + std::to_string(least));
    s.size = static_cast<std::size_t>(n);
  };
  if (family == "birth_death_geometric") {
    reject_unknown(j, path, {"family", "size", "q"});
    s.family = F::birth_death_geometric;
    size(1);
    s.parameter = get_number(j, path, "q");
    require_range(s.parameter > 0.0 && s.parameter < 1.0, join(path, "q"), "must lie in (0, 1)");
  } else if (family == "birth_death_heavy") {
    reject_unknown(j, path, {"family", "size", "s"});
    s.family = F::birth_death_heavy;
    size(1);
    s.parameter = get_number(j, path, "s");
    require_range(s.parameter > 1.0, join(path, "s"), "must exceed 1");
  } else if (family == "graph_walk") {
    reject_unknown(j, path, {"family", "size", "laziness", "graph"});
    s.family = F::graph_walk;
    size(2);
    s.parameter = get_number(j, path, "laziness", 0.0);
    require_range(s.parameter >= 0.0 && s.parameter < 1.0, join(path, "laziness"), "must lie in [0, 1)");
    s.graph = get_string(j, path, "graph", std::string("cycle"));
    require_range(s.graph == "path" || s.graph == "cycle" || s.graph == "complete", join(path, "graph"),
                  "must be path, cycle or complete");
  } else if (family == "random_reversible") {
    reject_unknown(j, path, {"family", "size", "density", "seed"});
    s.family = F::random_reversible;
    size(1);
    s.parameter = get_number(j, path, "density");
    require_range(s.parameter > 0.0 && s.parameter <= 1.0, join(path, "density"), "must lie in (0, 1]");
    s.seed = get_count(j, path, "seed", default_seed);
  } else if (family == "cycle_rotation") {
    reject_unknown(j, path, {"family", "size"});
    s.family = F::cycle_rotation;
    size(1);
  } else if (family == "two_point") {
    reject_unknown(j, path, {"family", "p"});
    s.family = F::two_point;
    s.size = 2;
    s.parameter = get_number(j, path, "p");
    require_range(s.parameter > 0.0 && s.parameter < 1.0, join(path, "p"), "must lie in (0, 1)");
  } else if (family == "from_file") {
    reject_unknown(j, path, {"family", "path"});
    s.family = F::from_file;
    const std::filesystem::path p = get_string(j, path, "path");
    s.path = (p.is_relative() && !base.empty() ? base / p : p).string();
  } else {
    config_fail(fpath, "unknown family '" + family + "'");
  }
  return s;
}

struct InequalitySpec {
  PhiProfile phi = PhiProfile::power(1.0);
  std::vector<double> r_grid;
  std::vector<double> C1_grid;  ///< empty: {0, C/2, C}
};

struct SubMarkovTailSpec {
  double R = 2.0;
  std::optional<double> damping;
  std::optional<double> epsilon;  ///< caller-asserted tail bound
};

struct Tolerances {
  std::size_t restarts = 64;
  double rel_tol = 1e-10;
  std::size_t max_iterations = 500;
};

struct RunConfig {
  FamilySpec chain;
  bool spectrum = false;
  std::optional<std::size_t> kappa_n_max;
  std::optional<std::vector<double>> tau_R_grid;
  std::optional<InequalitySpec> inequalities;
  std::optional<SubMarkovTailSpec> submarkov_tail;
  std::uint64_t seed = 1;
  Tolerances tolerances;
  std::string output_dir;
  json echo;
};

inline RunConfig parse_run_config(const json& j, const std::filesystem::path& base = {}) {
  using namespace detail;
  require_object(j, "");
  reject_unknown(j, "", {"chain", "analyses", "seed", "tolerances", "output"});
  RunConfig c;
  c.echo = j;
  c.seed = get_count(j, "", "seed", 1);
  if (!j.contains("chain")) config_fail("chain", "required stanza is missing");
  c.chain = parse_family(j.at("chain"), "chain", c.seed, base);

  if (j.contains("tolerances")) {
    const json& t = require_object(j.at("tolerances"), "tolerances");
    reject_unknown(t, "tolerances", {"restarts", "rel_tol", "max_iterations"});
    c.tolerances.restarts = get_count(t, "tolerances", "restarts", c.tolerances.restarts);
    c.tolerances.rel_tol = get_number(t, "tolerances", "rel_tol", c.tolerances.rel_tol);
    c.tolerances.max_iterations = get_count(t, "tolerances", "max_iterations", c.tolerances.max_iterations);
    require_range(c.tolerances.rel_tol > 0.0, "tolerances.rel_tol", "must be positive");
    require_range(c.tolerances.max_iterations > 0, "tolerances.max_iterations", "must be positive");
  }
  if (j.contains("output")) {
    const json& o = require_object(j.at("output"), "output");
    reject_unknown(o, "output", {"dir"});
    c.output_dir = get_string(o, "output", "dir");
  }

  if (!j.contains("analyses")) config_fail("analyses", "required stanza is missing");
  const json& a = require_object(j.at("analyses"), "analyses");
  reject_unknown(a, "analyses", {"spectrum", "kappa", "tau_profile", "inequalities", "submarkov_tail"});
  if (a.contains("spectrum")) {
    if (!a.at("spectrum").is_boolean()) config_fail("analyses.spectrum", "expected true or false");
    c.spectrum = a.at("spectrum").get<bool>();
  }
  if (a.contains("kappa")) {
    const json& k = require_object(a.at("kappa"), "analyses.kappa");
    reject_unknown(k, "analyses.kappa", {"n_max"});
    const auto n = get_count(k, "analyses.kappa", "n_max");
    require_range(n >= 1, "analyses.kappa.n_max", "must be at least 1");
    c.kappa_n_max = static_cast<std::size_t>(n);
  }
  if (a.contains("tau_profile")) {
    const json& t = require_object(a.at("tau_profile"), "analyses.tau_profile");
    reject_unknown(t, "analyses.tau_profile", {"R_grid"});
    auto grid = get_numbers(t, "analyses.tau_profile", "R_grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require_range(grid[i] >= 0.0, "analyses.tau_profile.R_grid[" + std::to_string(i) + "]", "must be nonnegative");
      require_range(i == 0 || grid[i] > grid[i - 1], "analyses.tau_profile.R_grid[" + std::to_string(i) + "]",
                    "grid must increase");
    }
    c.tau_R_grid = std::move(grid);
  }
  if (a.contains("inequalities")) {
    const std::string ip = "analyses.inequalities";
    const json& q = require_object(a.at("inequalities"), ip);
    reject_unknown(q, ip, {"phi", "r_grid", "C1_grid"});
    InequalitySpec spec;
    if (q.contains("phi")) {
      const std::string pp = ip + ".phi";
      const json& phi = require_object(q.at("phi"), pp);
      const std::string fam = get_string(phi, pp, "family");
      if (fam == "power") {
        reject_unknown(phi, pp, {"family", "a"});
        const double e = get_number(phi, pp, "a");
        require_range(e > 0.0 && e <= 1.0, pp + ".a", "must lie in (0, 1]");
        spec.phi = PhiProfile::power(e);
      } else if (fam == "constant") {
        reject_unknown(phi, pp, {"family", "c"});
        const double v = get_number(phi, pp, "c");
        require_range(v > 0.0 && std::isfinite(v), pp + ".c", "must be positive");
        spec.phi = PhiProfile::constant(v);
      } else {
        config_fail(pp + ".family", "expected power or constant");
      }
    }
    spec.r_grid = q.contains("r_grid") ? get_numbers(q, ip, "r_grid") : std::vector<double>{0.01, 0.1, 0.5, 0.9};
    for (std::size_t i = 0; i < spec.r_grid.size(); ++i)
      require_range(spec.r_grid[i] > 0.0, ip + ".r_grid[" + std::to_string(i) + "]", "must be positive");
    if (q.contains("C1_grid")) {
      spec.C1_grid = get_numbers(q, ip, "C1_grid");
      for (std::size_t i = 0; i < spec.C1_grid.size(); ++i)
        require_range(spec.C1_grid[i] >= 0.0, ip + ".C1_grid[" + std::to_string(i) + "]", "must be nonnegative");
    }
    c.inequalities = std::move(spec);
  }
  if (a.contains("submarkov_tail")) {
    const std::string sp = "analyses.submarkov_tail";
    const json& s = require_object(a.at("submarkov_tail"), sp);
    reject_unknown(s, sp, {"R", "damping", "epsilon"});
    SubMarkovTailSpec spec;
    spec.R = get_number(s, sp, "R");
    require_range(spec.R >= 0.0, sp + ".R", "must be nonnegative");
    if (s.contains("damping")) {
      spec.damping = get_number(s, sp, "damping");
      require_range(*spec.damping > 0.0 && *spec.damping <= 1.0, sp + ".damping", "must lie in (0, 1]");
    }
    if (s.contains("epsilon")) {
      spec.epsilon = get_number(s, sp, "epsilon");
      require_range(*spec.epsilon >= 0.0, sp + ".epsilon", "must be nonnegative");
    }
    c.submarkov_tail = spec;
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, path + ": " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_json_file(path), std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Analyses

struct Report {
  json document;
  std::map<std::string, std::string> sidecars;  ///< file name -> CSV text
  Ledger ledger;
};

namespace detail {

inline TailOptions tail_options(const RunConfig& c) {
  TailOptions o;
  o.restarts = c.tolerances.restarts;
  o.seed = c.seed;
  o.ascent.rel_tol = c.tolerances.rel_tol;
  o.ascent.max_iterations = c.tolerances.max_iterations;
  return o;
}

inline mgl::detail::AscentOptions ascent_options(const RunConfig& c) {
  mgl::detail::AscentOptions o;
  o.rel_tol = c.tolerances.rel_tol;
  o.max_iterations = c.tolerances.max_iterations;
  return o;
}

/// Nonnegative f with mu(f^2) = 1, drawn from `rng`.
inline Vector unit_nonneg(const ProbabilitySpace& mu, mgl::detail::Rng& rng) {
  Vector f(static_cast<Eigen::Index>(mu.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.bernoulli(0.75) ? std::abs(rng.normal()) : 0.0;
  if (f.isZero(0.0)) f[0] = 1.0;
  return f / std::sqrt(mu.norm_sq(f));
}

inline Vector gaussian(std::size_t n, mgl::detail::Rng& rng) {
  Vector f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.normal();
  return f;
}

}  // namespace detail

inline void analyze_spectrum(const Kernel& P, const std::string& id, json& results, Ledger& ledger) {
  json out;
  ledger.record(id, "spectrum.invariance", anchor::invariance,
                make_check(invariance_defect(P, P.space()), 0.0, 1e-9));
  const SpectralSummary s = lambda_ladder(P);
  bool ergodic = false;
  try {
    ergodic = check_ergodic(P).ergodic;
    ledger.record_flag(id, "spectrum.ergodicity_methods_agree", anchor::ergodicity, true);
  } catch (const Error& e) {
    ledger.record_flag(id, "spectrum.ergodicity_methods_agree", anchor::ergodicity, false, true, e.what());
    ergodic = is_strongly_connected(P);
  }
  out["ergodic"] = ergodic;
  out["reversible"] = is_reversible(P);
  json ladder = json::array();
  for (double l : s.ladder) ladder.push_back(num(l));
  out["ladder"] = std::move(ladder);
  if (ergodic) {
    const GapResult g = spectral_gap(P);
    out["gap"] = num(g.gap);
    out["theta"] = num(g.theta);
    out["poincare_C"] = num(g.poincare_C);
    out["degenerate"] = g.degenerate;
  } else {
    out["gap"] = num(s.ladder.size() > 1 ? s.ladder[1] : 0.0);
    out["theta"] = num(s.theta);
    out["poincare_C"] = nullptr;
    out["degenerate"] = true;
  }
  results["spectrum"] = std::move(out);
}

inline void analyze_kappa(const Kernel& P, std::size_t n_max, bool witnesses, const std::string& id, json& results,
                          std::map<std::string, std::string>& sidecars, Ledger& ledger) {
  const std::size_t top = std::min(n_max, P.size());
  const SpectralSummary s = lambda_ladder(P);
  CsvTable csv({"n", "kappa", "exact", "lambda", "ratio", "sqrt_ratio", "lower_bound"});
  json rows = json::array();
  for (std::size_t n = 1; n <= top; ++n) {
    const KappaResult k = kappa_best(P, n);
    const double lambda = s.ladder[n - 1];
    const double c = 1.0 / std::pow(static_cast<double>(n), 4);
    const double lower = c * c * k.kappa * k.kappa;
    json row{{"n", n},
             {"kappa", num(k.kappa)},
             {"exact", k.exact},
             {"lambda", num(lambda)},
             {"ratio", num(lambda / k.kappa)},
             {"sqrt_ratio", num(std::sqrt(std::max(0.0, lambda)) / k.kappa)},
             {"lower_bound", num(lower)}};
    if (witnesses) row["witness"] = tuple_json(k.witness, P.space());
    rows.push_back(std::move(row));
    csv.row({std::to_string(n), csv_number(k.kappa), k.exact ? "true" : "false", csv_number(lambda),
             csv_number(lambda / k.kappa), csv_number(std::sqrt(std::max(0.0, lambda)) / k.kappa), csv_number(lower)});
    if (n < 2) continue;
    const std::string tag = ".n" + std::to_string(n);
    ledger.record(id, "kappa.cheeger_upper" + tag, anchor::cheeger_upper, make_check(lambda, 2.0 * k.kappa, 1e-9));
    if (n == 2 && k.exact)
      ledger.record(id, "kappa.cheeger_lower" + tag, anchor::cheeger_lower,
                    make_check(k.kappa * k.kappa / 2.0, lambda, 1e-9));
    ledger.record(id, "kappa.kappa_ge_lambda" + tag, anchor::kappa_vs_lambda, make_check(lambda, k.kappa, 0.0), false);
  }
  results["kappa"] = std::move(rows);
  sidecars["kappa.csv"] = csv.str();
}

inline void analyze_tau(const Kernel& P, const std::vector<double>& grid, const RunConfig& cfg, bool witnesses,
                        const std::string& id, json& results, std::map<std::string, std::string>& sidecars,
                        Ledger& ledger) {
  const TailOptions opts = detail::tail_options(cfg);
  const TailProfile prof = tau_profile(P, grid, opts);
  const bool markov_ergodic = P.is_markov() && check_invariance(P) && is_strongly_connected(P);
  const bool reversible = P.is_markov() && is_reversible(P);
  std::optional<KappaResult> tuple;
  if (P.size() >= 2) tuple = kappa_best(P, 2);
  CsvTable csv({"R", "tau", "tail2", "method"});
  json points = json::array();
  for (const TailPoint& t : prof.points) {
    const TailPoint t2 = tail2(P, t.R, opts);
    json pt{{"R", num(t.R)},
            {"tau", num(t.value)},
            {"tail2", num(t2.value)},
            {"method", tail_method_name(t.method)},
            {"certified_lower", t.certified_lower}};
    if (witnesses) pt["witness"] = vector_json(t.witness);
    const std::string tag = "." + level_tag("R", t.R);
    ledger.record(id, "tau.schwarz_dominance" + tag, anchor::schwarz, make_check(t.value, t2.value, 1e-9));
    if (tuple) {
      const TailCertificate cert = tail_cert_from_tuple(P, tuple->witness, t.R);
      pt["certificate"] = num(cert.bound);
      ledger.record(id, "tau.certificate" + tag, anchor::certificate, make_check(cert.bound, t.value, 1e-9));
    }
    if (markov_ergodic && t.R > 1.0) {
      const GapTailBound g = gap_tail_bound_check(P, t.R, opts);
      pt["gap_bound"] = num(g.bound);
      ledger.record(id, "tau.gap_bound" + tag, anchor::gap_tail, g.check);
    }
    if (markov_ergodic && reversible && t.R >= 1.0) {
      const MeanZeroTailResult m = mean_zero_tail_check(P, t.R, opts);
      ledger.record(id, "tau.mean_zero_bound" + tag, anchor::mean_zero_tail, m.check);
    }
    points.push_back(std::move(pt));
    csv.row({csv_number(t.R), csv_number(t.value), csv_number(t2.value), tail_method_name(t.method)});
  }
  results["tau_profile"] = std::move(points);
  sidecars["tau_profile.csv"] = csv.str();
}

inline void analyze_inequalities(const Kernel& P, const InequalitySpec& spec, const RunConfig& cfg, bool witnesses,
                                 const std::string& id, json& results, std::map<std::string, std::string>& sidecars,
                                 Ledger& ledger) {
  json out;
  const double C = poincare_constant(P);
  const double mu_min = P.space().mu_min();
  out["poincare_C"] = num(C);
  out["phi"] = {{"family", spec.phi.family() == PhiProfile::Family::power ? "power" : "constant"},
                {"parameter", spec.phi.parameter()}};
  out["c_phi"] = num(c_phi(spec.phi));

  RatioOptions ropts;
  ropts.seed = cfg.seed;
  ropts.ascent = detail::ascent_options(cfg);
  const RatioEstimate lo = lo_best_constant(P, spec.phi, ropts);
  const RatioEstimate ls = logsobolev_constant(P, ropts);
  out["lo_best_constant"] = num(lo.estimate);
  out["logsobolev_constant"] = num(ls.estimate);
  if (witnesses) {
    out["lo_witness"] = vector_json(lo.witness);
    out["logsobolev_witness"] = vector_json(ls.witness);
  }

  DefectiveOptions dopts;
  dopts.seed = cfg.seed;
  dopts.ascent = detail::ascent_options(cfg);
  std::vector<double> c1s = spec.C1_grid.empty() ? std::vector<double>{0.0, C / 2, C} : spec.C1_grid;
  json defective = json::array();
  for (double c1 : c1s) {
    const DefectiveResult d = defective_c2(P, c1, dopts);
    json row{{"C1", num(c1)}, {"C2", num(d.C2)}, {"certified", d.certified}};
    if (witnesses) row["witness"] = vector_json(d.witness);
    defective.push_back(std::move(row));
  }
  out["defective"] = std::move(defective);
  ledger.record(id, "inequalities.defective_C1_zero", anchor::defective_zero,
                make_check(defective_c2(P, 0.0, dopts).C2, 1.0 / mu_min, 0.0));
  {
    const double at_C = defective_c2(P, C, dopts).C2;
    ledger.record(id, "inequalities.defective_at_poincare", anchor::defective_tight,
                  CheckResult{at_C, 1.0, 1e-9, std::abs(at_C - 1.0) <= 1e-9});
  }

  WeakPoincareOptions wopts;
  wopts.seed = cfg.seed;
  wopts.ascent = detail::ascent_options(cfg);
  CsvTable alpha_csv({"r", "value"}), beta_csv({"r", "value"});
  json weak = json::array(), super = json::array();
  for (double r : spec.r_grid) {
    const WeakPoincareResult w = weak_poincare_alpha(P, r, wopts);
    const double beta = super_poincare_beta(P, r, dopts);
    weak.push_back({{"r", num(r)}, {"alpha", num(w.alpha)}});
    super.push_back({{"r", num(r)}, {"beta", num(beta)}});
    alpha_csv.row({csv_number(r), csv_number(w.alpha)});
    beta_csv.row({csv_number(r), csv_number(beta)});
    ledger.record(id, "inequalities.weak_below_poincare." + level_tag("r", r), anchor::weak_poincare,
                  make_check(w.alpha, C, 1e-9));
  }
  out["weak_poincare"] = std::move(weak);
  out["super_poincare"] = std::move(super);
  sidecars["alpha.csv"] = alpha_csv.str();
  sidecars["beta.csv"] = beta_csv.str();

  mgl::detail::Rng rng(mgl::detail::mix_seed(cfg.seed, 0x1E));
  std::vector<CheckResult> dec, split;
  for (int k = 0; k < 200; ++k) {
    const Vector f = detail::gaussian(P.size(), rng);
    dec.push_back(lo_decomposition_check(P.space(), f, 1.0 + 0.9999 * rng.uniform()));
    split.push_back(lo_split_check(P.space(), f, spec.phi));
  }
  ledger.record(id, "inequalities.lo_decomposition", anchor::lo_decomposition, worst_of(dec));
  ledger.record(id, "inequalities.lo_split", anchor::lo_split, worst_of(split));
  if (P.size() <= 3) {
    const LoDefectiveCertificate cert = lo_certified_defective_c2(P, spec.phi, C);
    out["lo_defective_certificate"] = {{"C1", num(C)}, {"C2", num(cert.C2)}, {"grid_max", num(cert.grid_max)},
                                       {"slack", num(cert.slack)}};
    std::vector<CheckResult> tight;
    for (int k = 0; k < 200; ++k)
      tight.push_back(lo_tightening_check(P, spec.phi, C, cert.C2, detail::gaussian(P.size(), rng)));
    ledger.record(id, "inequalities.lo_tightening", anchor::lo_tightening, worst_of(tight));
  }
  results["inequalities"] = std::move(out);
}

inline void analyze_submarkov_tail(const Kernel& P, const SubMarkovTailSpec& spec, const RunConfig& cfg,
                                   const std::string& id, json& results, Ledger& ledger) {
  Kernel K = P;
  if (spec.damping) K = damped(P, Vector::Constant(static_cast<Eigen::Index>(P.size()), *spec.damping));
  else if (P.is_markov())
    throw Error(Errc::ConfigError, "analyses.submarkov_tail.damping: required for a Markov chain");
  SubMarkovTailOptions o;
  o.seed = cfg.seed;
  if (spec.epsilon) {
    o.epsilon = spec.epsilon;
    o.epsilon_assumed = true;
  }
  const SubMarkovTailReport r = submarkov_tail_pipeline(K, spec.R, o);
  results["submarkov_tail"] = {{"R", num(r.R)},
                               {"epsilon", num(r.epsilon)},
                               {"certified", r.certified},
                               {"C1", num(r.C1)},
                               {"C2", num(r.C2)},
                               {"defective_samples", r.defective_samples},
                               {"l1_contraction", r.l1_contraction},
                               {"op_norm2", num(r.op_norm2)},
                               {"lambda_min", num(r.lambda_min)},
                               {"kernel_irreducible", r.kernel_irreducible},
                               {"C", num(r.C)}};
  ledger.record(id, "submarkov_tail.defective", anchor::tail_to_defective, r.defective, r.l1_contraction,
                r.l1_contraction ? "" : "mu P <= mu fails; derivation does not apply");
  ledger.record(id, "submarkov_tail.norm", anchor::norm_identity, r.norm);
}

/// Runs every requested analysis. Library errors inside one analysis are
/// recorded as a failed ledger entry and an "error" field; config errors
/// propagate.
inline Report analyze(const RunConfig& cfg, bool witnesses) {
  Report rep;
  const Kernel P = make_family(cfg.chain);
  const std::string id = "config";
  json results = json::object();
  auto run = [&](const char* name, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      if (e.code() == Errc::ConfigError) throw;
      results[name] = {{"error", e.what()}};
      rep.ledger.record_flag(id, std::string(name) + ".completed", "analysis ran to completion", false, true, e.what());
    }
  };
  if (cfg.spectrum) run("spectrum", [&] { analyze_spectrum(P, id, results, rep.ledger); });
  if (cfg.kappa_n_max)
    run("kappa", [&] { analyze_kappa(P, *cfg.kappa_n_max, witnesses, id, results, rep.sidecars, rep.ledger); });
  if (cfg.tau_R_grid)
    run("tau_profile", [&] { analyze_tau(P, *cfg.tau_R_grid, cfg, witnesses, id, results, rep.sidecars, rep.ledger); });
  if (cfg.inequalities)
    run("inequalities",
        [&] { analyze_inequalities(P, *cfg.inequalities, cfg, witnesses, id, results, rep.sidecars, rep.ledger); });
  if (cfg.submarkov_tail)
    run("submarkov_tail", [&] { analyze_submarkov_tail(P, *cfg.submarkov_tail, cfg, id, results, rep.ledger); });
  rep.ledger.canonicalize();
  rep.sidecars["ledger.csv"] = rep.ledger.to_csv();

  json doc;
  doc["tool"] = "mgl";
  doc["schema_version"] = 1;
  doc["config"] = cfg.echo;
  doc["chain"] = {{"family", family_name(cfg.chain.family)},
                  {"states", P.size()},
                  {"kind", P.is_markov() ? "markov" : "submarkov"},
                  {"labels", P.space().labels()}};
  doc["results"] = std::move(results);
  doc["ledger"] = rep.ledger.to_json();
  doc["summary"] = rep.ledger.summary();
  json files = json::array();
  for (const auto& [name, text] : rep.sidecars) files.push_back(name);
  doc["sidecars"] = std::move(files);
  rep.document = std::move(doc);
  return rep;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, path.string() + ": cannot write");
  out << text;
}

/// JSON report to `out_dir` (with CSV sidecars) or, without a directory, to
/// `out`.
inline int cmd_analyze(const std::string& config_path, std::string out_dir, bool witnesses, std::ostream& out,
                       std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    const Report rep = analyze(cfg, witnesses);
    const std::string text = rep.document.dump(2) + "\n";
    if (out_dir.empty()) {
      out << text;
    } else {
      std::filesystem::create_directories(out_dir);
      write_text(std::filesystem::path(out_dir) / "report.json", text);
      for (const auto& [name, csv] : rep.sidecars) write_text(std::filesystem::path(out_dir) / name, csv);
    }
    err << "analyze: " << rep.ledger.entries().size() << " checks, " << rep.ledger.failed() << " failed\n";
    return rep.ledger.passed() ? kPass : kCheckFailure;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == Errc::ConfigError || e.code() == Errc::ParseError ? kConfigError : kNumericalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kNumericalError;
  }
}

// ---------------------------------------------------------------------------
// Verification corpus

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t cases = 50;
  std::optional<double> perturb;
};

struct CorpusCase {
  std::string id;
  std::string kind;
  Kernel kernel;
};

inline constexpr std::size_t kCorpusKinds = 10;

inline CorpusCase make_case(std::size_t index, const VerifyOptions& opts, std::size_t width = 3) {
  const std::uint64_t s = mgl::detail::mix_seed(opts.seed, index);
  mgl::detail::Rng rng(s);
  auto pick = [&rng](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.below(hi - lo + 1)); };
  std::string kind;
  Kernel P = two_point(0.5);
  switch (index % kCorpusKinds) {
    case 0:
      kind = "random_reversible";
      P = random_reversible(pick(3, 8), 0.5, s);
      break;
    case 1:
      kind = "random_invariant";
      P = random_invariant(pick(3, 7), 0.5, s);
      break;
    case 2:
      kind = "birth_death_geometric";
      P = birth_death_geometric(pick(5, 24), rng.uniform(0.3, 0.7));
      break;
    case 3:
      kind = "birth_death_heavy";
      P = birth_death_heavy(pick(5, 24), rng.uniform(1.5, 3.0));
      break;
    case 4: {
      kind = "graph_walk";
      const std::size_t n = pick(3, 8);
      const std::size_t g = pick(0, 2);
      P = graph_walk(n, g == 0 ? path_edges(n) : g == 1 ? cycle_edges(n) : complete_edges(n), rng.uniform(0.0, 0.5));
      break;
    }
    case 5:
      kind = "cycle_rotation";
      P = cycle_rotation(pick(3, 6));
      break;
    case 6:
      kind = "two_point";
      P = two_point(rng.uniform(0.05, 0.5));
      break;
    case 7:
      kind = "substochastic_small";
      P = random_substochastic(pick(2, 3), 0.8, s);
      break;
    case 8:
      kind = "substochastic";
      P = random_substochastic(pick(4, 7), 0.6, s);
      break;
    default:
      kind = "sparse_reversible";
      P = random_reversible(pick(4, 8), 0.25, s);
      break;
  }
  if (opts.perturb && *opts.perturb > 0.0) P = perturb_kernel(P, *opts.perturb, mgl::detail::mix_seed(s, 0xBAD));
  std::string num_text = std::to_string(index);
  if (num_text.size() < width) num_text.insert(0, width - num_text.size(), '0');
  return CorpusCase{"c" + num_text + "-" + kind, kind, std::move(P)};
}

namespace detail {

inline void verify_markov(const Kernel& P, const std::string& id, std::uint64_t seed, Ledger& L) {
  const ProbabilitySpace& mu = P.space();
  const std::size_t N = P.size();
  mgl::detail::Rng rng(mgl::detail::mix_seed(seed, 0xC0FFEE));
  L.record(id, "chainspace.invariance", anchor::invariance, make_check(invariance_defect(P, mu), 0.0, 1e-9));
  bool ergodic = false;
  L.guarded(id, "chainspace.ergodicity_methods_agree", anchor::ergodicity, [&] {
    ergodic = check_ergodic(P).ergodic;
    return CheckResult{0.0, 0.0, 0.0, true};
  });
  L.guarded(id, "chainspace.lumping_cut", anchor::lumping, [&] {
    const std::size_t k = std::min<std::size_t>(N, 2 + rng.below(3));
    Partition pi{std::vector<StateSet>(k)};
    for (std::size_t x = 0; x < N; ++x) pi.blocks[x < k ? x : rng.below(k)].push_back(x);
    for (auto& b : pi.blocks) std::sort(b.begin(), b.end());
    const CoarseGrained cg = coarse_grain(P, pi);
    return make_check(std::abs(boundary_flow(P, pi.blocks[0]) - boundary_flow(cg.kernel, {0})), 0.0, 1e-13);
  });
  const bool reversible = is_reversible(P);

  // Isoperimetry against the spectral ladder.
  std::optional<KappaResult> pair;
  L.guarded(id, "kappa.cheeger_upper.n2", anchor::cheeger_upper, [&] {
    const SpectralSummary s = lambda_ladder(P);
    KappaOptions ko;
    ko.state_cap = 8;
    const std::size_t top = std::min<std::size_t>(N, N <= 8 ? 4 : 2);
    CheckResult first{};
    for (std::size_t n = 2; n <= top; ++n) {
      const KappaResult k = kappa_best(P, n, ko);
      if (n == 2) pair = k;
      const CheckResult upper = make_check(s.ladder[n - 1], 2.0 * k.kappa, 1e-9);
      const std::string tag = ".n" + std::to_string(n);
      if (n == 2) first = upper;
      else L.record(id, "kappa.cheeger_upper" + tag, anchor::cheeger_upper, upper);
      if (n == 2 && k.exact)
        L.record(id, "kappa.cheeger_lower" + tag, anchor::cheeger_lower,
                 make_check(k.kappa * k.kappa / 2.0, s.ladder[1], 1e-9));
      L.record(id, "kappa.kappa_ge_lambda" + tag, anchor::kappa_vs_lambda, make_check(s.ladder[n - 1], k.kappa, 0.0),
               false);
    }
    return first;
  });

  // Tail functionals.
  TailOptions topts;
  topts.seed = seed;
  topts.restarts = 16;
  L.guarded(id, "tail.symmetrization", anchor::symmetrization, [&] {
    std::vector<CheckResult> v;
    for (int k = 0; k < 20; ++k) v.push_back(pointwise_symmetrization_check(P, unit_nonneg(mu, rng), 0.25 * (k % 9)));
    return worst_of(v);
  });
  if (reversible)
    L.guarded(id, "tail.power_monotonicity", anchor::power, [&] {
      std::vector<CheckResult> v;
      for (int k = 0; k < 20; ++k)
        v.push_back(pointwise_power_monotonicity_check(P, unit_nonneg(mu, rng), 0.25 * (k % 9), 1 + k % 2));
      return worst_of(v);
    });
  for (double R : {0.5, 1.5}) {
    const std::string tag = "." + level_tag("R", R);
    std::optional<TailPoint> t;
    L.guarded(id, "tail.schwarz_dominance" + tag, anchor::schwarz, [&] {
      t = tau(P, R, topts);
      return make_check(t->value, tail2(P, R, topts).value, 1e-9);
    });
    if (t && pair)
      L.guarded(id, "tail.certificate" + tag, anchor::certificate,
                [&] { return make_check(tail_cert_from_tuple(P, pair->witness, R).bound, t->value, 1e-9); });
  }
  if (ergodic) {
    for (double R : {2.0, 4.0})
      L.guarded(id, "tail.gap_bound." + level_tag("R", R), anchor::gap_tail,
                [&] { return gap_tail_bound_check(P, R, topts).check; });
    if (reversible)
      for (double R : {1.0, 2.0})
        L.guarded(id, "tail.mean_zero_bound." + level_tag("R", R), anchor::mean_zero_tail,
                  [&] { return mean_zero_tail_check(P, R, topts).check; });
  }

  // Functional inequalities.
  if (ergodic) {
    DefectiveOptions dopts;
    dopts.seed = seed;
    dopts.restarts = 8;
    L.guarded(id, "inequalities.defective_C1_zero", anchor::defective_zero,
              [&] { return make_check(defective_c2(P, 0.0, dopts).C2, 1.0 / mu.mu_min(), 0.0); });
    L.guarded(id, "inequalities.defective_at_poincare", anchor::defective_tight, [&] {
      const double v = defective_c2(P, poincare_constant(P), dopts).C2;
      return CheckResult{v, 1.0, 1e-9, std::abs(v - 1.0) <= 1e-9};
    });
    L.guarded(id, "inequalities.weak_below_poincare", anchor::weak_poincare, [&] {
      WeakPoincareOptions w;
      w.seed = seed;
      w.restarts = 8;
      return make_check(weak_poincare_alpha(P, 0.1, w).alpha, poincare_constant(P), 1e-9);
    });
  }
  const PhiProfile phi = PhiProfile::power(0.5).with_grid(1e-4, 100);
  L.guarded(id, "inequalities.lo_decomposition", anchor::lo_decomposition, [&] {
    std::vector<CheckResult> v;
    for (int k = 0; k < 50; ++k) v.push_back(lo_decomposition_check(mu, gaussian(N, rng), 1.0 + 0.9999 * rng.uniform()));
    return worst_of(v);
  });
  L.guarded(id, "inequalities.lo_split", anchor::lo_split, [&] {
    std::vector<CheckResult> v;
    for (int k = 0; k < 50; ++k) v.push_back(lo_split_check(mu, gaussian(N, rng), phi));
    return worst_of(v);
  });
  if (ergodic && N == 2)
    L.guarded(id, "inequalities.lo_tightening", anchor::lo_tightening, [&] {
      const double C = poincare_constant(P);
      const LoDefectiveCertificate cert = lo_certified_defective_c2(P, phi, C);
      std::vector<CheckResult> v;
      for (int k = 0; k < 50; ++k) v.push_back(lo_tightening_check(P, phi, C, cert.C2, gaussian(N, rng)));
      return worst_of(v);
    });
}

inline void verify_submarkov(const Kernel& P, const std::string& id, std::uint64_t seed, Ledger& L) {
  const ProbabilitySpace& mu = P.space();
  const std::size_t N = P.size();
  mgl::detail::Rng rng(mgl::detail::mix_seed(seed, 0x5AB));
  const SubMarkovAnalysis an = analyze_submarkov(P);
  L.guarded(id, "submarkov.pp_form_identity", anchor::pp_identity, [&] {
    std::vector<CheckResult> v;
    for (int k = 0; k < 20; ++k) {
      const Vector f = gaussian(N, rng);
      const double e = an.form.energy(f);
      const double direct = mu.norm_sq(f) - mu.norm_sq(P.apply(f));
      v.push_back(CheckResult{e, direct, 1e-12, std::abs(e - direct) <= 1e-12});
    }
    return worst_of(v);
  });
  L.record_flag(id, "submarkov.irreducible_iff_norm_below_one", anchor::irreducible_norm,
                an.kernel_irreducible == (an.op_norm2 < 1.0 - 1e-10));
  if (an.kernel_irreducible) {
    const double C = 1.0 / an.lambda_min;
    L.record(id, "submarkov.norm_identity", anchor::norm_identity,
             make_check(an.op_norm2 * an.op_norm2, (C - 1.0) / C, 1e-9));
    L.guarded(id, "submarkov.weak_poincare_finite", anchor::weak_finite, [&] {
      WeakPoincareOptions w;
      w.seed = seed;
      w.restarts = 8;
      return make_check(weak_poincare_alpha(an.form, 0.01, w).alpha, C, 1e-9);
    });
  }
  if (N <= 3) {
    const double R = 0.5 * tail_cutoff(mu);
    try {
      const SubMarkovTailReport r = submarkov_tail_pipeline(P, R);
      L.record(id, "submarkov.tail_pipeline.defective", anchor::tail_to_defective, r.defective, r.l1_contraction);
      L.record(id, "submarkov.tail_pipeline.norm", anchor::norm_identity, r.norm);
    } catch (const Error& e) {
      // The pipeline does not apply once the tail bound reaches 1.
      const bool inapplicable = e.code() == Errc::EpsilonTooLarge;
      L.record_flag(id, "submarkov.tail_pipeline.defective", anchor::tail_to_defective, inapplicable, !inapplicable,
                    e.what());
    }
  } else {
    // A closed Markov block next to a damped one.
    const std::size_t k = 1 + static_cast<std::size_t>(rng.below(N - 1));
    const Kernel closed = random_invariant(k + 1, 0.7, mgl::detail::mix_seed(seed, 3));
    const Kernel open = damped(random_invariant(N - k, 0.7, mgl::detail::mix_seed(seed, 4)),
                               Vector::Constant(static_cast<Eigen::Index>(N - k), 0.7));
    const SubMarkovAnalysis red = analyze_submarkov(block_diagonal({closed, open}, {1.0, 1.0}));
    L.guarded(id, "submarkov.reducible_alpha_diverges", anchor::weak_diverges,
              [&] { return make_check(1e6, weak_poincare_alpha(red.form, 0.01).alpha, 0.0); });
  }
}

}  // namespace detail

inline Ledger verify_case(const CorpusCase& c, std::uint64_t seed) {
  Ledger L;
  try {
    if (c.kernel.is_markov()) detail::verify_markov(c.kernel, c.id, seed, L);
    else detail::verify_submarkov(c.kernel, c.id, seed, L);
  } catch (const Error& e) {
    L.record_flag(c.id, "case.completed", "every check of the case ran", false, true, e.what());
  }
  return L;
}

inline Ledger run_verify(const VerifyOptions& opts) {
  if (opts.cases < 1) throw Error(Errc::ConfigError, "cases: must be at least 1");
  const std::size_t width = std::max<std::size_t>(3, std::to_string(opts.cases - 1).size());
  std::vector<Ledger> parts(opts.cases);
  mgl::detail::parallel_for(opts.cases, [&](std::size_t i) {
    const CorpusCase c = make_case(i, opts, width);
    parts[i] = verify_case(c, mgl::detail::mix_seed(opts.seed, i));
  });
  Ledger all;
  for (const auto& p : parts) all.append(p);
  all.canonicalize();
  return all;
}

/// Ledger CSV on `out`; a JSON copy in `json_path` when given.
inline int cmd_verify(const VerifyOptions& opts, const std::string& json_path, std::ostream& out, std::ostream& err) {
  try {
    const Ledger L = run_verify(opts);
    out << L.to_csv();
    if (!json_path.empty()) {
      json doc{{"tool", "mgl"},
               {"schema_version", 1},
               {"seed", opts.seed},
               {"cases", opts.cases},
               {"perturb", opts.perturb ? num(*opts.perturb) : json(nullptr)},
               {"ledger", L.to_json()},
               {"summary", L.summary()}};
      write_text(json_path, doc.dump(2) + "\n");
    }
    err << "verify: " << opts.cases << " cases, " << L.entries().size() << " checks, " << L.asserted()
        << " asserted, " << L.failed() << " failed\n";
    return L.passed() ? kPass : kCheckFailure;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kConfigError : kNumericalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kNumericalError;
  }
}

// ---------------------------------------------------------------------------
// Truncation sweeps

struct Metric {
  enum class Kind { gap, kappa2, tau } kind;
  double R = 0.0;
  std::string name;
};

inline std::vector<Metric> parse_metrics(const std::string& list) {
  std::vector<Metric> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "gap") {
      out.push_back({Metric::Kind::gap, 0.0, item});
    } else if (item == "kappa2") {
      out.push_back({Metric::Kind::kappa2, 0.0, item});
    } else if (item.rfind("tau@", 0) == 0) {
      const std::string r = item.substr(4);
      double R = 0.0;
      auto [ptr, ec] = std::from_chars(r.data(), r.data() + r.size(), R);
      if (ec != std::errc() || ptr != r.data() + r.size() || !(R >= 0.0))
        throw Error(Errc::ConfigError, "metrics: bad level in '" + item + "'");
      out.push_back({Metric::Kind::tau, R, item});
    } else {
      throw Error(Errc::ConfigError, "metrics: unknown metric '" + item + "'");
    }
  }
  if (out.empty()) throw Error(Errc::ConfigError, "metrics: empty list");
  return out;
}

struct SweepConfig {
  json chain;
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  std::filesystem::path base;
};

inline SweepConfig parse_sweep_config(const json& j, const std::filesystem::path& base = {}) {
  using namespace detail;
  require_object(j, "");
  reject_unknown(j, "", {"chain", "sizes", "seed"});
  SweepConfig s;
  s.base = base;
  s.seed = get_count(j, "", "seed", 1);
  if (!j.contains("chain")) config_fail("chain", "required stanza is missing");
  s.chain = require_object(j.at("chain"), "chain");
  if (!j.contains("sizes")) config_fail("sizes", "required list is missing");
  const json& sizes = j.at("sizes");
  if (!sizes.is_array()) config_fail("sizes", "expected a list of integers");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!sizes[i].is_number_unsigned() || sizes[i].get<std::uint64_t>() < 1)
      config_fail("sizes[" + std::to_string(i) + "]", "expected a positive integer");
    s.sizes.push_back(sizes[i].get<std::size_t>());
  }
  const std::string family = get_string(s.chain, "chain", "family");
  if (family == "two_point" || family == "from_file") config_fail("chain.family", "has no size to sweep");
  // Validate the stanza once with a placeholder size.
  json probe = s.chain;
  if (probe.contains("size")) config_fail("chain.size", "set by the sweep; remove it");
  if (!s.sizes.empty()) probe["size"] = s.sizes.front();
  else probe["size"] = 2;
  parse_family(probe, "chain", s.seed, base);
  return s;
}

inline std::string run_sweep(const SweepConfig& s, const std::vector<Metric>& metrics, const TailOptions& topts = {}) {
  std::vector<std::string> header{"N"};
  for (const auto& m : metrics) header.push_back(m.name);
  CsvTable csv(header);
  for (std::size_t N : s.sizes) {
    json stanza = s.chain;
    stanza["size"] = N;
    const Kernel P = make_family(parse_family(stanza, "chain", s.seed, s.base));
    std::vector<std::string> row{std::to_string(N)};
    for (const auto& m : metrics) {
      switch (m.kind) {
        case Metric::Kind::gap: row.push_back(csv_number(spectral_gap(P).gap)); break;
        case Metric::Kind::kappa2: row.push_back(csv_number(kappa_best(P, 2).kappa)); break;
        case Metric::Kind::tau: row.push_back(csv_number(tau(P, m.R, topts).value)); break;
      }
    }
    csv.row(row);
  }
  return csv.str();
}

inline int cmd_sweep(const std::string& family_path, const std::string& metrics, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  try {
    const SweepConfig s = parse_sweep_config(read_json_file(family_path), std::filesystem::path(family_path).parent_path());
    const auto m = parse_metrics(metrics);
    TailOptions topts;
    topts.seed = s.seed;
    const std::string text = run_sweep(s, m, topts);
    if (out_path.empty()) out << text;
    else write_text(out_path, text);
    return kPass;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == Errc::ConfigError || e.code() == Errc::ParseError ? kConfigError : kNumericalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace mgl::lab

#endif  // MGL_LAB_HPP
