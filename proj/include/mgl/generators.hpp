#ifndef MGL_GENERATORS_HPP
#define MGL_GENERATORS_HPP

// Reproducible kernel families and the plain-text kernel format.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgl/chainspace.hpp"
#include "mgl/detail/rng.hpp"

namespace mgl {

/// Lazy Metropolis chain on {0, ..., N} with target proportional to
/// `weights`: moves to x +- 1 are proposed with probability 1/4 each and
/// accepted with probability min(1, mu_y / mu_x).
inline Kernel birth_death(const std::vector<double>& weights) {
  if (weights.size() < 2) throw Error(Errc::BadWeights, "birth-death chains need at least two states");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(Errc::BadWeights, "weights must be positive and finite");
    total += w;
  }
  std::vector<double> mu(weights.size());
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = weights[i] / total;
  const auto n = static_cast<Eigen::Index>(mu.size());
  Matrix P = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto ux = static_cast<std::size_t>(x);
    double out = 0.0;
    if (x > 0) out += P(x, x - 1) = 0.25 * std::min(1.0, mu[ux - 1] / mu[ux]);
    if (x + 1 < n) out += P(x, x + 1) = 0.25 * std::min(1.0, mu[ux + 1] / mu[ux]);
    P(x, x) = 1.0 - out;
  }
  auto labels = index_labels(mu.size());
  return Kernel(build_space(std::move(labels), std::move(mu)), std::move(P), KernelKind::markov);
}

/// Target mu_x proportional to q^x on {0, ..., N}.
inline Kernel birth_death_geometric(std::size_t N, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::InvalidArgument, "q must lie in (0, 1)");
  std::vector<double> w(N + 1);
  for (std::size_t x = 0; x <= N; ++x) w[x] = std::pow(q, static_cast<double>(x));
  return birth_death(w);
}

/// Target mu_x proportional to (1 + x)^{-s} on {0, ..., N}.
inline Kernel birth_death_heavy(std::size_t N, double s) {
  if (!(s > 1.0)) throw Error(Errc::InvalidArgument, "s must exceed 1");
  std::vector<double> w(N + 1);
  for (std::size_t x = 0; x <= N; ++x) w[x] = std::pow(1.0 + static_cast<double>(x), -s);
  return birth_death(w);
}

using Edge = std::pair<std::size_t, std::size_t>;

/// laziness * I + (1 - laziness) * (simple random walk), mu proportional to
/// degree. Parallel edges count with multiplicity.
inline Kernel graph_walk(std::size_t n, const std::vector<Edge>& edges, double laziness = 0.0,
                         bool allow_disconnected = false) {
  if (!(laziness >= 0.0 && laziness < 1.0)) throw Error(Errc::InvalidArgument, "laziness must lie in [0, 1)");
  const auto N = static_cast<Eigen::Index>(n);
  Matrix A = Matrix::Zero(N, N);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw Error(Errc::InvalidArgument, "edge endpoint out of range");
    if (u == v) throw Error(Errc::InvalidArgument, "self-loops are not graph edges; use laziness");
    A(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) += 1.0;
    A(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) += 1.0;
  }
  const Vector deg = A.rowwise().sum();
  for (Eigen::Index x = 0; x < N; ++x)
    if (deg[x] == 0.0) throw Error(Errc::BadWeights, "vertex " + std::to_string(x) + " is isolated");
  Matrix P = (1.0 - laziness) * (deg.cwiseInverse().asDiagonal() * A);
  P.diagonal().array() += laziness;
  Kernel K(space_from_unnormalized(deg), std::move(P), KernelKind::markov);
  if (!allow_disconnected && !is_strongly_connected(K)) throw Error(Errc::Disconnected, "graph is disconnected");
  return K;
}

inline std::vector<Edge> path_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline std::vector<Edge> cycle_edges(std::size_t n) {
  std::vector<Edge> e = path_edges(n);
  if (n > 2) e.emplace_back(n - 1, 0);
  return e;
}

inline std::vector<Edge> complete_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

/// Symmetric weights W (each pair, diagonal included, present with
/// probability `density`, value uniform in [0.1, 1]); mu proportional to row
/// sums of W and P = row-normalized W. Rows left empty get a self-loop.
inline Kernel random_reversible(std::size_t n, double density, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::InvalidArgument, "empty state set");
  if (!(density > 0.0 && density <= 1.0)) throw Error(Errc::InvalidArgument, "density must lie in (0, 1]");
  detail::Rng rng(seed);
  const auto N = static_cast<Eigen::Index>(n);
  Matrix W = Matrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i; j < N; ++j)
      if (rng.bernoulli(density)) W(i, j) = W(j, i) = rng.uniform(0.1, 1.0);
  for (Eigen::Index i = 0; i < N; ++i)
    if (W.row(i).sum() == 0.0) W(i, i) = rng.uniform(0.1, 1.0);
  const Vector rows = W.rowwise().sum();
  return Kernel(space_from_unnormalized(rows), rows.cwiseInverse().asDiagonal() * W, KernelKind::markov);
}

/// A generally nonreversible kernel with a random invariant measure: random
/// nonnegative values on a symmetric support with positive diagonal, scaled
/// (Sinkhorn) so that the flow matrix has row and column sums mu.
inline Kernel random_invariant(std::size_t n, double density, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::InvalidArgument, "empty state set");
  if (!(density > 0.0 && density <= 1.0)) throw Error(Errc::InvalidArgument, "density must lie in (0, 1]");
  detail::Rng rng(seed);
  const auto N = static_cast<Eigen::Index>(n);
  Vector mu(N);
  for (Eigen::Index i = 0; i < N; ++i) mu[i] = rng.uniform(0.2, 1.0);
  mu /= mu.sum();
  Matrix F = Matrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    F(i, i) = rng.uniform(0.1, 1.0);
    for (Eigen::Index j = i + 1; j < N; ++j)
      if (rng.bernoulli(density)) {
        F(i, j) = rng.uniform(0.1, 1.0);
        F(j, i) = rng.uniform(0.1, 1.0);
      }
  }
  for (int it = 0; it < 10000; ++it) {
    F = (mu.cwiseQuotient(F.rowwise().sum())).asDiagonal() * F;
    const Vector cols = F.colwise().sum().transpose();
    if ((cols - mu).cwiseAbs().maxCoeff() < 1e-15) break;
    F = F * (mu.cwiseQuotient(cols)).asDiagonal();
  }
  Matrix P = mu.cwiseInverse().asDiagonal() * F;
  P = P.rowwise().sum().cwiseInverse().asDiagonal() * P;
  std::vector<double> w(mu.data(), mu.data() + N);
  return Kernel(build_space(index_labels(n), std::move(w)), std::move(P), KernelKind::markov);
}

/// Deterministic rotation x -> x + 1 mod n, uniform mu.
inline Kernel cycle_rotation(std::size_t n) {
  if (n == 0) throw Error(Errc::InvalidArgument, "empty state set");
  const auto N = static_cast<Eigen::Index>(n);
  Matrix P = Matrix::Zero(N, N);
  for (Eigen::Index x = 0; x < N; ++x) P(x, (x + 1) % N) = 1.0;
  return Kernel(uniform_space(n), std::move(P), KernelKind::markov);
}

/// [[1-p, p], [p, 1-p]] on states a, b with uniform mu.
inline Kernel two_point(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidArgument, "p must lie in [0, 1]");
  Matrix P(2, 2);
  P << 1.0 - p, p, p, 1.0 - p;
  return Kernel(build_space({"a", "b"}, {0.5, 0.5}), std::move(P), KernelKind::markov);
}

/// Direct sum of kernels, weights scaled by `masses` (normalized).
inline Kernel block_diagonal(const std::vector<Kernel>& blocks, std::vector<double> masses) {
  if (blocks.empty() || blocks.size() != masses.size()) throw Error(Errc::InvalidArgument, "block/mass mismatch");
  double total = 0.0;
  Eigen::Index n = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (!(masses[b] > 0.0)) throw Error(Errc::BadWeights, "block masses must be positive");
    total += masses[b];
    n += static_cast<Eigen::Index>(blocks[b].size());
  }
  Matrix P = Matrix::Zero(n, n);
  std::vector<double> w;
  bool markov = true;
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto m = static_cast<Eigen::Index>(blocks[b].size());
    P.block(at, at, m, m) = blocks[b].entries();
    for (Eigen::Index i = 0; i < m; ++i) w.push_back(masses[b] / total * blocks[b].space().weights()[i]);
    markov = markov && blocks[b].is_markov();
    at += m;
  }
  const std::size_t size = w.size();
  return Kernel(build_space(index_labels(size), std::move(w)), std::move(P),
                markov ? KernelKind::markov : KernelKind::submarkov);
}

/// Rows of P scaled by factors in [0, 1]; the result is sub-Markov.
inline Kernel damped(const Kernel& P, const Vector& factors) {
  if (factors.size() != static_cast<Eigen::Index>(P.size()) || (factors.array() < 0.0).any() ||
      (factors.array() > 1.0).any())
    throw Error(Errc::InvalidArgument, "damping factors must lie in [0, 1]");
  return Kernel(P.space(), factors.asDiagonal() * P.entries(), KernelKind::submarkov);
}

/// Sub-Markov corpus member. With probability 1/2 every row of a random
/// invariant kernel is damped by a factor in [0.5, 1); otherwise an undamped
/// Markov block is joined to a damped one, so that ||P||_2 = 1.
inline Kernel random_substochastic(std::size_t n, double density, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::InvalidArgument, "need at least two states");
  detail::Rng rng(detail::mix_seed(seed, 0xD));
  if (rng.bernoulli(0.5)) {
    const Kernel base = random_invariant(n, density, seed);
    Vector f(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.uniform(0.5, 1.0);
    return damped(base, f);
  }
  const std::size_t k = 1 + static_cast<std::size_t>(rng.below(n - 1));
  const Kernel closed = random_invariant(k, density, detail::mix_seed(seed, 1));
  const Kernel open = random_invariant(n - k, density, detail::mix_seed(seed, 2));
  Vector f(static_cast<Eigen::Index>(n - k));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.uniform(0.5, 1.0);
  return block_diagonal({closed, damped(open, f)}, {rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)});
}

/// Adds eps-sized random mass to every row and renormalizes: still Markov,
/// but mu is no longer invariant in general.
inline Kernel perturb_kernel(const Kernel& P, double eps, std::uint64_t seed) {
  detail::Rng rng(seed);
  Matrix E = P.entries();
  for (Eigen::Index i = 0; i < E.rows(); ++i)
    for (Eigen::Index j = 0; j < E.cols(); ++j) E(i, j) += eps * rng.uniform();
  const Vector rows = E.rowwise().sum();
  if (P.is_markov()) E = rows.cwiseInverse().asDiagonal() * E;
  else E = (P.entries().rowwise().sum().cwiseQuotient(rows)).asDiagonal() * E;
  return Kernel(P.space(), std::move(E), P.kind());
}

// ---------------------------------------------------------------------------
// Kernel text format: `n`, then n weights, then n rows of n entries; '#'
// starts a comment. Rows summing to 1 make a Markov kernel, otherwise the
// kernel is read as sub-Markov.

namespace detail {

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<std::vector<Token>> tokenize_lines(const std::string& text) {
  std::vector<std::vector<Token>> lines;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) toks.push_back({line.substr(start, i - start), number, start + 1});
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  return lines;
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, std::size_t col,
                                    const std::string& what) {
  throw Error(Errc::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
}

inline double parse_number(const std::string& source, const Token& t) {
  double v = 0.0;
  const char* end = t.text.data() + t.text.size();
  auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_fail(source, t.line, t.column, "expected a number, got '" + t.text + "'");
  return v;
}

}  // namespace detail

inline Kernel parse_kernel(const std::string& text, const std::string& source = "<input>") {
  const auto lines = detail::tokenize_lines(text);
  if (lines.empty()) detail::parse_fail(source, 1, 1, "empty kernel file");
  const auto& head = lines[0];
  if (head.size() != 1) detail::parse_fail(source, head[1].line, head[1].column, "first line must hold only n");
  std::size_t n = 0;
  {
    const auto& t = head[0];
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() || n == 0)
      detail::parse_fail(source, t.line, t.column, "expected a positive state count, got '" + t.text + "'");
  }
  auto row_of = [&](std::size_t idx, const char* what) -> const std::vector<detail::Token>& {
    if (idx >= lines.size()) {
      const auto& last = lines.back().back();
      detail::parse_fail(source, last.line + 1, 1, std::string("missing ") + what);
    }
    const auto& toks = lines[idx];
    if (toks.size() != n) {
      const auto& t = toks.size() > n ? toks[n] : toks.back();
      detail::parse_fail(source, t.line, toks.size() > n ? t.column : t.column + t.text.size(),
                         std::string(what) + " needs " + std::to_string(n) + " entries, found " +
                             std::to_string(toks.size()));
    }
    return toks;
  };
  std::vector<double> weights(n);
  const auto& wtoks = row_of(1, "weights line");
  for (std::size_t i = 0; i < n; ++i) weights[i] = detail::parse_number(source, wtoks[i]);
  const auto N = static_cast<Eigen::Index>(n);
  Matrix P(N, N);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& toks = row_of(2 + r, "kernel row");
    for (std::size_t c = 0; c < n; ++c)
      P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::parse_number(source, toks[c]);
  }
  if (lines.size() > 2 + n) {
    const auto& t = lines[2 + n][0];
    detail::parse_fail(source, t.line, t.column, "unexpected content after the last kernel row");
  }
  ProbabilitySpace space;
  try {
    space = build_space(index_labels(n), weights);
  } catch (const Error& e) {
    detail::parse_fail(source, wtoks[0].line, wtoks[0].column, e.what());
  }
  const Vector rows = P.rowwise().sum();
  const bool markov = ((rows.array() - 1.0).abs() <= kRowSumTolerance).all();
  try {
    return Kernel(std::move(space), std::move(P), markov ? KernelKind::markov : KernelKind::submarkov);
  } catch (const Error& e) {
    detail::parse_fail(source, lines[2][0].line, 1, e.what());
  }
}

inline Kernel load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kernel(ss.str(), path);
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string write_kernel(const Kernel& P) {
  std::string out = std::to_string(P.size()) + "\n";
  const Vector& w = P.space().weights();
  for (Eigen::Index i = 0; i < w.size(); ++i) out += (i ? " " : "") + format_double(w[i]);
  out += "\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) out += (j ? " " : "") + format_double(P.entries()(i, j));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Family descriptions

struct FamilySpec {
  enum class Family {
    birth_death_geometric,
    birth_death_heavy,
    graph_walk,
    random_reversible,
    cycle_rotation,
    two_point,
    from_file,
  };
  Family family = Family::two_point;
  double parameter = 0.5;  ///< q, s, laziness, density or p
  std::size_t size = 2;
  std::uint64_t seed = 1;
  std::string graph = "cycle";  ///< graph_walk: path, cycle or complete
  std::string path;             ///< from_file
};

inline const char* family_name(FamilySpec::Family f) {
  switch (f) {
    case FamilySpec::Family::birth_death_geometric: return "birth_death_geometric";
    case FamilySpec::Family::birth_death_heavy: return "birth_death_heavy";
    case FamilySpec::Family::graph_walk: return "graph_walk";
    case FamilySpec::Family::random_reversible: return "random_reversible";
    case FamilySpec::Family::cycle_rotation: return "cycle_rotation";
    case FamilySpec::Family::two_point: return "two_point";
    case FamilySpec::Family::from_file: return "from_file";
  }
  return "";
}

/// `size` is N for the birth-death families (states 0..N) and the state
/// count otherwise.
inline Kernel make_family(const FamilySpec& spec) {
  using F = FamilySpec::Family;
  switch (spec.family) {
    case F::birth_death_geometric: return birth_death_geometric(spec.size, spec.parameter);
    case F::birth_death_heavy: return birth_death_heavy(spec.size, spec.parameter);
    case F::graph_walk: {
      std::vector<Edge> e;
      if (spec.graph == "path") e = path_edges(spec.size);
      else if (spec.graph == "cycle") e = cycle_edges(spec.size);
      else if (spec.graph == "complete") e = complete_edges(spec.size);
      else throw Error(Errc::InvalidArgument, "unknown graph '" + spec.graph + "'");
      return graph_walk(spec.size, e, spec.parameter);
    }
    case F::random_reversible: return random_reversible(spec.size, spec.parameter, spec.seed);
    case F::cycle_rotation: return cycle_rotation(spec.size);
    case F::two_point: return two_point(spec.parameter);
    case F::from_file: return load_kernel(spec.path);
  }
  throw Error(Errc::InvalidArgument, "unknown family");
}

}  // namespace mgl

#endif  // MGL_GENERATORS_HPP
