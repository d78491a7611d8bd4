#ifndef MGL_CHAINSPACE_HPP
#define MGL_CHAINSPACE_HPP

// Finite probability spaces, (sub-)Markov kernels and the operations shared
// by every other module: adjoints, symmetrization, powers, ergodicity and
// lumping along a partition.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgl/error.hpp"

namespace mgl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted list of state indices.
using StateSet = std::vector<std::size_t>;

class ProbabilitySpace {
 public:
  ProbabilitySpace() = default;

  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  double weight(std::size_t x) const { return weights_[static_cast<Eigen::Index>(x)]; }
  const std::vector<std::string>& labels() const { return labels_; }
  double mu_min() const { return weights_.minCoeff(); }

  double mass(const StateSet& set) const {
    double m = 0.0;
    for (auto x : set) m += weight(x);
    return m;
  }

  double mean(const Vector& f) const { return weights_.dot(f); }
  double inner(const Vector& f, const Vector& g) const {
    return (weights_.array() * f.array() * g.array()).sum();
  }
  double norm_sq(const Vector& f) const { return inner(f, f); }

  friend ProbabilitySpace build_space(std::vector<std::string> labels,
                                      std::vector<double> weights);

 private:
  std::vector<std::string> labels_;
  Vector weights_;
};

/// Validates and normalizes a weight vector. Weights within 1e-9 of a unit
/// total are rescaled so they sum to 1.
inline ProbabilitySpace build_space(std::vector<std::string> labels, std::vector<double> weights) {
  if (labels.size() != weights.size())
    throw Error(Errc::InvalidArgument, "label and weight counts differ");
  if (weights.empty()) throw Error(Errc::InvalidArgument, "empty state set");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(Errc::NonPositiveWeight, "state '" + labels[i] + "' has weight " +
                                               std::to_string(weights[i]));
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(Errc::BadNormalization, "weights sum to " + std::to_string(total));
  ProbabilitySpace space;
  space.labels_ = std::move(labels);
  space.weights_ = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  // Weights already normalized up to rounding are kept bit for bit.
  if (std::abs(total - 1.0) > 4 * std::numeric_limits<double>::epsilon()) space.weights_ /= space.weights_.sum();
  return space;
}

inline std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

inline ProbabilitySpace uniform_space(std::size_t n) {
  return build_space(index_labels(n), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Weights proportional to `raw`; labels 0..n-1.
inline ProbabilitySpace space_from_unnormalized(const Vector& raw) {
  const double total = raw.sum();
  std::vector<double> w(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) w[static_cast<std::size_t>(i)] = raw[i] / total;
  auto labels = index_labels(w.size());
  return build_space(std::move(labels), std::move(w));
}

enum class KernelKind { markov, submarkov };

inline constexpr double kRowSumTolerance = 1e-10;

class Kernel {
 public:
  Kernel(ProbabilitySpace space, Matrix entries, KernelKind kind)
      : space_(std::move(space)), entries_(std::move(entries)), kind_(kind) {
    const auto n = static_cast<Eigen::Index>(space_.size());
    if (entries_.rows() != n || entries_.cols() != n)
      throw Error(Errc::BadKernel, "kernel shape does not match the state space");
    if (!entries_.allFinite()) throw Error(Errc::BadKernel, "non-finite entry");
    if ((entries_.array() < 0.0).any()) throw Error(Errc::BadKernel, "negative entry");
    const Vector rows = entries_.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (kind_ == KernelKind::markov && std::abs(rows[i] - 1.0) > kRowSumTolerance)
        throw Error(Errc::BadKernel, "row " + std::to_string(i) + " sums to " + std::to_string(rows[i]));
      if (kind_ == KernelKind::submarkov && rows[i] > 1.0 + kRowSumTolerance)
        throw Error(Errc::BadKernel, "row " + std::to_string(i) + " exceeds 1");
    }
  }

  const ProbabilitySpace& space() const { return space_; }
  const Matrix& entries() const { return entries_; }
  KernelKind kind() const { return kind_; }
  bool is_markov() const { return kind_ == KernelKind::markov; }
  std::size_t size() const { return space_.size(); }
  double operator()(std::size_t x, std::size_t y) const {
    return entries_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }

  Vector apply(const Vector& f) const { return entries_ * f; }

 private:
  ProbabilitySpace space_;
  Matrix entries_;
  KernelKind kind_;
};

inline Kernel identity_kernel(const ProbabilitySpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return Kernel(space, Matrix::Identity(n, n), KernelKind::markov);
}

/// max_y |sum_x mu_x P_xy - mu_y|
inline double invariance_defect(const Kernel& P, const ProbabilitySpace& mu) {
  const Vector pushed = P.entries().transpose() * mu.weights();
  return (pushed - mu.weights()).cwiseAbs().maxCoeff();
}

inline bool check_invariance(const Kernel& P, const ProbabilitySpace& mu) {
  return P.size() == mu.size() && invariance_defect(P, mu) <= 1e-9;
}

inline bool check_invariance(const Kernel& P) { return check_invariance(P, P.space()); }

/// max_{x,y} |mu_x P_xy - mu_y P_yx|
inline double reversibility_defect(const Kernel& P) {
  const Matrix flow = P.space().weights().asDiagonal() * P.entries();
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

inline bool is_reversible(const Kernel& P, double tol = 1e-12) {
  return reversibility_defect(P) <= tol;
}

namespace detail {

inline void require_invariant(const Kernel& P) {
  if (!check_invariance(P))
    throw Error(Errc::NotInvariant,
                "mu P != mu (defect " + std::to_string(invariance_defect(P, P.space())) + ")");
}

/// P*_{xy} = mu_y P_yx / mu_x without any invariance check. For a
/// sub-Markov kernel this is still the L2(mu) adjoint, but need not be
/// sub-Markov itself.
inline Matrix adjoint_entries(const Kernel& P) {
  const Vector& w = P.space().weights();
  return w.cwiseInverse().asDiagonal() * P.entries().transpose() * w.asDiagonal();
}

/// M = D^{1/2} S D^{-1/2}, symmetric exactly when S is mu-reversible.
inline Matrix similarity_form(const Matrix& S, const Vector& weights) {
  const Vector root = weights.cwiseSqrt();
  return root.asDiagonal() * S * root.cwiseInverse().asDiagonal();
}

}  // namespace detail

inline Kernel adjoint(const Kernel& P) {
  detail::require_invariant(P);
  Matrix adj = detail::adjoint_entries(P);
  // Rows of P* sum to (mu P)_x / mu_x; snap the rounding drift.
  for (Eigen::Index i = 0; i < adj.rows(); ++i) {
    const double s = adj.row(i).sum();
    if (s > 0.0 && P.is_markov()) adj.row(i) /= s;
  }
  return Kernel(P.space(), std::move(adj), P.kind());
}

/// (P + P*) / 2, reversible with respect to mu by construction.
inline Kernel symmetrize(const Kernel& P) {
  const Kernel adj = adjoint(P);
  Matrix hat = 0.5 * (P.entries() + adj.entries());
  // Force exact detailed balance: average the two flow orientations.
  const Vector& w = P.space().weights();
  Matrix flow = w.asDiagonal() * hat;
  flow = 0.5 * (flow + flow.transpose()).eval();
  hat = w.cwiseInverse().asDiagonal() * flow;
  return Kernel(P.space(), std::move(hat), P.kind());
}

inline Kernel power(const Kernel& P, int m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "power requires m >= 1");
  Matrix result = P.entries();
  for (int i = 1; i < m; ++i) result = (result * P.entries()).eval();
  return Kernel(P.space(), std::move(result), P.kind());
}

// ---------------------------------------------------------------------------
// Ergodicity

struct ErgodicityOptions {
  double edge_threshold = 1e-14;
  double eigen_tolerance = 1e-8;
};

struct ErgodicityReport {
  bool ergodic = false;
  bool method_scc = false;
  bool method_eigen = false;
  std::optional<std::pair<StateSet, StateSet>> witness;
};

/// Strongly connected components of the support graph, each sorted, listed
/// in order of their smallest state.
inline std::vector<StateSet> strongly_connected_components(const Kernel& P, double edge_threshold = 1e-14) {
  const std::size_t n = P.size();
  const Matrix& A = P.entries();
  auto edge = [&](std::size_t x, std::size_t y) {
    return A(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) > edge_threshold;
  };
  // Kosaraju with explicit stacks.
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [x, next] = stack.back();
      while (next < n && (seen[next] || !edge(x, next))) ++next;
      if (next == n) {
        order.push_back(x);
        stack.pop_back();
      } else {
        const std::size_t y = next++;
        seen[y] = 1;
        stack.emplace_back(y, 0);
      }
    }
  }
  std::vector<long> comp(n, -1);
  std::vector<StateSet> components;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    const long id = static_cast<long>(components.size());
    components.emplace_back();
    std::vector<std::size_t> stack{*it};
    comp[*it] = id;
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      components.back().push_back(x);
      for (std::size_t y = 0; y < n; ++y)
        if (comp[y] < 0 && edge(y, x)) {
          comp[y] = id;
          stack.push_back(y);
        }
    }
  }
  for (auto& c : components) std::sort(c.begin(), c.end());
  std::sort(components.begin(), components.end(),
            [](const StateSet& a, const StateSet& b) { return a.front() < b.front(); });
  return components;
}

inline bool is_strongly_connected(const Kernel& P, double edge_threshold = 1e-14) {
  return strongly_connected_components(P, edge_threshold).size() == 1;
}

/// Two independent routes: strong connectivity of the support graph, and
/// simplicity of the eigenvalue 1 of the symmetrized kernel.
inline ErgodicityReport check_ergodic(const Kernel& P, const ErgodicityOptions& opts = {}) {
  if (!P.is_markov()) throw Error(Errc::InvalidArgument, "check_ergodic needs a Markov kernel");
  detail::require_invariant(P);
  ErgodicityReport report;

  const auto components = strongly_connected_components(P, opts.edge_threshold);
  report.method_scc = components.size() == 1;

  const Kernel hat = symmetrize(P);
  Matrix M = detail::similarity_form(hat.entries(), P.space().weights());
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(M, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  long near_one = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] >= 1.0 - opts.eigen_tolerance) ++near_one;
  report.method_eigen = near_one == 1;

  if (report.method_scc != report.method_eigen)
    throw Error(Errc::MethodDisagreement,
                "support graph says " + std::string(report.method_scc ? "irreducible" : "reducible") +
                    ", eigenvalue 1 multiplicity is " + std::to_string(near_one));
  report.ergodic = report.method_scc;

  if (!report.ergodic) {
    // Under a strictly positive invariant measure every class is closed;
    // pick the first one with no edge leaving it.
    const std::size_t n = P.size();
    for (const auto& c : components) {
      std::vector<char> inside(n, 0);
      for (auto x : c) inside[x] = 1;
      bool closed = true;
      for (auto x : c)
        for (std::size_t y = 0; y < n && closed; ++y)
          if (!inside[y] && P(x, y) > opts.edge_threshold) closed = false;
      if (!closed) continue;
      StateSet rest;
      for (std::size_t y = 0; y < n; ++y)
        if (!inside[y]) rest.push_back(y);
      report.witness = std::make_pair(c, rest);
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Lumping

struct Partition {
  std::vector<StateSet> blocks;
};

inline void validate_partition(const Partition& pi, std::size_t n) {
  std::vector<char> hit(n, 0);
  for (const auto& b : pi.blocks) {
    if (b.empty()) throw Error(Errc::BadPartition, "empty block");
    for (auto x : b) {
      if (x >= n) throw Error(Errc::BadPartition, "state index out of range");
      if (hit[x]) throw Error(Errc::BadPartition, "state " + std::to_string(x) + " in two blocks");
      hit[x] = 1;
    }
  }
  if (std::find(hit.begin(), hit.end(), 0) != hit.end())
    throw Error(Errc::BadPartition, "blocks do not cover the state set");
}

inline Partition singleton_partition(std::size_t n) {
  Partition pi;
  for (std::size_t x = 0; x < n; ++x) pi.blocks.push_back({x});
  return pi;
}

struct CoarseGrained {
  Kernel kernel;
  ProbabilitySpace space;
};

/// Conditional expectation of P onto the sigma-field generated by the
/// partition: lumped weights and mu-averaged block-to-block transitions.
inline CoarseGrained coarse_grain(const Kernel& P, const Partition& pi) {
  validate_partition(pi, P.size());
  if (!P.is_markov()) throw Error(Errc::InvalidArgument, "coarse_grain needs a Markov kernel");
  detail::require_invariant(P);
  const std::size_t k = pi.blocks.size();
  const ProbabilitySpace& mu = P.space();

  std::vector<double> lumped(k, 0.0);
  std::vector<std::string> labels(k);
  for (std::size_t a = 0; a < k; ++a) {
    std::string label = "{";
    for (std::size_t i = 0; i < pi.blocks[a].size(); ++i) {
      const auto x = pi.blocks[a][i];
      lumped[a] += mu.weight(x);
      label += (i ? "," : "") + mu.labels()[x];
    }
    labels[a] = label + "}";
  }
  // Transitions are sum_{x in A} (mu_x / mu(A)) sum_{y in B} P_xy, so singleton
  // blocks reproduce P bit for bit. Row sums are convex combinations of those
  // of P and need no renormalization.
  Matrix entries = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (auto x : pi.blocks[a]) {
      const double share = mu.weight(x) / lumped[a];
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (auto y : pi.blocks[b]) s += P(x, y);
        entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += share * s;
      }
    }
  // Lumped weights are recomputed so they sum to one; build_space rescales.
  ProbabilitySpace space = build_space(std::move(labels), std::move(lumped));
  Kernel kernel(space, std::move(entries), P.kind());
  return CoarseGrained{std::move(kernel), std::move(space)};
}

/// mu(1_A P 1_{A^c})
inline double boundary_flow(const Kernel& P, const StateSet& A) {
  std::vector<char> inside(P.size(), 0);
  for (auto x : A) inside[x] = 1;
  double flow = 0.0;
  for (auto x : A) {
    double out = 0.0;
    for (std::size_t y = 0; y < P.size(); ++y)
      if (!inside[y]) out += P(x, y);
    flow += P.space().weight(x) * out;
  }
  return flow;
}

inline Vector indicator(std::size_t n, const StateSet& A) {
  Vector f = Vector::Zero(static_cast<Eigen::Index>(n));
  for (auto x : A) f[static_cast<Eigen::Index>(x)] = 1.0;
  return f;
}

}  // namespace mgl

#endif  // MGL_CHAINSPACE_HPP
