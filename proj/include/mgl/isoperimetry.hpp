#ifndef MGL_ISOPERIMETRY_HPP
#define MGL_ISOPERIMETRY_HPP

// Higher-order isoperimetric constants
//
//   kappa_n = inf over disjoint (A_1..A_n) of max_k mu(1_{A_k} P 1_{A_k^c}) / mu(A_k)
//
// computed exactly by enumeration for small state spaces, bounded from above
// by a spectral heuristic for larger ones, and compared with the eigenvalue
// ladder of 1 - P-hat.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mgl/chainspace.hpp"
#include "mgl/detail/parallel.hpp"
#include "mgl/spectral.hpp"

namespace mgl {

struct DisjointTuple {
  std::vector<StateSet> sets;
};

inline void validate_tuple(const DisjointTuple& t, std::size_t n) {
  if (t.sets.empty()) throw Error(Errc::EmptyTuple, "tuple has no sets");
  if (t.sets.size() > n) throw Error(Errc::OrderTooLarge, "more sets than states");
  std::vector<char> hit(n, 0);
  for (const auto& s : t.sets) {
    if (s.empty()) throw Error(Errc::EmptySet, "tuple contains an empty set");
    for (auto x : s) {
      if (x >= n) throw Error(Errc::InvalidArgument, "state index out of range");
      if (hit[x]) throw Error(Errc::InvalidArgument, "tuple sets are not disjoint");
      hit[x] = 1;
    }
  }
}

/// mu(1_A P 1_{A^c}) / mu(A)
inline double expansion(const Kernel& P, const StateSet& A) {
  if (A.empty()) throw Error(Errc::EmptySet, "expansion of the empty set");
  return boundary_flow(P, A) / P.space().mass(A);
}

inline double max_expansion(const Kernel& P, const DisjointTuple& t) {
  double worst = 0.0;
  for (const auto& s : t.sets) worst = std::max(worst, expansion(P, s));
  return worst;
}

struct KappaResult {
  std::size_t n = 0;
  double kappa = 0.0;
  DisjointTuple witness;
  bool exact = false;
};

struct KappaOptions {
  std::size_t state_cap = 14;
  std::size_t order_cap = 5;
  /// Evaluate expansions on P-hat instead of P.
  bool symmetrized = false;
};

namespace detail {

inline Kernel expansion_kernel(const Kernel& P, const KappaOptions& opts) {
  return opts.symmetrized ? symmetrize(P) : P;
}

/// W(x,y) = mu_x P_xy + mu_y P_yx off the diagonal and mu_x P_xx on it, so
/// that the internal flow of A is the sum of W over unordered pairs in A.
inline Matrix pair_flow(const Kernel& P) {
  const Matrix F = P.space().weights().asDiagonal() * P.entries();
  Matrix W = F + F.transpose();
  W.diagonal() = F.diagonal();
  return W;
}

inline DisjointTuple tuple_from_labels(const std::vector<int>& labels, std::size_t n_sets) {
  DisjointTuple t;
  t.sets.resize(n_sets);
  for (std::size_t x = 0; x < labels.size(); ++x)
    if (labels[x] > 0) t.sets[static_cast<std::size_t>(labels[x] - 1)].push_back(x);
  return t;
}

class KappaEnumerator {
 public:
  KappaEnumerator(const Kernel& P, std::size_t n)
      : W_(pair_flow(P)), mu_(P.space().weights()), N_(P.size()), n_(n) {}

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::vector<int> labels;
  };

  /// All canonical label prefixes of the given depth. Labels are 0 for
  /// "unassigned" and otherwise appear in order of first use.
  std::vector<std::vector<int>> prefixes(std::size_t depth) const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int used) -> void {
      if (cur.size() == depth) {
        out.push_back(cur);
        return;
      }
      const int top = std::min<int>(used + 1, static_cast<int>(n_));
      for (int l = 0; l <= top; ++l) {
        cur.push_back(l);
        self(self, std::max(used, l));
        cur.pop_back();
      }
    };
    rec(rec, 0);
    return out;
  }

  Best run(const std::vector<int>& prefix) const {
    Search s(*this);
    for (std::size_t x = 0; x < prefix.size(); ++x) s.assign(x, prefix[x]);
    s.descend(prefix.size());
    return s.best;
  }

 private:
  struct Search {
    explicit Search(const KappaEnumerator& e)
        : e(e), labels(e.N_, 0), mass(e.n_ + 1, 0.0), internal(e.n_ + 1, 0.0), members(e.n_ + 1) {}

    void assign(std::size_t x, int l) {
      labels[x] = l;
      used = std::max(used, l);
      if (l == 0) return;
      const auto k = static_cast<std::size_t>(l);
      const auto ix = static_cast<Eigen::Index>(x);
      double add = e.W_(ix, ix);
      for (auto y : members[k]) add += e.W_(ix, static_cast<Eigen::Index>(y));
      saved.push_back(internal[k]);
      internal[k] += add;
      mass[k] += e.mu_[ix];
      members[k].push_back(x);
    }

    void unassign(std::size_t x, int l, int prev_used) {
      labels[x] = 0;
      used = prev_used;
      if (l == 0) return;
      const auto k = static_cast<std::size_t>(l);
      internal[k] = saved.back();
      saved.pop_back();
      mass[k] -= e.mu_[static_cast<Eigen::Index>(x)];
      members[k].pop_back();
      if (members[k].empty()) mass[k] = 0.0;
    }

    void descend(std::size_t x) {
      const auto need = static_cast<std::size_t>(static_cast<int>(e.n_) - used);
      if (e.N_ - x < need) return;
      if (x == e.N_) {
        double worst = 0.0;
        for (std::size_t k = 1; k <= e.n_; ++k)
          worst = std::max(worst, (mass[k] - internal[k]) / mass[k]);
        if (worst < best.value) {
          best.value = worst;
          best.labels = labels;
        }
        return;
      }
      const int top = std::min<int>(used + 1, static_cast<int>(e.n_));
      const int prev = used;
      for (int l = 0; l <= top; ++l) {
        assign(x, l);
        descend(x + 1);
        unassign(x, l, prev);
      }
    }

    const KappaEnumerator& e;
    std::vector<int> labels;
    std::vector<double> mass;
    std::vector<double> internal;
    std::vector<std::vector<std::size_t>> members;
    std::vector<double> saved;
    int used = 0;
    Best best;
  };

  Matrix W_;
  Vector mu_;
  std::size_t N_;
  std::size_t n_;
};

}  // namespace detail

/// Exact kappa_n by enumerating every tuple in D_n (base-(n+1) assignments
/// with canonical label order). Work is split into fixed prefix tasks so the
/// witness does not depend on the number of workers.
inline KappaResult kappa_exact(const Kernel& P, std::size_t n, const KappaOptions& opts = {}) {
  const std::size_t N = P.size();
  if (n < 1 || n > N) throw Error(Errc::OrderTooLarge, "order " + std::to_string(n) + " with " + std::to_string(N) + " states");
  if (n > opts.order_cap) throw Error(Errc::OrderTooLarge, "order above the configured cap");
  if (N > opts.state_cap) throw Error(Errc::StateCapExceeded, std::to_string(N) + " states");
  KappaResult result;
  result.n = n;
  result.exact = true;
  if (n == 1) {
    StateSet all(N);
    std::iota(all.begin(), all.end(), std::size_t{0});
    result.witness.sets.push_back(std::move(all));
    result.kappa = 0.0;
    return result;
  }
  const Kernel K = detail::expansion_kernel(P, opts);
  const detail::KappaEnumerator enumerator(K, n);
  const auto tasks = enumerator.prefixes(std::min<std::size_t>(N, 4));
  std::vector<detail::KappaEnumerator::Best> partial(tasks.size());
  detail::parallel_for(tasks.size(), [&](std::size_t i) { partial[i] = enumerator.run(tasks[i]); });
  detail::KappaEnumerator::Best best;
  for (auto& b : partial)
    if (b.value < best.value) best = std::move(b);
  result.witness = detail::tuple_from_labels(best.labels, n);
  result.kappa = max_expansion(K, result.witness);
  return result;
}

namespace detail {

/// Steepest-descent relabeling of single states on the objective
/// (max expansion, sum of expansions). Keeps every set nonempty.
class TupleLocalSearch {
 public:
  TupleLocalSearch(const Kernel& K, std::size_t n) : W_(pair_flow(K)), mu_(K.space().weights()), n_(n) {}

  std::vector<int> improve(std::vector<int> labels, std::size_t max_moves) const {
    const std::size_t N = labels.size();
    std::vector<double> mass(n_ + 1, 0.0), internal(n_ + 1, 0.0);
    std::vector<std::size_t> count(n_ + 1, 0);
    // link[x][k] = sum of W(x,y) over y != x carrying label k
    Matrix link = Matrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n_ + 1));
    for (std::size_t x = 0; x < N; ++x) {
      const auto k = static_cast<std::size_t>(labels[x]);
      ++count[k];
      mass[k] += mu_[static_cast<Eigen::Index>(x)];
      for (std::size_t y = 0; y < N; ++y)
        if (y != x) link(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(k)) += W_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }
    for (std::size_t x = 0; x < N; ++x) {
      const auto k = static_cast<std::size_t>(labels[x]);
      if (k == 0) continue;
      internal[k] += W_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) +
                     0.5 * link(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(k));
    }
    auto score = [&](const std::vector<double>& m, const std::vector<double>& in) {
      double worst = 0.0, total = 0.0;
      for (std::size_t k = 1; k <= n_; ++k) {
        const double e = (m[k] - in[k]) / m[k];
        worst = std::max(worst, e);
        total += e;
      }
      return std::pair{worst, total};
    };
    auto current = score(mass, internal);
    for (std::size_t move = 0; move < max_moves; ++move) {
      std::pair best = current;
      std::size_t best_x = N;
      int best_to = 0;
      for (std::size_t x = 0; x < N; ++x) {
        const auto from = static_cast<std::size_t>(labels[x]);
        if (from != 0 && count[from] == 1) continue;
        const auto ix = static_cast<Eigen::Index>(x);
        for (std::size_t to = 0; to <= n_; ++to) {
          if (to == from) continue;
          auto m = mass;
          auto in = internal;
          if (from != 0) {
            m[from] -= mu_[ix];
            in[from] -= W_(ix, ix) + link(ix, static_cast<Eigen::Index>(from));
          }
          if (to != 0) {
            m[to] += mu_[ix];
            in[to] += W_(ix, ix) + link(ix, static_cast<Eigen::Index>(to));
          }
          const auto s = score(m, in);
          if (s.first < best.first - 1e-15 ||
              (s.first <= best.first + 1e-15 && s.second < best.second - 1e-12)) {
            best = s;
            best_x = x;
            best_to = static_cast<int>(to);
          }
        }
      }
      if (best_x == N) break;
      const auto ix = static_cast<Eigen::Index>(best_x);
      const auto from = static_cast<std::size_t>(labels[best_x]);
      const auto to = static_cast<std::size_t>(best_to);
      if (from != 0) {
        mass[from] -= mu_[ix];
        internal[from] -= W_(ix, ix) + link(ix, static_cast<Eigen::Index>(from));
      }
      if (to != 0) {
        mass[to] += mu_[ix];
        internal[to] += W_(ix, ix) + link(ix, static_cast<Eigen::Index>(to));
      }
      --count[from];
      ++count[to];
      labels[best_x] = best_to;
      for (std::size_t y = 0; y < N; ++y) {
        if (y == best_x) continue;
        const auto iy = static_cast<Eigen::Index>(y);
        link(iy, static_cast<Eigen::Index>(from)) -= W_(ix, iy);
        link(iy, static_cast<Eigen::Index>(to)) += W_(ix, iy);
      }
      current = best;
    }
    return labels;
  }

 private:
  Matrix W_;
  Vector mu_;
  std::size_t n_;
};

inline std::vector<std::size_t> argsort(const Vector& v) {
  std::vector<std::size_t> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[static_cast<Eigen::Index>(a)] < v[static_cast<Eigen::Index>(b)];
  });
  return order;
}

/// Expansions of every prefix of `order` (index i holds the prefix of length i+1).
inline std::vector<double> prefix_expansions(const Matrix& W, const Vector& mu, const std::vector<std::size_t>& order) {
  const std::size_t N = order.size();
  std::vector<double> out(N, 0.0);
  double mass = 0.0, internal = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto ix = static_cast<Eigen::Index>(order[i]);
    double add = W(ix, ix);
    for (std::size_t j = 0; j < i; ++j) add += W(ix, static_cast<Eigen::Index>(order[j]));
    internal += add;
    mass += mu[ix];
    out[i] = std::max(0.0, (mass - internal) / mass);
  }
  return out;
}

/// Best (prefix, suffix) pair of `order` for n = 2.
inline std::vector<int> best_sweep_pair(const Matrix& W, const Vector& mu, const std::vector<std::size_t>& order) {
  const std::size_t N = order.size();
  const auto pre = prefix_expansions(W, mu, order);
  const std::vector<std::size_t> rev(order.rbegin(), order.rend());
  const auto suf = prefix_expansions(W, mu, rev);
  // best_suffix[j] = argmin over suffix lengths 1..j+1
  std::vector<std::size_t> best_suffix(N);
  for (std::size_t j = 0; j < N; ++j)
    best_suffix[j] = (j == 0 || suf[j] < suf[best_suffix[j - 1]]) ? j : best_suffix[j - 1];
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const std::size_t j = best_suffix[N - i - 2];  // suffix length at most N - (i+1)
    const double v = std::max(pre[i], suf[j]);
    if (v < best) {
      best = v;
      bi = i;
      bj = j;
    }
  }
  std::vector<int> labels(N, 0);
  for (std::size_t i = 0; i <= bi; ++i) labels[order[i]] = 1;
  for (std::size_t j = 0; j <= bj; ++j) labels[order[N - 1 - j]] = 2;
  return labels;
}

/// Splits `order` into n contiguous runs of roughly equal mass.
inline std::vector<int> quantile_split(const Vector& mu, const std::vector<std::size_t>& order, std::size_t n) {
  const std::size_t N = order.size();
  std::vector<int> labels(N, 0);
  double acc = 0.0;
  std::size_t label = 1;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t remaining_states = N - i;
    const std::size_t remaining_labels = n - label;
    labels[order[i]] = static_cast<int>(label);
    acc += mu[static_cast<Eigen::Index>(order[i])];
    const bool mass_full = acc >= static_cast<double>(label) / static_cast<double>(n);
    if (label < n && (mass_full || remaining_states - 1 == remaining_labels)) ++label;
  }
  return labels;
}

/// Weighted k-means in the spectral embedding, farthest-point seeding.
inline std::vector<int> spectral_kmeans(const Matrix& embed, const Vector& mu, std::size_t n) {
  const auto N = embed.rows();
  std::vector<Eigen::Index> seeds;
  Eigen::Index first = 0;
  embed.col(std::min<Eigen::Index>(1, embed.cols() - 1)).cwiseAbs().maxCoeff(&first);
  seeds.push_back(first);
  Vector dist = Vector::Constant(N, std::numeric_limits<double>::infinity());
  while (seeds.size() < n) {
    for (Eigen::Index x = 0; x < N; ++x)
      dist[x] = std::min(dist[x], (embed.row(x) - embed.row(seeds.back())).squaredNorm());
    Eigen::Index far = 0;
    dist.maxCoeff(&far);
    seeds.push_back(far);
  }
  Matrix centers(static_cast<Eigen::Index>(n), embed.cols());
  for (std::size_t k = 0; k < n; ++k) centers.row(static_cast<Eigen::Index>(k)) = embed.row(seeds[k]);
  std::vector<int> labels(static_cast<std::size_t>(N), 1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (Eigen::Index x = 0; x < N; ++x) {
      Eigen::Index best = 0;
      (centers.rowwise() - embed.row(x)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(x)] != best + 1) changed = true;
      labels[static_cast<std::size_t>(x)] = static_cast<int>(best + 1);
    }
    Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
    Vector mass = Vector::Zero(centers.rows());
    for (Eigen::Index x = 0; x < N; ++x) {
      const auto k = labels[static_cast<std::size_t>(x)] - 1;
      sums.row(k) += mu[x] * embed.row(x);
      mass[k] += mu[x];
    }
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
      if (mass[k] > 0.0) centers.row(k) = sums.row(k) / mass[k];
    if (!changed) break;
  }
  return labels;
}

inline bool labels_feasible(const std::vector<int>& labels, std::size_t n) {
  std::vector<char> seen(n + 1, 0);
  for (int l : labels) seen[static_cast<std::size_t>(l)] = 1;
  for (std::size_t k = 1; k <= n; ++k)
    if (!seen[k]) return false;
  return true;
}

}  // namespace detail

/// Witness-certified upper bound on kappa_n: candidate tuples from sweep cuts
/// along low eigenfunctions of 1 - P-hat, mass-quantile splits and spectral
/// k-means, each polished by single-state local search.
inline KappaResult kappa_upper_spectral(const Kernel& P, std::size_t n, const KappaOptions& opts = {}) {
  const std::size_t N = P.size();
  if (n < 1 || n > N) throw Error(Errc::OrderTooLarge, "order " + std::to_string(n) + " with " + std::to_string(N) + " states");
  KappaResult result;
  result.n = n;
  if (n == 1) {
    StateSet all(N);
    std::iota(all.begin(), all.end(), std::size_t{0});
    result.witness.sets.push_back(std::move(all));
    return result;
  }
  const Kernel K = detail::expansion_kernel(P, opts);
  const Vector& mu = P.space().weights();
  const Matrix W = detail::pair_flow(K);
  const SymmetricEigen eig = eigen_sym(symmetrize(P));
  const auto dims = static_cast<Eigen::Index>(std::min(N, std::max<std::size_t>(n, 2)));

  std::vector<std::vector<int>> candidates;
  for (Eigen::Index k = 1; k < dims; ++k) {
    const auto order = detail::argsort(eig.functions.col(k));
    if (n == 2) candidates.push_back(detail::best_sweep_pair(W, mu, order));
    candidates.push_back(detail::quantile_split(mu, order, n));
  }
  if (n > 2) candidates.push_back(detail::spectral_kmeans(eig.functions.leftCols(dims), mu, n));
  {
    // n singletons with the largest holding probabilities
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return K(a, a) > K(b, b); });
    std::vector<int> labels(N, 0);
    for (std::size_t k = 0; k < n; ++k) labels[order[k]] = static_cast<int>(k + 1);
    candidates.push_back(std::move(labels));
  }

  const detail::TupleLocalSearch search(K, n);
  double best = std::numeric_limits<double>::infinity();
  for (auto& labels : candidates) {
    if (!detail::labels_feasible(labels, n)) continue;
    labels = search.improve(std::move(labels), 20 * N);
    const DisjointTuple t = detail::tuple_from_labels(labels, n);
    const double v = max_expansion(K, t);
    if (v < best) {
      best = v;
      result.witness = t;
    }
  }
  result.kappa = best;
  return result;
}

/// True when P only moves between neighbouring indices.
inline bool is_nearest_neighbour(const Kernel& P) {
  const Matrix& M = P.entries();
  for (Eigen::Index x = 0; x < M.rows(); ++x)
    for (Eigen::Index y = 0; y < M.cols(); ++y)
      if (std::abs(x - y) > 1 && M(x, y) != 0.0) return false;
  return true;
}

/// Exact kappa_n for nearest-neighbour kernels of any size. The expansion of
/// a set is at least the smallest expansion among its runs of consecutive
/// states, so optimal tuples consist of intervals; the least threshold that
/// admits n disjoint intervals comes from earliest-end interval scheduling.
inline KappaResult kappa_exact_path(const Kernel& P, std::size_t n, const KappaOptions& opts = {}) {
  const std::size_t N = P.size();
  if (n < 1 || n > N) throw Error(Errc::OrderTooLarge, "order " + std::to_string(n) + " with " + std::to_string(N) + " states");
  if (!is_nearest_neighbour(P)) throw Error(Errc::InvalidArgument, "kernel has jumps longer than one step");
  KappaResult result;
  result.n = n;
  result.exact = true;
  if (n == 1) {
    StateSet all(N);
    std::iota(all.begin(), all.end(), std::size_t{0});
    result.witness.sets.push_back(std::move(all));
    return result;
  }
  const Kernel K = detail::expansion_kernel(P, opts);
  const Vector& mu = K.space().weights();
  const auto at = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  // e[b][a] = expansion of [a, b]
  std::vector<std::vector<double>> e(N);
  std::vector<double> values;
  values.reserve(N * (N + 1) / 2);
  for (std::size_t b = 0; b < N; ++b) {
    e[b].resize(b + 1);
    double mass = 0.0;
    const double right = b + 1 < N ? mu[at(b)] * K.entries()(at(b), at(b + 1)) : 0.0;
    for (std::size_t a = b + 1; a-- > 0;) {
      mass += mu[at(a)];
      const double left = a > 0 ? mu[at(a)] * K.entries()(at(a), at(a - 1)) : 0.0;
      e[b][a] = (left + right) / mass;
      values.push_back(e[b][a]);
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto schedule = [&](double t, std::vector<std::pair<std::size_t, std::size_t>>* chosen) {
    std::size_t count = 0, start = 0;
    for (std::size_t b = 0; b < N && count < n; ++b)
      for (std::size_t a = b + 1; a-- > start;)
        if (e[b][a] <= t) {
          if (chosen) chosen->emplace_back(a, b);
          ++count;
          start = b + 1;
          break;
        }
    return count;
  };
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (schedule(values[mid], nullptr) >= n) hi = mid;
    else lo = mid + 1;
  }
  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  schedule(values[lo], &chosen);
  for (const auto& [a, b] : chosen) {
    StateSet s(b - a + 1);
    std::iota(s.begin(), s.end(), a);
    result.witness.sets.push_back(std::move(s));
  }
  result.kappa = max_expansion(K, result.witness);
  return result;
}

/// Exact where possible (nearest-neighbour kernels, or enumeration within the
/// caps), otherwise the spectral upper bound.
inline KappaResult kappa_best(const Kernel& P, std::size_t n, const KappaOptions& opts = {}) {
  if (is_nearest_neighbour(P)) return kappa_exact_path(P, n, opts);
  if (P.size() <= opts.state_cap && n <= opts.order_cap) return kappa_exact(P, n, opts);
  return kappa_upper_spectral(P, n, opts);
}

struct CheegerRow {
  std::size_t n = 0;
  double kappa = 0.0;
  double lambda = 0.0;
  double ratio = 0.0;        ///< lambda / kappa
  double sqrt_ratio = 0.0;   ///< sqrt(lambda) / kappa
  double lower_bound = 0.0;  ///< c(n)^2 kappa^2 with c(n) = c0 / n^4
  bool sandwich_pass = true; ///< kappa^2/2 <= lambda (n = 2) and lambda <= 2 kappa
  bool kappa_ge_lambda = true;  ///< diagnostic only, reported never asserted
  DisjointTuple witness;
};

/// Rows n = 1..n_max pairing exact kappa_n with lambda_n.
inline std::vector<CheegerRow> cheeger_report(const Kernel& P, std::size_t n_max, double c0 = 1.0,
                                              const KappaOptions& opts = {}) {
  const SpectralSummary spec = lambda_ladder(P);
  std::vector<CheegerRow> rows;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const KappaResult k = kappa_exact(P, n, opts);
    CheegerRow row;
    row.n = n;
    row.kappa = k.kappa;
    row.lambda = spec.ladder[n - 1];
    row.ratio = row.lambda / row.kappa;
    row.sqrt_ratio = std::sqrt(std::max(0.0, row.lambda)) / row.kappa;
    const double c = c0 / std::pow(static_cast<double>(n), 4);
    row.lower_bound = c * c * row.kappa * row.kappa;
    const bool lower = n != 2 || row.kappa * row.kappa / 2.0 - 1e-9 <= row.lambda;
    const bool upper = row.lambda <= 2.0 * row.kappa + 1e-9;
    row.sandwich_pass = lower && upper;
    row.kappa_ge_lambda = row.kappa >= row.lambda - 1e-12;
    row.witness = k.witness;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mgl

#endif  // MGL_ISOPERIMETRY_HPP
