#ifndef MGL_TAILS_HPP
#define MGL_TAILS_HPP

// Truncated tail functionals of a kernel on L2(mu):
//
//   tau(P, R)   = sup_{f >= 0, mu(f^2) <= 1} mu(f (Pf - R)^+)
//   tail2(P, R) = sup_{mu(f^2) <= 1} mu(((|Pf| - R)^+)^2)^{1/2}
//
// Both are reported as certified lower bounds: the returned witness is
// feasible and reproduces the value. Checks of the inequalities relating
// them are restated per witness so that they are exactly decidable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mgl/chainspace.hpp"
#include "mgl/check.hpp"
#include "mgl/detail/ascent.hpp"
#include "mgl/detail/parallel.hpp"
#include "mgl/detail/rng.hpp"
#include "mgl/detail/sphere.hpp"
#include "mgl/isoperimetry.hpp"
#include "mgl/spectral.hpp"

namespace mgl {

enum class TailMethod { grid, multistart };

inline const char* tail_method_name(TailMethod m) { return m == TailMethod::grid ? "grid" : "multistart"; }

struct TailPoint {
  double R = 0.0;
  double value = 0.0;
  Vector witness;
  TailMethod method = TailMethod::multistart;
  bool certified_lower = true;
};

struct TailOptions {
  std::size_t restarts = 64;
  std::uint64_t seed = 1;
  detail::AscentOptions ascent{};
  /// Dense angular grid instead of multistart; at most 3 states.
  bool grid = false;
  double grid_step = 2e-3;
  /// Let tau range over signed f (the sup is the same; used to test that).
  bool allow_signed = false;
  /// Additional starting points, tried before the generated ones.
  std::vector<Vector> extra_starts;
};

/// mu(f (Pf - R)^+)
inline double tau_value(const Kernel& P, const Vector& f, double R) {
  const Vector Pf = P.apply(f);
  return (P.space().weights().array() * f.array() * (Pf.array() - R).max(0.0)).sum();
}

/// mu(((|Pf| - R)^+)^2)^{1/2}
inline double tail2_value(const Kernel& P, const Vector& f, double R) {
  const Vector Pf = P.apply(f);
  return std::sqrt((P.space().weights().array() * (Pf.array().abs() - R).max(0.0).square()).sum());
}

/// Pf is bounded by ||f||_inf <= 1/sqrt(mu_min) on the unit ball, so both
/// functionals vanish from this level on.
inline double tail_cutoff(const ProbabilitySpace& mu) { return 1.0 / std::sqrt(mu.mu_min()); }

namespace detail {

inline Vector normalized(Vector f, const Vector& mu) {
  const double n = mu_norm(f, mu);
  return n > 0.0 ? Vector(f / n) : f;
}

/// Deterministic candidate starts: constants, singletons, one-step
/// neighbourhoods and sweep sets of the slowest eigenfunction.
inline std::vector<Vector> structured_starts(const Kernel& P) {
  const std::size_t N = P.size();
  const Vector& mu = P.space().weights();
  std::vector<Vector> out;
  out.push_back(Vector::Ones(static_cast<Eigen::Index>(N)));
  for (std::size_t x = 0; x < N; ++x) out.push_back(normalized(indicator(N, {x}), mu));
  for (std::size_t x = 0; x < N; ++x) {
    StateSet near{x};
    for (std::size_t y = 0; y < N; ++y)
      if (y != x && (P(x, y) > 0.0 || P(y, x) > 0.0)) near.push_back(y);
    if (near.size() > 1) out.push_back(normalized(indicator(N, near), mu));
  }
  // Row peaks: f_y = P_xy / mu_y maximizes (Pf)_x on the unit ball.
  for (std::size_t x = 0; x < N; ++x) {
    const Vector row = P.entries().row(static_cast<Eigen::Index>(x)).transpose().cwiseQuotient(mu);
    if (row.maxCoeff() > 0.0) out.push_back(normalized(row, mu));
  }
  if (N >= 2 && P.is_markov() && check_invariance(P)) {
    const SymmetricEigen eig = eigen_sym(symmetrize(P));
    const auto order = argsort(eig.functions.col(1));
    for (std::size_t len = 1; len < N; ++len) {
      StateSet head(order.begin(), order.begin() + static_cast<long>(len));
      StateSet tail(order.end() - static_cast<long>(len), order.end());
      out.push_back(normalized(indicator(N, head), mu));
      out.push_back(normalized(indicator(N, tail), mu));
    }
  }
  return out;
}

struct Functional {
  // value(f) and Euclidean gradient(f); both may assume f feasible.
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  Feasible set;
};

inline TailPoint multistart(const Kernel& P, double R, const Functional& fn, std::vector<Vector> seeds,
                            bool signed_random, const TailOptions& opts) {
  const Vector& mu = P.space().weights();
  const auto N = static_cast<Eigen::Index>(P.size());
  // Rank the deterministic candidates by their value and keep the best half
  // of the restart budget; the rest are random.
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Vector f = seeds[i];
    if (!project(f, mu, fn.set)) continue;
    ranked.emplace_back(-fn.value(f), i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t budget = std::max<std::size_t>(opts.restarts, 1);
  std::vector<Vector> starts;
  starts.push_back(Vector::Ones(N));
  for (const auto& s : opts.extra_starts) starts.push_back(s);
  for (std::size_t i = 0; i < ranked.size() && starts.size() < (budget + 1) / 2 + opts.extra_starts.size(); ++i)
    starts.push_back(seeds[ranked[i].second]);
  const std::size_t fixed = starts.size();
  for (std::size_t r = fixed; r < budget + opts.extra_starts.size(); ++r) {
    Rng rng(mix_seed(opts.seed, r));
    Vector f(N);
    const double density = rng.uniform(0.1, 1.0);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double v = signed_random ? rng.normal() : std::abs(rng.normal());
      f[i] = rng.bernoulli(density) ? v : 0.0;
    }
    if (f.isZero()) f[static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(N)))] = 1.0;
    starts.push_back(std::move(f));
  }

  std::vector<AscentResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = ascend(starts[i], mu, fn.value, fn.gradient, fn.set, opts.ascent);
  });
  TailPoint best;
  best.R = R;
  best.method = TailMethod::multistart;
  best.value = -std::numeric_limits<double>::infinity();
  for (auto& run : runs)
    if (run.value > best.value) {
      best.value = run.value;
      best.witness = std::move(run.point);
    }
  return best;
}

inline TailPoint grid_search(const Kernel& P, double R, const std::function<double(const Vector&)>& value,
                             bool nonneg, double step) {
  const Vector root_inv = P.space().weights().cwiseSqrt().cwiseInverse();
  TailPoint best;
  best.R = R;
  best.method = TailMethod::grid;
  best.value = -std::numeric_limits<double>::infinity();
  for_each_sphere_point(P.size(), step, nonneg, [&](const Vector& g) {
    const Vector f = root_inv.cwiseProduct(g);
    const double v = value(f);
    if (v > best.value) {
      best.value = v;
      best.witness = f;
    }
  });
  return best;
}

inline TailPoint zero_point(const Kernel& P, double R, TailMethod method) {
  TailPoint p;
  p.R = R;
  p.value = 0.0;
  p.witness = Vector::Ones(static_cast<Eigen::Index>(P.size()));
  p.method = method;
  return p;
}

}  // namespace detail

/// Best found value of mu(f (Pf - R)^+) over f >= 0 in the unit ball of
/// L2(mu). Negative R is treated as 0.
inline TailPoint tau(const Kernel& P, double R, const TailOptions& opts = {}) {
  R = std::max(R, 0.0);
  const TailMethod method = opts.grid ? TailMethod::grid : TailMethod::multistart;
  if (R >= tail_cutoff(P.space())) return detail::zero_point(P, R, method);
  auto value = [&P, R](const Vector& f) { return tau_value(P, f, R); };
  if (opts.grid) {
    if (opts.allow_signed) throw Error(Errc::InvalidArgument, "grid mode covers nonnegative f only");
    return detail::grid_search(P, R, value, true, opts.grid_step);
  }
  const Vector& mu = P.space().weights();
  auto gradient = [&P, &mu, R](const Vector& f) -> Vector {
    const Vector Pf = P.apply(f);
    const Vector excess = (Pf.array() - R).max(0.0).matrix();
    const Vector active = (Pf.array() > R).cast<double>().matrix();
    return mu.cwiseProduct(excess) +
           P.entries().transpose() * mu.cwiseProduct(f).cwiseProduct(active);
  };
  const detail::Feasible set = opts.allow_signed ? detail::Feasible::ball : detail::Feasible::nonneg_sphere;
  detail::Functional fn{value, gradient, set};
  return detail::multistart(P, R, fn, detail::structured_starts(P), opts.allow_signed, opts);
}

/// Best found value of ||(|Pf| - R)^+||_{L2(mu)} over the unit ball.
inline TailPoint tail2(const Kernel& P, double R, const TailOptions& opts = {}) {
  R = std::max(R, 0.0);
  const TailMethod method = opts.grid ? TailMethod::grid : TailMethod::multistart;
  const Vector& mu = P.space().weights();
  // |Pf|_x <= sqrt(sum_y P_xy^2 / mu_y) on the unit ball.
  const Vector reach = (P.entries().array().square().rowwise() / mu.transpose().array()).rowwise().sum().sqrt();
  if (R >= reach.maxCoeff()) return detail::zero_point(P, R, method);
  auto value = [&P, R](const Vector& f) { return tail2_value(P, f, R); };
  if (opts.grid) return detail::grid_search(P, R, value, false, opts.grid_step);
  auto squared = [&P, &mu, R](const Vector& f) {
    const Vector Pf = P.apply(f);
    return (mu.array() * (Pf.array().abs() - R).max(0.0).square()).sum();
  };
  auto gradient = [&P, &mu, R](const Vector& f) -> Vector {
    const Vector Pf = P.apply(f);
    const Vector excess = (Pf.array().abs() - R).max(0.0).matrix();
    const Vector sign = Pf.array().sign().matrix();
    return 2.0 * (P.entries().transpose() * mu.cwiseProduct(excess).cwiseProduct(sign));
  };
  std::vector<Vector> seeds = detail::structured_starts(P);
  {
    // Top right-singular function of P on L2(mu) is the R = 0 optimum.
    const Matrix M = detail::similarity_form(P.entries(), mu);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    seeds.insert(seeds.begin(), mu.cwiseSqrt().cwiseInverse().cwiseProduct(svd.matrixV().col(0)));
  }
  detail::Functional fn{squared, gradient, detail::Feasible::sphere};
  TailPoint p = detail::multistart(P, R, fn, std::move(seeds), true, opts);
  p.value = tail2_value(P, p.witness, R);
  return p;
}

/// Certified upper bound on tail2(P, R) for at most 3 states: the grid maximum
/// of a pointwise majorant that absorbs the grid's covering radius.
inline double tail2_certified_upper(const Kernel& P, double R, double step = 2e-3) {
  R = std::max(R, 0.0);
  const Vector& mu = P.space().weights();
  const Vector reach = (P.entries().array().square().rowwise() / mu.transpose().array()).rowwise().sum().sqrt();
  const Vector root_inv = mu.cwiseSqrt().cwiseInverse();
  double best = 0.0;
  // Two passes: the covering radius is only known after the sweep.
  const double radius = detail::for_each_sphere_point(P.size(), step, false, [](const Vector&) {});
  detail::for_each_sphere_point(P.size(), step, false, [&](const Vector& g) {
    const Vector Pf = P.apply(root_inv.cwiseProduct(g));
    const double v = std::sqrt((mu.array() * (Pf.array().abs() + radius * reach.array() - R).max(0.0).square()).sum());
    best = std::max(best, v);
  });
  return best;
}

struct TailProfile {
  std::vector<TailPoint> points;
  std::vector<Vector> shared_pool;
};

/// {0, 1/4, 1/2, 1, 2, 4, 8} together with the analytic cutoff 1/sqrt(mu_min).
inline std::vector<double> default_r_grid(const ProbabilitySpace& mu) {
  std::vector<double> grid{0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  const double cut = tail_cutoff(mu);
  grid.push_back(cut);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// tau on an increasing grid, with every witness re-evaluated at every level
/// so the reported profile is exactly nonincreasing.
inline TailProfile tau_profile(const Kernel& P, const std::vector<double>& R_grid, const TailOptions& opts = {}) {
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    if (R_grid[i] < 0.0) throw Error(Errc::InvalidArgument, "negative R in profile grid");
    if (i > 0 && !(R_grid[i] > R_grid[i - 1])) throw Error(Errc::InvalidArgument, "R grid must increase");
  }
  TailProfile profile;
  for (double R : R_grid) profile.shared_pool.push_back(tau(P, R, opts).witness);
  for (double R : R_grid) {
    TailPoint p;
    p.R = R;
    p.method = opts.grid ? TailMethod::grid : TailMethod::multistart;
    p.value = -1.0;
    if (R >= tail_cutoff(P.space())) {
      p = detail::zero_point(P, R, p.method);
    } else {
      for (const auto& f : profile.shared_pool) {
        const double v = tau_value(P, f, R);
        if (v > p.value) {
          p.value = v;
          p.witness = f;
        }
      }
    }
    profile.points.push_back(std::move(p));
  }
  return profile;
}

struct TailCertificate {
  double bound = 0.0;
  Vector witness;
  std::size_t set_index = 0;  ///< k, the lightest set of the tuple
  double epsilon = 0.0;       ///< largest expansion in the tuple
  double core_mass = 0.0;     ///< mu(B_k)
};

/// Lower bound on tau(P, R) from a disjoint tuple: with eps the largest
/// expansion and A the lightest set, B = A ∩ {P 1_A >= 1 - sqrt(eps)} gives
/// tau >= mu(B)/mu(A) (1 - sqrt(eps) - R sqrt(mu(A)))^+ at f = 1_A / sqrt(mu(A)).
inline TailCertificate tail_cert_from_tuple(const Kernel& P, const DisjointTuple& T, double R) {
  if (T.sets.empty()) throw Error(Errc::EmptyTuple, "certificate needs at least one set");
  validate_tuple(T, P.size());
  TailCertificate cert;
  const ProbabilitySpace& mu = P.space();
  for (std::size_t k = 0; k < T.sets.size(); ++k) {
    cert.epsilon = std::max(cert.epsilon, expansion(P, T.sets[k]));
    if (mu.mass(T.sets[k]) < mu.mass(T.sets[cert.set_index])) cert.set_index = k;
  }
  const StateSet& A = T.sets[cert.set_index];
  const double massA = mu.mass(A);
  const Vector hold = P.apply(indicator(P.size(), A));
  const double level = 1.0 - std::sqrt(cert.epsilon);
  for (auto x : A)
    if (hold[static_cast<Eigen::Index>(x)] >= level) cert.core_mass += mu.weight(x);
  cert.bound = cert.core_mass / massA * std::max(0.0, level - R * std::sqrt(massA));
  cert.witness = indicator(P.size(), A) / std::sqrt(massA);
  return cert;
}

struct GapTailBound {
  double bound = 0.0;
  double theta_clamped = 0.0;
  TailPoint tau;
  CheckResult check;
};

/// tau(P, R) <= theta' + (1 - theta')/R + 1/sqrt(R) for R > 1, where
/// theta' = max(theta, 0). tau is a certified lower bound, so a failure is a
/// genuine violation.
inline GapTailBound gap_tail_bound_check(const Kernel& P, double R, const TailOptions& opts = {}) {
  if (!(R > 1.0)) throw Error(Errc::RTooSmall, "the bound needs R > 1");
  const GapResult gap = spectral_gap(P);
  GapTailBound out;
  out.theta_clamped = std::max(gap.theta, 0.0);
  out.bound = out.theta_clamped + (1.0 - out.theta_clamped) / R + 1.0 / std::sqrt(R);
  out.tau = tau(P, R, opts);
  out.check = make_check(out.tau.value, out.bound, 1e-9);
  return out;
}

namespace detail {

inline void require_unit_nonneg(const ProbabilitySpace& mu, const Vector& f) {
  if ((f.array() < 0.0).any()) throw Error(Errc::InvalidArgument, "f must be nonnegative");
  if (mu.norm_sq(f) > 1.0 + 1e-12) throw Error(Errc::InvalidArgument, "f must lie in the unit ball");
}

inline double tau_at(const ProbabilitySpace& mu, const Vector& f, const Vector& Qf, double R) {
  return (mu.weights().array() * f.array() * (Qf.array() - R).max(0.0)).sum();
}

}  // namespace detail

/// mu(f(P-hat f - R)^+) <= (mu(f(Pf - R)^+) + mu(f(P* f - R)^+)) / 2, which is
/// convexity of t -> (t - R)^+ applied pointwise.
inline CheckResult pointwise_symmetrization_check(const Kernel& P, const Vector& f, double R) {
  detail::require_unit_nonneg(P.space(), f);
  const Kernel adj = adjoint(P);
  const Vector Pf = P.apply(f), Af = adj.apply(f);
  const Vector Hf = 0.5 * (Pf + Af);
  const ProbabilitySpace& mu = P.space();
  return make_check(detail::tau_at(mu, f, Hf, R),
                    0.5 * detail::tau_at(mu, f, Pf, R) + 0.5 * detail::tau_at(mu, f, Af, R), 1e-12);
}

/// For reversible Markov P and g = Pf:
/// mu(f(P^{2m+1} f - R)^+) <= mu(g(P^{2m-1} g - R)^+).
inline CheckResult pointwise_power_monotonicity_check(const Kernel& P, const Vector& f, double R, int m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be positive");
  if (!is_reversible(P, 1e-12)) throw Error(Errc::NotReversible, "power monotonicity needs a reversible kernel");
  detail::require_unit_nonneg(P.space(), f);
  auto apply_power = [&P](Vector v, int k) {
    for (int i = 0; i < k; ++i) v = P.apply(v);
    return v;
  };
  const Vector g = P.apply(f);
  const ProbabilitySpace& mu = P.space();
  return make_check(detail::tau_at(mu, f, apply_power(f, 2 * m + 1), R),
                    detail::tau_at(mu, g, apply_power(g, 2 * m - 1), R), 1e-12);
}

struct MeanZeroTailResult {
  double epsilon = 0.0;  ///< top of the spectrum of P-hat^2 on mean-zero functions
  TailPoint tail;
  CheckResult check;     ///< tail2^2 <= epsilon
};

/// For reversible ergodic P and R >= 1: tail2(P, R)^2 <= sup of sigma(P^2) on
/// mean-zero functions.
inline MeanZeroTailResult mean_zero_tail_check(const Kernel& P, double R, const TailOptions& opts = {}) {
  if (R < 1.0) throw Error(Errc::RTooSmall, "the bound needs R >= 1");
  if (!is_reversible(P, 1e-12)) throw Error(Errc::NotReversible, "needs a reversible kernel");
  detail::require_invariant(P);
  if (!is_strongly_connected(P)) throw Error(Errc::NotErgodic, "support graph is not strongly connected");
  MeanZeroTailResult out;
  out.epsilon = mean_zero_square_top(P);
  out.tail = tail2(P, R, opts);
  out.check = make_check(out.tail.value * out.tail.value, out.epsilon, 1e-9);
  return out;
}

}  // namespace mgl

#endif  // MGL_TAILS_HPP
