#ifndef MGL_INEQUALITIES_HPP
#define MGL_INEQUALITIES_HPP

// Poincare-type functional inequalities for a symmetric quadratic form
// E(f,g) = <f, (1 - Q) g>_mu: best constants (as witnessed lower bounds or,
// on at most three states, grid-certified upper bounds) and exact pointwise
// checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "mgl/chainspace.hpp"
#include "mgl/check.hpp"
#include "mgl/detail/ascent.hpp"
#include "mgl/detail/parallel.hpp"
#include "mgl/detail/rng.hpp"
#include "mgl/detail/sphere.hpp"
#include "mgl/spectral.hpp"

namespace mgl {

class DirichletForm {
 public:
  /// Q must be self-adjoint in L2(mu).
  DirichletForm(ProbabilitySpace space, Matrix Q) : space_(std::move(space)), Q_(std::move(Q)) {
    const auto n = static_cast<Eigen::Index>(space_.size());
    if (Q_.rows() != n || Q_.cols() != n) throw Error(Errc::InvalidArgument, "form operator has the wrong shape");
    const Vector& w = space_.weights();
    Matrix sym = w.asDiagonal() * (Matrix::Identity(n, n) - Q_);
    sym_ = 0.5 * (sym + sym.transpose());
    const Vector ones = Vector::Ones(n);
    conservative_ = ones.dot(sym_ * ones) <= 1e-12;
  }

  const ProbabilitySpace& space() const { return space_; }
  const Matrix& operator_matrix() const { return Q_; }
  std::size_t size() const { return space_.size(); }

  double operator()(const Vector& f, const Vector& g) const { return f.dot(sym_ * g); }
  /// Conservative forms are evaluated on f - mu(f), which keeps near-constant
  /// f accurate.
  double energy(const Vector& f) const {
    if (!conservative_) return f.dot(sym_ * f);
    const Vector c = f.array() - space_.mean(f);
    return c.dot(sym_ * c);
  }
  /// Euclidean gradient of f -> E(f,f).
  Vector energy_gradient(const Vector& f) const {
    if (!conservative_) return 2.0 * (sym_ * f);
    const Vector c = f.array() - space_.mean(f);
    return 2.0 * (sym_ * c);
  }
  /// mu-weighted Gram matrix of the form: E(f,g) = f^T G g.
  const Matrix& gram() const { return sym_; }

  bool conservative() const { return conservative_; }

 private:
  ProbabilitySpace space_;
  Matrix Q_;
  Matrix sym_;
  bool conservative_ = false;
};

/// E(f,f) = mu(f (1 - P) f), written with P-hat so the form is symmetric.
inline DirichletForm markov_form(const Kernel& P) {
  return DirichletForm(P.space(), symmetrize(P).entries());
}

/// Eigenpairs of 1 - Q ascending, with L2(mu)-orthonormal eigenfunctions.
inline SymmetricEigen form_eigen(const DirichletForm& E) {
  const Vector& w = E.space().weights();
  const Vector inv_root = w.cwiseSqrt().cwiseInverse();
  const Matrix M = inv_root.asDiagonal() * E.gram() * inv_root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (M + M.transpose()));
  return SymmetricEigen{solver.eigenvalues(), inv_root.asDiagonal() * solver.eigenvectors()};
}

// ---------------------------------------------------------------------------
// Profiles phi on [1, 2)

class PhiProfile {
 public:
  enum class Family { constant, power };

  static PhiProfile constant(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "constant profile needs c > 0");
    return PhiProfile(Family::constant, c);
  }
  static PhiProfile power(double a) {
    if (!(a > 0.0 && a <= 1.0)) throw Error(Errc::InvalidArgument, "power profile needs a in (0, 1]");
    return PhiProfile(Family::power, a);
  }

  Family family() const { return family_; }
  double parameter() const { return param_; }
  double operator()(double p) const { return family_ == Family::constant ? param_ : std::pow(2.0 - p, param_); }

  double upper_end() const { return 2.0 - gap_; }
  std::size_t points() const { return points_; }
  PhiProfile with_grid(double gap, std::size_t points) const {
    if (!(gap > 0.0 && gap < 1.0) || points < 2) throw Error(Errc::InvalidArgument, "bad p-grid");
    PhiProfile p = *this;
    p.gap_ = gap;
    p.points_ = points;
    return p;
  }
  std::vector<double> grid() const {
    std::vector<double> g(points_);
    const double hi = upper_end();
    for (std::size_t i = 0; i < points_; ++i)
      g[i] = 1.0 + (hi - 1.0) * static_cast<double>(i) / static_cast<double>(points_ - 1);
    return g;
  }

 private:
  PhiProfile(Family f, double param) : family_(f), param_(param) {}
  Family family_;
  double param_;
  double gap_ = 1e-4;
  std::size_t points_ = 400;
};

inline double c_phi(const PhiProfile& phi) {
  double best = 0.0;
  for (double p : phi.grid()) best = std::max(best, (2.0 - p) / phi(p));
  return best;
}

namespace detail {

/// mu(|f|^p)^{2/p}, scaled by max|f| to stay in range.
inline double lp_norm_sq(const Vector& mu, const Vector& f, double p) {
  const double s = f.cwiseAbs().maxCoeff();
  if (s == 0.0) return 0.0;
  const double m = (mu.array() * (f.array().abs() / s).pow(p)).sum();
  return s * s * std::pow(m, 2.0 / p);
}

/// mu(f^2) - mu(|f|^p)^{2/p}, expanded around a = |f| / mu(|f|) so that both
/// terms are formed from deviations a - 1 and near-constant f keep their
/// relative accuracy.
inline double lo_numerator(const Vector& mu, const Vector& f, double p) {
  const double m = (mu.array() * f.array().abs()).sum();
  if (m == 0.0) return 0.0;
  const Eigen::ArrayXd u = f.array().abs() / m - 1.0;
  // mu(u) = 1 - mu(1) exactly; summing it would only add rounding.
  const double w1 = mu.sum() - 1.0;
  const double s1 = -w1;
  const double s2 = (mu.array() * u.square()).sum();
  double curv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double d = u[i] == -1.0 ? -1.0 : std::expm1(p * std::log1p(u[i]));
    curv += mu[i] * (d - p * u[i]);
  }
  const double x = w1 + 2.0 * s1 + s2;
  const double y = w1 + p * s1 + curv;
  return m * m * (x - std::expm1(2.0 / p * std::log1p(y)));
}

struct LoValue {
  double value = 0.0;
  double p = 1.0;
};

inline LoValue lo_variance_at(const Vector& mu, const Vector& f, const PhiProfile& phi) {
  const std::vector<double> grid = phi.grid();
  auto ratio = [&](double p) { return lo_numerator(mu, f, p) / phi(p); };
  LoValue best{-std::numeric_limits<double>::infinity(), 1.0};
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = ratio(grid[i]);
    if (v > best.value) {
      best = {v, grid[i]};
      arg = i;
    }
  }
  // Golden-section refinement on the two neighbouring cells.
  double a = grid[arg == 0 ? 0 : arg - 1];
  double b = grid[std::min(arg + 1, grid.size() - 1)];
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = ratio(c), fd = ratio(d);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = ratio(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = ratio(d);
    }
  }
  if (fc > best.value) best = {fc, c};
  if (fd > best.value) best = {fd, d};
  best.value = std::max(best.value, 0.0);
  return best;
}

/// Euclidean gradient of f -> (mu(f^2) - mu(|f|^p)^{2/p}) at fixed p.
inline Vector lo_numerator_gradient(const Vector& mu, const Vector& f, double p) {
  const double s = f.cwiseAbs().maxCoeff();
  Vector g = 2.0 * mu.cwiseProduct(f);
  if (s == 0.0) return g;
  const Eigen::ArrayXd a = f.array().abs() / s;
  const double m = (mu.array() * a.pow(p)).sum();
  // d/df_x of s^2 m^{2/p} = 2 s m^{2/p - 1} mu_x a_x^{p-1} sgn f_x
  const Eigen::ArrayXd dir = (a > 0.0).select(a.pow(p - 1.0), 0.0) * f.array().sign();
  g.array() -= 2.0 * s * std::pow(m, 2.0 / p - 1.0) * mu.array() * dir;
  return g;
}

}  // namespace detail

/// sup over p in [1, 2) of (mu(f^2) - mu(|f|^p)^{2/p}) / phi(p), on the
/// profile's p-grid with one golden-section refinement around the argmax.
inline double lo_variance(const ProbabilitySpace& mu, const Vector& f, const PhiProfile& phi) {
  if (f.size() != static_cast<Eigen::Index>(mu.size())) throw Error(Errc::InvalidArgument, "length mismatch");
  if (f.isZero(0.0)) throw Error(Errc::ZeroFunction, "variance functional of the zero function");
  return detail::lo_variance_at(mu.weights(), f, phi).value;
}

// ---------------------------------------------------------------------------
// Poincare and defective Poincare

inline double poincare_constant(const Kernel& P) { return spectral_gap(P).poincare_C; }

struct DefectiveOptions {
  std::size_t restarts = 32;
  std::uint64_t seed = 1;
  detail::AscentOptions ascent{};
  /// Grid certification on at most 3 states: the reported C2 is then an
  /// upper bound of the supremum.
  bool grid = false;
  double grid_step = 1e-3;
};

struct DefectiveResult {
  double C2 = 0.0;      ///< reported constant
  double attained = 0;  ///< objective value at the witness
  Vector witness;       ///< f >= 0 with mu(f) = 1
  bool certified = false;
};

namespace detail {

/// Euclidean projection onto the probability simplex.
inline void project_simplex(Vector& u) {
  std::vector<double> s(u.data(), u.data() + u.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) shift = t;
  }
  u = (u.array() - shift).max(0.0).matrix();
}

}  // namespace detail

/// sup over f >= 0 with mu(f) = 1 of mu(f^2) - C1 E(f,f), searched in the
/// mass coordinates u = mu f on the simplex.
inline DefectiveResult defective_c2(const DirichletForm& E, double C1, const DefectiveOptions& opts = {}) {
  if (!(C1 >= 0.0)) throw Error(Errc::InvalidArgument, "C1 must be nonnegative");
  const Vector& mu = E.space().weights();
  const auto N = mu.size();
  const Matrix& G = E.gram();
  const Vector inv_mu = mu.cwiseInverse();
  // objective(u) = u^T H u
  Matrix H = Matrix(inv_mu.asDiagonal()) - C1 * (inv_mu.asDiagonal() * G * inv_mu.asDiagonal());
  H = 0.5 * (H + H.transpose()).eval();
  auto value = [&](const Vector& u) { return u.dot(H * u); };
  auto gradient = [&](const Vector& u) -> Vector { return 2.0 * (H * u); };

  DefectiveResult best;
  best.attained = -std::numeric_limits<double>::infinity();
  auto offer = [&](double v, const Vector& u) {
    if (v > best.attained) {
      best.attained = v;
      best.witness = u.cwiseProduct(inv_mu);
    }
  };
  // f = 1 and the vertices f = 1_x / mu_x in closed form.
  offer(E.conservative() ? 1.0 : 1.0 - C1 * E.energy(Vector::Ones(N)), mu);
  for (Eigen::Index x = 0; x < N; ++x) {
    Vector u = Vector::Zero(N);
    u[x] = 1.0;
    offer((1.0 - C1 * G(x, x) / mu[x]) / mu[x], u);
  }

  if (opts.grid) {
    if (N > 3) throw Error(Errc::InvalidArgument, "grid certification covers at most 3 states");
    const auto m = static_cast<long>(std::ceil(1.0 / opts.grid_step));
    const double h = 1.0 / static_cast<double>(m);
    // Chord covering radius of the lattice {k/m} on the simplex.
    const double delta = N == 1 ? 0.0 : (N == 2 ? std::sqrt(2.0) * h / 2.0 : std::sqrt(2.0 / 3.0) * h);
    const double hnorm = H.cwiseAbs().rowwise().sum().maxCoeff();
    double upper = -std::numeric_limits<double>::infinity();
    Vector u(N);
    auto visit = [&] {
      const double v = value(u);
      offer(v, u);
      upper = std::max(upper, v + gradient(u).norm() * delta + hnorm * delta * delta);
    };
    if (N == 1) {
      u << 1.0;
      visit();
    } else if (N == 2) {
      for (long i = 0; i <= m; ++i) {
        u << h * static_cast<double>(i), h * static_cast<double>(m - i);
        visit();
      }
    } else {
      for (long i = 0; i <= m; ++i)
        for (long j = 0; i + j <= m; ++j) {
          u << h * static_cast<double>(i), h * static_cast<double>(j), h * static_cast<double>(m - i - j);
          visit();
        }
    }
    best.C2 = std::max(upper, best.attained);
    best.certified = true;
    return best;
  }

  std::vector<Vector> starts;
  starts.push_back(mu);
  for (Eigen::Index x = 0; x < N; ++x) {
    Vector u = 0.5 * mu;
    u[x] += 0.5;
    starts.push_back(u);
  }
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    detail::Rng rng(detail::mix_seed(opts.seed, r));
    Vector u(N);
    for (Eigen::Index i = 0; i < N; ++i) u[i] = -std::log(std::max(rng.uniform(), 1e-300));
    starts.push_back(u / u.sum());
  }
  const Vector ones = Vector::Ones(N);
  std::vector<detail::AscentResult> runs(starts.size());
  detail::parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = detail::ascend_with(
        starts[i], ones, value, gradient,
        [](Vector& u) {
          detail::project_simplex(u);
          return true;
        },
        opts.ascent);
  });
  for (const auto& r : runs) offer(r.value, r.point);
  best.C2 = best.attained;
  return best;
}

inline DefectiveResult defective_c2(const Kernel& P, double C1, const DefectiveOptions& opts = {}) {
  return defective_c2(markov_form(P), C1, opts);
}

/// Super-Poincare profile: the best C2 for C1 = r.
inline double super_poincare_beta(const Kernel& P, double r, const DefectiveOptions& opts = {}) {
  if (!(r > 0.0)) throw Error(Errc::InvalidArgument, "r must be positive");
  return defective_c2(P, r, opts).C2;
}

// ---------------------------------------------------------------------------
// Weak Poincare

struct WeakPoincareOptions {
  std::size_t restarts = 32;
  std::uint64_t seed = 1;
  detail::AscentOptions ascent{};
};

struct WeakPoincareResult {
  double alpha = 0.0;
  Vector witness;
  bool infinite = false;
};

namespace detail {

/// Clip to [-1, 1], shifting first so that the mu-mean is 0 when requested.
inline void project_box(Vector& f, const Vector& mu, bool mean_zero) {
  if (!mean_zero) {
    f = f.cwiseMax(-1.0).cwiseMin(1.0);
    return;
  }
  auto mean_after = [&](double nu) { return (mu.array() * (f.array() - nu).max(-1.0).min(1.0)).sum(); };
  double lo = f.minCoeff() - 1.0, hi = f.maxCoeff() + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_after(mid) > 0.0 ? lo : hi) = mid;
  }
  const double nu = 0.5 * (lo + hi);
  f = (f.array() - nu).max(-1.0).min(1.0).matrix();
}

}  // namespace detail

/// sup of (mu(f^2) - r) / E(f,f) over ||f||_inf <= 1 with mu(f^2) > r,
/// restricted to mu-mean-zero f when the form is conservative.
inline WeakPoincareResult weak_poincare_alpha(const DirichletForm& E, double r, const WeakPoincareOptions& opts = {}) {
  if (!(r > 0.0)) throw Error(Errc::InvalidArgument, "r must be positive");
  WeakPoincareResult out;
  const Vector& mu = E.space().weights();
  const auto N = mu.size();
  out.witness = Vector::Zero(N);
  if (r >= 1.0) return out;
  const bool mean_zero = E.conservative();
  const SymmetricEigen eig = form_eigen(E);

  // Directions of zero energy make the ratio unbounded.
  for (Eigen::Index k = 0; k < N; ++k) {
    if (eig.values[k] > 1e-12) break;
    Vector v = eig.functions.col(k);
    if (mean_zero) v.array() -= E.space().mean(v);
    const double top = v.cwiseAbs().maxCoeff();
    if (top < 1e-9) continue;
    v /= top;
    if ((mu.array() * v.array().square()).sum() > r) {
      out.alpha = std::numeric_limits<double>::infinity();
      out.infinite = true;
      out.witness = v;
      return out;
    }
  }

  auto value = [&](const Vector& f) {
    const double m2 = (mu.array() * f.array().square()).sum();
    const double e = E.energy(f);
    if (!(m2 > r) || !(e > 0.0)) return -std::numeric_limits<double>::infinity();
    return (m2 - r) / e;
  };
  auto gradient = [&](const Vector& f) -> Vector {
    const double m2 = (mu.array() * f.array().square()).sum();
    const double e = E.energy(f);
    return (2.0 * mu.cwiseProduct(f) * e - (m2 - r) * E.energy_gradient(f)) / (e * e);
  };
  auto proj = [&](Vector& f) {
    detail::project_box(f, mu, mean_zero);
    return true;
  };

  std::vector<Vector> starts;
  if (!mean_zero) starts.push_back(Vector::Ones(N));
  for (Eigen::Index k = mean_zero ? 1 : 0; k < std::min<Eigen::Index>(N, 6); ++k) {
    Vector v = eig.functions.col(k);
    v /= v.cwiseAbs().maxCoeff();
    starts.push_back(v);
    starts.push_back(v.array().sign().matrix());
  }
  for (std::size_t i = 0; i < opts.restarts; ++i) {
    detail::Rng rng(detail::mix_seed(opts.seed, i));
    Vector f(N);
    for (Eigen::Index x = 0; x < N; ++x) f[x] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    starts.push_back(f);
  }
  std::vector<detail::AscentResult> runs(starts.size());
  detail::parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = detail::ascend_with(starts[i], mu, value, gradient, proj, opts.ascent);
  });
  for (const auto& run : runs)
    if (run.value > out.alpha) {
      out.alpha = run.value;
      out.witness = run.point;
    }
  return out;
}

inline WeakPoincareResult weak_poincare_alpha(const Kernel& P, double r, const WeakPoincareOptions& opts = {}) {
  return weak_poincare_alpha(markov_form(P), r, opts);
}

// ---------------------------------------------------------------------------
// Best constants of ratio inequalities, as witnessed lower bounds

struct RatioOptions {
  std::size_t restarts = 24;
  std::uint64_t seed = 1;
  detail::AscentOptions ascent{};
  /// Angular step of the seeding scan used on at most 3 states.
  double scan_step = 1e-2;
};

struct RatioEstimate {
  double estimate = 0.0;
  Vector witness;
};

namespace detail {

inline RatioEstimate ratio_multistart(const DirichletForm& E, bool nonneg, const RatioOptions& opts,
                                      const std::function<double(const Vector&)>& value,
                                      const std::function<Vector(const Vector&)>& gradient) {
  const Vector& mu = E.space().weights();
  const auto N = mu.size();
  const Feasible set = nonneg ? Feasible::nonneg_sphere : Feasible::sphere;
  const SymmetricEigen eig = form_eigen(E);
  std::vector<Vector> starts;
  const Vector ones = Vector::Ones(N);
  for (Eigen::Index k = 1; k < std::min<Eigen::Index>(N, 5); ++k) {
    const Vector v = eig.functions.col(k);
    if (!nonneg) starts.push_back(v);
    for (double d : {1e-4, 1e-3, 1e-1, 0.5, 1.0, 3.0}) {
      starts.push_back(ones + d * v);
      starts.push_back(ones - d * v);
    }
  }
  for (Eigen::Index x = 0; x < N; ++x) {
    Vector s = Vector::Zero(N);
    s[x] = 1.0;
    starts.push_back(s);
  }
  if (N <= 3) {
    // Seed with the best few points of a coarse scan.
    const Vector root_inv = mu.cwiseSqrt().cwiseInverse();
    std::vector<std::pair<double, Vector>> scan;
    for_each_sphere_point(static_cast<std::size_t>(N), opts.scan_step, nonneg, [&](const Vector& g) {
      const Vector f = root_inv.cwiseProduct(g);
      scan.emplace_back(value(f), f);
    });
    std::stable_sort(scan.begin(), scan.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(scan.size(), 8); ++i) starts.push_back(scan[i].second);
  }
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Rng rng(mix_seed(opts.seed, r));
    Vector f(N);
    for (Eigen::Index x = 0; x < N; ++x) f[x] = nonneg ? std::abs(rng.normal()) : rng.normal();
    starts.push_back(f);
  }
  std::vector<AscentResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { runs[i] = ascend(starts[i], mu, value, gradient, set, opts.ascent); });
  RatioEstimate best{-std::numeric_limits<double>::infinity(), ones};
  for (const auto& run : runs)
    if (run.value > best.estimate) {
      best.estimate = run.value;
      best.witness = run.point;
    }
  return best;
}

/// Energies below this fraction of mu(f^2) are treated as constants.
inline constexpr double kConstantEnergy = 1e-14;

}  // namespace detail

/// Largest found Var_phi(f) / E(f,f) over nonconstant f.
inline RatioEstimate lo_best_constant(const Kernel& P, const PhiProfile& phi, const RatioOptions& opts = {}) {
  spectral_gap(P);
  const DirichletForm E = markov_form(P);
  const Vector& mu = P.space().weights();
  auto value = [&](const Vector& f) {
    const double e = E.energy(f);
    if (!(e > detail::kConstantEnergy * E.space().norm_sq(f))) return -std::numeric_limits<double>::infinity();
    return detail::lo_variance_at(mu, f, phi).value / e;
  };
  auto gradient = [&](const Vector& f) -> Vector {
    const detail::LoValue v = detail::lo_variance_at(mu, f, phi);
    const double e = E.energy(f);
    const Vector dv = detail::lo_numerator_gradient(mu, f, v.p) / phi(v.p);
    return (dv * e - v.value * E.energy_gradient(f)) / (e * e);
  };
  return detail::ratio_multistart(E, false, opts, value, gradient);
}

/// mu(f^2 log f^2) with 0 log 0 = 0.
inline double entropy_sq(const ProbabilitySpace& mu, const Vector& f) {
  double s = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    const double f2 = f[x] * f[x];
    if (f2 > 0.0) s += mu.weights()[x] * f2 * std::log(f2);
  }
  return s;
}

namespace detail {

/// Ent(f^2) = mu(f^2 log f^2) - mu(f^2) log mu(f^2), summed as
/// m2 mu((1+u) log(1+u) - u) + m2 mu(u) with u = f^2 / m2 - 1, where
/// mu(u) = 1 - mu(1) exactly.
inline double entropy_functional(const Vector& mu, const Vector& f) {
  const double m2 = (mu.array() * f.array().square()).sum();
  if (m2 == 0.0) return 0.0;
  double h = 0.0;
  const double s1 = 1.0 - mu.sum();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double u = f[i] * f[i] / m2 - 1.0;
    if (u == -1.0) {
      h += mu[i];
    } else if (std::abs(u) < 1e-4) {
      h += mu[i] * u * u * (0.5 + u * (-1.0 / 6 + u * (1.0 / 12 - u / 20)));
    } else {
      h += mu[i] * ((1.0 + u) * std::log1p(u) - u);
    }
  }
  return m2 * (h + s1);
}

}  // namespace detail

/// Largest found Ent(f^2) / E(f,f) over nonconstant f, where
/// Ent(f^2) = mu(f^2 log f^2) - mu(f^2) log mu(f^2).
inline RatioEstimate logsobolev_constant(const Kernel& P, const RatioOptions& opts = {}) {
  spectral_gap(P);
  const DirichletForm E = markov_form(P);
  const ProbabilitySpace& space = P.space();
  const Vector& mu = space.weights();
  auto ent = [&](const Vector& f) { return detail::entropy_functional(mu, f); };
  auto value = [&](const Vector& f) {
    const double e = E.energy(f);
    if (!(e > detail::kConstantEnergy * space.norm_sq(f))) return -std::numeric_limits<double>::infinity();
    return ent(f) / e;
  };
  auto gradient = [&](const Vector& f) -> Vector {
    const double m2 = space.norm_sq(f);
    Vector dent(f.size());
    for (Eigen::Index x = 0; x < f.size(); ++x)
      dent[x] = f[x] == 0.0 ? 0.0 : 2.0 * mu[x] * f[x] * (std::log(f[x] * f[x]) - std::log(m2));
    const double e = E.energy(f);
    return (dent * e - ent(f) * E.energy_gradient(f)) / (e * e);
  };
  return detail::ratio_multistart(E, true, opts, value, gradient);
}

// ---------------------------------------------------------------------------
// Exact pointwise checks

/// mu(f^2) - ||f||_p^2 <= (2-p) mu(g^2) + (p-1)(mu(g^2) - ||g||_p^2), g = f - mu(f).
inline CheckResult lo_decomposition_check(const ProbabilitySpace& mu, const Vector& f, double p) {
  if (!(p >= 1.0 && p < 2.0)) throw Error(Errc::InvalidArgument, "p must lie in [1, 2)");
  const Vector& w = mu.weights();
  const Vector g = f.array() - mu.mean(f);
  const double lhs = detail::lo_numerator(w, f, p);
  const double g2 = mu.norm_sq(g);
  const double rhs = (2.0 - p) * g2 + (p - 1.0) * detail::lo_numerator(w, g, p);
  return make_check(lhs, rhs, 1e-10);
}

namespace detail {

/// Var_phi(g) as a sup, evaluated both by the grid search and at the point
/// p where Var_phi(f) peaked; the larger is still a lower bound of the sup.
inline double lo_variance_including(const Vector& mu, const Vector& g, const PhiProfile& phi, double p) {
  if (g.isZero(0.0)) return 0.0;
  return std::max(lo_variance_at(mu, g, phi).value, lo_numerator(mu, g, p) / phi(p));
}

}  // namespace detail

/// Var_phi(f) <= c_phi mu(g^2) + Var_phi(g), g = f - mu(f).
inline CheckResult lo_split_check(const ProbabilitySpace& mu, const Vector& f, const PhiProfile& phi) {
  const Vector& w = mu.weights();
  const Vector g = f.array() - mu.mean(f);
  const detail::LoValue lhs = detail::lo_variance_at(w, f, phi);
  const double c = std::max(c_phi(phi), (2.0 - lhs.p) / phi(lhs.p));
  const double rhs = c * mu.norm_sq(g) + detail::lo_variance_including(w, g, phi, lhs.p);
  return make_check(lhs.value, rhs, 1e-9);
}

/// Var_phi(f) <= (c_phi + C2) mu(g^2) + C1 E(f,f), g = f - mu(f), given that
/// (C1, C2) satisfy Var_phi <= C1 E + C2 mu(.^2). Such constants are only
/// certified on at most 3 states; beyond that the caller must mark them as
/// assumed.
inline CheckResult lo_tightening_check(const Kernel& P, const PhiProfile& phi, double C1, double C2, const Vector& f,
                                       bool constants_assumed = false) {
  if (P.size() > 3 && !constants_assumed)
    throw Error(Errc::UncertifiedConstants, "constants are certified only on at most 3 states");
  const DirichletForm E = markov_form(P);
  const ProbabilitySpace& mu = P.space();
  const Vector g = f.array() - mu.mean(f);
  const detail::LoValue lhs = f.isZero(0.0) ? detail::LoValue{} : detail::lo_variance_at(mu.weights(), f, phi);
  const double c = std::max(c_phi(phi), (2.0 - lhs.p) / phi(lhs.p));
  const double rhs = (c + C2) * mu.norm_sq(g) + C1 * E.energy(f);
  return make_check(lhs.value, rhs, 1e-9);
}

struct LoDefectiveCertificate {
  double C2 = 0.0;        ///< grid max plus an empirical slack, not a covering bound
  double grid_max = 0.0;  ///< best value found on the grid
  double slack = 0.0;
  Vector witness;
};

/// Upper estimate of sup over mu(f^2) = 1 of Var_phi(f) - C1 E(f,f) on at most
/// 3 states: the grid max plus twice the largest observed slope between
/// neighbouring grid points times the covering radius.
inline LoDefectiveCertificate lo_certified_defective_c2(const Kernel& P, const PhiProfile& phi, double C1, double step = 0.0) {
  const std::size_t N = P.size();
  if (N > 3) throw Error(Errc::InvalidArgument, "grid certification covers at most 3 states");
  if (step <= 0.0) step = N <= 2 ? 2e-3 : 1e-2;
  const DirichletForm E = markov_form(P);
  const Vector& mu = P.space().weights();
  const Vector root_inv = mu.cwiseSqrt().cwiseInverse();
  LoDefectiveCertificate out;
  out.grid_max = -std::numeric_limits<double>::infinity();
  double slope = 0.0;
  Vector prev_g;
  double prev_v = 0.0;
  const double radius = detail::for_each_sphere_point(N, step, false, [&](const Vector& g) {
    const Vector f = root_inv.cwiseProduct(g);
    const double v = detail::lo_variance_at(mu, f, phi).value - C1 * E.energy(f);
    if (v > out.grid_max) {
      out.grid_max = v;
      out.witness = f;
    }
    if (prev_g.size() == g.size()) {
      const double d = (g - prev_g).norm();
      if (d > 0.0 && d <= 2.0 * step) slope = std::max(slope, std::abs(v - prev_v) / d);
    }
    prev_g = g;
    prev_v = v;
  });
  out.slack = 2.0 * slope * radius;
  out.C2 = out.grid_max + out.slack;
  return out;
}

}  // namespace mgl

#endif  // MGL_INEQUALITIES_HPP
