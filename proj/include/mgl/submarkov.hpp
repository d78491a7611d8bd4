#ifndef MGL_SUBMARKOV_HPP
#define MGL_SUBMARKOV_HPP

// Sub-Markov kernels against a reference measure mu that need not be
// invariant: the L2(mu) operator norm, the form mu(f (1 - P*P) g), and the
// arithmetic that turns a tail bound into a defective inequality and then a
// norm bound.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "mgl/chainspace.hpp"
#include "mgl/check.hpp"
#include "mgl/detail/rng.hpp"
#include "mgl/detail/sphere.hpp"
#include "mgl/inequalities.hpp"
#include "mgl/tails.hpp"

namespace mgl {

/// Largest singular value of P on L2(mu).
inline double op_norm2(const Kernel& P) {
  const Matrix M = detail::similarity_form(P.entries(), P.space().weights());
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()[0];
}

/// E(f,g) = mu(f (1 - P*P) g) with the L2(mu) adjoint P*.
inline DirichletForm pp_form(const Kernel& P) {
  return DirichletForm(P.space(), detail::adjoint_entries(P) * P.entries());
}

/// The form is taken as irreducible when 1 - P*P is bounded below by this.
inline constexpr double kIrreducibleBand = 1e-8;

struct SubMarkovAnalysis {
  double op_norm2 = 0.0;
  double lambda_min = 0.0;  ///< least eigenvalue of 1 - P*P, equal to 1 - op_norm2^2
  bool kernel_irreducible = false;
  bool nonconservative = false;
  DirichletForm form;
};

inline SubMarkovAnalysis analyze_submarkov(const Kernel& P) {
  DirichletForm form = pp_form(P);
  const double lmin = form_eigen(form).values[0];
  return SubMarkovAnalysis{op_norm2(P), lmin, lmin > kIrreducibleBand, !form.conservative(), std::move(form)};
}

/// mu P <= mu entrywise, i.e. mu(|Pf|) <= mu(|f|).
inline bool l1_contraction(const Kernel& P, double tol = 1e-12) {
  const Vector& mu = P.space().weights();
  return ((P.entries().transpose() * mu) - mu).maxCoeff() <= tol;
}

struct SubMarkovTailOptions {
  /// Caller-supplied bound on tail2(P, R); required beyond 3 states and used
  /// only together with `epsilon_assumed`.
  std::optional<double> epsilon;
  bool epsilon_assumed = false;
  double grid_step = 2e-3;
  std::size_t random_checks = 10000;
  std::uint64_t seed = 1;
};

struct SubMarkovTailReport {
  double R = 0.0;
  double epsilon = 0.0;
  bool certified = false;
  double C1 = 0.0;
  double C2 = 0.0;
  /// Worst case of mu(f^2) <= C1 E(f,f) + C2 mu(|f|)^2 over the tested f
  /// (the f with the largest lhs - rhs after scaling to mu(f^2) = 1).
  CheckResult defective;
  std::size_t defective_samples = 0;
  bool l1_contraction = false;
  double op_norm2 = 0.0;
  double lambda_min = 0.0;
  bool kernel_irreducible = false;
  double C = std::numeric_limits<double>::infinity();
  /// ||P||_2^2 <= (C - 1) / C
  CheckResult norm;
};

inline SubMarkovTailReport submarkov_tail_pipeline(const Kernel& P, double R, const SubMarkovTailOptions& opts = {}) {
  const std::size_t N = P.size();
  SubMarkovTailReport rep;
  rep.R = R;
  if (opts.epsilon && opts.epsilon_assumed) {
    rep.epsilon = *opts.epsilon;
  } else if (N <= 3) {
    rep.epsilon = tail2_certified_upper(P, R, opts.grid_step);
    rep.certified = true;
  } else {
    throw Error(Errc::UncertifiedTail, "tail bound must be supplied and marked as assumed beyond 3 states");
  }
  if (!(rep.epsilon < 1.0)) throw Error(Errc::EpsilonTooLarge, "tail bound " + std::to_string(rep.epsilon) + " >= 1");
  rep.C1 = 2.0 / (1.0 - rep.epsilon);
  rep.C2 = R * R / ((1.0 - rep.epsilon) * (1.0 - rep.epsilon));
  rep.l1_contraction = l1_contraction(P);

  const SubMarkovAnalysis an = analyze_submarkov(P);
  const Vector& mu = P.space().weights();
  double worst = -std::numeric_limits<double>::infinity();
  auto test = [&](const Vector& f) {
    const double m2 = (mu.array() * f.array().square()).sum();
    if (!(m2 > 0.0)) return;
    const Vector g = f / std::sqrt(m2);
    const double m1 = mu.dot(g.cwiseAbs());
    const double lhs = 1.0;
    const double rhs = rep.C1 * an.form.energy(g) + rep.C2 * m1 * m1;
    ++rep.defective_samples;
    if (lhs - rhs > worst) {
      worst = lhs - rhs;
      rep.defective = make_check(lhs, rhs, 1e-9);
    }
  };
  if (N <= 3) {
    const Vector root_inv = mu.cwiseSqrt().cwiseInverse();
    detail::for_each_sphere_point(N, opts.grid_step, false, [&](const Vector& g) { test(root_inv.cwiseProduct(g)); });
  } else {
    for (std::size_t i = 0; i < opts.random_checks; ++i) {
      detail::Rng rng(detail::mix_seed(opts.seed, i));
      Vector f(static_cast<Eigen::Index>(N));
      for (Eigen::Index x = 0; x < f.size(); ++x) f[x] = rng.normal();
      test(f);
    }
  }

  rep.op_norm2 = an.op_norm2;
  rep.lambda_min = an.lambda_min;
  rep.kernel_irreducible = an.kernel_irreducible;
  if (an.kernel_irreducible) {
    rep.C = 1.0 / an.lambda_min;
    rep.norm = make_check(an.op_norm2 * an.op_norm2, (rep.C - 1.0) / rep.C, 1e-9);
  } else {
    rep.norm = make_check(an.op_norm2 * an.op_norm2, 1.0, 1e-9);
  }
  return rep;
}

}  // namespace mgl

#endif  // MGL_SUBMARKOV_HPP
