#ifndef MGL_SPECTRAL_HPP
#define MGL_SPECTRAL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mgl/chainspace.hpp"

namespace mgl {

/// Eigenpairs of a mu-reversible kernel, in L2(mu) coordinates. Column i of
/// `functions` is the eigenfunction of `values[i]`, normalized so that
/// <f_i, f_j>_mu = delta_ij. Values are sorted descending.
struct SymmetricEigen {
  Vector values;
  Matrix functions;
};

inline constexpr double kReversibilityTolerance = 1e-8;

inline SymmetricEigen eigen_sym(const Kernel& S) {
  const Vector& w = S.space().weights();
  Matrix M = detail::similarity_form(S.entries(), w);
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > kReversibilityTolerance)
    throw Error(Errc::NotReversible, "similarity form asymmetry " + std::to_string(asym));
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(M);
  const auto n = M.rows();
  SymmetricEigen out;
  out.values.resize(n);
  out.functions.resize(n, n);
  const Vector inv_root = w.cwiseSqrt().cwiseInverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    // Solver returns ascending order.
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.functions.col(i) = inv_root.asDiagonal() * solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// Sorted (descending) eigenvalues of S acting on L2(mu).
inline std::vector<double> spectrum_sym(const Kernel& S) {
  const Vector v = eigen_sym(S).values;
  return {v.data(), v.data() + v.size()};
}

struct SpectralSummary {
  std::vector<double> ladder;  ///< eigenvalues of 1 - P-hat, ascending
  double gap = 0.0;
  double theta = 1.0;
  double poincare_C = std::numeric_limits<double>::infinity();
  bool degenerate = false;  ///< gap below 1e-10
};

namespace detail {

inline void fill_gap(SpectralSummary& s) {
  if (s.ladder.size() < 2) {
    // No non-constant functions: every Poincare inequality holds with C = 0.
    s.gap = std::numeric_limits<double>::infinity();
    s.theta = -1.0;
    s.poincare_C = 0.0;
    return;
  }
  s.gap = s.ladder[1];
  s.theta = std::clamp(1.0 - s.gap, -1.0, std::nextafter(1.0, 0.0));
  s.poincare_C = s.gap > 0.0 ? 1.0 / s.gap : std::numeric_limits<double>::infinity();
  s.degenerate = s.gap < 1e-10;
}

}  // namespace detail

/// Ladder of L = 1 - P-hat; mu(f(1-P)f) = mu(f(1-P-hat)f) for invariant P.
inline SpectralSummary lambda_ladder(const Kernel& P) {
  if (!P.is_markov()) throw Error(Errc::InvalidArgument, "lambda_ladder needs a Markov kernel");
  const Kernel hat = symmetrize(P);
  SpectralSummary s;
  for (double v : spectrum_sym(hat)) s.ladder.push_back(1.0 - v);
  std::sort(s.ladder.begin(), s.ladder.end());
  detail::fill_gap(s);
  return s;
}

struct GapResult {
  double gap = 0.0;
  double theta = 1.0;
  double poincare_C = 0.0;
  bool degenerate = false;
};

/// Spectral gap lambda_2, theta = 1 - lambda_2 and the optimal Poincare
/// constant 1/lambda_2. Ergodicity is gated on the support graph alone so
/// that near-reducible chains report a tiny gap with the degenerate flag.
inline GapResult spectral_gap(const Kernel& P) {
  if (!P.is_markov()) throw Error(Errc::InvalidArgument, "spectral_gap needs a Markov kernel");
  detail::require_invariant(P);
  if (!is_strongly_connected(P)) throw Error(Errc::NotErgodic, "support graph is not strongly connected");
  const SpectralSummary s = lambda_ladder(P);
  return GapResult{s.gap, s.theta, s.poincare_C, s.degenerate};
}

/// Second-largest value of s^2 over the spectrum of P-hat, i.e. the top of
/// the spectrum of P-hat^2 on mean-zero functions (the Perron eigenvalue is
/// removed once).
inline double mean_zero_square_top(const Kernel& P) {
  const Kernel hat = symmetrize(P);
  const auto spec = spectrum_sym(hat);
  double top = 0.0;
  for (std::size_t i = 1; i < spec.size(); ++i) top = std::max(top, spec[i] * spec[i]);
  return top;
}

}  // namespace mgl

#endif  // MGL_SPECTRAL_HPP
