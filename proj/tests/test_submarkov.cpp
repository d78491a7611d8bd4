#include <gtest/gtest.h>

#include <cmath>

#include "mgl/generators.hpp"
#include "mgl/submarkov.hpp"
#include "support.hpp"

using namespace mgl;
using testing_support::random_vector;

namespace {

Kernel scaled_identity(std::size_t n, double c) {
  return Kernel(uniform_space(n), c * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                KernelKind::submarkov);
}

/// Power iteration for sup mu((Pf)^2) / mu(f^2), using only kernel
/// applications and the weighted adjoint written out entrywise.
double norm_by_power_iteration(const Kernel& P) {
  const std::size_t N = P.size();
  const auto& mu = P.space();
  Vector f = random_vector(N, 99, true).array() + 0.1;
  double estimate = 0.0;
  for (int it = 0; it < 20000; ++it) {
    const Vector Pf = P.apply(f);
    Vector g = Vector::Zero(static_cast<Eigen::Index>(N));
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t y = 0; y < N; ++y) g[x] += mu.weight(y) * P(y, x) / mu.weight(x) * Pf[y];
    const double next = std::sqrt(mu.norm_sq(Pf) / mu.norm_sq(f));
    f = g / std::sqrt(mu.norm_sq(g));
    if (std::abs(next - estimate) < 1e-15) break;
    estimate = next;
  }
  return estimate;
}

}  // namespace

TEST(OpNorm, Examples) {
  for (double c : {0.1, 0.5, 0.9}) EXPECT_NEAR(op_norm2(scaled_identity(3, c)), c, 1e-15);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_NEAR(op_norm2(random_invariant(6, 0.5, seed)), 1.0, 1e-12);
    EXPECT_NEAR(op_norm2(random_reversible(5, 0.5, seed)), 1.0, 1e-12);
  }
}

TEST(OpNorm, MatchesPowerIteration) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Kernel P = random_substochastic(3 + seed % 5, 0.6, seed);
    EXPECT_NEAR(op_norm2(P), norm_by_power_iteration(P), 1e-10) << seed;
    EXPECT_LE(op_norm2(P), 1.0 + 1e-10);
  }
}

TEST(PPForm, Examples) {
  const DirichletForm markov = pp_form(random_invariant(5, 0.6, 3));
  EXPECT_NEAR(markov.energy(Vector::Ones(5)), 0.0, 1e-14);
  EXPECT_TRUE(markov.conservative());
  for (double c : {0.2, 0.7}) {
    const DirichletForm E = pp_form(scaled_identity(4, c));
    EXPECT_FALSE(E.conservative());
    const Vector f = random_vector(4, 5);
    EXPECT_NEAR(E.energy(f), (1 - c * c) * E.space().norm_sq(f), 1e-14);
  }
}

TEST(PPForm, EnergyIdentity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Kernel P = random_substochastic(6, 0.5, seed);
    const DirichletForm E = pp_form(P);
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const Vector f = random_vector(6, seed * 1000003 + k);
      const double e = E.energy(f);
      EXPECT_GE(e, -1e-12);
      EXPECT_NEAR(e, P.space().norm_sq(f) - P.space().norm_sq(P.apply(f)), 1e-12);
    }
  }
}

TEST(SubMarkovAnalysis, IrreducibleIffNormBelowOne) {
  std::size_t both = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    const Kernel P = random_substochastic(2 + seed % 9, 0.5, seed);
    const auto a = analyze_submarkov(P);
    EXPECT_EQ(a.kernel_irreducible, a.op_norm2 < 1.0 - 1e-10) << seed;
    EXPECT_NEAR(a.lambda_min, 1.0 - a.op_norm2 * a.op_norm2, 1e-12);
    EXPECT_GE(a.op_norm2, 0.0);
    EXPECT_LE(a.op_norm2, 1.0 + 1e-10);
    both += a.kernel_irreducible ? 1 : 0;
  }
  // The corpus covers both sides.
  EXPECT_GT(both, 100u);
  EXPECT_LT(both, 400u);
}

TEST(SubMarkovAnalysis, WeakPoincareOnNonconservativeForms) {
  for (std::uint64_t seed = 1; seed <= 200 ; ++seed) {
    const Kernel P = random_substochastic(5, 0.6, seed);
    const auto a = analyze_submarkov(P);
    if (!a.kernel_irreducible) continue;
    ASSERT_TRUE(a.nonconservative);
    for (double r : {0.01, 0.1, 0.5}) {
      const auto w = weak_poincare_alpha(a.form, r);
      EXPECT_TRUE(std::isfinite(w.alpha));
      // Irreducible: alpha <= 1 / lambda_min since mu(f^2) <= E(f,f) / lambda_min.
      EXPECT_LE(w.alpha, 1.0 / a.lambda_min + 1e-9);
    }
    if (seed > 40) break;
  }
  const Kernel closed = two_point(0.3);
  const Kernel open = damped(two_point(0.3), Vector::Constant(2, 0.6));
  const Kernel blocks = block_diagonal({closed, open}, {1.0, 1.0});
  const auto a = analyze_submarkov(blocks);
  EXPECT_FALSE(a.kernel_irreducible);
  EXPECT_TRUE(a.nonconservative);
  EXPECT_GT(weak_poincare_alpha(a.form, 0.01).alpha, 1e6);
}

TEST(L1Contraction, DampedInvariantKernels) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) EXPECT_TRUE(l1_contraction(random_substochastic(5, 0.6, seed)));
  Matrix M(2, 2);
  M << 0.0, 0.9, 0.0, 0.9;
  EXPECT_FALSE(l1_contraction(Kernel(uniform_space(2), M, KernelKind::submarkov)));
}

TEST(SubMarkovTail, ScaledIdentityExample) {
  const auto rep = submarkov_tail_pipeline(scaled_identity(2, 0.5), 1.0);
  EXPECT_TRUE(rep.certified);
  EXPECT_EQ(rep.epsilon, 0.0);
  EXPECT_EQ(rep.C1, 2.0);
  EXPECT_EQ(rep.C2, 1.0);
  EXPECT_TRUE(rep.defective.pass);
  EXPECT_TRUE(rep.l1_contraction);
  EXPECT_NEAR(rep.op_norm2, 0.5, 1e-15);
  EXPECT_NEAR(rep.C, 1 / 0.75, 1e-12);
  EXPECT_TRUE(rep.norm.pass);
  EXPECT_NEAR(rep.norm.lhs, rep.norm.rhs, 1e-12);
}

TEST(SubMarkovTail, Errors) {
  EXPECT_ERRC(submarkov_tail_pipeline(identity_kernel(uniform_space(2)), 0.0), Errc::EpsilonTooLarge);
  SubMarkovTailOptions big;
  big.epsilon = 1.0;
  big.epsilon_assumed = true;
  EXPECT_ERRC(submarkov_tail_pipeline(scaled_identity(5, 0.5), 1.0, big), Errc::EpsilonTooLarge);
  EXPECT_ERRC(submarkov_tail_pipeline(scaled_identity(5, 0.5), 1.0), Errc::UncertifiedTail);
  SubMarkovTailOptions unflagged;
  unflagged.epsilon = 0.1;
  EXPECT_ERRC(submarkov_tail_pipeline(scaled_identity(5, 0.5), 1.0, unflagged), Errc::UncertifiedTail);
}

TEST(SubMarkovTail, AssumedModeOnLargerSpaces) {
  SubMarkovTailOptions o;
  o.epsilon = 0.0;
  o.epsilon_assumed = true;
  o.random_checks = 2000;
  // |Pf| <= 0.5 sqrt(5) < 2 on the unit ball, so tail2 at R = 2 vanishes.
  const auto rep = submarkov_tail_pipeline(scaled_identity(5, 0.5), 2.0, o);
  EXPECT_FALSE(rep.certified);
  EXPECT_EQ(rep.defective_samples, 2000u);
  EXPECT_TRUE(rep.defective.pass);
  EXPECT_TRUE(rep.norm.pass);
}

TEST(SubMarkovTail, CertifiedCorpus) {
  std::size_t ran = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Kernel P = random_substochastic(2 + seed % 2, 0.8, seed);
    for (double R : {1.5, 3.0}) {
      SubMarkovTailReport rep;
      try {
        rep = submarkov_tail_pipeline(P, R);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EpsilonTooLarge);
        continue;
      }
      ++ran;
      EXPECT_TRUE(rep.certified);
      EXPECT_TRUE(rep.norm.pass) << seed;
      ASSERT_TRUE(rep.l1_contraction);
      EXPECT_TRUE(rep.defective.pass) << seed << " " << R;
      EXPECT_GE(rep.epsilon, tail2(P, R).value - 1e-12);
    }
  }
  EXPECT_GT(ran, 10u);
}
