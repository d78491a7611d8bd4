#include <gtest/gtest.h>

#include <cstdint>

#include "mgl/generators.hpp"
#include "mgl/isoperimetry.hpp"
#include "support.hpp"

using namespace mgl;

namespace {

/// Brute force over all (n+1)^N assignments, no symmetry reduction.
double kappa_brute(const Kernel& P, std::size_t n) {
  const std::size_t N = P.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < N; ++i) total *= n + 1;
  double best = 1e300;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<StateSet> sets(n);
    std::size_t c = code;
    for (std::size_t x = 0; x < N; ++x, c /= n + 1)
      if (c % (n + 1)) sets[c % (n + 1) - 1].push_back(x);
    bool ok = true;
    for (auto& s : sets) ok = ok && !s.empty();
    if (!ok) continue;
    double worst = 0.0;
    for (auto& s : sets) {
      double flow = 0.0, mass = 0.0;
      for (auto x : s) {
        mass += P.space().weight(x);
        for (std::size_t y = 0; y < N; ++y)
          if (std::find(s.begin(), s.end(), y) == s.end()) flow += P.space().weight(x) * P(x, y);
      }
      worst = std::max(worst, flow / mass);
    }
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST(Expansion, Examples) {
  const Kernel P = two_point(0.3);
  EXPECT_EQ(expansion(P, {0, 1}), 0.0);
  EXPECT_NEAR(expansion(P, {0}), 0.3, 1e-15);
  EXPECT_EQ(expansion(identity_kernel(uniform_space(4)), {1, 2}), 0.0);
  EXPECT_ERRC(expansion(P, {}), Errc::EmptySet);
}

TEST(KappaExact, Examples) {
  const Kernel P = two_point(0.3);
  EXPECT_EQ(kappa_exact(P, 1).kappa, 0.0);
  const auto k2 = kappa_exact(P, 2);
  EXPECT_NEAR(k2.kappa, 0.3, 1e-15);
  EXPECT_TRUE(k2.exact);
  ASSERT_EQ(k2.witness.sets.size(), 2u);
  EXPECT_EQ(k2.witness.sets[0].size(), 1u);
  EXPECT_EQ(k2.witness.sets[1].size(), 1u);
  EXPECT_NEAR(kappa_exact(symmetrize(cycle_rotation(3)), 2).kappa, 1.0, 1e-15);
  // Raw P and P-hat give identical expansions for invariant P.
  EXPECT_NEAR(kappa_exact(cycle_rotation(3), 2).kappa, 1.0, 1e-15);
}

TEST(KappaExact, Errors) {
  const Kernel P = two_point(0.3);
  EXPECT_ERRC(kappa_exact(P, 3), Errc::OrderTooLarge);
  EXPECT_ERRC(kappa_exact(random_reversible(15, 0.5, 1), 2), Errc::StateCapExceeded);
  KappaOptions o;
  o.order_cap = 3;
  EXPECT_ERRC(kappa_exact(random_reversible(6, 0.5, 1), 4, o), Errc::OrderTooLarge);
}

TEST(KappaExact, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const std::size_t N = 3 + seed % 4;
    const Kernel P = seed % 2 ? random_reversible(N, 0.6, seed) : random_invariant(N, 0.6, seed);
    for (std::size_t n = 2; n <= std::min<std::size_t>(N, 3); ++n) {
      const auto r = kappa_exact(P, n);
      EXPECT_NEAR(r.kappa, kappa_brute(P, n), 1e-14) << "seed " << seed << " n " << n;
      EXPECT_NO_THROW(validate_tuple(r.witness, N));
      for (const auto& s : r.witness.sets) EXPECT_LE(expansion(P, s), r.kappa + 1e-12);
    }
  }
}

TEST(KappaExact, MonotoneInOrder) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Kernel P = random_reversible(8, 0.5, seed);
    double prev = -1.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      const double k = kappa_exact(P, n).kappa;
      EXPECT_GE(k, prev - 1e-15);
      prev = k;
    }
  }
}

TEST(KappaExact, IndependentOfWorkerCount) {
  const Kernel P = random_reversible(10, 0.5, 3);
  setenv("MGL_THREADS", "1", 1);
  const auto a = kappa_exact(P, 3);
  setenv("MGL_THREADS", "3", 1);
  const auto b = kappa_exact(P, 3);
  unsetenv("MGL_THREADS");
  EXPECT_EQ(a.kappa, b.kappa);
  EXPECT_EQ(a.witness.sets, b.witness.sets);
}

TEST(KappaExact, ErgodicityDichotomy) {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const Kernel P = random_reversible(7, 0.2, seed);
    const double k = kappa_exact(P, 2).kappa;
    if (check_ergodic(P).ergodic) EXPECT_GT(k, 0.0) << seed;
    else EXPECT_EQ(k, 0.0) << seed;
  }
}

TEST(KappaUpper, Examples) {
  EXPECT_NEAR(kappa_upper_spectral(two_point(0.3), 2).kappa, 0.3, 1e-15);
  EXPECT_FALSE(kappa_upper_spectral(two_point(0.3), 2).exact);
  const Kernel path = graph_walk(6, path_edges(6), 0.5);
  EXPECT_NEAR(kappa_upper_spectral(path, 2).kappa, kappa_exact(path, 2).kappa, 1e-12);
}

TEST(KappaUpper, DominatesExact) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const std::size_t N = 3 + seed % 10;
    const Kernel P = seed % 3 ? random_reversible(N, 0.5, seed) : random_invariant(N, 0.5, seed);
    for (std::size_t n = 2; n <= std::min<std::size_t>(N, 4); ++n) {
      const auto up = kappa_upper_spectral(P, n);
      EXPECT_GE(up.kappa, kappa_exact(P, n).kappa - 1e-12);
      EXPECT_NO_THROW(validate_tuple(up.witness, N));
      EXPECT_NEAR(max_expansion(P, up.witness), up.kappa, 1e-15);
    }
  }
}

TEST(KappaUpper, LumpedTuplesBoundFromAbove) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Kernel P = random_reversible(8, 0.6, seed);
    const Partition pi{{{0, 1}, {2, 3}, {4, 5}, {6, 7}}};
    const auto L = coarse_grain(P, pi);
    EXPECT_GE(kappa_exact(L.kernel, 2).kappa, kappa_exact(P, 2).kappa - 1e-13);
  }
}

TEST(Cheeger, TwoPointRow) {
  const auto rows = cheeger_report(two_point(0.3), 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[1].kappa, 0.3, 1e-15);
  EXPECT_NEAR(rows[1].lambda, 0.6, 1e-14);
  EXPECT_TRUE(rows[1].sandwich_pass);
  EXPECT_FALSE(rows[1].kappa_ge_lambda);
  EXPECT_NEAR(rows[1].lower_bound, std::pow(1.0 / 16, 2) * 0.09, 1e-15);
}

TEST(Cheeger, CycleRow) {
  const auto rows = cheeger_report(cycle_rotation(3), 2);
  EXPECT_NEAR(rows[1].kappa, 1.0, 1e-15);
  EXPECT_NEAR(rows[1].lambda, 1.5, 1e-14);
  EXPECT_TRUE(rows[1].sandwich_pass);
}

TEST(Cheeger, ReducibleRow) {
  const auto rows = cheeger_report(identity_kernel(uniform_space(3)), 2);
  EXPECT_EQ(rows[1].kappa, 0.0);
  EXPECT_NEAR(rows[1].lambda, 0.0, 1e-14);
}

TEST(Cheeger, SandwichOnRandomReversible) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Kernel P = random_reversible(3 + seed % 6, 0.6, seed);
    for (const auto& row : cheeger_report(P, std::min<std::size_t>(P.size(), 4)))
      EXPECT_TRUE(row.sandwich_pass) << "seed " << seed << " n " << row.n;
  }
}

TEST(KappaPath, MatchesEnumeration) {
  std::vector<Kernel> corpus;
  for (std::size_t N : {3, 6, 9, 12}) {
    corpus.push_back(birth_death_geometric(N, 0.5));
    corpus.push_back(birth_death_heavy(N, 2.0));
    corpus.push_back(graph_walk(N + 1, path_edges(N + 1), 0.3));
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<double> w;
    for (int i = 0; i < 10; ++i) w.push_back(0.05 + testing_support::random_vector(1, seed * 31 + i, true)[0]);
    corpus.push_back(birth_death(w));
  }
  for (const Kernel& P : corpus)
    for (std::size_t n = 1; n <= std::min<std::size_t>(P.size(), 4); ++n) {
      const auto path = kappa_exact_path(P, n);
      EXPECT_TRUE(path.exact);
      EXPECT_NEAR(path.kappa, kappa_exact(P, n).kappa, 1e-14) << P.size() << " " << n;
      EXPECT_NO_THROW(validate_tuple(path.witness, P.size()));
      EXPECT_EQ(path.witness.sets.size(), n);
    }
}

TEST(KappaPath, DispatchAndErrors) {
  EXPECT_ERRC(kappa_exact_path(cycle_rotation(4), 2), Errc::InvalidArgument);
  EXPECT_ERRC(kappa_exact_path(two_point(0.3), 3), Errc::OrderTooLarge);
  const Kernel big = birth_death_heavy(200, 2.0);
  const auto k = kappa_best(big, 2);
  EXPECT_TRUE(k.exact);
  EXPECT_LE(k.kappa, kappa_upper_spectral(big, 2).kappa + 1e-15);
  EXPECT_FALSE(kappa_best(random_reversible(20, 0.5, 1), 2).exact);
  EXPECT_TRUE(kappa_best(random_reversible(8, 0.5, 1), 2).exact);
}
