#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mgl/generators.hpp"
#include "mgl/isoperimetry.hpp"
#include "mgl/spectral.hpp"
#include "support.hpp"

using namespace mgl;

namespace {

double defect_of(const Kernel& P) { return invariance_defect(P, P.space()); }

std::string parse_message(const std::string& text) {
  try {
    parse_kernel(text, "k.txt");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "no parse error";
  return {};
}

}  // namespace

TEST(BirthDeath, UniformTwoStatesIsTwoPointQuarter) {
  const Kernel P = birth_death({1.0, 1.0});
  EXPECT_EQ(P.entries(), two_point(0.25).entries());
  EXPECT_EQ(P.space().weights(), two_point(0.25).space().weights());
}

TEST(BirthDeath, MetropolisEntries) {
  const Kernel P = birth_death({1.0, 2.0, 4.0});
  // From 1 up: accept 1; down: accept 1/2.
  EXPECT_DOUBLE_EQ(P(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(P(1, 0), 0.125);
  EXPECT_DOUBLE_EQ(P(1, 1), 0.625);
  EXPECT_DOUBLE_EQ(P(0, 0), 0.75);
  EXPECT_TRUE(is_reversible(P));
  EXPECT_ERRC(birth_death({1.0, 0.0}), Errc::BadWeights);
  EXPECT_ERRC(birth_death({1.0}), Errc::BadWeights);
  EXPECT_ERRC(birth_death_geometric(5, 1.0), Errc::InvalidArgument);
  EXPECT_ERRC(birth_death_heavy(5, 1.0), Errc::InvalidArgument);
}

TEST(BirthDeath, GeometricGapStable) {
  const double g50 = spectral_gap(birth_death_geometric(50, 0.5)).gap;
  const double g100 = spectral_gap(birth_death_geometric(100, 0.5)).gap;
  const double g25 = spectral_gap(birth_death_geometric(25, 0.5)).gap;
  EXPECT_LT(std::abs(g50 - g100) / g100, 0.1);
  EXPECT_GT(g25, 0.0);
}

TEST(BirthDeath, HeavyTailKappaShrinks) {
  double prev = 1e300;
  for (std::size_t N : {25, 50, 100, 200}) {
    const double k = kappa_exact_path(birth_death_heavy(N, 2.0), 2).kappa;
    EXPECT_LT(k, prev) << N;
    prev = k;
  }
  EXPECT_LT(kappa_exact_path(birth_death_heavy(200, 2.0), 2).kappa,
            kappa_exact_path(birth_death_heavy(50, 2.0), 2).kappa / 2);
}

TEST(GraphWalk, Examples) {
  const Kernel tri = graph_walk(3, cycle_edges(3));
  EXPECT_TRUE(tri.entries().isApprox(symmetrize(cycle_rotation(3)).entries(), 1e-15));
  const Kernel edge = graph_walk(2, {{0, 1}});
  EXPECT_TRUE(edge.entries().isApprox(two_point(1.0).entries(), 0.0));
  EXPECT_TRUE(check_ergodic(edge).ergodic);
  EXPECT_NEAR(spectral_gap(edge).theta, -1.0, 1e-14);
  EXPECT_ERRC(graph_walk(4, {{0, 1}, {2, 3}}), Errc::Disconnected);
  const Kernel split = graph_walk(4, {{0, 1}, {2, 3}}, 0.0, true);
  EXPECT_FALSE(check_ergodic(split).ergodic);
  EXPECT_EQ(kappa_exact(split, 2).kappa, 0.0);
  EXPECT_ERRC(graph_walk(3, {{0, 1}}), Errc::BadWeights);
  EXPECT_ERRC(graph_walk(2, {{0, 0}}), Errc::InvalidArgument);
  const Kernel lazy = graph_walk(4, complete_edges(4), 0.5);
  EXPECT_DOUBLE_EQ(lazy(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(lazy(0, 3), 0.5 / 3);
}

TEST(Families, CycleRotationLadder) {
  const auto lad = lambda_ladder(cycle_rotation(3)).ladder;
  EXPECT_NEAR(lad[0], 0.0, 1e-14);
  EXPECT_NEAR(lad[1], 1.5, 1e-14);
  EXPECT_NEAR(lad[2], 1.5, 1e-14);
  EXPECT_FALSE(is_reversible(cycle_rotation(3)));
}

TEST(Families, Determinism) {
  EXPECT_EQ(random_reversible(8, 0.5, 7).entries(), random_reversible(8, 0.5, 7).entries());
  EXPECT_EQ(random_invariant(8, 0.5, 7).entries(), random_invariant(8, 0.5, 7).entries());
  EXPECT_EQ(random_substochastic(8, 0.5, 7).entries(), random_substochastic(8, 0.5, 7).entries());
  EXPECT_NE(random_reversible(8, 0.5, 7).entries(), random_reversible(8, 0.5, 8).entries());
  FamilySpec spec;
  spec.family = FamilySpec::Family::random_reversible;
  spec.parameter = 0.4;
  spec.size = 9;
  spec.seed = 3;
  EXPECT_EQ(make_family(spec).entries(), make_family(spec).entries());
}

TEST(Families, InvariantAndDeclaredReversibility) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Kernel R = random_reversible(2 + seed % 10, 0.5, seed);
    EXPECT_LT(invariance_defect(R, R.space()), 1e-12);
    EXPECT_TRUE(is_reversible(R));
    EXPECT_LT(defect_of(random_invariant(2 + seed % 10, 0.5, seed)), 1e-12);
  }
  for (const Kernel& P : {birth_death_geometric(30, 0.3), birth_death_heavy(30, 3.0), graph_walk(6, cycle_edges(6), 0.2),
                          two_point(0.2)}) {
    EXPECT_LT(invariance_defect(P, P.space()), 1e-12);
    EXPECT_TRUE(is_reversible(P));
  }
  EXPECT_LT(defect_of(cycle_rotation(5)), 1e-15);
}

TEST(Families, MakeFamilyCoversEveryKind) {
  using F = FamilySpec::Family;
  FamilySpec s;
  s.family = F::birth_death_geometric;
  s.parameter = 0.5;
  s.size = 10;
  EXPECT_EQ(make_family(s).size(), 11u);
  s.family = F::birth_death_heavy;
  s.parameter = 2.0;
  EXPECT_EQ(make_family(s).size(), 11u);
  s.family = F::graph_walk;
  s.parameter = 0.1;
  s.graph = "path";
  EXPECT_EQ(make_family(s).size(), 10u);
  s.graph = "star";
  EXPECT_ERRC(make_family(s), Errc::InvalidArgument);
  s.family = F::cycle_rotation;
  EXPECT_EQ(make_family(s).size(), 10u);
  s.family = F::two_point;
  s.parameter = 0.3;
  EXPECT_EQ(make_family(s).entries(), two_point(0.3).entries());
  EXPECT_STREQ(family_name(F::birth_death_heavy), "birth_death_heavy");
}

TEST(KernelFile, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "mgl_generators_test";
  std::filesystem::create_directories(dir);
  for (const Kernel& P : {random_reversible(7, 0.5, 2), random_substochastic(5, 0.6, 3), cycle_rotation(4)}) {
    const auto path = (dir / "k.txt").string();
    std::ofstream(path, std::ios::binary) << write_kernel(P);
    const Kernel Q = load_kernel(path);
    EXPECT_EQ(Q.entries(), P.entries());
    EXPECT_EQ(Q.space().weights(), P.space().weights());
    EXPECT_EQ(Q.is_markov(), P.is_markov());
    FamilySpec s;
    s.family = FamilySpec::Family::from_file;
    s.path = path;
    EXPECT_EQ(make_family(s).entries(), P.entries());
  }
  std::filesystem::remove_all(dir);
}

TEST(KernelFile, CommentsAndWhitespace) {
  const Kernel P = parse_kernel("# two states\n2\n0.5 0.5  # weights\n\n0.7 0.3\n0.3 0.7\n");
  EXPECT_TRUE(P.is_markov());
  EXPECT_DOUBLE_EQ(P(0, 1), 0.3);
}

TEST(KernelFile, ParseErrorsCarryPosition) {
  EXPECT_EQ(parse_message("2\n0.5 0.5\n0.7 x\n0.3 0.7\n"), "ParseError: k.txt:3:5: expected a number, got 'x'");
  EXPECT_NE(parse_message("2\n0.5 0.5\n0.7 0.3 0.1\n0.3 0.7\n").find("k.txt:3:9:"), std::string::npos);
  EXPECT_NE(parse_message("2\n0.5 0.5\n0.7 0.3\n").find("k.txt:4:1: missing kernel row"), std::string::npos);
  EXPECT_NE(parse_message("").find("k.txt:1:1:"), std::string::npos);
  EXPECT_NE(parse_message("0\n").find("k.txt:1:1:"), std::string::npos);
  EXPECT_NE(parse_message("2\n-0.5 1.5\n0.7 0.3\n0.3 0.7\n").find("k.txt:2:1:"), std::string::npos);
  EXPECT_NE(parse_message("2\n0.5 0.5\n0.7 0.3\n0.3 0.7\n1\n").find("k.txt:5:1:"), std::string::npos);
  EXPECT_ERRC(load_kernel("/nonexistent/kernel.txt"), Errc::ParseError);
}

TEST(Perturbation, BreaksInvariance) {
  const Kernel P = random_reversible(6, 0.6, 1);
  const Kernel Q = perturb_kernel(P, 1e-3, 5);
  EXPECT_TRUE(Q.is_markov());
  EXPECT_GT(invariance_defect(Q, Q.space()), 1e-6);
  EXPECT_FALSE(check_invariance(Q));
  EXPECT_ERRC(spectral_gap(Q), Errc::NotInvariant);
}
