// Acceptance battery: one [PASS]/[FAIL] line per criterion, exit status 0
// iff all pass. argv[1] is the path of the mgl binary (criterion 11).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mgl/lab.hpp"

using namespace mgl;

namespace {

struct Tally {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first = what;
  }
  void near(double a, double b, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << ": " << format_double(a) << " vs " << format_double(b);
    expect(std::abs(a - b) <= tol, s.str());
  }
  void le(double a, double b, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << ": " << format_double(a) << " > " << format_double(b);
    expect(a <= b + tol, s.str());
  }
};

int failed_criteria = 0;

void criterion(int id, const std::string& title, const std::function<void(Tally&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  Tally t;
  try {
    body(t);
  } catch (const std::exception& e) {
    t.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = t.failures == 0 && t.checks > 0;
  if (!ok) ++failed_criteria;
  std::printf("[%s] %2d %s: %zu checks, %zu failures, %.1fs%s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), t.checks,
              t.failures, secs, t.failures ? "; first: " : "", t.first.c_str());
  std::fflush(stdout);
}

std::string tag(const char* name, std::size_t i) { return std::string(name) + " #" + std::to_string(i); }

/// Mixed ergodic corpus: the Markov families of the generators, seeded.
std::vector<Kernel> ergodic_corpus(std::size_t count, std::uint64_t seed) {
  std::vector<Kernel> out;
  for (std::size_t i = 0; out.size() < count; ++i) {
    const std::uint64_t s = detail::mix_seed(seed, i);
    detail::Rng rng(s);
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(9));
    Kernel P = two_point(0.5);
    switch (i % 8) {
      case 0: P = random_reversible(n, 0.6, s); break;
      case 1: P = random_invariant(n, 0.6, s); break;
      case 2: P = birth_death_geometric(3 + rng.below(28), rng.uniform(0.2, 0.8)); break;
      case 3: P = birth_death_heavy(3 + rng.below(28), rng.uniform(1.2, 4.0)); break;
      case 4: P = graph_walk(n + 1, rng.bernoulli(0.5) ? cycle_edges(n + 1) : path_edges(n + 1), rng.uniform(0.0, 0.6)); break;
      case 5: P = cycle_rotation(2 + n); break;
      case 6: P = two_point(rng.uniform(0.01, 1.0)); break;
      default: P = graph_walk(n + 1, complete_edges(n + 1), rng.uniform(0.0, 0.6)); break;
    }
    if (is_strongly_connected(P)) out.push_back(std::move(P));
  }
  return out;
}

Vector unit_nonneg(const ProbabilitySpace& mu, detail::Rng& rng) {
  Vector f(static_cast<Eigen::Index>(mu.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.bernoulli(0.7) ? std::abs(rng.normal()) : 0.0;
  if (f.isZero(0.0)) f[rng.below(mu.size())] = 1.0;
  return f / std::sqrt(mu.norm_sq(f));
}

Vector gaussian(std::size_t n, detail::Rng& rng) {
  Vector f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.normal();
  return f;
}

int run_status(const std::string& command) {
  const int raw = std::system(command.c_str());
  return raw != -1 && WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mgl_binary = argc > 1 ? argv[1] : "mgl";

  criterion(1, "closed-form anchors", [](Tally& t) {
    for (double p : {0.1, 0.25, 0.4, 0.5}) {
      const Kernel P = two_point(p);
      const GapResult g = spectral_gap(P);
      t.near(g.gap, 2 * p, 1e-8, "gap");
      t.near(g.theta, 1 - 2 * p, 1e-8, "theta");
      t.near(g.poincare_C, 1 / (2 * p), 1e-8, "C");
      t.near(kappa_exact(P, 2).kappa, p, 1e-8, "kappa_2");
      const auto ladder = lambda_ladder(P).ladder;
      t.near(ladder[0], 0.0, 1e-8, "lambda_1");
      t.near(ladder[1], 2 * p, 1e-8, "lambda_2");
    }
    const Kernel I = identity_kernel(uniform_space(2));
    for (double R : {0.0, 0.2, 0.5, 0.8, 1.0, 1.2, std::sqrt(2.0)}) {
      // Grid over the quarter circle f = sqrt(2) (cos s, sin s).
      double oracle = 0.0;
      for (int k = 0; k <= 2000; ++k) {
        const double s = 0.5 * M_PI * k / 2000;
        const double a = std::sqrt(2.0) * std::cos(s), b = std::sqrt(2.0) * std::sin(s);
        oracle = std::max(oracle, 0.5 * (a * std::max(a - R, 0.0) + b * std::max(b - R, 0.0)));
      }
      const double value = tau(I, R).value;
      t.near(value, 1 - R / std::sqrt(2.0), 1e-8, "identity tau closed form");
      t.near(value, oracle, 1e-2, "identity tau grid oracle");
    }
  });

  criterion(2, "ergodicity methods agree", [](Tally& t) {
    std::size_t reducible = 0;
    for (std::uint64_t s = 1; s <= 500; ++s) {
      const std::size_t n = 2 + s % 11;
      Kernel P = two_point(0.5);
      switch (s % 4) {
        case 0: P = random_reversible(n, 0.5, s); break;
        case 1: P = random_invariant(n, 0.4, s); break;
        case 2: P = random_reversible(n, 0.15, s); break;
        default: {
          const std::size_t k = 1 + s % (n - 1);
          P = block_diagonal({random_invariant(k, 0.6, s), random_reversible(n - k, 0.6, s + 1)}, {0.3, 0.7});
        }
      }
      try {
        const ErgodicityReport r = check_ergodic(P);
        t.expect(r.method_scc == r.method_eigen, tag("flags differ", s));
        reducible += r.ergodic ? 0 : 1;
      } catch (const Error& e) {
        t.expect(false, tag("disagreement", s) + ": " + e.what());
      }
    }
    t.expect(reducible > 50 && reducible < 450, "corpus mixes ergodic and reducible kernels");
  });

  criterion(3, "Cheeger sandwich", [](Tally& t) {
    for (std::uint64_t s = 1; s <= 200; ++s) {
      const Kernel P = random_reversible(2 + s % 9, s % 3 == 0 ? 0.25 : 0.6, s);
      const double k = kappa_exact(P, 2).kappa;
      const double l = lambda_ladder(P).ladder[1];
      t.le(k * k / 2, l, 1e-9, tag("lower", s));
      t.le(l, 2 * k, 1e-9, tag("upper", s));
    }
    for (std::uint64_t s = 1; s <= 50; ++s) {
      const Kernel P = random_reversible(4 + s % 5, 0.5, 1000 + s);
      const auto ladder = lambda_ladder(P).ladder;
      for (std::size_t n = 2; n <= 4; ++n) t.le(ladder[n - 1], 2 * kappa_exact(P, n).kappa, 1e-9, tag("order n", s));
    }
  });

  const std::vector<Kernel> corpus = ergodic_corpus(200, 42);

  criterion(4, "spectral gap bounds the tail functional", [&corpus](Tally& t) {
    for (std::size_t i = 0; i < corpus.size(); ++i)
      for (double R : {1.5, 2.0, 4.0, 8.0, 16.0}) {
        const GapTailBound g = gap_tail_bound_check(corpus[i], R);
        t.le(g.check.lhs, g.check.rhs, 1e-9, tag("chain", i));
        t.expect(g.check.pass, tag("flag", i));
      }
  });

  criterion(5, "pointwise tail inequalities", [&corpus](Tally& t) {
    detail::Rng rng(5);
    for (std::size_t i = 0; i < 50; ++i) {
      const Kernel& P = corpus[i];
      const bool reversible = is_reversible(P, 1e-12);
      for (int k = 0; k < 500; ++k) {
        const Vector f = unit_nonneg(P.space(), rng);
        const double R = 2.0 * rng.uniform();
        t.expect(pointwise_symmetrization_check(P, f, R).pass, tag("symmetrization", i));
        if (reversible) t.expect(pointwise_power_monotonicity_check(P, f, R, 1 + k % 3).pass, tag("power", i));
      }
      const TailProfile prof = tau_profile(P, default_r_grid(P.space()));
      for (const TailPoint& p : prof.points) t.le(p.value, tail2(P, p.R).value, 1e-9, tag("schwarz", i));
    }
  });

  criterion(6, "certificates below the optimizer", [&corpus](Tally& t) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Kernel& P = corpus[i];
      if (P.size() > 10) continue;
      std::vector<DisjointTuple> tuples;
      for (std::size_t n = 2; n <= std::min<std::size_t>(3, P.size()); ++n) {
        tuples.push_back(kappa_exact(P, n).witness);
        tuples.push_back(kappa_upper_spectral(P, n).witness);
      }
      for (double R : {0.0, 0.25, 0.5, 1.0}) {
        const double value = tau(P, R).value;
        for (const auto& T : tuples) t.le(tail_cert_from_tuple(P, T, R).bound, value, 1e-9, tag("chain", i));
      }
    }
  });

  criterion(7, "coarse-graining preserves cuts", [](Tally& t) {
    for (std::uint64_t s = 1; s <= 100; ++s) {
      detail::Rng rng(s);
      const std::size_t n = 3 + s % 8;
      const Kernel P = s % 2 ? random_reversible(n, 0.6, s) : random_invariant(n, 0.6, s);
      const std::size_t k = 2 + static_cast<std::size_t>(rng.below(n - 1));
      Partition pi{std::vector<StateSet>(k)};
      for (std::size_t x = 0; x < n; ++x) pi.blocks[x < k ? x : rng.below(k)].push_back(x);
      for (auto& b : pi.blocks) std::sort(b.begin(), b.end());
      const CoarseGrained cg = coarse_grain(P, pi);
      for (std::uint64_t mask = 1; mask + 1 < (1ull << k); ++mask) {
        StateSet fine, coarse;
        for (std::size_t b = 0; b < k; ++b)
          if (mask >> b & 1) {
            coarse.push_back(b);
            fine.insert(fine.end(), pi.blocks[b].begin(), pi.blocks[b].end());
          }
        std::sort(fine.begin(), fine.end());
        t.near(boundary_flow(P, fine), boundary_flow(cg.kernel, coarse), 1e-13, tag("cut", s));
      }
      Partition singletons;
      for (std::size_t x = 0; x < n; ++x) singletons.blocks.push_back({x});
      const CoarseGrained same = coarse_grain(P, singletons);
      t.expect(same.kernel.entries() == P.entries(), tag("singleton kernel", s));
      t.expect(same.space.weights() == P.space().weights(), tag("singleton weights", s));
    }
  });

  criterion(8, "family dichotomy along truncations", [](Tally& t) {
    std::vector<double> gaps, kappas, taus;
    for (std::size_t N : {50, 100, 200}) {
      gaps.push_back(spectral_gap(birth_death_geometric(N, 0.5)).gap);
      const Kernel H = birth_death_heavy(N, 2.0);
      kappas.push_back(kappa_exact_path(H, 2).kappa);
      taus.push_back(tau(H, 2.0).value);
    }
    const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
    t.le(*hi / *lo, 1.2, 0.0, "geometric gap ratio");
    for (std::size_t i = 1; i < 3; ++i) {
      t.expect(kappas[i] < kappas[i - 1], tag("heavy kappa_2 decreasing", i));
      t.le(taus[i - 1], taus[i], 0.0, tag("heavy tau nondecreasing", i));
    }
    t.expect(kappas[2] < kappas[0] / 2, "kappa_2(200) < kappa_2(50) / 2");
  });

  criterion(9, "inequalities module", [&corpus](Tally& t) {
    DefectiveOptions dopts;
    dopts.restarts = 8;
    for (std::size_t i = 0; i < corpus.size(); i += 4) {
      const Kernel& P = corpus[i];
      const double C = poincare_constant(P);
      t.expect(defective_c2(P, 0.0, dopts).C2 == 1.0 / P.space().mu_min(), tag("C1 = 0", i));
      t.near(defective_c2(P, C, dopts).C2, 1.0, 1e-9, tag("C1 = C", i));
      t.near(defective_c2(P, 2 * C, dopts).C2, 1.0, 1e-9, tag("C1 = 2C", i));
    }
    for (double p : {0.1, 0.25, 0.4, 0.5})
      for (double r : {0.01, 0.1, 0.3, 0.5, 0.9})
        t.near(weak_poincare_alpha(two_point(p), r).alpha, (1 - r) / (2 * p), 1e-6, "two-point weak Poincare");
    detail::Rng rng(9);
    const PhiProfile phi = PhiProfile::power(0.5);
    for (int k = 0; k < 1000; ++k) {
      const Kernel& P = corpus[static_cast<std::size_t>(k) % corpus.size()];
      const Vector f = gaussian(P.size(), rng);
      t.expect(lo_decomposition_check(P.space(), f, 1.0 + 0.9999 * rng.uniform()).pass, tag("decomposition", k));
      t.expect(lo_split_check(P.space(), f, phi).pass, tag("split", k));
    }
    std::size_t reversible = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!is_reversible(corpus[i], 1e-12)) continue;
      ++reversible;
      for (double R : {1.0, 2.0}) t.expect(mean_zero_tail_check(corpus[i], R).check.pass, tag("mean-zero tail", i));
    }
    t.expect(reversible >= 100, "reversible share of the corpus");
  });

  criterion(10, "sub-Markov operators", [](Tally& t) {
    for (std::uint64_t s = 1; s <= 500; ++s) {
      const SubMarkovAnalysis a = analyze_submarkov(random_substochastic(2 + s % 9, 0.5, s));
      t.expect(a.kernel_irreducible == (a.op_norm2 < 1.0 - 1e-10), tag("irreducible iff norm < 1", s));
      if (a.kernel_irreducible) {
        const double C = 1.0 / a.lambda_min;
        t.le(a.op_norm2 * a.op_norm2, (C - 1) / C, 1e-9, tag("norm identity", s));
      }
    }
    std::size_t certified = 0;
    for (std::uint64_t s = 1; s <= 12; ++s) {
      const Kernel P = random_substochastic(2 + s % 2, 0.8, s);
      for (double R : {1.5, 3.0}) {
        SubMarkovTailReport r;
        try {
          r = submarkov_tail_pipeline(P, R);
        } catch (const Error& e) {
          t.expect(e.code() == Errc::EpsilonTooLarge, tag("pipeline error", s) + ": " + e.what());
          continue;
        }
        ++certified;
        t.expect(r.certified && r.l1_contraction, tag("certified mode", s));
        t.expect(r.defective.pass, tag("derived defective inequality", s));
        t.expect(r.norm.pass, tag("pipeline norm identity", s));
      }
    }
    t.expect(certified >= 10, "certified pipeline runs");
  });

  criterion(11, "verify is deterministic; perturbation is caught", [&mgl_binary](Tally& t) {
    const auto dir = std::filesystem::temp_directory_path() / "mgl_acceptance";
    std::filesystem::create_directories(dir);
    const std::string base = "MGL_THREADS=1 \"" + mgl_binary + "\" verify --seed 1 --cases 50";
    const auto a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
    t.expect(run_status(base + " > \"" + a.string() + "\" 2>/dev/null") == 0, "first run exits 0");
    t.expect(run_status(base + " > \"" + b.string() + "\" 2>/dev/null") == 0, "second run exits 0");
    const std::string first = slurp(a);
    t.expect(!first.empty() && first == slurp(b), "byte-identical ledgers");
    const int perturbed = run_status(base + " --perturb-kernel 1e-3 > \"" + c.string() + "\" 2>/dev/null");
    t.expect(perturbed != 0 && perturbed != -1, "perturbed run exits nonzero");
    t.expect(slurp(c).find("NotInvariant") != std::string::npos, "perturbed ledger names NotInvariant");
    std::filesystem::remove_all(dir);
  });

  std::printf("%s: %d criteria failed\n", failed_criteria ? "FAIL" : "PASS", failed_criteria);
  return failed_criteria ? 1 : 0;
}
