#ifndef MGL_TESTS_SUPPORT_HPP
#define MGL_TESTS_SUPPORT_HPP

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "mgl/chainspace.hpp"
#include "mgl/detail/rng.hpp"

#define EXPECT_ERRC(statement, errc)                     \
  EXPECT_THROW(                                          \
      {                                                  \
        try {                                            \
          statement;                                     \
        } catch (const mgl::Error& e_) {                 \
          EXPECT_EQ(e_.code(), errc) << e_.what();       \
          throw;                                         \
        }                                                \
      },                                                 \
      mgl::Error)

namespace testing_support {

inline mgl::Vector random_vector(std::size_t n, std::uint64_t seed, bool nonneg = false) {
  mgl::detail::Rng rng(seed);
  mgl::Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = nonneg ? std::abs(rng.normal()) : rng.normal();
  return v;
}

/// f >= 0 with mu(f^2) = 1.
inline mgl::Vector random_unit_nonneg(const mgl::ProbabilitySpace& mu, std::uint64_t seed) {
  mgl::detail::Rng rng(seed);
  mgl::Vector v(static_cast<Eigen::Index>(mu.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.bernoulli(0.7) ? std::abs(rng.normal()) : 0.0;
  if (v.isZero(0.0)) v[0] = 1.0;
  return v / std::sqrt(mu.norm_sq(v));
}

/// mu-weighted inner product written out as a loop.
inline double loop_inner(const mgl::ProbabilitySpace& mu, const mgl::Vector& f, const mgl::Vector& g) {
  double s = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) s += mu.weight(x) * f[static_cast<Eigen::Index>(x)] * g[static_cast<Eigen::Index>(x)];
  return s;
}

}  // namespace testing_support

#endif  // MGL_TESTS_SUPPORT_HPP
