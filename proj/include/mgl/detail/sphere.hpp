#ifndef MGL_DETAIL_SPHERE_HPP
#define MGL_DETAIL_SPHERE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

#include "mgl/error.hpp"

namespace mgl::detail {

inline constexpr double kPi = 3.14159265358979323846;

/// Visits a grid on the Euclidean unit sphere of R^n, n <= 3, and returns the
/// covering radius: every point of the swept region lies within that chord
/// distance of a visited point. `nonneg` restricts to the closed positive
/// orthant; otherwise a hemisphere is swept (enough for even functionals).
template <typename Visit>
double for_each_sphere_point(std::size_t n, double step, bool nonneg, Visit&& visit) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  if (n == 1) {
    g[0] = 1.0;
    visit(g);
    return 0.0;
  }
  if (n == 2) {
    const double span = nonneg ? kPi / 2 : kPi;
    const auto m = static_cast<long>(std::ceil(span / step));
    const double s = span / static_cast<double>(m);
    for (long i = 0; i <= m; ++i) {
      const double t = s * static_cast<double>(i);
      g << std::cos(t), std::sin(t);
      visit(g);
    }
    return 2.0 * std::sin(s / 4.0);
  }
  if (n == 3) {
    const double theta_span = kPi / 2;
    const double phi_span = nonneg ? kPi / 2 : 2 * kPi;
    const auto mt = static_cast<long>(std::ceil(theta_span / step));
    const auto mp = static_cast<long>(std::ceil(phi_span / step));
    const double st = theta_span / static_cast<double>(mt);
    const double sp = phi_span / static_cast<double>(mp);
    for (long i = 0; i <= mt; ++i) {
      const double theta = st * static_cast<double>(i);
      const double z = std::cos(theta), r = std::sin(theta);
      // The pole is a single point.
      const long phi_count = (i == 0) ? 0 : (nonneg ? mp : mp - 1);
      for (long j = 0; j <= phi_count; ++j) {
        const double phi = sp * static_cast<double>(j);
        g << r * std::cos(phi), r * std::sin(phi), z;
        visit(g);
      }
    }
    return st / 2.0 + sp / 2.0;
  }
  throw Error(Errc::InvalidArgument, "sphere grids are available for at most 3 states");
}

}  // namespace mgl::detail

#endif  // MGL_DETAIL_SPHERE_HPP
