#ifndef MGL_DETAIL_ASCENT_HPP
#define MGL_DETAIL_ASCENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace mgl::detail {

enum class Feasible {
  nonneg_sphere,  ///< f >= 0, <f,f>_mu = 1
  sphere,         ///< <f,f>_mu = 1
  ball,           ///< <f,f>_mu <= 1
};

struct AscentOptions {
  std::size_t max_iterations = 500;
  double rel_tol = 1e-10;
};

inline double mu_norm(const Eigen::VectorXd& f, const Eigen::VectorXd& mu) {
  return std::sqrt((mu.array() * f.array().square()).sum());
}

/// Returns false when the projection degenerates to zero.
inline bool project(Eigen::VectorXd& f, const Eigen::VectorXd& mu, Feasible set) {
  if (set == Feasible::nonneg_sphere) f = f.cwiseMax(0.0);
  const double norm = mu_norm(f, mu);
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  if (set != Feasible::ball || norm > 1.0) f /= norm;
  return true;
}

struct AscentResult {
  Eigen::VectorXd point;
  double value = 0.0;
};

/// Projected gradient ascent with an adaptive step along the normalized
/// L2(mu) gradient. `value(f)` evaluates the objective, `gradient(f)` returns
/// its Euclidean gradient (the direction used is that gradient divided by mu,
/// its Riesz representative in L2(mu)), and `proj(f)` maps a trial point back
/// onto the feasible set, returning false when that fails.
template <typename Value, typename Gradient, typename Projector>
AscentResult ascend_with(Eigen::VectorXd start, const Eigen::VectorXd& mu, Value&& value, Gradient&& gradient,
                         Projector&& proj, const AscentOptions& opts = {}) {
  AscentResult best;
  if (!proj(start)) {
    best.point = Eigen::VectorXd::Zero(start.size());
    best.value = -std::numeric_limits<double>::infinity();
    return best;
  }
  best.point = start;
  best.value = value(start);
  double step = 0.25;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd dir = gradient(best.point).cwiseQuotient(mu);
    const double dnorm = mu_norm(dir, mu);
    if (!(dnorm > 0.0) || !std::isfinite(dnorm)) break;
    dir /= dnorm;
    bool moved = false;
    double gain = 0.0;
    while (step > 1e-12) {
      Eigen::VectorXd trial = best.point + step * dir;
      if (proj(trial)) {
        const double v = value(trial);
        if (v > best.value) {
          gain = v - best.value;
          best.point = std::move(trial);
          best.value = v;
          moved = true;
          step = std::min(1.0, step * 2.0);
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
    if (gain <= opts.rel_tol * std::max(std::abs(best.value), 1e-300)) break;
  }
  return best;
}

template <typename Value, typename Gradient>
AscentResult ascend(Eigen::VectorXd start, const Eigen::VectorXd& mu, Value&& value, Gradient&& gradient,
                    Feasible set, const AscentOptions& opts = {}) {
  AscentResult r = ascend_with(
      std::move(start), mu, value, gradient, [&](Eigen::VectorXd& f) { return project(f, mu, set); }, opts);
  if (!std::isfinite(r.value)) r.value = value(r.point);
  return r;
}

}  // namespace mgl::detail

#endif  // MGL_DETAIL_ASCENT_HPP
