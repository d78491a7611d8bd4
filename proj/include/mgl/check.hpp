#ifndef MGL_CHECK_HPP
#define MGL_CHECK_HPP

namespace mgl {

/// Outcome of one inequality lhs <= rhs + tolerance.
struct CheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

inline CheckResult make_check(double lhs, double rhs, double tolerance) {
  return CheckResult{lhs, rhs, tolerance, lhs <= rhs + tolerance};
}

}  // namespace mgl

#endif  // MGL_CHECK_HPP
