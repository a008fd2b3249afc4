#include "frechet_tree/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

namespace frechet_tree {

namespace {

using Rule = boost::math::quadrature::gauss<double, 16>;

double refine(const std::function<double(double)>& f, double a, double b, double whole,
              double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = Rule::integrate(f, a, mid);
  const double right = Rule::integrate(f, mid, b);
  const double split = left + right;
  if (depth <= 0 || std::abs(split - whole) <= abs_tol) return split;
  return refine(f, a, mid, left, 0.5 * abs_tol, depth - 1) +
         refine(f, mid, b, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  if (b < a) return -integrate_adaptive(f, b, a, abs_tol, max_depth);
  return refine(f, a, b, Rule::integrate(f, a, b), abs_tol, max_depth);
}

}  // namespace frechet_tree
