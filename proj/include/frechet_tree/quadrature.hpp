#pragma once

#include <functional>

namespace frechet_tree {

/// Composite 16-node Gauss-Legendre rule on [a, b], bisecting until two
/// consecutive refinements agree to `abs_tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-10, int max_depth = 30);

}  // namespace frechet_tree
