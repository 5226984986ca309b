#pragma once

#include <functional>

namespace gbnns::quadrature {

struct Options {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

/// Adaptive composite Gauss-Legendre on [a, b]. Each panel is compared against
/// its two halves and split until the difference drops under the panel's share
/// of `abs_tol`, so endpoint singularities get refined locally.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options = {});

}  // namespace gbnns::quadrature
