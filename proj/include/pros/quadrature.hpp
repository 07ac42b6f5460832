#pragma once

#include <functional>
#include <span>

namespace pros {

struct QuadratureResult
{
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

//! Globally adaptive Gauss-Kronrod (7/15) integration on [a, b]. The interval
//! with the largest error estimate is bisected until the summed error estimate
//! drops below `abs_tol`; throws IntegrationError if `max_intervals` is hit.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-10, int max_intervals = 4000);

//! Sum of `integrate` over consecutive breakpoints, each piece held to an
//! equal share of `abs_tol`. Breakpoints must be increasing.
QuadratureResult integrate_pieces(const std::function<double(double)>& f,
                                  std::span<const double> breakpoints, double abs_tol = 1e-10,
                                  int max_intervals = 4000);

//! Trapezoid rule over a tabulated function on an increasing grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

} // namespace pros
