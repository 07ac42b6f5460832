#include "pros/quadrature.hpp"

#include "pros/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <algorithm>
#include <sstream>
#include <vector>

namespace pros {

namespace {

struct Piece
{
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece evaluate(const std::function<double(double)>& f, double a, double b)
{
  double err = 0.0;
  // max_depth = 0: a single 15-point Kronrod panel with its embedded 7-point
  // Gauss error estimate
  const double v =
    boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  if (!std::isfinite(v) || !std::isfinite(err)) {
    std::ostringstream os;
    os << "integrand is not finite on [" << a << ", " << b << "]";
    throw IntegrationError(os.str());
  }
  return { a, b, v, err };
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, int max_intervals)
{
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw IntegrationError("integration bounds must be finite with a < b");

  std::vector<Piece> pieces{ evaluate(f, a, b) };
  double total = pieces.front().value;
  double error = pieces.front().error;

  while (error > abs_tol) {
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      std::ostringstream os;
      os << "quadrature did not reach tolerance " << abs_tol << " on [" << a << ", " << b
         << "] (error estimate " << error << ")";
      throw IntegrationError(os.str());
    }
    std::pop_heap(pieces.begin(), pieces.end());
    const Piece worst = pieces.back();
    pieces.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = evaluate(f, worst.a, mid);
    const Piece right = evaluate(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pieces.push_back(left);
    std::push_heap(pieces.begin(), pieces.end());
    pieces.push_back(right);
    std::push_heap(pieces.begin(), pieces.end());
  }
  // final re-sum, free of incremental rounding drift
  total = 0.0;
  error = 0.0;
  for (const auto& p : pieces) {
    total += p.value;
    error += p.error;
  }
  const int count = static_cast<int>(pieces.size());
  return { total, error, count };
}

QuadratureResult integrate_pieces(const std::function<double(double)>& f,
                                  std::span<const double> breakpoints, double abs_tol,
                                  int max_intervals)
{
  if (breakpoints.size() < 2)
    throw IntegrationError("piecewise integration needs at least two breakpoints");
  const double share = abs_tol / static_cast<double>(breakpoints.size() - 1);
  QuadratureResult total;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    const auto r = integrate(f, breakpoints[i - 1], breakpoints[i], share, max_intervals);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
  }
  return total;
}

double trapezoid(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw IntegrationError("trapezoid: grid and values differ in length");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

} // namespace pros
