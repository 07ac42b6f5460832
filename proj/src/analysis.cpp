#include "pros/analysis.hpp"

#include "pros/errors.hpp"
#include "pros/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace pros {

namespace {

void require_open_unit(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("p must lie strictly inside (0,1)");
}

// n * sum_j [ sum_h alpha(j,h) sum_{u in d_h} C(s-1,u-1) p^(u-1) (1-p)^(s-u) ]^2,
// i.e. (1/n) sum_j f_[d_j]^2 / f^2 at F(x) = p.
double pros_square_ratio(const Design& design, const MisplacementMatrix& alpha, double p)
{
  check_alpha_matches(design, alpha);
  const int n = design.n();
  const int s = design.s();
  std::vector<double> block(n, 0.0);
  for (int h = 0; h < n; ++h)
    for (int u = design.first_rank(h); u <= design.last_rank(h); ++u)
      block[h] += binomial_term(s - 1, u - 1, p);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double inner = 0.0;
    for (int h = 0; h < n; ++h)
      inner += alpha(j, h) * block[h];
    acc += inner * inner;
  }
  return n * acc;
}

} // namespace

double rrv_vs_srs(const Design& design, const MisplacementMatrix& alpha, double p)
{
  require_open_unit(p);
  return 1.0 - 1.0 / pros_square_ratio(design, alpha, p);
}

double rrv_vs_rss(const Design& design, const MisplacementMatrix& alpha,
                  const RssErrorMatrix& rss_error, double p)
{
  require_open_unit(p);
  const int n = design.n();
  if (rss_error.size() != static_cast<std::size_t>(n))
    throw DesignMismatchError("RSS ranking-error matrix must be n x n");
  const double pros = pros_square_ratio(design, alpha, p);
  double rss = 0.0;
  for (int r = 0; r < n; ++r) {
    double inner = 0.0;
    for (int k = 1; k <= n; ++k)
      inner += rss_error(r, k - 1) * binomial_term(n - 1, k - 1, p);
    rss += inner * inner;
  }
  rss *= n;
  return (pros - rss) / pros;
}

double rrv_vs_srs_from_densities(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& alpha, double x)
{
  const double f = dist.pdf(x);
  const auto parts = subset_pdfs(dist, design, alpha, x);
  double mean_sq = 0.0;
  for (double v : parts)
    mean_sq += v * v;
  mean_sq /= design.n();
  return 1.0 - f * f / mean_sq;
}

double collision_probability(int s, double p)
{
  if (s < 1)
    throw DomainError("collision probability needs s >= 1");
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("p must lie in [0,1]");
  double acc = 0.0;
  for (int k = 0; k <= s - 1; ++k) {
    const double b = binomial_term(s - 1, k, p);
    acc += b * b;
  }
  return acc;
}

double collision_edgeworth(int s, double p)
{
  if (s < 1)
    throw DomainError("collision approximation needs s >= 1");
  require_open_unit(p);
  return 1.0 / std::sqrt(4.0 * s * std::numbers::pi * p * (1.0 - p));
}

namespace {

std::vector<double> quantile_range(const Distribution& dist)
{
  return quantile_breakpoints(dist, 1e-8);
}

} // namespace

double delta_f_n(const Distribution& dist, const Design& design,
                 const MisplacementMatrix& alpha)
{
  check_alpha_matches(design, alpha);
  const auto breaks = quantile_range(dist);
  const auto integrand = [&](double x) {
    const auto parts = subset_pdfs(dist, design, alpha, x);
    double mean_sq = 0.0;
    for (double v : parts)
      mean_sq += v * v;
    const double f = dist.pdf(x);
    return mean_sq / design.n() - f * f;
  };
  return integrate_pieces(integrand, breaks, 1e-8).value;
}

double delta_leading_term(const Distribution& dist, const Design& design)
{
  const auto breaks = quantile_range(dist);
  const double weighted = integrate_pieces(
                            [&](double x) {
                              const double f = dist.pdf(x);
                              const double F = dist.cdf(x);
                              const double q = F * (1.0 - F);
                              return q > 0.0 ? f * f / std::sqrt(4.0 * std::numbers::pi * q)
                                             : 0.0;
                            },
                            breaks, 1e-9)
                            .value;
  const double plain =
    integrate_pieces([&](double x) { return dist.pdf(x) * dist.pdf(x); }, breaks, 1e-9).value;
  return std::sqrt(static_cast<double>(design.n()) / design.m()) * weighted - plain;
}

std::vector<double> rrv_default_grid(double step)
{
  if (!(step > 0.0 && step < 0.5))
    throw UsageError("p-grid step must lie in (0, 0.5)");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 1; k < count; ++k)
    grid.push_back(k * step);
  return grid;
}

std::vector<RrvPoint> rrv_curve(int n, int m, double alpha0, RrvBaseline baseline,
                                const std::vector<double>& p_grid)
{
  const Design design(n, m, 1);
  const auto alpha = StochasticMatrix::alpha0_family(n, alpha0);
  std::vector<RrvPoint> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    const double v = baseline == RrvBaseline::srs ? rrv_vs_srs(design, alpha, p)
                                                  : rrv_vs_rss(design, alpha, alpha, p);
    out.push_back({ p, v });
  }
  return out;
}

} // namespace pros
