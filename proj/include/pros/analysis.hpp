#pragma once

// Distribution-free efficiency quantities for PROS density estimation.

#include "pros/distributions.hpp"

#include <vector>

namespace pros {

//! Reduction rate in asymptotic variance of the PROS estimate relative to the
//! SRS estimate at p = F(x). Distribution-free; p must lie in (0,1).
double rrv_vs_srs(const Design& design, const MisplacementMatrix& alpha, double p);

//! Same quantity relative to an imperfect RSS estimate with set size n and
//! ranking-error matrix `rss_error`.
double rrv_vs_rss(const Design& design, const MisplacementMatrix& alpha,
                  const RssErrorMatrix& rss_error, double p);

//! RRV vs SRS computed through the subset densities of `dist` at x:
//! 1 - f^2 / ((1/n) sum_j f_[d_j]^2). Independent route to rrv_vs_srs.
double rrv_vs_srs_from_densities(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& alpha, double x);

//! P{Y = Z} for Y, Z i.i.d. Binomial(s - 1, p).
double collision_probability(int s, double p);

//! Large-s approximation 1 / sqrt(4 s pi p (1-p)).
double collision_edgeworth(int s, double p);

//! Integral of (1/n) sum_j f_[d_j]^2 - f^2 over the 1e-8 .. 1-1e-8 quantile
//! range (absolute tolerance 1e-8), split at interior quantiles.
double delta_f_n(const Distribution& dist, const Design& design,
                 const MisplacementMatrix& alpha);

//! Leading-order form sqrt(n/m) delta(f^2) - i0(f^2) of delta_f_n for perfect
//! designs, where delta(f^2) = integral f^2 / sqrt(4 pi F (1-F)).
double delta_leading_term(const Distribution& dist, const Design& design);

enum class RrvBaseline
{
  srs,
  rss
};

struct RrvPoint
{
  double p;
  double rrv;
};

//! p = step, 2 step, ..., up to 1 - step.
std::vector<double> rrv_default_grid(double step = 0.01);

//! RRV curve for the alpha0 family; for the RSS baseline the ranking-error
//! matrix is the same alpha0 family of size n.
std::vector<RrvPoint> rrv_curve(int n, int m, double alpha0, RrvBaseline baseline,
                                const std::vector<double>& p_grid);

} // namespace pros
