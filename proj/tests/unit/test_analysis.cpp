#include "pros/analysis.hpp"
#include "pros/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pros;

namespace {

// P{Y = Z} for i.i.d. Binomial(s-1, p), by a double sum over all outcome pairs
// with probabilities from the factorial form.
double brute_collision(int s, double p)
{
  const int t = s - 1;
  std::vector<double> pmf(static_cast<std::size_t>(t + 1));
  for (int k = 0; k <= t; ++k)
    pmf[static_cast<std::size_t>(k)] =
      std::tgamma(t + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(t - k + 1.0)) *
      std::pow(p, k) * std::pow(1.0 - p, t - k);
  double acc = 0.0;
  for (int y = 0; y <= t; ++y)
    for (int z = 0; z <= t; ++z)
      if (y == z)
        acc += pmf[static_cast<std::size_t>(y)] * pmf[static_cast<std::size_t>(z)];
  return acc;
}

// P{Y and Z fall in the same block of m consecutive values}.
double same_block(int n, int m, double p)
{
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double pj = 0.0;
    for (int k = j * m; k < (j + 1) * m; ++k)
      pj += binomial_term(n * m - 1, k, p);
    acc += pj * pj;
  }
  return acc;
}

} // namespace

TEST_CASE("RRV against SRS")
{
  CHECK(rrv_vs_srs(Design(2, 3, 1), StochasticMatrix::identity(2), 0.5) == 0.0);
  CHECK(rrv_vs_srs(Design(2, 1, 1), StochasticMatrix::identity(2), 0.25) ==
        doctest::Approx(0.2).epsilon(1e-14));
  for (double p : { 0.05, 0.3, 0.5, 0.9 })
    CHECK(std::fabs(rrv_vs_srs(Design(4, 2, 1), StochasticMatrix::uniform(4), p)) < 1e-14);
  CHECK_THROWS_AS(rrv_vs_srs(Design(2, 1, 1), StochasticMatrix::identity(2), 0.0), DomainError);
  CHECK_THROWS_AS(rrv_vs_srs(Design(2, 1, 1), StochasticMatrix::identity(2), 1.0), DomainError);
}

TEST_CASE("RRV against RSS")
{
  for (double p : rrv_default_grid()) {
    const auto a = StochasticMatrix::alpha0_family(4, 0.7);
    CHECK(rrv_vs_rss(Design(4, 1, 1), a, a, p) == 0.0);
  }
  CHECK(std::fabs(rrv_vs_rss(Design(3, 2, 1), StochasticMatrix::identity(3),
                             StochasticMatrix::identity(3), 1e-6)) < 1e-3);
  CHECK(std::fabs(rrv_vs_rss(Design(2, 3, 1), StochasticMatrix::identity(2),
                             StochasticMatrix::identity(2), 0.5)) < 1e-15);
  CHECK_THROWS_AS(rrv_vs_rss(Design(2, 3, 1), StochasticMatrix::identity(2),
                             StochasticMatrix::identity(3), 0.5),
                  DesignMismatchError);
}

TEST_CASE("RRV curves are symmetric about one half")
{
  const StochasticMatrix banded(3, { 0.7, 0.2, 0.1, 0.2, 0.6, 0.2, 0.1, 0.2, 0.7 });
  REQUIRE(banded.is_reversal_symmetric());
  for (const auto& [design, alpha] :
       { std::pair{ Design(2, 3, 1), StochasticMatrix::alpha0_family(2, 0.8) },
         std::pair{ Design(3, 2, 1), banded }, std::pair{ Design(6, 3, 1), StochasticMatrix::identity(6) } }) {
    for (int k = 1; k < 50; ++k) {
      const double p = k / 100.0;
      CHECK(std::fabs(rrv_vs_srs(design, alpha, p) - rrv_vs_srs(design, alpha, 1.0 - p)) < 1e-12);
      const auto rss = StochasticMatrix::alpha0_family(static_cast<std::size_t>(design.n()), 0.8);
      CHECK(std::fabs(rrv_vs_rss(design, alpha, rss, p) - rrv_vs_rss(design, alpha, rss, 1.0 - p)) <
            1e-12);
    }
  }
}

TEST_CASE("binomial and density routes to the RRV agree")
{
  for (const auto& dist : { Distribution::normal(), Distribution::gamma(3.0),
                            Distribution::gumbel(), Distribution::laplace() }) {
    for (const auto& [design, alpha] :
         { std::pair{ Design(3, 2, 1), StochasticMatrix::alpha0_family(3, 0.75) },
           std::pair{ Design(2, 3, 1), StochasticMatrix::identity(2) },
           std::pair{ Design(4, 1, 1), StochasticMatrix::alpha0_family(4, 0.4) } }) {
      for (double q : { 0.02, 0.2, 0.45, 0.5, 0.77, 0.98 }) {
        const double x = dist.quantile(q);
        const double p = dist.cdf(x);
        CHECK(std::fabs(rrv_vs_srs(design, alpha, p) -
                        rrv_vs_srs_from_densities(dist, design, alpha, x)) < 1e-12);
      }
    }
  }
}

TEST_CASE("RRV against RSS is nonnegative for the comparison protocol")
{
  for (double a0 : { 0.5, 0.7, 0.9, 1.0 })
    for (int n : { 2, 3, 6 })
      for (int m : { 1, 2, 3 })
        for (const auto& pt : rrv_curve(n, m, a0, RrvBaseline::rss, rrv_default_grid()))
          CHECK(pt.rrv >= -1e-12);
}

TEST_CASE("collision probability")
{
  CHECK(collision_probability(1, 0.3) == 1.0);
  CHECK(collision_probability(6, 0.5) == doctest::Approx(0.24609375).epsilon(1e-15));
  CHECK(collision_probability(2, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (int s : { 1, 2, 5, 9, 16, 30 })
    for (double p : { 0.01, 0.2, 0.5, 0.93 })
      CHECK(std::fabs(collision_probability(s, p) - brute_collision(s, p)) < 1e-12);
}

TEST_CASE("normal approximation of the collision probability")
{
  CHECK(collision_edgeworth(6, 0.5) == doctest::Approx(1.0 / std::sqrt(6.0 * std::numbers::pi)));
  CHECK(collision_edgeworth(6, 0.5) == doctest::Approx(0.23033).epsilon(1e-4));
  CHECK(std::fabs(collision_edgeworth(100, 0.5) / collision_probability(100, 0.5) - 1.0) < 0.02);
  double prev = 1.0;
  for (int s = 8; s <= 64; s *= 2) {
    const double err = std::fabs(collision_edgeworth(s, 0.5) - collision_probability(s, 0.5));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("squared subset densities for perfect designs")
{
  for (const auto& dist : { Distribution::normal(), Distribution::exponential(1.5),
                            Distribution::logistic(), Distribution::student_t(2.0) }) {
    for (double q : { 0.03, 0.25, 0.5, 0.8 }) {
      const double x = dist.quantile(q);
      const double f = dist.pdf(x);
      const double F = dist.cdf(x);
      // single-rank blocks: collision of two binomials
      for (int s : { 2, 4, 7 }) {
        const Design d(s, 1, 1);
        const auto parts = subset_pdfs(dist, d, StochasticMatrix::identity(static_cast<std::size_t>(s)), x);
        double lhs = 0.0;
        for (double v : parts)
          lhs += v * v;
        lhs /= s;
        CHECK(std::fabs(lhs - s * f * f * collision_probability(s, F)) < 1e-12);
      }
      // wider blocks: both binomials land in the same block
      for (const auto& d : { Design(2, 3, 1), Design(3, 2, 1) }) {
        const auto parts =
          subset_pdfs(dist, d, StochasticMatrix::identity(static_cast<std::size_t>(d.n())), x);
        double lhs = 0.0;
        for (double v : parts)
          lhs += v * v;
        lhs /= d.n();
        CHECK(std::fabs(lhs - d.n() * f * f * same_block(d.n(), d.m(), F)) < 1e-12);
        CHECK(same_block(d.n(), d.m(), F) > collision_probability(d.s(), F));
      }
    }
  }
}

TEST_CASE("integrated variance reduction")
{
  CHECK(std::fabs(delta_f_n(Distribution::gamma(3.0), Design(3, 2, 1),
                            StochasticMatrix::uniform(3))) < 1e-10);
  // the integral stops at the 1e-8 quantiles, where the integrand is near 1
  CHECK(std::fabs(delta_f_n(Distribution::uniform01(), Design(2, 1, 1),
                            StochasticMatrix::identity(2)) - 1.0 / 3.0) < 5e-8);
  CHECK(delta_f_n(Distribution::normal(), Design(3, 2, 1), StochasticMatrix::identity(3)) ==
        doctest::Approx(0.18200).epsilon(1e-4));
  // heavy tails: the mass sits in a small part of the quantile range
  CHECK(std::fabs(delta_f_n(Distribution::student_t(2.0), Design(3, 2, 1),
                            StochasticMatrix::uniform(3))) < 1e-10);
}

TEST_CASE("leading-order reduction for single-rank blocks")
{
  // exact/leading ratios from an independent scipy evaluation: 1.254, 1.049, 1.008
  const auto normal = Distribution::normal();
  double prev = 1.0;
  for (int n : { 6, 20, 100 }) {
    const Design d(n, 1, 1);
    const double exact = delta_f_n(normal, d, StochasticMatrix::identity(static_cast<std::size_t>(n)));
    const double err = std::fabs(exact / delta_leading_term(normal, d) - 1.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.02);
  const Design d20(20, 1, 1);
  CHECK(std::fabs(delta_f_n(normal, d20, StochasticMatrix::identity(20)) /
                    delta_leading_term(normal, d20) - 1.0) < 0.15);
}
