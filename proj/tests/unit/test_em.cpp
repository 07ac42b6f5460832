#include "pros/em.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pros;

namespace {

double objective3(const std::vector<double>& w, double a, double b, double c)
{
  const double m[9] = { 1 - a - b, a, b, a, 1 - a - c, c, b, c, 1 - b - c };
  double q = 0.0;
  for (int k = 0; k < 9; ++k) {
    if (w[k] == 0.0)
      continue;
    if (m[k] <= 0.0)
      return -std::numeric_limits<double>::infinity();
    q += w[k] * std::log(m[k]);
  }
  return q;
}

struct GridBest
{
  double q = -std::numeric_limits<double>::infinity();
  double a = 0, b = 0, c = 0;
};

// Exhaustive search over the symmetric doubly stochastic 3 x 3 matrices,
// parameterized by the upper off-diagonal entries.
GridBest grid_search(const std::vector<double>& w, double step, double a0, double a1, double b0,
                     double b1, double c0, double c1)
{
  GridBest best;
  for (double a = a0; a <= a1 + 1e-12; a += step)
    for (double b = b0; b <= b1 + 1e-12; b += step)
      for (double c = c0; c <= c1 + 1e-12; c += step) {
        if (a < 0 || b < 0 || c < 0 || a + b > 1 || a + c > 1 || b + c > 1)
          continue;
        const double q = objective3(w, a, b, c);
        if (q > best.q)
          best = { q, a, b, c };
      }
  return best;
}

bool doubly_stochastic_symmetric(const StochasticMatrix& a, double tol)
{
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) < -tol || std::fabs(a(i, j) - a(j, i)) > tol)
        return false;
      r += a(i, j);
    }
    if (std::fabs(r - 1.0) > tol)
      return false;
  }
  return true;
}

} // namespace

TEST_CASE("empirical cdf")
{
  const auto s = ProsSample::from_values({ 1.0, 2.0, 3.0, 4.0 });
  CHECK(empirical_cdf_pros(s, 2.5) == 0.5);
  CHECK(empirical_cdf_pros(s, 0.0) == 0.0);
  CHECK(empirical_cdf_pros(s, 4.0) == 1.0);
  const auto at = ecdf_at_observations(s, 0.125);
  CHECK(at[0] == 0.25);
  CHECK(at[3] == 0.875);
}

TEST_CASE("block beta density")
{
  // n = 2, m = 1: Beta(1,2) = 2(1-v), Beta(2,1) = 2v
  const Design d(2, 1, 1);
  CHECK(block_beta_density(d, 0, 0.75) == doctest::Approx(0.5));
  CHECK(block_beta_density(d, 1, 0.75) == doctest::Approx(1.5));
  // block average over all ranks is the uniform density
  const Design d6(3, 2, 1);
  for (double v : { 0.1, 0.5, 0.8 }) {
    double total = 0.0;
    for (int h = 0; h < 3; ++h)
      total += block_beta_density(d6, h, v);
    CHECK(total / 3.0 == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("posterior weight examples")
{
  const Design d(2, 1, 1);
  const ProsSample s(2, 1, { { 0.0, 0, 0 }, { 1.0, 1, 0 } });
  const std::vector<double> half{ 0.5, 0.5 };
  const auto id = posterior_weights(s, StochasticMatrix::identity(2), d, half);
  CHECK(id[0] == 1.0);
  CHECK(id[1] == 0.0);

  const std::vector<double> f75{ 0.75, 0.75 };
  const auto uni = posterior_weights(s, StochasticMatrix::uniform(2), d, f75);
  CHECK(uni[1] == doctest::Approx(0.75));
  // uniform prior: rows do not depend on the nominal subset
  CHECK(uni[0] == doctest::Approx(uni[2]));
  CHECK(uni[1] == doctest::Approx(uni[3]));
}

TEST_CASE("posterior rows sum to one")
{
  auto rng = make_stream(41);
  const Design d(3, 3, 10);
  const auto s = draw_pros(Distribution::normal(), d, StochasticMatrix::alpha0_family(3, 0.7), rng);
  const auto F = ecdf_at_observations(s, 0.5 / static_cast<double>(s.size()));
  const auto pi = posterior_weights(s, StochasticMatrix::alpha0_family(3, 0.6), d, F);
  for (std::size_t k = 0; k < s.size(); ++k) {
    double r = 0.0;
    for (std::size_t h = 0; h < 3; ++h)
      r += pi[k * 3 + h];
    CHECK(std::fabs(r - 1.0) < 1e-12);
  }
  const auto w = accumulate_weights(s, pi, 3);
  double total = 0.0;
  for (double v : w)
    total += v;
  CHECK(total == doctest::Approx(static_cast<double>(s.size())));
}

TEST_CASE("M-step matches the n = 2 closed form")
{
  const std::vector<std::vector<double>> cases{
    { 5.0, 2.0, 1.0, 7.0 }, { 1.0, 3.0, 4.0, 0.5 }, { 0.2, 0.2, 0.2, 0.2 }, { 9.0, 0.0, 1.0, 0.0 }
  };
  for (const auto& w : cases) {
    const double a = (w[0] + w[3]) / (w[0] + w[1] + w[2] + w[3]);
    const auto r = m_step(w, 2);
    CHECK(std::fabs(r.alpha(0, 0) - a) < 1e-10);
    CHECK(std::fabs(r.alpha(1, 1) - a) < 1e-10);
    CHECK(std::fabs(r.alpha(0, 1) - (1.0 - a)) < 1e-10);
    // 1-D grid search confirms the maximizer
    double best_q = -std::numeric_limits<double>::infinity(), best_t = 0.0;
    for (int i = 1; i < 100000; ++i) {
      const double t = i / 100000.0;
      const double q = (w[0] + w[3]) * std::log(t) + (w[1] + w[2]) * std::log(1.0 - t);
      if (q > best_q) {
        best_q = q;
        best_t = t;
      }
    }
    CHECK(std::fabs(best_t - a) < 2e-5);
  }
}

TEST_CASE("M-step boundary optimum")
{
  const std::vector<double> w{ 10.0, 0.0, 0.0, 10.0 };
  const auto r = m_step(w, 2);
  CHECK(r.alpha.max_abs_diff(StochasticMatrix::identity(2)) < 1e-8);
  CHECK_THROWS_AS(m_step(std::vector<double>{ 0.0, 0.0, 0.0, 0.0 }, 2), DomainError);
  CHECK_THROWS_AS(m_step(std::vector<double>{ 1.0, -1.0, 0.0, 1.0 }, 2), DomainError);
}

TEST_CASE("M-step matches a brute-force search for n = 3")
{
  auto rng = make_stream(42);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int rep = 0; rep < 6; ++rep) {
    std::vector<double> w(9);
    for (auto& v : w)
      v = unif(rng);
    if (rep == 5)
      w[2] = w[6] = 0.0; // an entry pushed to the boundary
    const auto r = m_step(w, 3);
    CHECK(doubly_stochastic_symmetric(r.alpha, 1e-10));
    const double q = em_objective(w, r.alpha);

    auto coarse = grid_search(w, 0.01, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0);
    auto fine = grid_search(w, 1e-3, coarse.a - 0.02, coarse.a + 0.02, coarse.b - 0.02,
                            coarse.b + 0.02, coarse.c - 0.02, coarse.c + 0.02);
    CHECK(q >= fine.q - 1e-12);
    CHECK(q - fine.q <= 1e-4);
  }
}

TEST_CASE("EM iterates stay symmetric doubly stochastic and ascend")
{
  auto rng = make_stream(43);
  const Design d(3, 3, 10);
  const auto s = draw_pros(Distribution::normal(), d, StochasticMatrix::alpha0_family(3, 0.8), rng);
  EmConfig cfg;
  cfg.keep_iterates = true;
  const auto t = estimate_alpha(s, d, cfg);
  CHECK(t.converged);
  CHECK(t.iterates.size() == static_cast<std::size_t>(t.iterations) + 1);
  CHECK(t.sae_history.size() == static_cast<std::size_t>(t.iterations));
  CHECK(t.sae_history.back() < cfg.delta);
  for (const auto& a : t.iterates)
    CHECK(doubly_stochastic_symmetric(a, 1e-8));
  REQUIRE(t.q_before.size() == t.q_after.size());
  for (std::size_t i = 0; i < t.q_before.size(); ++i)
    CHECK(t.q_after[i] >= t.q_before[i] - 1e-9);
  CHECK(t.clamp_eps == doctest::Approx(0.5 / 30.0));
}

TEST_CASE("EM edge cases")
{
  auto rng = make_stream(44);
  const Design one(1, 3, 5);
  const auto s = draw_pros(Distribution::normal(), one, StochasticMatrix::identity(1), rng);
  const auto t = estimate_alpha(s, one);
  CHECK(t.iterations == 0);
  CHECK(t.converged);
  CHECK(t.final_alpha(0, 0) == 1.0);

  const Design d(3, 3, 4);
  const auto s3 = draw_pros(Distribution::normal(), d, StochasticMatrix::identity(3), rng);
  EmConfig tight;
  tight.delta = 1e-300;
  tight.max_iters = 2;
  const auto capped = estimate_alpha(s3, d, tight);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 2);

  EmConfig bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(estimate_alpha(s3, d, bad), UsageError);
  CHECK_THROWS_AS(estimate_alpha(s3, Design(2, 3, 6), {}), DesignMismatchError);
}

TEST_CASE("upper-triangle SAE")
{
  const auto a = StochasticMatrix::alpha0_family(3, 0.7);
  const auto b = StochasticMatrix::identity(3);
  // diagonal: 3 * 0.3, upper off-diagonal: 3 * 0.15
  CHECK(upper_triangle_sae(a, b) == doctest::Approx(1.35));
}
