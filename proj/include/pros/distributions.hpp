#pragma once

// Population distributions, order-statistic densities and the subset
// densities of a partially rank-ordered set (PROS) design.
//
// Index conventions: order-statistic ranks `u` are 1-based (1..s) as in the
// usual X_(u:s) notation; subset indices `j` are 0-based container indices.

#include "pros/random.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pros {

enum class Family
{
  uniform01,
  normal,
  exponential,
  gamma,
  gumbel,
  logistic,
  laplace,
  student_t
};

//! A univariate parametric population. Parameters are stored as (a, b) whose
//! meaning depends on the family:
//!   normal(mean, sd), exponential(rate), gamma(shape, scale),
//!   gumbel(location, scale), logistic(location, scale),
//!   laplace(location, scale), student_t(df).
//! Gumbel is the maximum-type law with cdf exp(-exp(-(x - location) / scale)).
class Distribution
{
public:
  static Distribution uniform01();
  static Distribution normal(double mean = 0.0, double sd = 1.0);
  static Distribution exponential(double rate = 1.0);
  static Distribution gamma(double shape, double scale = 1.0);
  static Distribution gumbel(double location = 0.0, double scale = 1.0);
  static Distribution logistic(double location = 0.0, double scale = 1.0);
  static Distribution laplace(double location = 0.0, double scale = 1.0);
  static Distribution student_t(double df);

  //! Build from a family name and optional parameters; missing parameters
  //! take the standard values (e.g. "normal" is N(0,1), "gamma" is shape 3).
  static Distribution parse(std::string_view family, std::span<const double> params = {});

  Family family() const noexcept { return family_; }
  double param_a() const noexcept { return a_; }
  double param_b() const noexcept { return b_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double draw(Rng& rng) const;

  bool is_symmetric() const noexcept;
  //! Symmetry point for symmetric families; the median otherwise.
  double center() const;

  //! "normal(0,1)" style label, parseable by `parse` after splitting.
  std::string label() const;
  std::string_view family_name() const noexcept;

private:
  Distribution(Family family, double a, double b);

  Family family_;
  double a_;
  double b_;
};

//! Set structure of a PROS design: set size s = n * m split into n
//! consecutive blocks d_j of m ranks each, repeated over L cycles.
class Design
{
public:
  Design(int n, int m, int cycles);

  //! Validates s == n * m.
  static Design from_set_size(int s, int n, int cycles);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int s() const noexcept { return n_ * m_; }
  int cycles() const noexcept { return cycles_; }
  int total() const noexcept { return n_ * cycles_; }

  //! First and last 1-based rank in block `j` (0-based).
  int first_rank(int j) const noexcept { return j * m_ + 1; }
  int last_rank(int j) const noexcept { return (j + 1) * m_; }

private:
  int n_;
  int m_;
  int cycles_;
};

bool operator==(const Design& lhs, const Design& rhs) noexcept;

//! Square doubly stochastic matrix. Used both for PROS misplacement
//! probabilities (alpha[j][h]: nominal subset j, actual subset h) and for RSS
//! ranking-error probabilities (p[r][k]).
class StochasticMatrix
{
public:
  static constexpr double default_tolerance = 1e-9;

  //! Row-major entries; throws DesignMismatchError unless every entry is in
  //! [0,1] and all row and column sums are 1 within `tolerance`.
  StochasticMatrix(std::size_t size, std::vector<double> entries,
                   double tolerance = default_tolerance);

  static StochasticMatrix identity(std::size_t size);
  static StochasticMatrix uniform(std::size_t size);
  //! Diagonal alpha0, off-diagonal (1 - alpha0) / (size - 1).
  static StochasticMatrix alpha0_family(std::size_t size, double alpha0);

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t row, std::size_t col) const noexcept
  {
    return entries_[row * size_ + col];
  }
  std::span<const double> row(std::size_t r) const noexcept
  {
    return { entries_.data() + r * size_, size_ };
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

  double max_abs_diff(const StochasticMatrix& other) const;
  bool is_symmetric(double tolerance = default_tolerance) const;
  //! alpha[j][h] == alpha[n-1-j][n-1-h] for all j, h.
  bool is_reversal_symmetric(double tolerance = default_tolerance) const;

private:
  std::size_t size_;
  std::vector<double> entries_;
};

using MisplacementMatrix = StochasticMatrix;
using RssErrorMatrix = StochasticMatrix;

//! log C(n, k) via lgamma.
double log_binomial(int n, int k);

//! C(n, k) p^k (1-p)^(n-k), with 0^0 taken as 1.
double binomial_term(int n, int k, double p);

//! Density of the u-th order statistic (1 <= u <= s) of s draws.
double order_stat_pdf(const Distribution& dist, int u, int s, double x);

//! Density of a measurement from nominal subset `j` under misplacement `alpha`.
double subset_pdf(const Distribution& dist, const Design& design,
                  const MisplacementMatrix& alpha, int j, double x);

//! All n subset densities at x in one pass.
std::vector<double> subset_pdfs(const Distribution& dist, const Design& design,
                                const MisplacementMatrix& alpha, double x);

//! (1/n) sum_j f_[d_j](x) - f(x); zero up to rounding for every valid input.
double mixture_identity_residual(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& alpha, double x);

//! Quantiles at tail, a ladder of levels toward the center, and 1 - tail;
//! breakpoints that keep adaptive quadrature from stepping over the bulk of
//! the mass on long-tailed ranges. Duplicates are dropped.
std::vector<double> quantile_breakpoints(const Distribution& dist, double tail = 1e-8);

void check_alpha_matches(const Design& design, const MisplacementMatrix& alpha);

} // namespace pros
