#include "pros/distributions.hpp"

#include "pros/errors.hpp"

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/extreme_value.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/logistic.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace pros {

namespace {

namespace bm = boost::math;

// Infinite quantiles at p = 0 / 1 instead of exceptions.
using Policy = bm::policies::policy<bm::policies::overflow_error<bm::policies::ignore_error>>;

template <class Fn>
decltype(auto) with_boost(Family family, double a, double b, Fn&& fn)
{
  switch (family) {
    case Family::normal:
      return fn(bm::normal_distribution<double, Policy>(a, b));
    case Family::exponential:
      return fn(bm::exponential_distribution<double, Policy>(a));
    case Family::gamma:
      return fn(bm::gamma_distribution<double, Policy>(a, b));
    case Family::gumbel:
      return fn(bm::extreme_value_distribution<double, Policy>(a, b));
    case Family::logistic:
      return fn(bm::logistic_distribution<double, Policy>(a, b));
    case Family::laplace:
      return fn(bm::laplace_distribution<double, Policy>(a, b));
    case Family::student_t:
      return fn(bm::students_t_distribution<double, Policy>(a));
    case Family::uniform01:
      break;
  }
  throw UsageError("distribution family has no boost backend");
}

bool nonnegative_support(Family f) noexcept
{
  return f == Family::exponential || f == Family::gamma;
}

void require_positive(double v, const char* what)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw UsageError(std::string(what) + " must be positive and finite");
}

} // namespace

Distribution::Distribution(Family family, double a, double b)
  : family_(family)
  , a_(a)
  , b_(b)
{}

Distribution Distribution::uniform01() { return { Family::uniform01, 0.0, 1.0 }; }

Distribution Distribution::normal(double mean, double sd)
{
  require_positive(sd, "normal sd");
  return { Family::normal, mean, sd };
}

Distribution Distribution::exponential(double rate)
{
  require_positive(rate, "exponential rate");
  return { Family::exponential, rate, 0.0 };
}

Distribution Distribution::gamma(double shape, double scale)
{
  require_positive(shape, "gamma shape");
  require_positive(scale, "gamma scale");
  return { Family::gamma, shape, scale };
}

Distribution Distribution::gumbel(double location, double scale)
{
  require_positive(scale, "gumbel scale");
  return { Family::gumbel, location, scale };
}

Distribution Distribution::logistic(double location, double scale)
{
  require_positive(scale, "logistic scale");
  return { Family::logistic, location, scale };
}

Distribution Distribution::laplace(double location, double scale)
{
  require_positive(scale, "laplace scale");
  return { Family::laplace, location, scale };
}

Distribution Distribution::student_t(double df)
{
  require_positive(df, "student_t df");
  return { Family::student_t, df, 0.0 };
}

Distribution Distribution::parse(std::string_view family, std::span<const double> params)
{
  auto get = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  if (family == "uniform01" || family == "uniform")
    return uniform01();
  if (family == "normal")
    return normal(get(0, 0.0), get(1, 1.0));
  if (family == "exponential")
    return exponential(get(0, 1.0));
  if (family == "gamma")
    return gamma(get(0, 3.0), get(1, 1.0));
  if (family == "gumbel")
    return gumbel(get(0, 0.0), get(1, 1.0));
  if (family == "logistic")
    return logistic(get(0, 0.0), get(1, 1.0));
  if (family == "laplace")
    return laplace(get(0, 0.0), get(1, 1.0));
  if (family == "student_t" || family == "t")
    return student_t(get(0, 2.0));
  throw UsageError("unknown distribution family '" + std::string(family) + "'");
}

double Distribution::pdf(double x) const
{
  if (family_ == Family::uniform01)
    return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  if (nonnegative_support(family_) && x < 0.0)
    return 0.0;
  if (std::isinf(x))
    return 0.0;
  return with_boost(family_, a_, b_, [x](const auto& d) { return bm::pdf(d, x); });
}

double Distribution::cdf(double x) const
{
  if (family_ == Family::uniform01)
    return std::clamp(x, 0.0, 1.0);
  if (nonnegative_support(family_) && x <= 0.0)
    return 0.0;
  if (x == std::numeric_limits<double>::infinity())
    return 1.0;
  if (x == -std::numeric_limits<double>::infinity())
    return 0.0;
  return with_boost(family_, a_, b_, [x](const auto& d) { return bm::cdf(d, x); });
}

double Distribution::quantile(double p) const
{
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("quantile probability outside [0,1]");
  if (family_ == Family::uniform01)
    return p;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p == 0.0)
    return nonnegative_support(family_) ? 0.0 : -inf;
  if (p == 1.0)
    return inf;
  return with_boost(family_, a_, b_, [p](const auto& d) { return bm::quantile(d, p); });
}

double Distribution::draw(Rng& rng) const
{
  switch (family_) {
    case Family::uniform01:
      return uniform_open(rng);
    case Family::normal:
      return std::normal_distribution<double>(a_, b_)(rng);
    case Family::exponential:
      return std::exponential_distribution<double>(a_)(rng);
    case Family::gamma:
      return std::gamma_distribution<double>(a_, b_)(rng);
    case Family::gumbel:
      return std::extreme_value_distribution<double>(a_, b_)(rng);
    case Family::logistic: {
      const double u = uniform_open(rng);
      return a_ + b_ * std::log(u / (1.0 - u));
    }
    case Family::laplace: {
      const double u = uniform_open(rng) - 0.5;
      return a_ - b_ * std::copysign(std::log1p(-2.0 * std::fabs(u)), u);
    }
    case Family::student_t:
      return std::student_t_distribution<double>(a_)(rng);
  }
  return 0.0;
}

bool Distribution::is_symmetric() const noexcept
{
  switch (family_) {
    case Family::uniform01:
    case Family::normal:
    case Family::logistic:
    case Family::laplace:
    case Family::student_t:
      return true;
    default:
      return false;
  }
}

double Distribution::center() const
{
  switch (family_) {
    case Family::uniform01:
      return 0.5;
    case Family::normal:
    case Family::logistic:
    case Family::laplace:
      return a_;
    case Family::student_t:
      return 0.0;
    default:
      return quantile(0.5);
  }
}

std::string_view Distribution::family_name() const noexcept
{
  switch (family_) {
    case Family::uniform01: return "uniform01";
    case Family::normal: return "normal";
    case Family::exponential: return "exponential";
    case Family::gamma: return "gamma";
    case Family::gumbel: return "gumbel";
    case Family::logistic: return "logistic";
    case Family::laplace: return "laplace";
    case Family::student_t: return "student_t";
  }
  return "unknown";
}

std::string Distribution::label() const
{
  std::ostringstream os;
  os.precision(17);
  os << family_name();
  switch (family_) {
    case Family::uniform01:
      break;
    case Family::exponential:
    case Family::student_t:
      os << '(' << a_ << ')';
      break;
    default:
      os << '(' << a_ << ',' << b_ << ')';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Design::Design(int n, int m, int cycles)
  : n_(n)
  , m_(m)
  , cycles_(cycles)
{
  if (n < 1 || m < 1 || cycles < 1)
    throw DesignMismatchError("design requires n, m, L >= 1");
  if (n * m > 1024)
    throw DesignMismatchError("set size s = n*m above 1024 is not supported");
}

Design Design::from_set_size(int s, int n, int cycles)
{
  if (n < 1 || s < 1 || s % n != 0)
    throw DesignMismatchError("set size s must be a positive multiple of n (s = n*m)");
  return { n, s / n, cycles };
}

bool operator==(const Design& lhs, const Design& rhs) noexcept
{
  return lhs.n() == rhs.n() && lhs.m() == rhs.m() && lhs.cycles() == rhs.cycles();
}

// ---------------------------------------------------------------------------

StochasticMatrix::StochasticMatrix(std::size_t size, std::vector<double> entries,
                                   double tolerance)
  : size_(size)
  , entries_(std::move(entries))
{
  if (size_ == 0 || entries_.size() != size_ * size_)
    throw DesignMismatchError("stochastic matrix must be square and nonempty");
  for (double v : entries_) {
    if (!(v >= -tolerance && v <= 1.0 + tolerance))
      throw DesignMismatchError("stochastic matrix entries must lie in [0,1]");
  }
  for (std::size_t i = 0; i < size_; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t k = 0; k < size_; ++k) {
      row += entries_[i * size_ + k];
      col += entries_[k * size_ + i];
    }
    if (std::fabs(row - 1.0) > tolerance || std::fabs(col - 1.0) > tolerance)
      throw DesignMismatchError("matrix is not doubly stochastic (row/column " +
                                std::to_string(i + 1) + ")");
  }
  for (double& v : entries_)
    v = std::clamp(v, 0.0, 1.0);
}

StochasticMatrix StochasticMatrix::identity(std::size_t size)
{
  std::vector<double> e(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i)
    e[i * size + i] = 1.0;
  return { size, std::move(e) };
}

StochasticMatrix StochasticMatrix::uniform(std::size_t size)
{
  return { size, std::vector<double>(size * size, 1.0 / static_cast<double>(size)) };
}

StochasticMatrix StochasticMatrix::alpha0_family(std::size_t size, double alpha0)
{
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0))
    throw DomainError("alpha0 must lie in [0,1]");
  if (size == 1)
    return identity(1);
  const double off = (1.0 - alpha0) / static_cast<double>(size - 1);
  std::vector<double> e(size * size, off);
  for (std::size_t i = 0; i < size; ++i)
    e[i * size + i] = alpha0;
  return { size, std::move(e) };
}

double StochasticMatrix::max_abs_diff(const StochasticMatrix& other) const
{
  if (other.size_ != size_)
    throw DesignMismatchError("matrix size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    d = std::max(d, std::fabs(entries_[i] - other.entries_[i]));
  return d;
}

bool StochasticMatrix::is_symmetric(double tolerance) const
{
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t j = i + 1; j < size_; ++j)
      if (std::fabs((*this)(i, j) - (*this)(j, i)) > tolerance)
        return false;
  return true;
}

bool StochasticMatrix::is_reversal_symmetric(double tolerance) const
{
  const std::size_t last = size_ - 1;
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t j = 0; j < size_; ++j)
      if (std::fabs((*this)(i, j) - (*this)(last - i, last - j)) > tolerance)
        return false;
  return true;
}

// ---------------------------------------------------------------------------

double log_binomial(int n, int k)
{
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

namespace {

// C(n, k) exactly in 64 bits; valid for n <= 62.
std::uint64_t exact_binomial(int n, int k)
{
  k = std::min(k, n - k);
  std::uint64_t c = 1; // c * (n - k + i) stays below 2^64 for n <= 62
  for (int i = 1; i <= k; ++i)
    c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

constexpr int kExactBinomialLimit = 62;

} // namespace

double binomial_term(int n, int k, double p)
{
  if (k < 0 || k > n)
    return 0.0;
  // 0^0 = 1 at the support edges
  if (p <= 0.0)
    return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0)
    return k == n ? 1.0 : 0.0;
  if (n <= kExactBinomialLimit)
    return static_cast<double>(exact_binomial(n, k)) * std::pow(p, k) * std::pow(1.0 - p, n - k);
  return std::exp(log_binomial(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

namespace {

// s! / ((u-1)! (s-u)!) F^(u-1) (1-F)^(s-u), without the f(x) factor.
double order_stat_weight(int u, int s, double F)
{
  const int below = u - 1;
  const int above = s - u;
  if (F <= 0.0)
    return below == 0 ? static_cast<double>(s) : 0.0;
  if (F >= 1.0)
    return above == 0 ? static_cast<double>(s) : 0.0;
  const double log_coef = std::lgamma(s + 1.0) - std::lgamma(u) - std::lgamma(s - u + 1.0);
  return std::exp(log_coef + below * std::log(F) + above * std::log1p(-F));
}

} // namespace

double order_stat_pdf(const Distribution& dist, int u, int s, double x)
{
  if (s < 1 || u < 1 || u > s)
    throw RankDomainError("order statistic rank u=" + std::to_string(u) +
                          " outside 1..s with s=" + std::to_string(s));
  const double f = dist.pdf(x);
  if (f == 0.0)
    return 0.0;
  return order_stat_weight(u, s, dist.cdf(x)) * f;
}

std::vector<double> quantile_breakpoints(const Distribution& dist, double tail)
{
  if (!(tail > 0.0 && tail < 0.01))
    throw DomainError("tail probability must lie in (0, 0.01)");
  std::vector<double> levels{ tail };
  for (double p : { 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.2, 0.35, 0.5 })
    if (p > tail)
      levels.push_back(p);
  for (std::size_t i = levels.size() - 1; i-- > 0;)
    levels.push_back(1.0 - levels[i]);
  std::vector<double> out;
  for (double p : levels) {
    const double x = dist.quantile(p);
    if (out.empty() || x > out.back())
      out.push_back(x);
  }
  return out;
}

void check_alpha_matches(const Design& design, const MisplacementMatrix& alpha)
{
  if (alpha.size() != static_cast<std::size_t>(design.n()))
    throw DesignMismatchError("misplacement matrix is " + std::to_string(alpha.size()) + "x" +
                              std::to_string(alpha.size()) + " but design has n=" +
                              std::to_string(design.n()));
}

std::vector<double> subset_pdfs(const Distribution& dist, const Design& design,
                                const MisplacementMatrix& alpha, double x)
{
  check_alpha_matches(design, alpha);
  const int n = design.n();
  const int s = design.s();
  std::vector<double> result(n, 0.0);
  const double f = dist.pdf(x);
  if (f == 0.0)
    return result;
  const double F = dist.cdf(x);

  // block averages of the order-statistic densities, (1/m) sum_{u in d_h} f_(u:s)
  std::vector<double> block(n, 0.0);
  for (int h = 0; h < n; ++h) {
    double acc = 0.0;
    for (int u = design.first_rank(h); u <= design.last_rank(h); ++u)
      acc += order_stat_weight(u, s, F);
    block[h] = acc * f / design.m();
  }
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int h = 0; h < n; ++h)
      acc += alpha(j, h) * block[h];
    result[j] = acc;
  }
  return result;
}

double subset_pdf(const Distribution& dist, const Design& design,
                  const MisplacementMatrix& alpha, int j, double x)
{
  check_alpha_matches(design, alpha);
  if (j < 0 || j >= design.n())
    throw DesignMismatchError("subset index " + std::to_string(j) + " outside design");
  return subset_pdfs(dist, design, alpha, x)[j];
}

double mixture_identity_residual(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& alpha, double x)
{
  const auto parts = subset_pdfs(dist, design, alpha, x);
  double acc = 0.0;
  for (double v : parts)
    acc += v;
  return acc / design.n() - dist.pdf(x);
}

} // namespace pros
