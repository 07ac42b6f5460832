#include "pros/kde.hpp"

#include "pros/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pros {

Kernel Kernel::parse(std::string_view name)
{
  if (name == "epanechnikov")
    return epanechnikov();
  if (name == "epanechnikov-unit")
    return epanechnikov_unit();
  if (name == "gaussian")
    return gaussian();
  throw UsageError("unknown kernel '" + std::string(name) + "'");
}

Kernel Kernel::from_family(KernelFamily family)
{
  return Kernel(family);
}

std::string_view Kernel::name() const noexcept
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return "epanechnikov";
    case KernelFamily::epanechnikov_unit:
      return "epanechnikov-unit";
    case KernelFamily::gaussian:
      break;
  }
  return "gaussian";
}

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;

} // namespace

double Kernel::operator()(double u) const noexcept
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return std::fabs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::epanechnikov_unit:
      return std::fabs(u) < kSqrt5 ? 0.75 / kSqrt5 * (1.0 - u * u / 5.0) : 0.0;
    case KernelFamily::gaussian:
      break;
  }
  return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double Kernel::i0_k2() const noexcept
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return 0.6;
    case KernelFamily::epanechnikov_unit:
      return 0.6 / kSqrt5;
    case KernelFamily::gaussian:
      break;
  }
  return 0.5 * std::numbers::inv_sqrtpi;
}

double Kernel::i2_k() const noexcept
{
  return family_ == KernelFamily::epanechnikov ? 0.2 : 1.0;
}

double Kernel::support_radius() const noexcept
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return 1.0;
    case KernelFamily::epanechnikov_unit:
      return kSqrt5;
    case KernelFamily::gaussian:
      break;
  }
  return 4.0;
}

BandwidthSpec BandwidthSpec::fixed(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw BandwidthError("bandwidth must be positive");
  BandwidthSpec spec;
  spec.h_ = h;
  return spec;
}

double BandwidthSpec::resolve(std::span<const double> values) const
{
  return h_ ? *h_ : bandwidth_silverman(values);
}

std::string_view to_string(DesignTag tag) noexcept
{
  switch (tag) {
    case DesignTag::srs: return "srs";
    case DesignTag::rss: return "rss";
    case DesignTag::pros: return "pros";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double p)
{
  if (sorted.empty())
    throw DegenerateSampleError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> values)
{
  if (values.size() < 2)
    throw DegenerateSampleError("standard deviation needs at least two values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double bandwidth_silverman(std::span<const double> values)
{
  if (values.size() < 2)
    throw DegenerateSampleError("reference bandwidth needs at least two values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double sd = sample_sd(values);
  // fall back to whichever spread measure is positive when one of them is 0
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    spread = std::max(sd, iqr / 1.34);
  if (!(spread > 0.0))
    throw DegenerateSampleError("reference bandwidth undefined: sample has zero spread");
  return std::pow(4.0 / 3.0, 0.2) * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
  if (count < 2 || !(lo < hi))
    throw UsageError("grid needs at least two points and lo < hi");
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::vector<double> default_grid(std::span<const double> values, const Kernel& kernel,
                                 double h, std::size_t count)
{
  if (values.empty())
    throw DegenerateSampleError("grid for an empty sample");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double pad = kernel.support_radius() * h;
  return linspace(*lo - pad, *hi + pad, count);
}

std::vector<double> kernel_sum(std::span<const double> values, const Kernel& kernel,
                               double h, std::span<const double> points)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw BandwidthError("bandwidth must be positive");
  if (values.empty())
    throw DegenerateSampleError("kernel estimate of an empty sample");
  const double scale = 1.0 / (static_cast<double>(values.size()) * h);
  const double inv_h = 1.0 / h;
  std::vector<double> out(points.size());
  for (std::size_t g = 0; g < points.size(); ++g) {
    double acc = 0.0;
    for (double v : values)
      acc += kernel((points[g] - v) * inv_h);
    out[g] = acc * scale;
  }
  return out;
}

namespace {

void check_grid(std::span<const double> grid)
{
  if (grid.empty())
    throw UsageError("evaluation grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw UsageError("evaluation grid must be strictly increasing");
}

} // namespace

DensityEstimate kde_pooled(std::span<const double> values, const Kernel& kernel, double h,
                           std::span<const double> grid)
{
  check_grid(grid);
  DensityEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.f_hat = kernel_sum(values, kernel, h, grid);
  est.design = DesignTag::srs;
  est.kernel = kernel.family();
  est.bandwidth = h;
  est.sample_size = values.size();
  est.subsets = 1;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  est.data_min = *lo;
  est.data_max = *hi;
  return est;
}

DensityEstimate kde_pros(const ProsSample& sample, const Kernel& kernel,
                         const BandwidthSpec& bw, std::span<const double> grid)
{
  const auto pooled = sample.values();
  const double h = bw.resolve(pooled);
  std::vector<double> own_grid;
  if (grid.empty()) {
    own_grid = default_grid(pooled, kernel, h);
    grid = own_grid;
  }
  check_grid(grid);

  DensityEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.design = sample.n() == 1 ? DesignTag::srs : DesignTag::pros;
  est.kernel = kernel.family();
  est.bandwidth = h;
  est.sample_size = sample.size();
  est.subsets = sample.n();
  const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
  est.data_min = *lo;
  est.data_max = *hi;

  est.f_hat.assign(grid.size(), 0.0);
  est.subset_f_hat.reserve(sample.n());
  for (int j = 0; j < sample.n(); ++j) {
    auto part = kernel_sum(sample.subset_values(j), kernel, h, grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
      est.f_hat[g] += part[g];
    est.subset_f_hat.push_back(std::move(part));
  }
  for (double& v : est.f_hat)
    v /= sample.n();
  return est;
}

VarianceEstimate variance_from_estimate(const DensityEstimate& estimate, const Kernel& kernel)
{
  if (estimate.subset_f_hat.empty() && estimate.subsets != 1)
    throw UsageError("variance estimate needs per-subset estimates");
  const double N = static_cast<double>(estimate.sample_size);
  const double n = static_cast<double>(estimate.subsets);
  const double first = kernel.i0_k2() / (N * estimate.bandwidth);

  VarianceEstimate out;
  out.values.resize(estimate.grid.size());
  out.clamped.assign(estimate.grid.size(), 0);
  for (std::size_t g = 0; g < estimate.grid.size(); ++g) {
    double sq = 0.0;
    if (estimate.subset_f_hat.empty()) {
      sq = estimate.f_hat[g] * estimate.f_hat[g];
    } else {
      for (const auto& part : estimate.subset_f_hat)
        sq += part[g] * part[g];
    }
    const double v = first * estimate.f_hat[g] - sq / (N * n);
    if (v < 0.0) {
      out.values[g] = 0.0;
      out.clamped[g] = 1;
    } else {
      out.values[g] = v;
    }
  }
  return out;
}

VarianceEstimate pros_variance_estimate(const ProsSample& sample, const Kernel& kernel,
                                        double h, std::span<const double> grid)
{
  return variance_from_estimate(kde_pros(sample, kernel, BandwidthSpec::fixed(h), grid),
                                kernel);
}

double normal_critical_value(double nu)
{
  if (!(nu > 0.0 && nu < 1.0))
    throw DomainError("confidence parameter nu must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - 0.5 * nu);
}

DensityEstimate pointwise_ci(DensityEstimate estimate, double nu)
{
  const double z = normal_critical_value(nu);
  if (!estimate.has_variance())
    throw UsageError("confidence bounds need a variance estimate");
  const std::size_t count = estimate.grid.size();
  estimate.ci_lo.resize(count);
  estimate.ci_hi.resize(count);
  for (std::size_t g = 0; g < count; ++g) {
    const double half = z * std::sqrt(std::max(0.0, estimate.var_hat[g]));
    estimate.ci_lo[g] = std::max(0.0, estimate.f_hat[g] - half);
    estimate.ci_hi[g] = estimate.f_hat[g] + half;
  }
  estimate.ci_level = 1.0 - nu;
  return estimate;
}

double moment_estimator(const ProsSample& sample, const std::function<double(double)>& fn)
{
  if (sample.size() == 0)
    throw DegenerateSampleError("moment estimate of an empty sample");
  double acc = 0.0;
  for (const auto& o : sample.observations())
    acc += fn(o.value);
  return acc / static_cast<double>(sample.size());
}

} // namespace pros
