#pragma once

#include "pros/sampling.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pros {

enum class KernelFamily
{
  //! 3/4 (1 - u^2) on [-1, 1]
  epanechnikov,
  //! The same shape rescaled to unit variance, supported on [-sqrt 5, sqrt 5]
  epanechnikov_unit,
  gaussian
};

//! Symmetric second-order kernel with its moment constants.
class Kernel
{
public:
  static Kernel epanechnikov() { return Kernel(KernelFamily::epanechnikov); }
  static Kernel epanechnikov_unit() { return Kernel(KernelFamily::epanechnikov_unit); }
  static Kernel gaussian() { return Kernel(KernelFamily::gaussian); }
  static Kernel from_family(KernelFamily family);
  static Kernel parse(std::string_view name);

  KernelFamily family() const noexcept { return family_; }
  std::string_view name() const noexcept;

  double operator()(double u) const noexcept;

  //! i0(K^2) = integral of K^2.
  double i0_k2() const noexcept;
  //! i2(K) = integral of u^2 K(u).
  double i2_k() const noexcept;
  //! Half-width beyond which K is zero (or negligible, for the gaussian).
  double support_radius() const noexcept;

private:
  explicit Kernel(KernelFamily f)
    : family_(f)
  {}
  KernelFamily family_;
};

class BandwidthSpec
{
public:
  static BandwidthSpec fixed(double h);
  static BandwidthSpec silverman_reference() { return BandwidthSpec(); }

  bool is_fixed() const noexcept { return h_.has_value(); }
  double fixed_value() const { return h_.value(); }

  //! The bandwidth to use for `values`.
  double resolve(std::span<const double> values) const;

private:
  BandwidthSpec() = default;
  std::optional<double> h_;
};

enum class DesignTag
{
  srs,
  rss,
  pros
};

std::string_view to_string(DesignTag tag) noexcept;

struct DensityEstimate
{
  std::vector<double> grid;
  std::vector<double> f_hat;
  //! Per-subset estimates f_[d_j] on the same grid (PROS and RSS only).
  std::vector<std::vector<double>> subset_f_hat;

  // optional pieces; empty when absent
  std::vector<double> var_hat;
  std::vector<char> var_clamped;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  double ci_level = 0.0;

  DesignTag design = DesignTag::srs;
  KernelFamily kernel = KernelFamily::epanechnikov;
  double bandwidth = 0.0;
  std::size_t sample_size = 0;
  int subsets = 1;
  double data_min = 0.0;
  double data_max = 0.0;

  // symmetric estimator metadata
  std::optional<double> center;
  std::string center_kind;
  std::vector<std::string> warnings;

  bool has_variance() const noexcept { return !var_hat.empty(); }
  bool has_ci() const noexcept { return !ci_lo.empty(); }
};

//! Linear-interpolation (type 7) sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

//! Sample standard deviation with divisor N - 1.
double sample_sd(std::span<const double> values);

//! Reference-rule bandwidth (4/3)^(1/5) A N^(-1/5), A = min(sd, IQR / 1.34).
double bandwidth_silverman(std::span<const double> values);

std::vector<double> linspace(double lo, double hi, std::size_t count);

//! `count` points over [min - c h, max + c h], c the kernel support radius.
std::vector<double> default_grid(std::span<const double> values, const Kernel& kernel,
                                 double h, std::size_t count = 512);

//! Plain kernel estimate (1/(N h)) sum K((x - X)/h) at each grid point.
std::vector<double> kernel_sum(std::span<const double> values, const Kernel& kernel,
                               double h, std::span<const double> points);

DensityEstimate kde_pooled(std::span<const double> values, const Kernel& kernel, double h,
                           std::span<const double> grid);

//! PROS estimate: the average of the per-subset estimates, retained alongside.
//! An empty grid selects `default_grid`.
DensityEstimate kde_pros(const ProsSample& sample, const Kernel& kernel,
                         const BandwidthSpec& bw, std::span<const double> grid = {});

struct VarianceEstimate
{
  std::vector<double> values;
  std::vector<char> clamped;
};

//! v(x) = f(x) i0(K^2) / (N h) - sum_j f_j(x)^2 / (N n), clamped below at 0.
VarianceEstimate pros_variance_estimate(const ProsSample& sample, const Kernel& kernel,
                                        double h, std::span<const double> grid);

//! Same formula from an estimate that already carries its subset estimates.
VarianceEstimate variance_from_estimate(const DensityEstimate& estimate, const Kernel& kernel);

//! Upper nu/2 quantile of the standard normal.
double normal_critical_value(double nu);

//! f +- z sqrt(v), lower bound floored at 0. Requires a variance estimate.
DensityEstimate pointwise_ci(DensityEstimate estimate, double nu);

//! (1/N) sum h(X) over every observation.
double moment_estimator(const ProsSample& sample, const std::function<double(double)>& fn);

} // namespace pros
