#include "pros/symmetric.hpp"

#include "pros/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pros {

LocationEstimator LocationEstimator::parse(std::string_view name)
{
  if (name == "mean" || name == "mu1")
    return of(LocationKind::mean);
  if (name == "median" || name == "mu2")
    return of(LocationKind::median);
  if (name == "hodges_lehmann" || name == "hodges-lehmann" || name == "mu3")
    return of(LocationKind::hodges_lehmann);
  if (name == "cycle_median_mean" || name == "cycle-median-mean" || name == "mu4")
    return of(LocationKind::cycle_median_mean);
  throw UsageError("unknown location estimator '" + std::string(name) + "'");
}

std::string_view to_string(LocationKind kind) noexcept
{
  switch (kind) {
    case LocationKind::mean: return "mean";
    case LocationKind::median: return "median";
    case LocationKind::hodges_lehmann: return "hodges_lehmann";
    case LocationKind::cycle_median_mean: return "cycle_median_mean";
    case LocationKind::known: return "known";
  }
  return "unknown";
}

double median_of(std::vector<double> values)
{
  if (values.empty())
    throw DegenerateSampleError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

namespace {

double pairwise_average_median(const std::vector<double>& x, PairSet pairs)
{
  const std::size_t N = x.size();
  std::vector<double> avg;
  avg.reserve(pairs == PairSet::all_ordered ? N * N : N * (N + 1) / 2);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t start = pairs == PairSet::all_ordered ? 0
                              : pairs == PairSet::with_self ? i
                                                            : i + 1;
    for (std::size_t k = start; k < N; ++k)
      avg.push_back(0.5 * (x[i] + x[k]));
  }
  if (avg.empty())
    throw DegenerateSampleError("no pairs for the pairwise-average median");
  return median_of(std::move(avg));
}

} // namespace

double estimate_location(const ProsSample& sample, const LocationEstimator& estimator)
{
  if (sample.size() == 0)
    throw DegenerateSampleError("location of an empty sample");
  const auto values = sample.values();
  switch (estimator.kind) {
    case LocationKind::mean:
      return std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    case LocationKind::median:
      return median_of(values);
    case LocationKind::hodges_lehmann:
      return pairwise_average_median(values, estimator.pairs);
    case LocationKind::cycle_median_mean: {
      if (!sample.is_cycle_balanced())
        throw StructureError("cycle-median estimator needs one observation per subset per cycle");
      std::vector<std::vector<double>> by_cycle(sample.cycles());
      for (const auto& o : sample.observations())
        by_cycle[o.cycle].push_back(o.value);
      double acc = 0.0;
      for (auto& c : by_cycle)
        acc += median_of(std::move(c));
      return acc / sample.cycles();
    }
    case LocationKind::known:
      if (!std::isfinite(estimator.known_value))
        throw DomainError("known symmetry point must be finite");
      return estimator.known_value;
  }
  return 0.0;
}

std::vector<double> symmetric_kernel_sum(std::span<const double> values, const Kernel& kernel,
                                         double h, double center,
                                         std::span<const double> points)
{
  std::vector<double> reflected(points.size());
  for (std::size_t g = 0; g < points.size(); ++g)
    reflected[g] = 2.0 * center - points[g];
  auto direct = kernel_sum(values, kernel, h, points);
  const auto mirror = kernel_sum(values, kernel, h, reflected);
  for (std::size_t g = 0; g < points.size(); ++g)
    direct[g] = 0.5 * (direct[g] + mirror[g]);
  return direct;
}

DensityEstimate kde_pros_symmetric(const ProsSample& sample, const Kernel& kernel,
                                   const BandwidthSpec& bw, std::span<const double> grid,
                                   const LocationEstimator& location,
                                   const MisplacementMatrix* alpha)
{
  const double mu = estimate_location(sample, location);
  const auto pooled = sample.values();
  const double h = bw.resolve(pooled);

  std::vector<double> own_grid;
  if (grid.empty()) {
    // cover the data and its mirror image
    std::vector<double> both(pooled);
    for (double v : pooled)
      both.push_back(2.0 * mu - v);
    own_grid = default_grid(both, kernel, h);
    grid = own_grid;
  }

  DensityEstimate est = kde_pros(sample, kernel, BandwidthSpec::fixed(h), grid);
  std::vector<double> reflected(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    reflected[g] = 2.0 * mu - grid[g];
  // f_PROS at the mirrored points, as the average of the mirrored subset estimates
  std::vector<double> mirror(grid.size(), 0.0);
  for (int j = 0; j < sample.n(); ++j) {
    const auto part = kernel_sum(sample.subset_values(j), kernel, h, reflected);
    for (std::size_t g = 0; g < grid.size(); ++g)
      mirror[g] += part[g];
  }
  for (std::size_t g = 0; g < grid.size(); ++g)
    est.f_hat[g] = 0.5 * (est.f_hat[g] + mirror[g] / sample.n());

  // subset estimates no longer describe f_hat; the plain variance formula
  // does not apply to the reflected estimate
  est.subset_f_hat.clear();
  est.center = mu;
  est.center_kind = std::string(to_string(location.kind));
  if (alpha) {
    if (alpha->size() != static_cast<std::size_t>(sample.n()))
      throw DesignMismatchError("misplacement matrix does not match the sample's subset count");
    if (!alpha->is_reversal_symmetric())
      est.warnings.emplace_back(
        "misplacement matrix is not reversal-symmetric; the variance-reduction guarantee "
        "of the reflected estimator does not hold");
  }
  return est;
}

} // namespace pros
