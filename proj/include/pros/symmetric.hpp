#pragma once

#include "pros/kde.hpp"

#include <optional>
#include <string_view>

namespace pros {

enum class LocationKind
{
  mean,              // grand mean of all N values
  median,            // median of all N values
  hodges_lehmann,    // median of pairwise averages
  cycle_median_mean, // mean over cycles of the within-cycle median
  known              // caller-supplied symmetry point
};

//! Which pairs (X, X') enter the pairwise-average median.
enum class PairSet
{
  all_ordered,    // all N^2 ordered pairs, self-pairs included
  with_self,      // unordered pairs i <= k
  distinct        // unordered pairs i < k
};

struct LocationEstimator
{
  LocationKind kind = LocationKind::hodges_lehmann;
  double known_value = 0.0;
  PairSet pairs = PairSet::all_ordered;

  static LocationEstimator known(double mu) { return { LocationKind::known, mu }; }
  static LocationEstimator of(LocationKind kind) { return { kind, 0.0 }; }
  static LocationEstimator parse(std::string_view name);
};

std::string_view to_string(LocationKind kind) noexcept;

double median_of(std::vector<double> values);

double estimate_location(const ProsSample& sample, const LocationEstimator& estimator);

//! Reflection-averaged estimate 0.5 (f(x) + f(2 mu - x)) about the estimated
//! or supplied center. When `alpha` is given, the condition
//! alpha[j][h] == alpha[n-1-j][n-1-h] is checked and a warning recorded if it
//! fails; the estimate is computed either way.
DensityEstimate kde_pros_symmetric(const ProsSample& sample, const Kernel& kernel,
                                   const BandwidthSpec& bw, std::span<const double> grid,
                                   const LocationEstimator& location,
                                   const MisplacementMatrix* alpha = nullptr);

//! Same estimate from precomputed pieces: the pooled values, bandwidth and center.
std::vector<double> symmetric_kernel_sum(std::span<const double> values, const Kernel& kernel,
                                         double h, double center,
                                         std::span<const double> points);

} // namespace pros
