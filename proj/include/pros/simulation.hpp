#pragma once

// Monte Carlo harness for MISE efficiency studies, symmetric-estimator
// efficiencies and misplacement-matrix recovery. Replicate r always draws from
// streams derived from (seed, r, design slot), and results are reduced in
// replicate order, so reports do not depend on the worker count.

#include "pros/em.hpp"
#include "pros/kde.hpp"
#include "pros/symmetric.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace pros {

//! Runs fn(r) for r in [0, count) on up to `workers` threads and returns the
//! results indexed by r. The first exception thrown is rethrown after join.
template <class Fn>
auto run_replicates(std::size_t count, unsigned workers, Fn&& fn)
  -> std::vector<decltype(fn(std::size_t{}))>
{
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count)
        return;
      try {
        slots[r].emplace(fn(r));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(body);
  }
  if (failure)
    std::rethrow_exception(failure);
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots)
    out.push_back(std::move(*s));
  return out;
}

unsigned default_workers();

struct MeanSe
{
  double mean = 0.0;
  double se = 0.0;
};

//! Mean and standard error of the mean.
MeanSe mean_se(const std::vector<double>& values);

//! mean(a)/mean(b) with a delta-method standard error from paired replicates.
MeanSe ratio_se(const std::vector<double>& a, const std::vector<double>& b);

//! Integration grid for ISE: at least `min_points` (and at least 8 per
//! bandwidth, capped at 65536) spanning the 1e-4 .. 1-1e-4 quantile range
//! and the sample range, padded by one kernel support.
std::vector<double> ise_grid(const Distribution& dist, double data_min, double data_max,
                             const Kernel& kernel, double h, std::size_t min_points = 1024);

//! Trapezoid integral of (f_hat - f)^2 over the estimate's grid. Throws
//! CoverageError when the grid misses the 0.1%..99.9% quantile range or the
//! data range.
double ise(const DensityEstimate& estimate, const Distribution& dist);

struct MiseProtocol
{
  Distribution dist = Distribution::normal();
  Design design{ 6, 3, 4 };
  StochasticMatrix alpha = StochasticMatrix::identity(6);
  //! Ranking-error matrix of the RSS comparator (set size n).
  StochasticMatrix rss_error = StochasticMatrix::identity(6);
  int replicates = 5000;
  //! The reference bandwidth rule is calibrated for unit-variance kernels.
  KernelFamily kernel = KernelFamily::epanechnikov_unit;
  std::optional<double> fixed_bandwidth;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  //! Misplacement and ranking errors both from the alpha0 family.
  static MiseProtocol alpha0_family(const Distribution& dist, int n, int m, int cycles,
                                    double alpha0, int replicates, std::uint64_t seed);
};

struct SimulationReport
{
  MeanSe mise_srs;
  MeanSe mise_rss;
  MeanSe mise_pros;
  MeanSe rp; // MISE(RSS) / MISE(PROS)
  MeanSe sp; // MISE(SRS) / MISE(PROS)
  int replicates = 0;
  int aborted = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

SimulationReport run_mise_study(const MiseProtocol& protocol);

struct SymmetryStudy
{
  Distribution dist = Distribution::normal();
  int n = 6;
  int m = 3;
  int cycles = 3;
  int replicates = 5000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  KernelFamily kernel = KernelFamily::epanechnikov_unit;
  PairSet hodges_lehmann_pairs = PairSet::all_ordered;
};

struct SymmetryRow
{
  //! MISE(f_PROS) / MISE(f*) for mean, median, Hodges-Lehmann,
  //! cycle-median-mean and the known center, in that order.
  std::array<MeanSe, 5> efficiency;
  std::array<MeanSe, 5> mise_symmetric;
  MeanSe mise_pros;
  int replicates = 0;
  int aborted = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

SymmetryRow run_symmetry_study(const SymmetryStudy& study);

struct AlphaRecovery
{
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> sd;
  int runs = 0;
  int nonconverged = 0;
  double mean_iterations = 0.0;
};

AlphaRecovery run_alpha_recovery(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& true_alpha, int runs,
                                 const EmConfig& config, std::uint64_t seed,
                                 unsigned workers = 1);

//! The three misplacement matrices of the n = 3 recovery study.
StochasticMatrix recovery_alpha(int which);

} // namespace pros
