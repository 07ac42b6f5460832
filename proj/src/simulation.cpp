#include "pros/simulation.hpp"

#include "pros/quadrature.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace pros {

unsigned default_workers()
{
  return std::max(1u, std::thread::hardware_concurrency());
}

MeanSe mean_se(const std::vector<double>& values)
{
  if (values.empty())
    return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2)
    return { mean, 0.0 };
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return { mean, std::sqrt(ss / (n - 1.0) / n) };
}

MeanSe ratio_se(const std::vector<double>& a, const std::vector<double>& b)
{
  if (a.size() != b.size() || a.empty())
    throw UsageError("ratio needs paired, nonempty replicate vectors");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  const double ratio = ma / mb;
  if (a.size() < 2)
    return { ratio, 0.0 };
  double vaa = 0.0, vbb = 0.0, vab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    vaa += (a[i] - ma) * (a[i] - ma);
    vbb += (b[i] - mb) * (b[i] - mb);
    vab += (a[i] - ma) * (b[i] - mb);
  }
  vaa /= n - 1.0;
  vbb /= n - 1.0;
  vab /= n - 1.0;
  const double var = (vaa / (mb * mb) - 2.0 * ma * vab / (mb * mb * mb) +
                      ma * ma * vbb / (mb * mb * mb * mb)) /
                     n;
  return { ratio, std::sqrt(std::max(0.0, var)) };
}

std::vector<double> ise_grid(const Distribution& dist, double data_min, double data_max,
                             const Kernel& kernel, double h, std::size_t min_points)
{
  const double pad = kernel.support_radius() * h;
  const double lo = std::min(dist.quantile(1e-4), data_min) - pad;
  const double hi = std::max(dist.quantile(1.0 - 1e-4), data_max) + pad;
  constexpr std::size_t cap = 65536;
  const auto per_bandwidth = static_cast<std::size_t>(std::ceil(8.0 * (hi - lo) / h)) + 1;
  return linspace(lo, hi, std::min(cap, std::max(min_points, per_bandwidth)));
}

double ise(const DensityEstimate& estimate, const Distribution& dist)
{
  if (estimate.grid.size() < 2 || estimate.grid.size() != estimate.f_hat.size())
    throw CoverageError("estimate has no usable grid");
  double need_lo = dist.quantile(1e-3);
  double need_hi = dist.quantile(1.0 - 1e-3);
  if (estimate.sample_size > 0) {
    need_lo = std::min(need_lo, estimate.data_min);
    need_hi = std::max(need_hi, estimate.data_max);
  }
  if (estimate.grid.front() > need_lo || estimate.grid.back() < need_hi)
    throw CoverageError("ISE grid does not cover the data range and the 0.1%-99.9% quantiles");
  std::vector<double> sq(estimate.grid.size());
  for (std::size_t g = 0; g < sq.size(); ++g) {
    const double d = estimate.f_hat[g] - dist.pdf(estimate.grid[g]);
    sq[g] = d * d;
  }
  return trapezoid(estimate.grid, sq);
}

// ---------------------------------------------------------------------------

MiseProtocol MiseProtocol::alpha0_family(const Distribution& dist, int n, int m, int cycles,
                                         double alpha0, int replicates, std::uint64_t seed)
{
  MiseProtocol p;
  p.dist = dist;
  p.design = Design(n, m, cycles);
  p.alpha = StochasticMatrix::alpha0_family(n, alpha0);
  p.rss_error = p.alpha;
  p.replicates = replicates;
  p.seed = seed;
  return p;
}

namespace {

enum Stream : std::uint64_t
{
  srs_stream = 0,
  rss_stream = 1,
  pros_stream = 2,
  em_stream = 3,
  symmetry_stream = 4
};

double sample_ise(const std::vector<double>& values, const Distribution& dist,
                  const Kernel& kernel, const std::optional<double>& fixed_h)
{
  const double h = fixed_h ? *fixed_h : bandwidth_silverman(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const auto grid = ise_grid(dist, *lo, *hi, kernel, h);
  return ise(kde_pooled(values, kernel, h, grid), dist);
}

struct IseTriple
{
  bool ok = false;
  double srs = 0.0;
  double rss = 0.0;
  double pros = 0.0;
};

void check_abort_budget(int aborted, int replicates)
{
  if (aborted * 100 > replicates)
    throw SimulationError(std::to_string(aborted) + " of " + std::to_string(replicates) +
                          " replicates aborted (more than 1%)");
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

SimulationReport run_mise_study(const MiseProtocol& protocol)
{
  if (protocol.replicates < 1)
    throw UsageError("replicates must be at least 1");
  check_alpha_matches(protocol.design, protocol.alpha);
  if (protocol.rss_error.size() != static_cast<std::size_t>(protocol.design.n()))
    throw DesignMismatchError("RSS ranking-error matrix must be n x n");
  if (protocol.fixed_bandwidth && !(*protocol.fixed_bandwidth > 0.0))
    throw BandwidthError("bandwidth must be positive");

  const auto start = std::chrono::steady_clock::now();
  const Kernel kernel = Kernel::from_family(protocol.kernel);
  const Design& design = protocol.design;
  const auto N = static_cast<std::size_t>(design.total());

  const auto results = run_replicates(
    static_cast<std::size_t>(protocol.replicates), protocol.workers, [&](std::size_t r) {
      IseTriple t;
      try {
        Rng srs_rng = make_stream(protocol.seed, r, srs_stream);
        Rng rss_rng = make_stream(protocol.seed, r, rss_stream);
        Rng pros_rng = make_stream(protocol.seed, r, pros_stream);
        const auto srs = draw_srs(protocol.dist, N, srs_rng);
        const auto rss =
          draw_rss(protocol.dist, design.n(), design.cycles(), protocol.rss_error, rss_rng);
        const auto pros = draw_pros(protocol.dist, design, protocol.alpha, pros_rng);
        t.srs = sample_ise(srs, protocol.dist, kernel, protocol.fixed_bandwidth);
        t.rss = sample_ise(rss.values(), protocol.dist, kernel, protocol.fixed_bandwidth);
        t.pros = sample_ise(pros.values(), protocol.dist, kernel, protocol.fixed_bandwidth);
        t.ok = true;
      } catch (const Error&) {
        t.ok = false;
      }
      return t;
    });

  std::vector<double> srs, rss, pros;
  int aborted = 0;
  for (const auto& t : results) {
    if (!t.ok) {
      ++aborted;
      continue;
    }
    srs.push_back(t.srs);
    rss.push_back(t.rss);
    pros.push_back(t.pros);
  }
  check_abort_budget(aborted, protocol.replicates);

  SimulationReport report;
  report.mise_srs = mean_se(srs);
  report.mise_rss = mean_se(rss);
  report.mise_pros = mean_se(pros);
  report.rp = ratio_se(rss, pros);
  report.sp = ratio_se(srs, pros);
  report.replicates = protocol.replicates;
  report.aborted = aborted;
  report.seed = protocol.seed;
  report.runtime_seconds = seconds_since(start);
  return report;
}

SymmetryRow run_symmetry_study(const SymmetryStudy& study)
{
  if (study.replicates < 1)
    throw UsageError("replicates must be at least 1");
  if (!study.dist.is_symmetric())
    throw UsageError("symmetry study needs a symmetric distribution");
  const auto start = std::chrono::steady_clock::now();
  const Design design(study.n, study.m, study.cycles);
  const auto alpha = StochasticMatrix::identity(study.n);
  const Kernel kernel = Kernel::from_family(study.kernel);
  const double true_center = study.dist.center();

  struct Row
  {
    bool ok = false;
    double pros = 0.0;
    std::array<double, 5> sym{};
  };

  const auto results = run_replicates(
    static_cast<std::size_t>(study.replicates), study.workers, [&](std::size_t r) {
      Row row;
      try {
        Rng rng = make_stream(study.seed, r, symmetry_stream);
        const auto sample = draw_pros(study.dist, design, alpha, rng);
        const auto values = sample.values();
        const double h = bandwidth_silverman(values);

        LocationEstimator hl = LocationEstimator::of(LocationKind::hodges_lehmann);
        hl.pairs = study.hodges_lehmann_pairs;
        const std::array<double, 5> centers{
          estimate_location(sample, LocationEstimator::of(LocationKind::mean)),
          estimate_location(sample, LocationEstimator::of(LocationKind::median)),
          estimate_location(sample, hl),
          estimate_location(sample, LocationEstimator::of(LocationKind::cycle_median_mean)),
          true_center
        };

        // grid covering the data and every reflected copy of it
        auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        double lo = *lo_it, hi = *hi_it;
        for (double c : centers) {
          lo = std::min(lo, 2.0 * c - *hi_it);
          hi = std::max(hi, 2.0 * c - *lo_it);
        }
        const auto grid = ise_grid(study.dist, lo, hi, kernel, h);

        DensityEstimate est = kde_pooled(values, kernel, h, grid);
        est.data_min = lo;
        est.data_max = hi;
        row.pros = ise(est, study.dist);
        for (std::size_t k = 0; k < centers.size(); ++k) {
          est.f_hat = symmetric_kernel_sum(values, kernel, h, centers[k], grid);
          row.sym[k] = ise(est, study.dist);
        }
        row.ok = true;
      } catch (const Error&) {
        row.ok = false;
      }
      return row;
    });

  std::vector<double> pros;
  std::array<std::vector<double>, 5> sym;
  int aborted = 0;
  for (const auto& row : results) {
    if (!row.ok) {
      ++aborted;
      continue;
    }
    pros.push_back(row.pros);
    for (std::size_t k = 0; k < 5; ++k)
      sym[k].push_back(row.sym[k]);
  }
  check_abort_budget(aborted, study.replicates);

  SymmetryRow out;
  out.mise_pros = mean_se(pros);
  for (std::size_t k = 0; k < 5; ++k) {
    out.mise_symmetric[k] = mean_se(sym[k]);
    out.efficiency[k] = ratio_se(pros, sym[k]);
  }
  out.replicates = study.replicates;
  out.aborted = aborted;
  out.seed = study.seed;
  out.runtime_seconds = seconds_since(start);
  return out;
}

AlphaRecovery run_alpha_recovery(const Distribution& dist, const Design& design,
                                 const MisplacementMatrix& true_alpha, int runs,
                                 const EmConfig& config, std::uint64_t seed, unsigned workers)
{
  if (runs < 1)
    throw UsageError("runs must be at least 1");
  check_alpha_matches(design, true_alpha);
  config.validate();
  const std::size_t n = static_cast<std::size_t>(design.n());

  const auto traces =
    run_replicates(static_cast<std::size_t>(runs), workers, [&](std::size_t r) {
      Rng rng = make_stream(seed, r, em_stream);
      const auto sample = draw_pros(dist, design, true_alpha, rng);
      return estimate_alpha(sample, design, config);
    });

  AlphaRecovery out;
  out.n = n;
  out.runs = runs;
  out.mean.assign(n * n, 0.0);
  out.sd.assign(n * n, 0.0);
  std::vector<const EmTrace*> used;
  double iterations = 0.0;
  for (const auto& t : traces) {
    if (!t.converged) {
      ++out.nonconverged;
      continue;
    }
    used.push_back(&t);
    iterations += t.iterations;
  }
  if (used.empty())
    return out;
  out.mean_iterations = iterations / static_cast<double>(used.size());
  for (std::size_t e = 0; e < n * n; ++e) {
    std::vector<double> v;
    v.reserve(used.size());
    for (const auto* t : used)
      v.push_back(t->final_alpha.entries()[e]);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
      ss += (x - mean) * (x - mean);
    out.mean[e] = mean;
    out.sd[e] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

StochasticMatrix recovery_alpha(int which)
{
  switch (which) {
    case 1:
      return StochasticMatrix::identity(3);
    case 2:
      return { 3, { 0.900, 0.075, 0.025, 0.075, 0.850, 0.075, 0.025, 0.075, 0.900 } };
    case 3:
      return { 3, { 0.75, 0.15, 0.10, 0.15, 0.70, 0.15, 0.10, 0.15, 0.75 } };
    default:
      throw UsageError("recovery matrices are numbered 1..3");
  }
}

} // namespace pros
