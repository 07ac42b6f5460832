#include "pros/cli.hpp"

#include "pros/analysis.hpp"
#include "pros/csv.hpp"
#include "pros/em.hpp"
#include "pros/errors.hpp"
#include "pros/io.hpp"
#include "pros/kde.hpp"
#include "pros/sampling.hpp"
#include "pros/simulation.hpp"
#include "pros/symmetric.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace pros {

namespace {

namespace fs = std::filesystem;

constexpr const char* kToolName = "pros";
constexpr int kManifestVersion = 1;

// ---------------------------------------------------------------------------
// output handling

class Output
{
public:
  Output(std::string dir, std::ostream& fallback)
    : dir_(std::move(dir))
    , fallback_(fallback)
  {}

  bool to_directory() const { return !dir_.empty(); }

  //! Writes `content` to <dir>/<name>, or to the fallback stream when no
  //! directory was requested and `primary` is set.
  void write(const std::string& name, const std::string& content, bool primary)
  {
    if (!to_directory()) {
      if (primary)
        fallback_ << content;
      return;
    }
    fs::create_directories(dir_);
    const fs::path path = fs::path(dir_) / name;
    std::ofstream file(path, std::ios::binary);
    if (!file)
      throw UsageError("cannot write " + path.string());
    file << content;
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }

private:
  std::string dir_;
  std::ostream& fallback_;
  std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------
// shared option groups

struct DesignArgs
{
  int n = 3;
  int m = 3;
  int cycles = 4;
  std::optional<int> s;

  void add(CLI::App& app)
  {
    app.add_option("--n", n, "number of subsets per set")->check(CLI::PositiveNumber);
    app.add_option("--m", m, "subset size")->check(CLI::PositiveNumber);
    app.add_option("--L,--cycles", cycles, "number of cycles")->check(CLI::PositiveNumber);
    app.add_option("--s", s, "set size; must equal n*m when given");
  }

  Design resolve() const
  {
    if (s)
      return Design::from_set_size(*s, n, cycles);
    return { n, m, cycles };
  }
};

struct DistArgs
{
  std::string name = "normal";
  std::vector<double> params;

  void add(CLI::App& app)
  {
    app.add_option("--dist", name,
                   "population: normal, exponential, gamma, gumbel, logistic, laplace, t, "
                   "uniform");
    app.add_option("--params", params, "distribution parameters, comma separated")
      ->delimiter(',');
  }

  Distribution resolve() const { return Distribution::parse(name, params); }
};

struct PopulationArgs
{
  std::string path;
  std::string y = "y";
  std::string x = "x";
  double scale = 1.0;

  void add(CLI::App& app)
  {
    app.add_option("--population", path, "population CSV with a header row");
    app.add_option("--y", y, "column holding the variable of interest");
    app.add_option("--x", x, "column holding the ranking variable");
    app.add_option("--scale", scale, "multiplier applied to y at ingestion");
  }

  bool given() const { return !path.empty(); }
  FinitePopulation load() const { return read_population_csv(path, y, x, scale); }
};

struct Common
{
  std::uint64_t seed = 1;
  std::string out_dir;
  unsigned workers = 1;

  void add(CLI::App& app, bool with_workers)
  {
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out-dir", out_dir, "write outputs and manifest.json to this directory");
    if (with_workers)
      app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
  }

  unsigned resolved_workers() const { return workers == 0 ? default_workers() : workers; }
};

Json design_json(const Design& d)
{
  return Json{ { "n", d.n() }, { "m", d.m() }, { "s", d.s() }, { "cycles", d.cycles() },
               { "N", d.total() } };
}

BandwidthSpec bandwidth_spec(const std::optional<double>& h)
{
  return h ? BandwidthSpec::fixed(*h) : BandwidthSpec::silverman_reference();
}

std::string csv_of(const std::function<void(std::ostream&)>& writer)
{
  std::ostringstream os;
  writer(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// commands. Each returns the "resolved" block recorded in the manifest.

// -- sample -----------------------------------------------------------------

struct SampleCmd
{
  DesignArgs design;
  DistArgs dist;
  PopulationArgs population;
  Common common;
  std::string design_kind = "pros";
  std::string alpha = "identity";

  void add(CLI::App& app)
  {
    design.add(app);
    dist.add(app);
    population.add(app);
    common.add(app, false);
    app.add_option("--design", design_kind, "pros, rss or srs")
      ->check(CLI::IsMember({ "pros", "rss", "srs" }));
    app.add_option("--alpha", alpha,
                   "misplacement matrix: identity, uniform, alpha0:<v>, recovery:<k>, "
                   "rows 'a,b;c,d' or @file.json");
  }

  Json run(Output& out) const
  {
    const Design d = design.resolve();
    Rng rng = make_stream(common.seed);
    Json resolved;
    resolved["design_kind"] = design_kind;
    std::optional<ProsSample> sample;
    if (population.given()) {
      const auto pop = population.load();
      resolved["source"] = "population";
      resolved["population_size"] = pop.size();
      if (design_kind == "srs")
        sample = ProsSample::from_values(draw_srs_finite(pop, d.total(), rng));
      else if (design_kind == "rss")
        sample = draw_pros_finite(pop, Design(d.n(), 1, d.cycles()), rng);
      else
        sample = draw_pros_finite(pop, d, rng);
      resolved["alpha_source"] = "ranking by the auxiliary variable";
    } else {
      const auto dist_v = dist.resolve();
      resolved["source"] = dist_v.label();
      const auto a = parse_matrix_spec(alpha, d.n());
      if (design_kind == "srs") {
        sample = ProsSample::from_values(draw_srs(dist_v, d.total(), rng));
      } else if (design_kind == "rss") {
        sample = draw_rss(dist_v, d.n(), d.cycles(), a, rng);
        resolved["alpha"] = to_json(a);
      } else {
        sample = draw_pros(dist_v, d, a, rng);
        resolved["alpha"] = to_json(a);
      }
      resolved["alpha_source"] = alpha;
    }
    resolved["design"] = design_json(d);
    resolved["seed"] = common.seed;
    out.write("sample.csv", csv_of([&](std::ostream& os) { write_sample_csv(os, *sample); }),
              true);
    return resolved;
  }
};

// -- estimate ---------------------------------------------------------------

struct EstimateCmd
{
  DesignArgs design;
  DistArgs dist;
  PopulationArgs population;
  Common common;
  std::string input;
  std::string kernel = "epanechnikov";
  std::optional<double> bandwidth;
  std::size_t grid_points = 512;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  double level = 0.95;
  int reps = 20;
  std::vector<std::string> designs{ "srs", "rss", "pros" };
  std::string alpha = "identity";
  std::string symmetric;
  std::optional<double> center;

  void add(CLI::App& app)
  {
    design.add(app);
    dist.add(app);
    population.add(app);
    common.add(app, false);
    app.add_option("--input", input, "estimate from an existing sample CSV");
    app.add_option("--kernel", kernel, "epanechnikov, epanechnikov-unit or gaussian");
    app.add_option("--bandwidth", bandwidth, "fixed bandwidth (default: reference rule)");
    app.add_option("--grid-points", grid_points, "evaluation grid size")
      ->check(CLI::Range(std::size_t{ 2 }, std::size_t{ 1000000 }));
    app.add_option("--grid-min", grid_min, "lower grid end");
    app.add_option("--grid-max", grid_max, "upper grid end");
    app.add_option("--level", level, "confidence level of the pointwise bands")
      ->check(CLI::Range(0.0, 1.0));
    app.add_option("--reps,-M", reps, "repetitions averaged per design")
      ->check(CLI::PositiveNumber);
    app.add_option("--designs", designs, "designs to run")->delimiter(',');
    app.add_option("--alpha", alpha, "misplacement matrix for parametric sampling");
    app.add_option("--symmetric", symmetric,
                   "with --input: symmetric estimate centered by mean, median, "
                   "hodges_lehmann, cycle_median_mean or known");
    app.add_option("--center", center, "known symmetry point for --symmetric known");
  }

  std::vector<double> grid_for(std::span<const double> values, const Kernel& k, double h) const
  {
    if (grid_min && grid_max) {
      if (!(*grid_min < *grid_max))
        throw UsageError("--grid-min must be below --grid-max");
      return linspace(*grid_min, *grid_max, grid_points);
    }
    auto g = default_grid(values, k, h, grid_points);
    return linspace(grid_min.value_or(g.front()), grid_max.value_or(g.back()), grid_points);
  }

  Json run_single(Output& out) const
  {
    const Kernel k = Kernel::parse(kernel);
    const ProsSample sample = read_sample_csv(input, 0);
    const auto values = sample.values();
    const BandwidthSpec bw = bandwidth_spec(bandwidth);
    const double h = bw.resolve(values);
    const auto grid = grid_for(values, k, h);

    DensityEstimate est;
    Json resolved;
    if (!symmetric.empty()) {
      LocationEstimator loc;
      if (symmetric == "known") {
        if (!center)
          throw UsageError("--symmetric known needs --center");
        loc = LocationEstimator::known(*center);
      } else {
        loc = LocationEstimator::parse(symmetric);
      }
      est = kde_pros_symmetric(sample, k, BandwidthSpec::fixed(h), grid, loc);
      resolved["center"] = *est.center;
      resolved["center_kind"] = est.center_kind;
    } else {
      est = kde_pros(sample, k, BandwidthSpec::fixed(h), grid);
      const auto v = variance_from_estimate(est, k);
      est.var_hat = v.values;
      est.var_clamped = v.clamped;
      est = pointwise_ci(std::move(est), 1.0 - level);
    }
    resolved["input"] = input;
    resolved["subsets"] = sample.n();
    resolved["cycles"] = sample.cycles();
    resolved["sample_size"] = sample.size();
    resolved["kernel"] = k.name();
    resolved["bandwidth"] = h;
    resolved["bandwidth_rule"] = bandwidth ? "fixed" : "reference";
    out.write("estimate.csv", csv_of([&](std::ostream& os) { write_density_csv(os, est); }),
              true);
    out.write("estimate.json", dump(to_json(est)), false);
    return resolved;
  }

  Json run(Output& out) const
  {
    if (!input.empty())
      return run_single(out);

    const Kernel k = Kernel::parse(kernel);
    const Design d = design.resolve();
    const BandwidthSpec bw = bandwidth_spec(bandwidth);
    std::optional<FinitePopulation> pop;
    std::optional<Distribution> dist_v;
    std::optional<StochasticMatrix> a;
    Json resolved;
    if (population.given()) {
      pop = population.load();
      resolved["source"] = "population";
      resolved["population_size"] = pop->size();
      resolved["alpha_source"] = "ranking by the auxiliary variable";
    } else {
      dist_v = dist.resolve();
      a = parse_matrix_spec(alpha, d.n());
      resolved["source"] = dist_v->label();
      resolved["alpha_source"] = alpha;
      resolved["alpha"] = to_json(*a);
    }

    // common grid: explicit ends, else the population range or central quantiles
    std::vector<double> grid;
    if (grid_min && grid_max) {
      grid = grid_for({}, k, 1.0);
    } else if (pop) {
      const auto [lo, hi] = std::minmax_element(pop->y.begin(), pop->y.end());
      const double pad = 0.1 * (*hi - *lo);
      grid = linspace(grid_min.value_or(*lo - pad), grid_max.value_or(*hi + pad), grid_points);
    } else {
      grid = linspace(grid_min.value_or(dist_v->quantile(1e-3)),
                      grid_max.value_or(dist_v->quantile(1.0 - 1e-3)), grid_points);
    }

    struct Slot
    {
      std::string name;
      std::uint64_t stream;
      std::vector<double> f;
      std::vector<double> v;
      double h_sum = 0.0;
    };
    std::vector<Slot> slots;
    for (const auto& name : designs) {
      std::uint64_t stream = 0;
      if (name == "srs")
        stream = 0;
      else if (name == "rss")
        stream = 1;
      else if (name == "pros")
        stream = 2;
      else
        throw UsageError("unknown design '" + name + "' (expected srs, rss or pros)");
      slots.push_back({ name, stream, std::vector<double>(grid.size(), 0.0),
                        std::vector<double>(grid.size(), 0.0), 0.0 });
    }

    for (int r = 0; r < reps; ++r) {
      for (auto& slot : slots) {
        Rng rng = make_stream(common.seed, static_cast<std::uint64_t>(r), slot.stream);
        std::optional<ProsSample> sample;
        if (slot.name == "srs") {
          sample = ProsSample::from_values(pop ? draw_srs_finite(*pop, d.total(), rng)
                                               : draw_srs(*dist_v, d.total(), rng));
        } else if (slot.name == "rss") {
          sample = pop ? draw_pros_finite(*pop, Design(d.n(), 1, d.cycles()), rng)
                       : draw_rss(*dist_v, d.n(), d.cycles(), *a, rng);
        } else {
          sample = pop ? draw_pros_finite(*pop, d, rng) : draw_pros(*dist_v, d, *a, rng);
        }
        const auto est = kde_pros(*sample, k, bw, grid);
        const auto var = variance_from_estimate(est, k);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          slot.f[g] += est.f_hat[g];
          slot.v[g] += var.values[g];
        }
        slot.h_sum += est.bandwidth;
      }
    }

    const double z = normal_critical_value(1.0 - level);
    std::ostringstream os;
    os << "x";
    for (const auto& slot : slots)
      os << ',' << slot.name << "_f_hat," << slot.name << "_var_hat," << slot.name << "_ci_lo,"
         << slot.name << "_ci_hi";
    os << '\n';
    for (auto& slot : slots)
      for (std::size_t g = 0; g < grid.size(); ++g) {
        slot.f[g] /= reps;
        slot.v[g] /= reps;
      }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      os << csv::format(grid[g]);
      for (const auto& slot : slots) {
        const double half = z * std::sqrt(slot.v[g]);
        os << ',' << csv::format(slot.f[g]) << ',' << csv::format(slot.v[g]) << ','
           << csv::format(std::max(0.0, slot.f[g] - half)) << ','
           << csv::format(slot.f[g] + half);
      }
      os << '\n';
    }
    out.write("estimate.csv", os.str(), true);

    Json summary;
    for (const auto& slot : slots) {
      summary[slot.name] = Json{ { "mean_bandwidth", slot.h_sum / reps } };
    }
    resolved["design"] = design_json(d);
    resolved["reps"] = reps;
    resolved["kernel"] = k.name();
    resolved["bandwidth_rule"] = bandwidth ? "fixed" : "reference";
    if (bandwidth)
      resolved["bandwidth"] = *bandwidth;
    resolved["level"] = level;
    resolved["grid"] = Json{ { "min", grid.front() }, { "max", grid.back() },
                             { "points", grid.size() } };
    resolved["seed"] = common.seed;
    resolved["designs"] = summary;
    out.write("estimate.json", dump(resolved), false);
    return resolved;
  }
};

// -- em ---------------------------------------------------------------------

struct EmCmd
{
  DesignArgs design;
  Common common;
  std::string input;
  double delta = 1e-4;
  int max_iters = 500;
  std::optional<double> clamp_eps;
  std::string init = "uniform";
  bool trace = false;

  void add(CLI::App& app)
  {
    design.add(app);
    common.add(app, false);
    app.add_option("--input", input, "sample CSV (value,subset,cycle)")->required();
    app.add_option("--delta", delta, "SAE stopping threshold");
    app.add_option("--max-iters", max_iters, "iteration cap");
    app.add_option("--clamp-eps", clamp_eps, "ECDF clamp (default 1/(2N))");
    app.add_option("--init", init, "starting matrix spec (default uniform)");
    app.add_flag("--trace", trace, "keep every iterate in the output");
  }

  Json run(Output& out) const
  {
    const Design given = design.resolve();
    const ProsSample sample = read_sample_csv(input, given.n());
    // the cycle count comes from the data
    const Design d(given.n(), given.m(), sample.cycles());
    EmConfig config;
    config.delta = delta;
    config.max_iters = max_iters;
    config.cdf_clamp_eps = clamp_eps;
    config.init = parse_matrix_spec(init, d.n());
    config.keep_iterates = trace;
    const auto result = estimate_alpha(sample, d, config);
    out.write("em.json", dump(to_json(result)), true);
    return Json{ { "input", input },   { "design", design_json(d) },
                 { "delta", delta },   { "max_iters", max_iters },
                 { "cdf_clamp_eps", result.clamp_eps },
                 { "init", init } };
  }
};

// -- rrv / collision / delta --------------------------------------------------

struct RrvCmd
{
  std::vector<int> n{ 2 };
  int m = 3;
  double alpha0 = 1.0;
  std::string baseline = "srs";
  double step = 0.01;
  Common common;

  void add(CLI::App& app)
  {
    app.add_option("--n", n, "subset counts, comma separated")->delimiter(',');
    app.add_option("--m", m, "subset size")->check(CLI::PositiveNumber);
    app.add_option("--alpha0", alpha0, "diagonal misplacement probability");
    app.add_option("--baseline", baseline, "srs or rss")
      ->check(CLI::IsMember({ "srs", "rss" }));
    app.add_option("--step", step, "p-grid spacing");
    common.add(app, false);
  }

  Json run(Output& out) const
  {
    const auto grid = rrv_default_grid(step);
    std::ostringstream os;
    os << "p,n,rrv\n";
    for (int nv : n) {
      const auto curve = rrv_curve(nv, m, alpha0,
                                   baseline == "srs" ? RrvBaseline::srs : RrvBaseline::rss, grid);
      for (const auto& pt : curve)
        os << csv::format(pt.p) << ',' << nv << ',' << csv::format(pt.rrv) << '\n';
    }
    out.write("rrv.csv", os.str(), true);
    return Json{ { "n", n }, { "m", m }, { "alpha0", alpha0 }, { "baseline", baseline },
                 { "step", step } };
  }
};

struct CollisionCmd
{
  std::vector<int> s{ 2, 4, 8, 16, 32 };
  double step = 0.01;
  Common common;

  void add(CLI::App& app)
  {
    app.add_option("--s", s, "set sizes, comma separated")->delimiter(',');
    app.add_option("--step", step, "p-grid spacing");
    common.add(app, false);
  }

  Json run(Output& out) const
  {
    std::ostringstream os;
    os << "p,s,exact,approximation\n";
    for (int sv : s)
      for (double p : rrv_default_grid(step))
        os << csv::format(p) << ',' << sv << ',' << csv::format(collision_probability(sv, p))
           << ',' << csv::format(collision_edgeworth(sv, p)) << '\n';
    out.write("collision.csv", os.str(), true);
    return Json{ { "s", s }, { "step", step } };
  }
};

struct DeltaCmd
{
  DesignArgs design;
  DistArgs dist;
  Common common;
  std::string alpha = "identity";

  void add(CLI::App& app)
  {
    design.add(app);
    dist.add(app);
    common.add(app, false);
    app.add_option("--alpha", alpha, "misplacement matrix spec");
  }

  Json run(Output& out) const
  {
    const Design d = design.resolve();
    const auto dv = dist.resolve();
    const auto a = parse_matrix_spec(alpha, d.n());
    Json j;
    j["distribution"] = dv.label();
    j["design"] = design_json(d);
    j["alpha"] = to_json(a);
    j["delta_f_n"] = delta_f_n(dv, d, a);
    j["leading_term"] = delta_leading_term(dv, d);
    out.write("delta.json", dump(j), true);
    return Json{ { "distribution", dv.label() }, { "design", design_json(d) },
                 { "alpha_source", alpha } };
  }
};

// -- simulate ----------------------------------------------------------------

struct SimulateCmd
{
  std::string study = "mise";
  DesignArgs design;
  DistArgs dist;
  Common common;
  double alpha0 = 1.0;
  std::string alpha;
  std::optional<int> reps;
  std::string kernel = "epanechnikov-unit";
  std::optional<double> bandwidth;
  std::string hl_pairs = "all";
  double delta = 1e-4;
  bool full_tables = false;

  void add(CLI::App& app)
  {
    app.add_option("--study", study, "mise, symmetry or alpha-recovery")
      ->check(CLI::IsMember({ "mise", "symmetry", "alpha-recovery" }));
    design.add(app);
    dist.add(app);
    common.add(app, true);
    app.add_option("--alpha0", alpha0, "diagonal misplacement probability (mise study)");
    app.add_option("--alpha", alpha,
                   "misplacement matrix spec (alpha-recovery: default recovery:1)");
    app.add_option("--reps", reps,
                   "replicates (default 5000; 100 runs for alpha-recovery)");
    app.add_option("--kernel", kernel, "kernel for the MISE studies");
    app.add_option("--bandwidth", bandwidth, "fixed bandwidth instead of the reference rule");
    app.add_option("--hl-pairs", hl_pairs, "Hodges-Lehmann pairs: all, with-self or distinct")
      ->check(CLI::IsMember({ "all", "with-self", "distinct" }));
    app.add_option("--delta", delta, "EM stopping threshold (alpha-recovery)");
    app.add_flag("--full-tables", full_tables,
                 "run the full efficiency, symmetry and recovery grids");
  }

  PairSet pairs() const
  {
    if (hl_pairs == "with-self")
      return PairSet::with_self;
    if (hl_pairs == "distinct")
      return PairSet::distinct;
    return PairSet::all_ordered;
  }

  SimulationReport mise(const Distribution& dv, int n, int m, int cycles, double a0,
                        int count) const
  {
    auto p = MiseProtocol::alpha0_family(dv, n, m, cycles, a0, count, common.seed);
    p.kernel = Kernel::parse(kernel).family();
    p.fixed_bandwidth = bandwidth;
    p.workers = common.resolved_workers();
    return run_mise_study(p);
  }

  SymmetryRow symmetry(const Distribution& dv, int n, int m, int cycles, int count) const
  {
    SymmetryStudy st;
    st.dist = dv;
    st.n = n;
    st.m = m;
    st.cycles = cycles;
    st.replicates = count;
    st.seed = common.seed;
    st.workers = common.resolved_workers();
    st.kernel = Kernel::parse(kernel).family();
    st.hodges_lehmann_pairs = pairs();
    return run_symmetry_study(st);
  }

  AlphaRecovery recovery(const Distribution& dv, const Design& d, const StochasticMatrix& a,
                         int count) const
  {
    EmConfig config;
    config.delta = delta;
    return run_alpha_recovery(dv, d, a, count, config, common.seed, common.resolved_workers());
  }

  static std::string mise_csv_header()
  {
    return "distribution,n,m,L,alpha0,rp,rp_se,sp,sp_se,mise_srs,mise_rss,mise_pros,"
           "replicates,aborted\n";
  }

  static std::string mise_csv_row(const std::string& label, int n, int m, int cycles, double a0,
                                  const SimulationReport& r)
  {
    std::ostringstream os;
    os << label << ',' << n << ',' << m << ',' << cycles << ',' << csv::format(a0) << ','
       << csv::format(r.rp.mean) << ',' << csv::format(r.rp.se) << ','
       << csv::format(r.sp.mean) << ',' << csv::format(r.sp.se) << ','
       << csv::format(r.mise_srs.mean) << ',' << csv::format(r.mise_rss.mean) << ','
       << csv::format(r.mise_pros.mean) << ',' << r.replicates << ',' << r.aborted << '\n';
    return os.str();
  }

  static std::string symmetry_csv_header()
  {
    return "distribution,n,m,L,mu1,mu2,mu3,mu4,known,mu1_se,mu2_se,mu3_se,mu4_se,known_se,"
           "replicates,aborted\n";
  }

  static std::string symmetry_csv_row(const std::string& label, int n, int m, int cycles,
                                      const SymmetryRow& r)
  {
    std::ostringstream os;
    os << label << ',' << n << ',' << m << ',' << cycles;
    for (const auto& e : r.efficiency)
      os << ',' << csv::format(e.mean);
    for (const auto& e : r.efficiency)
      os << ',' << csv::format(e.se);
    os << ',' << r.replicates << ',' << r.aborted << '\n';
    return os.str();
  }

  static std::string recovery_csv_header()
  {
    return "distribution,alpha,L,a11,a12,a13,a22,a23,sd11,sd12,sd13,sd22,sd23,runs,"
           "nonconverged\n";
  }

  static std::string recovery_csv_row(const std::string& label, const std::string& which,
                                      int cycles, const AlphaRecovery& r)
  {
    std::ostringstream os;
    os << label << ',' << which << ',' << cycles;
    const auto n = r.n;
    const std::pair<std::size_t, std::size_t> cells[] = { { 0, 0 }, { 0, 1 }, { 0, 2 },
                                                          { 1, 1 }, { 1, 2 } };
    for (const auto& v : { std::cref(r.mean), std::cref(r.sd) })
      for (auto [i, j] : cells)
        os << ',' << (n == 3 ? csv::format(v.get()[i * n + j]) : std::string());
    os << ',' << r.runs << ',' << r.nonconverged << '\n';
    return os.str();
  }

  Json run_tables(Output& out) const
  {
    const int mise_reps = reps.value_or(5000);
    const int em_runs = reps.value_or(100);
    const std::pair<int, int> mise_grid[] = { { 6, 4 }, { 6, 8 }, { 8, 3 }, { 8, 6 } };
    const double alpha0s[] = { 0.0, 0.3, 0.5, 0.7, 1.0 };
    std::string t2 = mise_csv_header();
    for (const char* name : { "normal", "gamma", "gumbel" }) {
      const auto dv = Distribution::parse(name);
      for (auto [n, cycles] : mise_grid)
        for (double a0 : alpha0s)
          t2 += mise_csv_row(dv.label(), n, 3, cycles, a0, mise(dv, n, 3, cycles, a0, mise_reps));
    }
    out.write("efficiency_table.csv", t2, true);

    const std::pair<int, int> sym_grid[] = { { 6, 3 }, { 6, 4 }, { 8, 3 }, { 8, 4 } };
    std::string t4 = symmetry_csv_header();
    for (const char* name : { "normal", "logistic", "t", "laplace" }) {
      const auto dv = Distribution::parse(name);
      for (auto [n, cycles] : sym_grid)
        t4 += symmetry_csv_row(dv.label(), n, 3, cycles, symmetry(dv, n, 3, cycles, mise_reps));
    }
    out.write("symmetry_table.csv", t4, true);

    std::string t1 = recovery_csv_header();
    for (const char* name : { "normal", "exponential" }) {
      const auto dv = Distribution::parse(name);
      for (int which = 1; which <= 3; ++which)
        for (int cycles : { 4, 10 })
          t1 += recovery_csv_row(dv.label(), "alpha" + std::to_string(which), cycles,
                                 recovery(dv, Design(3, 3, cycles), recovery_alpha(which),
                                          em_runs));
    }
    out.write("recovery_table.csv", t1, true);
    return Json{ { "full_tables", true },     { "replicates", mise_reps },
                 { "recovery_runs", em_runs }, { "kernel", kernel },
                 { "seed", common.seed },      { "hl_pairs", hl_pairs } };
  }

  Json run(Output& out) const
  {
    if (full_tables)
      return run_tables(out);
    const Design d = design.resolve();
    const auto dv = dist.resolve();
    Json resolved{ { "study", study },
                   { "distribution", dv.label() },
                   { "design", design_json(d) },
                   { "seed", common.seed },
                   { "kernel", kernel } };
    if (study == "mise") {
      const int count = reps.value_or(5000);
      const auto report = mise(dv, d.n(), d.m(), d.cycles(), alpha0, count);
      Json j = to_json(report);
      j["distribution"] = dv.label();
      j["design"] = design_json(d);
      j["alpha0"] = alpha0;
      out.write("report.json", dump(j), true);
      out.write("report.csv",
                mise_csv_header() + mise_csv_row(dv.label(), d.n(), d.m(), d.cycles(), alpha0,
                                                 report),
                false);
      resolved["alpha0"] = alpha0;
      resolved["replicates"] = count;
      resolved["bandwidth_rule"] = bandwidth ? "fixed" : "reference";
    } else if (study == "symmetry") {
      const int count = reps.value_or(5000);
      const auto row = symmetry(dv, d.n(), d.m(), d.cycles(), count);
      Json j = to_json(row);
      j["distribution"] = dv.label();
      j["design"] = design_json(d);
      out.write("report.json", dump(j), true);
      out.write("report.csv",
                symmetry_csv_header() + symmetry_csv_row(dv.label(), d.n(), d.m(), d.cycles(), row),
                false);
      resolved["replicates"] = count;
      resolved["hl_pairs"] = hl_pairs;
    } else {
      const int count = reps.value_or(100);
      const std::string spec = alpha.empty() ? "recovery:1" : alpha;
      const auto a = parse_matrix_spec(spec, d.n());
      const auto rec = recovery(dv, d, a, count);
      Json j = to_json(rec);
      j["distribution"] = dv.label();
      j["design"] = design_json(d);
      j["true_alpha"] = to_json(a);
      out.write("report.json", dump(j), true);
      out.write("report.csv",
                recovery_csv_header() + recovery_csv_row(dv.label(), spec, d.cycles(), rec),
                false);
      resolved["alpha_source"] = spec;
      resolved["runs"] = count;
      resolved["delta"] = delta;
    }
    return resolved;
  }
};

// -- synthesize-population -----------------------------------------------------

struct SynthCmd
{
  std::size_t size = 304;
  double rho = 0.786;
  std::string marginal = "normal";
  Common common;

  void add(CLI::App& app)
  {
    app.add_option("--size", size, "number of units")->check(CLI::Range(std::size_t{ 3 }, std::size_t{ 100000000 }));
    app.add_option("--rho", rho, "target correlation between y and x")
      ->check(CLI::Range(-1.0, 1.0));
    app.add_option("--marginal", marginal, "normal or lognormal")
      ->check(CLI::IsMember({ "normal", "lognormal" }));
    common.add(app, false);
  }

  Json run(Output& out) const
  {
    Rng rng = make_stream(common.seed);
    const auto pop = synthesize_population(
      size, rho, marginal == "normal" ? Marginal::normal : Marginal::lognormal, rng);
    out.write("population.csv", csv_of([&](std::ostream& os) { write_population_csv(os, pop); }),
              true);
    return Json{ { "size", size },
                 { "rho", rho },
                 { "marginal", marginal },
                 { "realized_correlation", pearson_correlation(pop.y, pop.x) },
                 { "seed", common.seed } };
  }
};

// ---------------------------------------------------------------------------

//! Flags as they were resolved (command line or config file), excluding
//! output location and the config file itself.
std::vector<std::string> resolved_args(const CLI::App& sub)
{
  std::vector<std::string> args{ sub.get_name() };
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->count() == 0 || name == "help" || name == "out-dir" || name == "config")
      continue;
    const std::string flag = opt->get_lnames().empty() ? "-" + opt->get_snames().front()
                                                       : "--" + opt->get_lnames().front();
    if (opt->get_type_size() == 0) {
      args.push_back(flag);
      continue;
    }
    const auto& results = opt->results();
    if (opt->get_expected_max() > 1 || results.size() > 1) {
      std::string joined;
      for (std::size_t i = 0; i < results.size(); ++i)
        joined += (i ? "," : "") + results[i];
      args.push_back(flag);
      args.push_back(joined);
    } else {
      args.push_back(flag);
      args.push_back(results.empty() ? std::string() : results.front());
    }
  }
  return args;
}

int exit_code(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::numerical: return 4;
  }
  return 1;
}

void report_error(std::ostream& err, const std::string& category, const std::string& kind,
                  const std::string& message)
{
  Json j{ { "error", Json{ { "category", category }, { "kind", kind }, { "message", message } } } };
  err << j.dump() << '\n';
}

std::string category_name(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::data: return "data";
    case ErrorCategory::numerical: return "numerical";
  }
  return "unknown";
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               int depth);

struct RerunCmd
{
  std::string manifest;
  std::string out_dir;

  void add(CLI::App& app)
  {
    app.add_option("--manifest", manifest, "manifest.json from an earlier run")->required();
    app.add_option("--out-dir", out_dir, "directory for the regenerated outputs");
  }
};

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               int depth)
{
  CLI::App app{ "Kernel density estimation from partially rank-ordered set samples", kToolName };
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values");

  SampleCmd sample;
  EstimateCmd estimate;
  EmCmd em;
  RrvCmd rrv;
  CollisionCmd collision;
  DeltaCmd delta;
  SimulateCmd simulate;
  SynthCmd synth;
  RerunCmd rerun;

  std::vector<std::pair<CLI::App*, std::function<Json(Output&)>>> commands;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.add(*sub);
    commands.emplace_back(sub, [&cmd](Output& o) { return cmd.run(o); });
  };
  add("sample", "draw a PROS, RSS or SRS sample", sample);
  add("estimate", "density estimates with pointwise confidence bands", estimate);
  add("em", "estimate a symmetric misplacement matrix", em);
  add("rrv", "variance-reduction curves", rrv);
  add("collision", "binomial collision probability and its approximation", collision);
  add("delta", "integrated variance gap of the PROS estimate", delta);
  add("simulate", "Monte Carlo efficiency and recovery studies", simulate);
  add("synthesize-population", "bivariate population with a target correlation", synth);
  CLI::App* rerun_app = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun.add(*rerun_app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", "usage", e.what());
    return 2;
  }

  for (const auto* sub : app.get_subcommands()) {
    if (sub == rerun_app) {
      if (depth > 0)
        throw UsageError("a manifest cannot request another rerun");
      std::ifstream in(rerun.manifest);
      if (!in)
        throw IngestionError("cannot open manifest " + rerun.manifest);
      Json m;
      try {
        m = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw IngestionError("manifest " + rerun.manifest + ": " + e.what());
      }
      if (!m.contains("args") || !m["args"].is_array())
        throw IngestionError("manifest " + rerun.manifest + " has no args array");
      auto replay = m["args"].get<std::vector<std::string>>();
      if (!rerun.out_dir.empty()) {
        replay.push_back("--out-dir");
        replay.push_back(rerun.out_dir);
      }
      return run_parsed(replay, out, err, depth + 1);
    }
    for (auto& [cmd_app, run] : commands) {
      if (cmd_app != sub)
        continue;
      const auto* dir_opt = sub->get_option("--out-dir");
      const std::string dir = dir_opt->count() ? dir_opt->as<std::string>() : std::string();
      Output output(dir, out);
      Json resolved = run(output);
      if (output.to_directory()) {
        Json manifest;
        manifest["tool"] = kToolName;
        manifest["manifest_version"] = kManifestVersion;
        manifest["command"] = sub->get_name();
        manifest["args"] = resolved_args(*sub);
        manifest["resolved"] = resolved;
        manifest["outputs"] = output.written();
        output.write("manifest.json", dump(manifest), false);
      }
      return 0;
    }
  }
  return 2;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  try {
    return run_parsed(args, out, err, 0);
  } catch (const Error& e) {
    report_error(err, category_name(e.category()), e.kind(), e.what());
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, "data", "io", e.what());
    return 3;
  }
}

} // namespace pros
