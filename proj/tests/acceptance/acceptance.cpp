// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "pros/analysis.hpp"
#include "pros/cli.hpp"
#include "pros/em.hpp"
#include "pros/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace pros;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what)
  {
    if (!detail.empty())
      detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [fail]";
    }
  }
};

std::string fmt(const char* f, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b)
{
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c)
{
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool inside(double v, double lo, double hi) { return v >= lo && v <= hi; }

unsigned workers() { return default_workers(); }

std::vector<Distribution> six_families()
{
  return { Distribution::uniform01(), Distribution::normal(), Distribution::exponential(1.0),
           Distribution::gamma(3.0),  Distribution::gumbel(), Distribution::student_t(2.0) };
}

std::vector<StochasticMatrix> test_matrices(std::size_t n)
{
  std::vector<StochasticMatrix> out{ StochasticMatrix::identity(n),
                                     StochasticMatrix::alpha0_family(n, 0.7) };
  // a nonsymmetric doubly stochastic matrix: mixture of the identity and a cyclic shift
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    e[i * n + i] += 0.65;
    e[i * n + (i + 1) % n] += 0.35;
  }
  out.emplace_back(n, e);
  return out;
}

// 1 -------------------------------------------------------------------------

Outcome analytic_identities()
{
  Outcome o;
  const std::vector<Design> designs{ Design(2, 2, 1), Design(3, 2, 1), Design(2, 3, 1),
                                     Design(6, 3, 1) };
  double worst = 0.0;
  for (const auto& dist : six_families())
    for (const auto& d : designs)
      for (const auto& a : test_matrices(static_cast<std::size_t>(d.n()))) {
        const double lo = dist.quantile(0.001), hi = dist.quantile(0.999);
        for (int k = 0; k <= 100; ++k) {
          const double x = lo + (hi - lo) * k / 100.0;
          worst = std::max(worst, std::fabs(mixture_identity_residual(dist, d, a, x)) /
                                    std::max(1.0, dist.pdf(x)));
        }
      }
  o.require(worst < 1e-12, fmt("mixing residual %.2e", worst));

  // squared subset densities of perfect single-rank designs against the collision probability
  double collision_gap = 0.0;
  for (const auto& dist : six_families())
    for (int s : { 2, 3, 6 }) {
      const Design d(s, 1, 1);
      const auto id = StochasticMatrix::identity(static_cast<std::size_t>(s));
      for (int k = 1; k < 100; ++k) {
        const double x = dist.quantile(k / 100.0);
        double lhs = 0.0;
        for (double v : subset_pdfs(dist, d, id, x))
          lhs += v * v;
        lhs /= s;
        const double f = dist.pdf(x);
        collision_gap = std::max(collision_gap, std::fabs(lhs - s * f * f * collision_probability(s, dist.cdf(x))));
      }
    }
  o.require(collision_gap < 1e-12, fmt("collision identity %.2e", collision_gap));

  // identity misplacement reduces to block averages of order-statistic densities
  double remark = 0.0;
  for (const auto& dist : six_families())
    for (const auto& d : designs)
      for (int j = 0; j < d.n(); ++j)
        for (double q : { 0.1, 0.5, 0.9 }) {
          const double x = dist.quantile(q);
          double block = 0.0;
          for (int u = d.first_rank(j); u <= d.last_rank(j); ++u)
            block += order_stat_pdf(dist, u, d.s(), x);
          block /= d.m();
          remark = std::max(remark, std::fabs(block - subset_pdf(dist, d,
                                                                 StochasticMatrix::identity(static_cast<std::size_t>(d.n())),
                                                                 j, x)));
        }
  o.require(remark < 1e-12, fmt("block reduction %.2e", remark));

  // the PROS estimate is the pooled estimate
  auto rng = make_stream(101);
  const auto sample = draw_pros(Distribution::normal(), Design(3, 2, 25),
                                StochasticMatrix::alpha0_family(3, 0.8), rng);
  const auto grid = linspace(-4.0, 4.0, 401);
  const auto pros = kde_pros(sample, Kernel::epanechnikov(), BandwidthSpec::fixed(0.45), grid);
  const auto pooled = kde_pooled(sample.values(), Kernel::epanechnikov(), 0.45, grid);
  double pool = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g)
    pool = std::max(pool, std::fabs(pros.f_hat[g] - pooled.f_hat[g]));
  o.require(pool <= 1e-14, fmt("pooling %.2e", pool));
  return o;
}

// 2 -------------------------------------------------------------------------

double brute_collision(int s, double p)
{
  const int t = s - 1;
  double acc = 0.0;
  for (int y = 0; y <= t; ++y)
    for (int z = 0; z <= t; ++z)
      if (y == z) {
        const double py = std::exp(std::lgamma(t + 1.0) - std::lgamma(y + 1.0) -
                                   std::lgamma(t - y + 1.0)) *
                          std::pow(p, y) * std::pow(1.0 - p, t - y);
        acc += py * py;
      }
  return acc;
}

Outcome oracle_equivalences()
{
  Outcome o;
  auto rng = make_stream(202);
  std::uniform_real_distribution<double> unif(0.0, 10.0);

  double closed = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w(4);
    for (auto& v : w)
      v = unif(rng);
    const double a = (w[0] + w[3]) / (w[0] + w[1] + w[2] + w[3]);
    const auto r = m_step(w, 2);
    closed = std::max({ closed, std::fabs(r.alpha(0, 0) - a), std::fabs(r.alpha(0, 1) - (1 - a)) });
  }
  o.require(closed < 1e-10, fmt("n=2 closed form %.2e", closed));

  double gap = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    std::vector<double> w(9);
    for (auto& v : w)
      v = unif(rng);
    const auto r = m_step(w, 3);
    const double q = em_objective(w, r.alpha);
    auto search = [&](double step, double a0, double a1, double b0, double b1, double c0,
                      double c1, double& ba, double& bb, double& bc) {
      double best = -std::numeric_limits<double>::infinity();
      for (double a = std::max(0.0, a0); a <= a1 + 1e-12; a += step)
        for (double b = std::max(0.0, b0); b <= b1 + 1e-12; b += step)
          for (double c = std::max(0.0, c0); c <= c1 + 1e-12; c += step) {
            const double m[9] = { 1 - a - b, a, b, a, 1 - a - c, c, b, c, 1 - b - c };
            if (m[0] <= 0 || m[4] <= 0 || m[8] <= 0 || a <= 0 || b <= 0 || c <= 0)
              continue;
            double v = 0.0;
            for (int k = 0; k < 9; ++k)
              v += w[k] * std::log(m[k]);
            if (v > best) {
              best = v;
              ba = a;
              bb = b;
              bc = c;
            }
          }
      return best;
    };
    double a = 0, b = 0, c = 0;
    search(0.01, 0, 1, 0, 1, 0, 1, a, b, c);
    const double fine = search(1e-3, a - 0.02, a + 0.02, b - 0.02, b + 0.02, c - 0.02, c + 0.02, a, b, c);
    gap = std::max(gap, std::fabs(q - fine));
    if (q < fine - 1e-12)
      o.require(false, "grid beat the solver");
  }
  o.require(gap <= 1e-4, fmt("n=3 objective gap %.2e", gap));

  double rrv = 0.0;
  for (const auto& dist : six_families())
    for (const auto& d : { Design(3, 2, 1), Design(2, 3, 1), Design(4, 1, 1) })
      for (const auto& a : test_matrices(static_cast<std::size_t>(d.n())))
        for (int k = 1; k < 50; ++k) {
          const double x = dist.quantile(k / 50.0);
          rrv = std::max(rrv, std::fabs(rrv_vs_srs(d, a, dist.cdf(x)) -
                                        rrv_vs_srs_from_densities(dist, d, a, x)));
        }
  o.require(rrv < 1e-12, fmt("rrv routes %.2e", rrv));

  double coll = 0.0;
  for (int s = 1; s <= 40; ++s)
    for (double p : { 0.01, 0.2, 0.5, 0.77, 0.99 })
      coll = std::max(coll, std::fabs(collision_probability(s, p) - brute_collision(s, p)));
  o.require(coll < 1e-12, fmt("collision %.2e", coll));
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome rrv_anchors()
{
  Outcome o;
  const double half = rrv_vs_srs(Design(2, 3, 1), StochasticMatrix::identity(2), 0.5);
  o.require(half == 0.0, fmt("n=2 m=3 p=0.5 rrv %.3g", half));

  double rss = 0.0;
  for (int n : { 2, 3, 5 })
    for (double a0 : { 0.4, 0.7, 1.0 }) {
      const auto a = StochasticMatrix::alpha0_family(static_cast<std::size_t>(n), a0);
      for (double p : rrv_default_grid())
        rss = std::max(rss, std::fabs(rrv_vs_rss(Design(n, 1, 1), a, a, p)));
    }
  o.require(rss == 0.0, fmt("m=1 vs RSS max %.3g", rss));

  double sym = 0.0;
  for (int n : { 2, 3, 6 })
    for (int m : { 1, 2, 3 })
      for (double a0 : { 0.5, 0.8, 1.0 }) {
        const auto grid = rrv_default_grid();
        for (auto base : { RrvBaseline::srs, RrvBaseline::rss }) {
          const auto c = rrv_curve(n, m, a0, base, grid);
          for (std::size_t i = 0; i < c.size(); ++i)
            sym = std::max(sym, std::fabs(c[i].rrv - c[c.size() - 1 - i].rrv));
        }
      }
  o.require(sym < 1e-12, fmt("curve symmetry %.2e", sym));
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome mise_table()
{
  Outcome o;
  auto normal = MiseProtocol::alpha0_family(Distribution::normal(), 6, 3, 4, 1.0, 5000, 4001);
  normal.workers = workers();
  const auto rn = run_mise_study(normal);
  o.require(inside(rn.rp.mean, 1.25, 1.55), fmt("normal RP %.3f (se %.3f)", rn.rp.mean, rn.rp.se));
  o.require(inside(rn.sp.mean, 2.0, 2.35), fmt("normal SP %.3f (se %.3f)", rn.sp.mean, rn.sp.se));

  auto gamma = MiseProtocol::alpha0_family(Distribution::gamma(3.0), 6, 3, 4, 1.0, 5000, 4002);
  gamma.workers = workers();
  const auto rg = run_mise_study(gamma);
  o.require(inside(rg.sp.mean, 1.5, 1.8), fmt("gamma SP %.3f (se %.3f)", rg.sp.mean, rg.sp.se));
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome symmetry_table()
{
  Outcome o;
  SymmetryStudy normal;
  normal.dist = Distribution::normal();
  normal.n = 6;
  normal.m = 3;
  normal.cycles = 3;
  normal.replicates = 5000;
  normal.seed = 5001;
  normal.workers = workers();
  const auto rn = run_symmetry_study(normal);
  o.require(inside(rn.efficiency[2].mean, 1.11, 1.31),
            fmt("normal HL %.3f (se %.3f)", rn.efficiency[2].mean, rn.efficiency[2].se));
  o.require(inside(rn.efficiency[4].mean, 1.26, 1.46),
            fmt("normal known %.3f (se %.3f)", rn.efficiency[4].mean, rn.efficiency[4].se));

  SymmetryStudy t2 = normal;
  t2.dist = Distribution::student_t(2.0);
  t2.n = 8;
  t2.cycles = 4;
  t2.seed = 5002;
  const auto rt = run_symmetry_study(t2);
  o.require(rt.efficiency[0].mean < 1.0,
            fmt("t(2) mean-centered %.3f (se %.3f)", rt.efficiency[0].mean, rt.efficiency[0].se));
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome recovery_table()
{
  Outcome o;
  EmConfig cfg;
  cfg.delta = 1e-4;
  const auto rn = run_alpha_recovery(Distribution::normal(), Design(3, 3, 10), recovery_alpha(1),
                                     100, cfg, 6001, workers());
  o.require(inside(rn.mean[0], 0.945, 1.0),
            fmt("normal a11 %.4f (sd %.4f)", rn.mean[0], rn.sd[0]));
  const auto re = run_alpha_recovery(Distribution::exponential(1.0), Design(3, 3, 4),
                                     recovery_alpha(3), 100, cfg, 6002, workers());
  o.require(inside(re.mean[0], 0.70, 0.80),
            fmt("exponential a11 %.4f (sd %.4f)", re.mean[0], re.sd[0]));
  o.require(rn.nonconverged + re.nonconverged == 0,
            fmt("nonconverged %.0f", rn.nonconverged + re.nonconverged));
  return o;
}

// 7 -------------------------------------------------------------------------

// Variance of the values and the standard error of that variance.
std::pair<double, double> variance_se(const std::vector<double>& v)
{
  const double n = static_cast<double>(v.size());
  double mu = 0.0;
  for (double x : v)
    mu += x;
  mu /= n;
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v)
    sq.push_back((x - mu) * (x - mu));
  const auto m = mean_se(sq);
  return { m.mean * n / (n - 1.0), m.se * n / (n - 1.0) };
}

Outcome dominance()
{
  Outcome o;
  const int reps = 2000;
  const Design d(3, 2, 10);
  const double h = 0.4;
  const std::vector<double> x0{ 0.0 };
  const auto dist = Distribution::normal();
  const auto id = StochasticMatrix::identity(3);
  struct Rep
  {
    double pros, srs, moment;
  };
  const auto rows = run_replicates(reps, workers(), [&](std::size_t r) {
    auto a = make_stream(7001, r, 0);
    auto b = make_stream(7001, r, 2);
    const auto srs = draw_srs(dist, static_cast<std::size_t>(d.total()), a);
    const auto pros = draw_pros(dist, d, id, b);
    return Rep{ kde_pros(pros, Kernel::epanechnikov(), BandwidthSpec::fixed(h), x0).f_hat[0],
                kde_pooled(srs, Kernel::epanechnikov(), h, x0).f_hat[0],
                moment_estimator(pros, [](double x) { return x * x; }) };
  });
  std::vector<double> p, s, m;
  for (const auto& row : rows) {
    p.push_back(row.pros);
    s.push_back(row.srs);
    m.push_back(row.moment);
  }
  const auto [vp, sep] = variance_se(p);
  const auto [vs, ses] = variance_se(s);
  o.require(vp <= vs + 3.0 * std::hypot(sep, ses),
            fmt("var PROS %.3e vs SRS %.3e (se %.1e)", vp, vs, std::hypot(sep, ses)));

  SymmetryStudy st;
  st.n = 3;
  st.m = 2;
  st.cycles = 10;
  st.replicates = reps;
  st.seed = 7002;
  st.workers = workers();
  const auto sym = run_symmetry_study(st);
  const double diff = sym.mise_symmetric[4].mean - sym.mise_pros.mean;
  const double se = std::hypot(sym.mise_symmetric[4].se, sym.mise_pros.se);
  o.require(diff <= 3.0 * se, fmt("MISE known-center minus PROS %.2e (se %.1e)", diff, se));

  const auto mm = mean_se(m);
  o.require(std::fabs(mm.mean - 1.0) <= 3.0 * mm.se,
            fmt("second moment %.4f (se %.4f)", mm.mean, mm.se));
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome coverage()
{
  Outcome o;
  const int reps = 2000;
  const Design d(3, 2, 50);
  const auto dist = Distribution::normal();
  const std::vector<double> x0{ 0.0 };
  const double truth = dist.pdf(0.0);
  const auto hits = run_replicates(reps, workers(), [&](std::size_t r) {
    auto rng = make_stream(8001, r, 2);
    const auto s = draw_pros(dist, d, StochasticMatrix::identity(3), rng);
    auto est = kde_pros(s, Kernel::epanechnikov(), BandwidthSpec::silverman_reference(), x0);
    const auto v = variance_from_estimate(est, Kernel::epanechnikov());
    est.var_hat = v.values;
    est.var_clamped = v.clamped;
    est = pointwise_ci(std::move(est), 0.05);
    return est.ci_lo[0] <= truth && truth <= est.ci_hi[0] ? 1 : 0;
  });
  double covered = 0.0;
  for (int h : hits)
    covered += h;
  covered /= reps;
  o.require(inside(covered, 0.90, 0.98), fmt("coverage %.4f", covered));
  return o;
}

// 9 -------------------------------------------------------------------------

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism()
{
  Outcome o;
  const fs::path root = fs::path(PROS_TEST_TMP) / "acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::vector<std::vector<std::string>> commands{
    { "sample", "--dist", "gamma", "--n", "3", "--m", "2", "--L", "6", "--alpha", "alpha0:0.7",
      "--seed", "9" },
    { "rrv", "--n", "2,3,6", "--m", "3", "--alpha0", "0.8", "--baseline", "rss" },
    { "collision", "--s", "2,6,30" },
    { "delta", "--dist", "normal", "--n", "3", "--m", "2" },
    { "synthesize-population", "--size", "200", "--seed", "4" },
    { "estimate", "--dist", "normal", "--n", "3", "--m", "2", "--L", "8", "--reps", "5",
      "--seed", "9" },
    { "simulate", "--study", "mise", "--dist", "normal", "--n", "3", "--m", "2", "--L", "3",
      "--reps", "60", "--seed", "9" },
    { "simulate", "--study", "symmetry", "--dist", "normal", "--n", "3", "--m", "2", "--L", "3",
      "--reps", "60", "--seed", "9" },
    { "simulate", "--study", "alpha-recovery", "--dist", "normal", "--n", "3", "--m", "3", "--L",
      "4", "--alpha", "recovery:2", "--reps", "10", "--seed", "9" },
  };
  int compared = 0, differing = 0, failed = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<fs::path> dirs;
    for (const auto& [tag, w] : { std::pair{ "a", "1" }, std::pair{ "b", "1" }, std::pair{ "c", "4" } }) {
      const fs::path dir = root / (std::to_string(c) + tag);
      auto args = commands[c];
      const bool threaded = args[0] == "simulate";
      if (threaded)
        args.insert(args.end(), { "--workers", w });
      args.insert(args.end(), { "--out-dir", dir.string() });
      std::ostringstream out, err;
      if (run_cli(args, out, err) != 0) {
        ++failed;
        std::fprintf(stderr, "command %s failed: %s\n", args[0].c_str(), err.str().c_str());
      }
      dirs.push_back(dir);
    }
    // the manifest of the threaded run records a different worker count
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      ++compared;
      if (slurp(dirs[0] / name) != slurp(dirs[1] / name))
        ++differing;
      if (name != "manifest.json" && slurp(dirs[0] / name) != slurp(dirs[2] / name))
        ++differing;
    }
  }
  o.require(failed == 0, fmt("%.0f failed runs", failed));
  o.require(compared > 0 && differing == 0,
            fmt("%.0f files compared, %.0f differ", compared, differing));
  return o;
}

} // namespace

int main()
{
  struct Criterion
  {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
    { 1, "analytic identities", analytic_identities },
    { 2, "oracle equivalences", oracle_equivalences },
    { 3, "RRV anchors", rrv_anchors },
    { 4, "MISE efficiency table", mise_table },
    { 5, "symmetric estimator efficiencies", symmetry_table },
    { 6, "misplacement recovery", recovery_table },
    { 7, "dominance properties", dominance },
    { 8, "pointwise interval coverage", coverage },
    { 9, "determinism", determinism },
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
