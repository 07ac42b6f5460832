#include "pros/sampling.hpp"

#include "pros/csv.hpp"
#include "pros/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace pros {

ProsSample::ProsSample(int n, int cycles, std::vector<Observation> observations)
  : n_(n)
  , cycles_(cycles)
  , observations_(std::move(observations))
{
  if (n_ < 1 || cycles_ < 1)
    throw StructureError("sample needs at least one subset and one cycle");
  std::vector<int> counts(n_, 0);
  for (const auto& o : observations_) {
    if (o.subset < 0 || o.subset >= n_)
      throw StructureError("observation subset " + std::to_string(o.subset + 1) +
                           " outside 1.." + std::to_string(n_));
    if (o.cycle < 0 || o.cycle >= cycles_)
      throw StructureError("observation cycle " + std::to_string(o.cycle + 1) +
                           " outside 1.." + std::to_string(cycles_));
    if (!std::isfinite(o.value))
      throw StructureError("observation value is not finite");
    ++counts[o.subset];
  }
  for (int j = 0; j < n_; ++j) {
    if (counts[j] != cycles_)
      throw StructureError("subset " + std::to_string(j + 1) + " has " +
                           std::to_string(counts[j]) + " observations, expected " +
                           std::to_string(cycles_));
  }
}

ProsSample ProsSample::from_values(const std::vector<double>& values)
{
  std::vector<Observation> obs;
  obs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    obs.push_back({ values[i], 0, static_cast<int>(i) });
  return { 1, static_cast<int>(values.size()), std::move(obs) };
}

std::vector<double> ProsSample::values() const
{
  std::vector<double> v;
  v.reserve(observations_.size());
  for (const auto& o : observations_)
    v.push_back(o.value);
  return v;
}

std::vector<double> ProsSample::subset_values(int j) const
{
  std::vector<double> v;
  v.reserve(cycles_);
  for (const auto& o : observations_)
    if (o.subset == j)
      v.push_back(o.value);
  return v;
}

bool ProsSample::is_cycle_balanced() const
{
  std::vector<char> seen(static_cast<std::size_t>(n_) * cycles_, 0);
  for (const auto& o : observations_) {
    char& s = seen[static_cast<std::size_t>(o.cycle) * n_ + o.subset];
    if (s)
      return false;
    s = 1;
  }
  return true;
}

void FinitePopulation::validate() const
{
  if (y.empty())
    throw IngestionError("population is empty");
  if (y.size() != x.size())
    throw IngestionError("population columns have different lengths");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]) || !std::isfinite(x[i]))
      throw IngestionError("population unit " + std::to_string(i + 1) + " is not finite");
}

// ---------------------------------------------------------------------------

namespace {

int draw_index(std::span<const double> probabilities, Rng& rng)
{
  const double u = uniform_open(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0)
      continue;
    acc += probabilities[k];
    last_positive = static_cast<int>(k);
    if (u < acc)
      return last_positive;
  }
  return last_positive;
}

int uniform_int(int lo, int hi, Rng& rng)
{
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

} // namespace

std::vector<double> draw_srs(const Distribution& dist, std::size_t count, Rng& rng)
{
  std::vector<double> out(count);
  for (auto& v : out)
    v = dist.draw(rng);
  return out;
}

ProsSample draw_pros(const Distribution& dist, const Design& design,
                     const MisplacementMatrix& alpha, Rng& rng)
{
  check_alpha_matches(design, alpha);
  const int n = design.n();
  const int s = design.s();
  std::vector<Observation> obs;
  obs.reserve(design.total());
  std::vector<double> set(s);
  for (int i = 0; i < design.cycles(); ++i) {
    for (int j = 0; j < n; ++j) {
      const int h = draw_index(alpha.row(j), rng);
      const int u = uniform_int(design.first_rank(h), design.last_rank(h), rng);
      for (auto& v : set)
        v = dist.draw(rng);
      std::nth_element(set.begin(), set.begin() + (u - 1), set.end());
      obs.push_back({ set[u - 1], j, i });
    }
  }
  return { n, design.cycles(), std::move(obs) };
}

ProsSample draw_rss(const Distribution& dist, int n, int cycles, const RssErrorMatrix& p,
                    Rng& rng)
{
  return draw_pros(dist, Design(n, 1, cycles), p, rng);
}

ProsSample draw_pros_finite(const FinitePopulation& population, const Design& design,
                            Rng& rng)
{
  population.validate();
  const int n = design.n();
  const int m = design.m();
  const int s = design.s();
  const int last = static_cast<int>(population.size()) - 1;

  struct Unit
  {
    double x;
    double jitter;
    std::size_t index;
  };
  std::vector<Unit> set(s);
  std::vector<Observation> obs;
  obs.reserve(design.total());
  for (int i = 0; i < design.cycles(); ++i) {
    for (int j = 0; j < n; ++j) {
      for (auto& unit : set) {
        unit.index = static_cast<std::size_t>(uniform_int(0, last, rng));
        unit.x = population.x[unit.index];
        unit.jitter = uniform_open(rng);
      }
      std::sort(set.begin(), set.end(), [](const Unit& a, const Unit& b) {
        return a.x < b.x || (a.x == b.x && a.jitter < b.jitter);
      });
      const int pos = j * m + uniform_int(0, m - 1, rng);
      obs.push_back({ population.y[set[pos].index], j, i });
    }
  }
  return { n, design.cycles(), std::move(obs) };
}

std::vector<double> draw_srs_finite(const FinitePopulation& population, std::size_t count,
                                    Rng& rng)
{
  population.validate();
  const int last = static_cast<int>(population.size()) - 1;
  std::vector<double> out(count);
  for (auto& v : out)
    v = population.y[static_cast<std::size_t>(uniform_int(0, last, rng))];
  return out;
}

// ---------------------------------------------------------------------------

FinitePopulation read_population_csv(std::istream& in, const std::string& y_column,
                                     const std::string& x_column, double scale)
{
  std::string line;
  if (!std::getline(in, line))
    throw IngestionError("population CSV is empty (no header row)");
  const auto header = csv::split_line(line);
  auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw IngestionError("population CSV has no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t yi = find(y_column);
  const std::size_t xi = find(x_column);

  FinitePopulation pop;
  std::vector<std::size_t> bad_lines;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto fields = csv::split_line(line);
    double y = 0.0, x = 0.0;
    if (fields.size() <= std::max(yi, xi) || !csv::parse_double(fields[yi], y) ||
        !csv::parse_double(fields[xi], x)) {
      bad_lines.push_back(line_no);
      continue;
    }
    pop.y.push_back(y * scale);
    pop.x.push_back(x);
  }
  if (!bad_lines.empty()) {
    std::string msg = "unparsable numeric values on line(s)";
    for (std::size_t k = 0; k < bad_lines.size() && k < 20; ++k)
      msg += (k ? ", " : " ") + std::to_string(bad_lines[k]);
    if (bad_lines.size() > 20)
      msg += ", ... (" + std::to_string(bad_lines.size()) + " total)";
    throw IngestionError(msg);
  }
  pop.validate();
  return pop;
}

FinitePopulation read_population_csv(const std::string& path, const std::string& y_column,
                                     const std::string& x_column, double scale)
{
  std::ifstream in(path);
  if (!in)
    throw IngestionError("cannot open population file '" + path + "'");
  return read_population_csv(in, y_column, x_column, scale);
}

void write_population_csv(std::ostream& out, const FinitePopulation& population)
{
  out << "y,x\n";
  for (std::size_t i = 0; i < population.size(); ++i)
    out << csv::format(population.y[i]) << ',' << csv::format(population.x[i]) << '\n';
}

FinitePopulation synthesize_population(std::size_t size, double rho, Marginal marginal,
                                       Rng& rng)
{
  if (size < 2)
    throw UsageError("population size must be at least 2");
  if (!(rho > -1.0 && rho < 1.0))
    throw UsageError("target correlation must lie in (-1, 1)");

  std::normal_distribution<double> normal;
  std::vector<double> z(size), e(size);
  for (auto& v : z)
    v = normal(rng);
  for (auto& v : e)
    v = normal(rng);

  // Standardize z, then make e exactly orthogonal to z with unit variance so the
  // realized correlation of (z, rho z + sqrt(1-rho^2) e) is exactly rho.
  auto standardize = [](std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double& a : v) {
      a -= mean;
      ss += a * a;
    }
    const double sd = std::sqrt(ss / v.size());
    for (double& a : v)
      a /= sd;
  };
  standardize(z);
  standardize(e);
  double dot = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    dot += z[i] * e[i];
  dot /= static_cast<double>(size);
  for (std::size_t i = 0; i < size; ++i)
    e[i] -= dot * z[i];
  standardize(e);

  FinitePopulation pop;
  pop.y.resize(size);
  pop.x.resize(size);
  const double c = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < size; ++i) {
    const double zy = rho * z[i] + c * e[i];
    if (marginal == Marginal::normal) {
      pop.x[i] = z[i];
      pop.y[i] = zy;
    } else {
      pop.x[i] = std::exp(0.75 * z[i]);
      pop.y[i] = std::exp(0.75 * zy);
    }
  }
  return pop;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b)
{
  if (a.size() != b.size() || a.size() < 2)
    throw UsageError("correlation needs two equal-length vectors of size >= 2");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

void write_sample_csv(std::ostream& out, const ProsSample& sample)
{
  out << "value,subset,cycle\n";
  for (const auto& o : sample.observations())
    out << csv::format(o.value) << ',' << o.subset + 1 << ',' << o.cycle + 1 << '\n';
}

ProsSample read_sample_csv(std::istream& in, int n)
{
  std::string line;
  if (!std::getline(in, line))
    throw IngestionError("sample CSV is empty (no header row)");
  const auto header = csv::split_line(line);
  auto find = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw IngestionError(std::string("sample CSV has no column named '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t vi = find("value");
  const std::size_t si = find("subset");
  const std::size_t ci = find("cycle");

  std::vector<Observation> obs;
  std::size_t line_no = 1;
  int max_subset = 0;
  int max_cycle = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto f = csv::split_line(line);
    Observation o;
    int subset = 0, cycle = 0;
    if (f.size() <= std::max({ vi, si, ci }) || !csv::parse_double(f[vi], o.value) ||
        !csv::parse_int(f[si], subset) || !csv::parse_int(f[ci], cycle) || subset < 1 ||
        cycle < 1)
      throw IngestionError("malformed sample row on line " + std::to_string(line_no));
    o.subset = subset - 1;
    o.cycle = cycle - 1;
    max_subset = std::max(max_subset, subset);
    max_cycle = std::max(max_cycle, cycle);
    obs.push_back(o);
  }
  if (obs.empty())
    throw IngestionError("sample CSV has no observations");
  if (n == 0)
    n = max_subset;
  if (max_subset > n)
    throw StructureError("sample uses subset " + std::to_string(max_subset) +
                         " but design has n=" + std::to_string(n));
  if (obs.size() % static_cast<std::size_t>(n) != 0)
    throw StructureError("sample size is not a multiple of n");
  const int cycles = static_cast<int>(obs.size()) / n;
  if (max_cycle > cycles)
    throw StructureError("cycle index " + std::to_string(max_cycle) + " exceeds L=" +
                         std::to_string(cycles));
  return { n, cycles, std::move(obs) };
}

ProsSample read_sample_csv(const std::string& path, int n)
{
  std::ifstream in(path);
  if (!in)
    throw IngestionError("cannot open sample file '" + path + "'");
  return read_sample_csv(in, n);
}

} // namespace pros
