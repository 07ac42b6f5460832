#pragma once

#include "pros/distributions.hpp"
#include "pros/random.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pros {

//! One measured unit. `subset` and `cycle` are 0-based; CSV files use 1-based
//! numbering.
struct Observation
{
  double value = 0.0;
  int subset = 0;
  int cycle = 0;
};

//! Measurements X_[d_j]i tagged with nominal subset j and cycle i. Holds
//! exactly `cycles` observations per subset. SRS data is the n = 1 case and
//! RSS data the m = 1 case, so all three designs share this type.
class ProsSample
{
public:
  ProsSample(int n, int cycles, std::vector<Observation> observations);

  //! Wrap i.i.d. values as a single-subset sample (s = 1).
  static ProsSample from_values(const std::vector<double>& values);

  int n() const noexcept { return n_; }
  int cycles() const noexcept { return cycles_; }
  std::size_t size() const noexcept { return observations_.size(); }
  const std::vector<Observation>& observations() const noexcept { return observations_; }

  std::vector<double> values() const;
  std::vector<double> subset_values(int j) const;

  //! Every (subset, cycle) pair occurs exactly once.
  bool is_cycle_balanced() const;

private:
  int n_;
  int cycles_;
  std::vector<Observation> observations_;
};

//! Finite population of (variable of interest y, auxiliary ranking variable x).
struct FinitePopulation
{
  std::vector<double> y;
  std::vector<double> x;

  std::size_t size() const noexcept { return y.size(); }
  //! Throws IngestionError if empty, ragged, or non-finite.
  void validate() const;
};

std::vector<double> draw_srs(const Distribution& dist, std::size_t count, Rng& rng);

//! Imperfect PROS: nominal subset j is filled from actual subset h with
//! probability alpha(j, h), then a uniformly chosen rank within d_h is measured.
ProsSample draw_pros(const Distribution& dist, const Design& design,
                     const MisplacementMatrix& alpha, Rng& rng);

//! Imperfect RSS with set size n; slot r measures the k-th order statistic
//! with probability p(r, k). Same process as PROS with m = 1.
ProsSample draw_rss(const Distribution& dist, int n, int cycles, const RssErrorMatrix& p,
                    Rng& rng);

//! Case-study sampling: sets of s units drawn with replacement, ordered by the
//! auxiliary variable (ties broken by random jitter), and the y-value of a
//! random unit in the designated subset recorded.
ProsSample draw_pros_finite(const FinitePopulation& population, const Design& design,
                            Rng& rng);

//! Simple random sample with replacement of y-values.
std::vector<double> draw_srs_finite(const FinitePopulation& population, std::size_t count,
                                    Rng& rng);

//! Read a CSV population with a header row; `y_column` / `x_column` select
//! fields by name and y is multiplied by `scale`. Rejects unparsable rows with
//! their line numbers.
FinitePopulation read_population_csv(std::istream& in, const std::string& y_column,
                                     const std::string& x_column, double scale = 1.0);
FinitePopulation read_population_csv(const std::string& path, const std::string& y_column,
                                     const std::string& x_column, double scale = 1.0);

void write_population_csv(std::ostream& out, const FinitePopulation& population);

enum class Marginal
{
  normal,
  lognormal
};

//! Bivariate population whose y and x are linked through a Gaussian copula
//! with correlation `rho` (exact Pearson correlation for normal marginals).
FinitePopulation synthesize_population(std::size_t size, double rho, Marginal marginal,
                                       Rng& rng);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

//! CSV with columns value,subset,cycle (subset and cycle 1-based).
void write_sample_csv(std::ostream& out, const ProsSample& sample);
//! Reads the format above. `n` of 0 infers the subset count from the data.
ProsSample read_sample_csv(std::istream& in, int n = 0);
ProsSample read_sample_csv(const std::string& path, int n = 0);

} // namespace pros
