#pragma once

// EM-type estimation of a symmetric doubly stochastic misplacement matrix from
// a PROS sample. The unknown cdf enters only through the pooled empirical cdf,
// which is computed once per sample.

#include "pros/distributions.hpp"
#include "pros/errors.hpp"
#include "pros/sampling.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pros {

//! Inner M-step solver gave up; carries its last (feasible) iterate.
class SolverError : public Error
{
public:
  SolverError(const std::string& what, std::vector<double> last_iterate)
    : Error(ErrorCategory::numerical, "solver", what)
    , last_iterate_(std::move(last_iterate))
  {}
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
  std::vector<double> last_iterate_;
};

struct EmConfig
{
  double delta = 1e-4;
  int max_iters = 500;
  //! Clamp for F-hat before it enters the beta densities; default 1/(2N).
  std::optional<double> cdf_clamp_eps;
  //! Starting matrix; default is random subsetting (all entries 1/n).
  std::optional<StochasticMatrix> init;
  bool keep_iterates = false;

  void validate() const;
};

struct EmTrace
{
  int iterations = 0;
  bool converged = false;
  double clamp_eps = 0.0;
  std::vector<double> sae_history;
  //! Q^(t) evaluated at alpha^(t) and at its maximizer alpha^(t+1).
  std::vector<double> q_before;
  std::vector<double> q_after;
  StochasticMatrix final_alpha = StochasticMatrix::identity(1);
  //! alpha^(0), alpha^(1), ... when EmConfig::keep_iterates is set.
  std::vector<StochasticMatrix> iterates;
};

//! Fraction of observations <= x.
double empirical_cdf_pros(const ProsSample& sample, double x);

//! Empirical cdf at each observation (in sample order), clamped to [eps, 1-eps].
std::vector<double> ecdf_at_observations(const ProsSample& sample, double eps);

//! (1/m) sum_{u in d_h} Beta(u, s-u+1) density at v.
double block_beta_density(const Design& design, int h, double v);

//! Row-major N x n matrix of posterior weights pi_[d_j,d_h]i; row k belongs to
//! observation k and column h to actual subset h.
std::vector<double> posterior_weights(const ProsSample& sample, const MisplacementMatrix& alpha,
                                      const Design& design, std::span<const double> cdf_values);

//! w[h'][h] = sum over observations from nominal subset h' of pi_[d_h',d_h].
std::vector<double> accumulate_weights(const ProsSample& sample,
                                       std::span<const double> posterior, int n);

//! sum w[h'][h] log alpha[h'][h], with 0 log 0 = 0.
double em_objective(std::span<const double> weights, const StochasticMatrix& alpha);

struct MStepResult
{
  StochasticMatrix alpha;
  int iterations = 0;
  double objective = 0.0;
};

//! Symmetric doubly stochastic maximizer of em_objective for nonnegative
//! weights (row-major n x n, not all zero).
MStepResult m_step(std::span<const double> weights, std::size_t n);

//! Sum of absolute differences over the upper triangle (diagonal included).
double upper_triangle_sae(const StochasticMatrix& a, const StochasticMatrix& b);

EmTrace estimate_alpha(const ProsSample& sample, const Design& design,
                       const EmConfig& config = {});

} // namespace pros
