#include "pros/em.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pros {

void EmConfig::validate() const
{
  if (!(delta > 0.0))
    throw UsageError("EM stopping threshold delta must be positive");
  if (max_iters < 1)
    throw UsageError("EM max_iters must be at least 1");
  if (cdf_clamp_eps && !(*cdf_clamp_eps > 0.0 && *cdf_clamp_eps < 0.5))
    throw UsageError("cdf clamp epsilon must lie in (0, 0.5)");
}

double empirical_cdf_pros(const ProsSample& sample, double x)
{
  if (sample.size() == 0)
    throw DegenerateSampleError("empirical cdf of an empty sample");
  std::size_t count = 0;
  for (const auto& o : sample.observations())
    count += o.value <= x ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

std::vector<double> ecdf_at_observations(const ProsSample& sample, double eps)
{
  auto sorted = sample.values();
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(sorted.size());
  std::vector<double> out;
  out.reserve(sorted.size());
  for (const auto& o : sample.observations()) {
    const auto rank = std::upper_bound(sorted.begin(), sorted.end(), o.value) - sorted.begin();
    out.push_back(std::clamp(static_cast<double>(rank) / N, eps, 1.0 - eps));
  }
  return out;
}

double block_beta_density(const Design& design, int h, double v)
{
  const int s = design.s();
  double acc = 0.0;
  // Beta(u, s-u+1) density = s * C(s-1, u-1) v^(u-1) (1-v)^(s-u)
  for (int u = design.first_rank(h); u <= design.last_rank(h); ++u)
    acc += s * binomial_term(s - 1, u - 1, v);
  return acc / design.m();
}

std::vector<double> posterior_weights(const ProsSample& sample, const MisplacementMatrix& alpha,
                                      const Design& design, std::span<const double> cdf_values)
{
  check_alpha_matches(design, alpha);
  if (sample.n() != design.n())
    throw DesignMismatchError("sample subset count does not match the design");
  if (cdf_values.size() != sample.size())
    throw DesignMismatchError("one cdf value per observation is required");
  const int n = design.n();
  std::vector<double> pi(sample.size() * n);
  std::vector<double> beta(n);
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double v = cdf_values[k];
    if (!(v > 0.0 && v < 1.0))
      throw NumericalDegeneracyError(k, "cdf value for observation " + std::to_string(k + 1) +
                                          " is not strictly inside (0,1)");
    const int j = sample.observations()[k].subset;
    double denom = 0.0;
    for (int h = 0; h < n; ++h) {
      beta[h] = alpha(j, h) * block_beta_density(design, h, v);
      denom += beta[h];
    }
    if (!(denom > 0.0) || !std::isfinite(denom))
      throw NumericalDegeneracyError(k, "posterior weights of observation " +
                                          std::to_string(k + 1) + " have a zero denominator");
    for (int h = 0; h < n; ++h)
      pi[k * n + h] = beta[h] / denom;
  }
  return pi;
}

std::vector<double> accumulate_weights(const ProsSample& sample,
                                       std::span<const double> posterior, int n)
{
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const int j = sample.observations()[k].subset;
    for (int h = 0; h < n; ++h)
      w[j * n + h] += posterior[k * n + h];
  }
  return w;
}

double em_objective(std::span<const double> weights, const StochasticMatrix& alpha)
{
  const std::size_t n = alpha.size();
  if (weights.size() != n * n)
    throw DesignMismatchError("weight matrix does not match alpha");
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights[i * n + j];
      if (w == 0.0)
        continue;
      q += w * std::log(alpha(i, j));
    }
  return q;
}

double upper_triangle_sae(const StochasticMatrix& a, const StochasticMatrix& b)
{
  if (a.size() != b.size())
    throw DesignMismatchError("matrix size mismatch");
  double sae = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j)
      sae += std::fabs(a(i, j) - b(i, j));
  return sae;
}

// ---------------------------------------------------------------------------
// M-step.
//
// With T = W + W' the problem is: maximize (1/2) sum_ij T_ij log a_ij over
// symmetric a with unit row sums. Stationarity gives a_ij = T_ij / (l_i + l_j)
// where l minimizes the convex dual
//     phi(l) = sum_i l_i - (1/2) sum_ij T_ij log(l_i + l_j),
// whose gradient is 1 - (row sums of a). Damped Newton on phi, staying inside
// l_i + l_j > 0. Entries of T below a tiny positive floor are lifted to it so that
// every row of the solution is representable; the affected entries of a come
// out at the floor's scale (~1e-13) instead of exactly 0.

namespace {

constexpr double kZeroWeightFloor = 1e-13;
constexpr int kMaxNewtonIterations = 10000;
constexpr double kStepTolerance = 1e-10;
constexpr double kRowSumTolerance = 1e-13;
constexpr double kStallTolerance = 1e-10;

struct Dual
{
  const Eigen::MatrixXd& T;

  bool feasible(const Eigen::VectorXd& l) const
  {
    for (Eigen::Index i = 0; i < l.size(); ++i)
      for (Eigen::Index j = i; j < l.size(); ++j)
        if (!(l(i) + l(j) > 0.0))
          return false;
    return true;
  }

  double value(const Eigen::VectorXd& l) const
  {
    double v = l.sum();
    for (Eigen::Index i = 0; i < l.size(); ++i)
      for (Eigen::Index j = 0; j < l.size(); ++j)
        v -= 0.5 * T(i, j) * std::log(l(i) + l(j));
    return v;
  }

  //! max_i |1 - row sum i| of the implied alpha
  double residual(const Eigen::VectorXd& l) const
  {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < l.size(); ++j)
        row += T(i, j) / (l(i) + l(j));
      worst = std::max(worst, std::fabs(1.0 - row));
    }
    return worst;
  }

  Eigen::MatrixXd alpha(const Eigen::VectorXd& l) const
  {
    const Eigen::Index n = l.size();
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        a(i, j) = T(i, j) / (l(i) + l(j));
    return a;
  }
};

} // namespace

MStepResult m_step(std::span<const double> weights, std::size_t n)
{
  if (n == 0 || weights.size() != n * n)
    throw DesignMismatchError("m_step needs an n x n weight matrix");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError("m_step weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0))
    throw DomainError("m_step weights are all zero");
  if (n == 1)
    return { StochasticMatrix::identity(1), 0, 0.0 };

  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd T(N, N);
  const double floor = kZeroWeightFloor * total / static_cast<double>(n * n);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      const double t = weights[i * n + j] + weights[j * n + i];
      T(i, j) = std::max(t, floor);
    }

  const Dual dual{ T };
  // a ~ T / rowsum when all l are comparable
  Eigen::VectorXd l = 0.5 * T.rowwise().sum();
  double phi = dual.value(l);
  int iter = 0;
  bool converged = false;
  double residual = 0.0;
  for (; iter < kMaxNewtonIterations; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Ones(N);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) {
        const double d = l(i) + l(j);
        const double a = T(i, j) / d;
        grad(i) -= a;
        H(i, i) += a / d;
        H(i, j) += a / d;
      }
    }
    // grad_i = 1 - row sum i of a
    residual = grad.cwiseAbs().maxCoeff();
    if (residual < kRowSumTolerance) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = H.ldlt().solve(-grad);
    if (!step.allFinite())
      break;

    // Near the optimum phi changes below its own rounding error, so a full
    // step that shrinks the row-sum residual is taken without Armijo.
    double t = 1.0;
    const double slope = grad.dot(step);
    Eigen::VectorXd next = l + step;
    if (dual.feasible(next) && dual.residual(next) < residual) {
      l = next;
      phi = dual.value(l);
      continue;
    }
    double phi_next = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      next = l + t * step;
      if (dual.feasible(next)) {
        phi_next = dual.value(next);
        if (phi_next <= phi + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      // phi is flat to rounding; accept if the row sums are already tight
      converged = residual < kStallTolerance;
      break;
    }
    const double moved = (t * step).cwiseAbs().maxCoeff() / std::max(1.0, l.cwiseAbs().maxCoeff());
    l = next;
    phi = phi_next;
    if (moved < kStepTolerance) {
      const Eigen::MatrixXd a = dual.alpha(l);
      residual = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
      if (residual < kStallTolerance) {
        converged = true;
        ++iter;
        break;
      }
    }
  }

  Eigen::MatrixXd a = dual.alpha(l);
  std::vector<double> entries(n * n);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      entries[i * n + j] = std::clamp(0.5 * (a(i, j) + a(j, i)), 0.0, 1.0);
  if (!converged)
    throw SolverError("M-step solver stopped after " + std::to_string(iter) +
                        " iterations with row-sum residual " + std::to_string(residual),
                      entries);

  StochasticMatrix alpha(n, std::move(entries), 1e-10);
  const double q = em_objective(weights, alpha);
  return { std::move(alpha), iter, q };
}

// ---------------------------------------------------------------------------

EmTrace estimate_alpha(const ProsSample& sample, const Design& design, const EmConfig& config)
{
  config.validate();
  if (sample.n() != design.n())
    throw DesignMismatchError("sample has " + std::to_string(sample.n()) +
                              " subsets but design has n=" + std::to_string(design.n()));
  const int n = design.n();
  EmTrace trace;
  trace.clamp_eps = config.cdf_clamp_eps.value_or(0.5 / static_cast<double>(sample.size()));
  if (n == 1) {
    trace.converged = true;
    trace.final_alpha = StochasticMatrix::identity(1);
    return trace;
  }

  StochasticMatrix alpha = config.init.value_or(StochasticMatrix::uniform(n));
  check_alpha_matches(design, alpha);
  if (!alpha.is_symmetric())
    throw UsageError("EM starting matrix must be symmetric");

  const auto cdf = ecdf_at_observations(sample, trace.clamp_eps);
  if (config.keep_iterates)
    trace.iterates.push_back(alpha);

  for (int t = 0; t < config.max_iters; ++t) {
    const auto pi = posterior_weights(sample, alpha, design, cdf);
    const auto w = accumulate_weights(sample, pi, n);
    MStepResult next = m_step(w, n);
    const double sae = upper_triangle_sae(alpha, next.alpha);
    trace.q_before.push_back(em_objective(w, alpha));
    trace.q_after.push_back(next.objective);
    trace.sae_history.push_back(sae);
    alpha = std::move(next.alpha);
    trace.iterations = t + 1;
    if (config.keep_iterates)
      trace.iterates.push_back(alpha);
    if (sae <= config.delta) {
      trace.converged = true;
      break;
    }
  }
  trace.final_alpha = alpha;
  return trace;
}

} // namespace pros
