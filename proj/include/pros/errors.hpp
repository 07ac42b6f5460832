#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pros {

//! Broad failure classes; the CLI maps these onto process exit codes.
enum class ErrorCategory
{
  usage,     // bad flags or inconsistent parameters
  data,      // malformed input, structural violations
  numerical  // solver / quadrature / degeneracy failures
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCategory category, std::string kind, const std::string& what)
    : std::runtime_error(what)
    , category_(category)
    , kind_(std::move(kind))
  {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& kind() const noexcept { return kind_; }

private:
  ErrorCategory category_;
  std::string kind_;
};

#define PROS_DEFINE_ERROR(Name, category, tag)                                 \
  class Name : public Error                                                    \
  {                                                                            \
  public:                                                                      \
    explicit Name(const std::string& what)                                     \
      : Error(ErrorCategory::category, tag, what)                              \
    {}                                                                         \
  };

PROS_DEFINE_ERROR(UsageError, usage, "usage")
PROS_DEFINE_ERROR(RankDomainError, usage, "rank_domain")
PROS_DEFINE_ERROR(DesignMismatchError, usage, "design_mismatch")
PROS_DEFINE_ERROR(BandwidthError, usage, "bandwidth")
PROS_DEFINE_ERROR(DomainError, usage, "domain")
PROS_DEFINE_ERROR(IngestionError, data, "ingestion")
PROS_DEFINE_ERROR(StructureError, data, "structure")
PROS_DEFINE_ERROR(DegenerateSampleError, data, "degenerate_sample")
PROS_DEFINE_ERROR(CoverageError, numerical, "coverage")
PROS_DEFINE_ERROR(IntegrationError, numerical, "integration")
PROS_DEFINE_ERROR(SimulationError, numerical, "simulation")

#undef PROS_DEFINE_ERROR

//! Zero denominator in the EM posterior weights for one observation.
class NumericalDegeneracyError : public Error
{
public:
  NumericalDegeneracyError(std::size_t observation, const std::string& what)
    : Error(ErrorCategory::numerical, "numerical_degeneracy", what)
    , observation_(observation)
  {}

  std::size_t observation() const noexcept { return observation_; }

private:
  std::size_t observation_;
};

} // namespace pros
