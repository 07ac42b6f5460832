#pragma once

// JSON and CSV serialization of estimates, EM traces, simulation reports and
// misplacement matrices.

#include "pros/em.hpp"
#include "pros/kde.hpp"
#include "pros/simulation.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>

namespace pros {

using Json = nlohmann::ordered_json;

Json to_json(const StochasticMatrix& matrix);
//! Accepts {"entries": [[...], ...]} or a bare array of rows.
StochasticMatrix matrix_from_json(const Json& j);

//! Matrix specification for size n:
//!   identity | uniform | alpha0:<value> | recovery:<1..3> |
//!   rows separated by ';' with comma-separated entries ("0.9,0.1;0.1,0.9") |
//!   @path to a JSON file holding a matrix.
StochasticMatrix parse_matrix_spec(std::string_view spec, std::size_t n);

Json to_json(const DensityEstimate& estimate);
//! Columns x,f_hat,var_hat,ci_lo,ci_hi,clamped_flag; absent pieces are empty.
void write_density_csv(std::ostream& out, const DensityEstimate& estimate);

Json to_json(const EmTrace& trace);
Json to_json(const MeanSe& value);
Json to_json(const SimulationReport& report);
Json to_json(const SymmetryRow& row);
Json to_json(const AlphaRecovery& recovery);

//! Deterministic pretty-printed dump followed by a newline.
std::string dump(const Json& j);

} // namespace pros
