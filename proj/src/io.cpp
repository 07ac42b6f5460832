#include "pros/io.hpp"

#include "pros/csv.hpp"
#include "pros/errors.hpp"

#include <fstream>
#include <ostream>

namespace pros {

Json to_json(const StochasticMatrix& matrix)
{
  Json rows = Json::array();
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    const auto row = matrix.row(r);
    rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return Json{ { "size", matrix.size() }, { "entries", rows } };
}

StochasticMatrix matrix_from_json(const Json& j)
{
  const Json& rows = j.is_object() ? j.at("entries") : j;
  if (!rows.is_array() || rows.empty())
    throw IngestionError("matrix JSON must hold a nonempty array of rows");
  const std::size_t n = rows.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != n)
      throw IngestionError("matrix JSON must be square");
    for (const auto& v : row) {
      if (!v.is_number())
        throw IngestionError("matrix entries must be numbers");
      entries.push_back(v.get<double>());
    }
  }
  return { n, std::move(entries) };
}

namespace {

double parse_number(std::string_view text, std::string_view what)
{
  double v = 0.0;
  if (!csv::parse_double(text, v))
    throw UsageError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

} // namespace

StochasticMatrix parse_matrix_spec(std::string_view spec, std::size_t n)
{
  if (spec == "identity" || spec == "perfect")
    return StochasticMatrix::identity(n);
  if (spec == "uniform" || spec == "random")
    return StochasticMatrix::uniform(n);
  if (spec.starts_with("alpha0:"))
    return StochasticMatrix::alpha0_family(n, parse_number(spec.substr(7), "alpha0"));
  if (spec.starts_with("recovery:")) {
    const auto m = recovery_alpha(static_cast<int>(parse_number(spec.substr(9), "matrix index")));
    if (m.size() != n)
      throw DesignMismatchError("recovery matrices are 3 x 3 but n = " + std::to_string(n));
    return m;
  }
  if (spec.starts_with("@")) {
    const std::string path(spec.substr(1));
    std::ifstream in(path);
    if (!in)
      throw IngestionError("cannot open matrix file " + path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw IngestionError("matrix file " + path + ": " + e.what());
    }
    auto m = matrix_from_json(j);
    if (m.size() != n)
      throw DesignMismatchError("matrix in " + path + " is " + std::to_string(m.size()) +
                                " x " + std::to_string(m.size()) + " but n = " +
                                std::to_string(n));
    return m;
  }

  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find(';', start), spec.size());
    const auto row = csv::split_line(spec.substr(start, end - start));
    if (row.size() != n)
      throw DesignMismatchError("matrix row " + std::to_string(rows + 1) + " has " +
                                std::to_string(row.size()) + " entries but n = " +
                                std::to_string(n));
    for (const auto& cell : row)
      entries.push_back(parse_number(cell, "matrix entry"));
    ++rows;
    start = end + 1;
  }
  if (rows != n)
    throw DesignMismatchError("matrix has " + std::to_string(rows) + " rows but n = " +
                              std::to_string(n));
  return { n, std::move(entries) };
}

Json to_json(const DensityEstimate& e)
{
  Json j;
  j["design"] = to_string(e.design);
  j["kernel"] = Kernel::from_family(e.kernel).name();
  j["bandwidth"] = e.bandwidth;
  j["sample_size"] = e.sample_size;
  j["subsets"] = e.subsets;
  j["data_min"] = e.data_min;
  j["data_max"] = e.data_max;
  if (e.center) {
    j["center"] = *e.center;
    j["center_kind"] = e.center_kind;
  }
  if (e.has_ci())
    j["ci_level"] = e.ci_level;
  j["grid"] = e.grid;
  j["f_hat"] = e.f_hat;
  if (e.has_variance()) {
    j["var_hat"] = e.var_hat;
    std::vector<int> clamped(e.var_clamped.begin(), e.var_clamped.end());
    j["var_clamped"] = clamped;
  }
  if (e.has_ci()) {
    j["ci_lo"] = e.ci_lo;
    j["ci_hi"] = e.ci_hi;
  }
  if (!e.warnings.empty())
    j["warnings"] = e.warnings;
  return j;
}

void write_density_csv(std::ostream& out, const DensityEstimate& e)
{
  out << "x,f_hat,var_hat,ci_lo,ci_hi,clamped_flag\n";
  for (std::size_t g = 0; g < e.grid.size(); ++g) {
    out << csv::format(e.grid[g]) << ',' << csv::format(e.f_hat[g]) << ',';
    if (e.has_variance())
      out << csv::format(e.var_hat[g]);
    out << ',';
    if (e.has_ci())
      out << csv::format(e.ci_lo[g]) << ',' << csv::format(e.ci_hi[g]);
    else
      out << ',';
    out << ',';
    if (e.has_variance())
      out << (e.var_clamped[g] ? 1 : 0);
    out << '\n';
  }
}

Json to_json(const EmTrace& t)
{
  Json j;
  j["alpha"] = to_json(t.final_alpha);
  j["converged"] = t.converged;
  j["iterations"] = t.iterations;
  j["cdf_clamp_eps"] = t.clamp_eps;
  j["sae_history"] = t.sae_history;
  j["objective_before"] = t.q_before;
  j["objective_after"] = t.q_after;
  if (!t.iterates.empty()) {
    Json it = Json::array();
    for (const auto& a : t.iterates)
      it.push_back(to_json(a)["entries"]);
    j["iterates"] = it;
  }
  return j;
}

Json to_json(const MeanSe& v)
{
  return Json{ { "mean", v.mean }, { "se", v.se } };
}

Json to_json(const SimulationReport& r)
{
  Json j;
  j["mise_srs"] = to_json(r.mise_srs);
  j["mise_rss"] = to_json(r.mise_rss);
  j["mise_pros"] = to_json(r.mise_pros);
  j["rp"] = to_json(r.rp);
  j["sp"] = to_json(r.sp);
  j["replicates"] = r.replicates;
  j["aborted"] = r.aborted;
  j["seed"] = r.seed;
  return j;
}

Json to_json(const SymmetryRow& r)
{
  static constexpr const char* names[5] = { "mu1_mean", "mu2_median", "mu3_hodges_lehmann",
                                            "mu4_cycle_median_mean", "known" };
  Json eff, mise;
  for (std::size_t k = 0; k < 5; ++k) {
    eff[names[k]] = to_json(r.efficiency[k]);
    mise[names[k]] = to_json(r.mise_symmetric[k]);
  }
  Json j;
  j["efficiency"] = eff;
  j["mise_symmetric"] = mise;
  j["mise_pros"] = to_json(r.mise_pros);
  j["replicates"] = r.replicates;
  j["aborted"] = r.aborted;
  j["seed"] = r.seed;
  return j;
}

Json to_json(const AlphaRecovery& a)
{
  auto square = [&](const std::vector<double>& v) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < a.n; ++r)
      rows.push_back(Json(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(r * a.n),
                                              v.begin() + static_cast<std::ptrdiff_t>((r + 1) * a.n))));
    return rows;
  };
  Json j;
  j["n"] = a.n;
  j["mean"] = square(a.mean);
  j["sd"] = square(a.sd);
  j["runs"] = a.runs;
  j["nonconverged"] = a.nonconverged;
  j["mean_iterations"] = a.mean_iterations;
  return j;
}

std::string dump(const Json& j)
{
  return j.dump(2) + "\n";
}

} // namespace pros
