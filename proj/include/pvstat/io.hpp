#ifndef PVSTAT_IO_HPP
#define PVSTAT_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvstat/ensemble.hpp"
#include "pvstat/errors.hpp"
#include "pvstat/meanfield.hpp"
#include "pvstat/sampler.hpp"

namespace pvstat::io {

using json = nlohmann::ordered_json;

/// Shortest text that round-trips the double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline json to_json(const SamplerConfig& c) {
  return {{"beta", c.beta},         {"steps", c.steps},         {"step_size", c.step_size},
          {"seed", c.seed},         {"thin", c.thin},           {"burn_in", c.burn_in},
          {"scaled_beta_min", c.scaled_beta_min}, {"tune_step_size", c.tune_step_size}};
}

inline json to_json(const VortexConfiguration& c) {
  json xs = json::array();
  for (Point p : c.positions()) xs.push_back({p.x, p.y});
  return xs;
}

/// Header line followed by one line per recorded configuration.
inline std::string chain_to_jsonl(const Chain& chain, const json& provenance = json::object()) {
  std::string out;
  json header = {{"type", "header"},
                 {"n", chain.samples.empty() ? 0 : chain.samples.front().size()},
                 {"lambda", chain.samples.empty() ? 0.0 : chain.samples.front().lambda()},
                 {"side", chain.samples.empty() ? 0.0 : chain.samples.front().domain().side()},
                 {"config", to_json(chain.config)},
                 {"acceptance_rate", chain.acceptance_rate},
                 {"final_step_size", chain.final_step_size},
                 {"samples", chain.samples.size()},
                 {"provenance", provenance}};
  out += header.dump() + '\n';
  for (std::size_t k = 0; k < chain.samples.size(); ++k) {
    json line = {{"index", k}, {"energy", chain.energies[k]}, {"positions", to_json(chain.samples[k])}};
    out += line.dump() + '\n';
  }
  return out;
}

inline json to_json(const FreeEnergyReport& r) {
  json j = {{"n", r.n},
            {"m", r.m},
            {"beta", r.beta},
            {"lambda", r.lambda},
            {"mode", to_string(r.mode)},
            {"log_z0", r.log_z0},
            {"f0", r.f0},
            {"f_var", r.f_var},
            {"f_var_gibbs", r.f_var_gibbs},
            {"most_probable", std::vector<int>(r.most_probable.occupations().begin(),
                                               r.most_probable.occupations().end())},
            {"most_probable_probability", r.most_probable_probability},
            {"truncation_term", r.truncation_term}};
  j["f_exact"] = r.f_exact ? json(*r.f_exact) : json(nullptr);
  j["oracle_error"] = r.oracle_error;
  j["tolerance"] = r.tolerance;
  j["bound_satisfied"] = r.bound_satisfied ? json(*r.bound_satisfied) : json(nullptr);
  return j;
}

inline json to_json(const OccupationSolution& s) {
  return {{"n", s.n},           {"beta", s.beta},           {"lambda", s.lambda},
          {"alpha", s.alpha},   {"residual", s.residual},   {"iterations", s.iterations},
          {"occupations", s.occupations}};
}

inline json to_json(const DecayStudy& d) {
  json rows = json::array();
  for (const auto& r : d.rows)
    rows.push_back({{"n", r.n},
                    {"m", r.m},
                    {"max_abs_e1", r.max_abs_e1},
                    {"bound", r.bound},
                    {"all_within_bound", r.all_within_bound},
                    {"max_first_term", r.max_first_term},
                    {"first_term_bound", r.first_term_bound},
                    {"iterations", r.iterations}});
  return {{"rows", rows}, {"monotone_decrease", d.monotone_decrease}};
}

inline json to_json(const ConvergenceStudy& c) {
  json rows = json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"n", r.n}, {"m", r.m}, {"nx", r.nx}, {"ny", r.ny}, {"l1_distance", r.l1_distance}});
  return {{"rows", rows},
          {"monotone_decrease", c.monotone_decrease},
          {"continuum_iterations", c.continuum_iterations}};
}

inline json to_json(const MeanField& mf) {
  const auto fit = log_density_fit(mf);
  return {{"beta", mf.beta},
          {"mesh", mf.mesh.resolution()},
          {"side", mf.mesh.domain().side()},
          {"include_e1", mf.include_e1},
          {"n_for_e1", mf.n_for_e1},
          {"d", mf.d},
          {"iterations", mf.iterations},
          {"residual", mf.residual},
          {"interior_laplacian_residual", interior_laplacian_residual(mf)},
          {"log_density_fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}}}};
}

inline json to_json(const SinhPoissonField& f) {
  const auto fit = fit_sinh(f);
  return {{"beta", f.beta},
          {"mesh", f.mesh.resolution()},
          {"side", f.mesh.domain().side()},
          {"iterations", f.iterations},
          {"residual", f.residual},
          {"sinh_fit",
           {{"a", fit.a},
            {"b", fit.b},
            {"amplitude", fit.amplitude},
            {"shift", fit.shift},
            {"rms_residual", fit.rms_residual},
            {"is_sinh", fit.is_sinh}}}};
}

/// Row-major P x P field as CSV, one mesh row per line.
inline std::string field_to_csv(std::span<const double> field, std::size_t p) {
  if (field.size() != p * p) throw InvalidArgument("field size does not match the mesh");
  std::string out;
  for (std::size_t iy = 0; iy < p; ++iy) {
    for (std::size_t ix = 0; ix < p; ++ix) {
      if (ix) out += ',';
      out += format_double(field[iy * p + ix]);
    }
    out += '\n';
  }
  return out;
}

/// Write through a temporary file in the same directory and rename into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace pvstat::io

#endif // PVSTAT_IO_HPP
