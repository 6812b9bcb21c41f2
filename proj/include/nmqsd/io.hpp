#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmqsd/dynamics.hpp"
#include "nmqsd/models.hpp"
#include "nmqsd/oracle.hpp"

namespace nmqsd {

using Json = nlohmann::json;

// One JSON run-config covers every subcommand; unknown keys are rejected.
struct RunConfig {
  std::string model_name;
  std::map<std::string, Real> model_params;
  std::optional<CorrelationKernel> kernel;  // defaults to the model's kernel
  Real dt = 1e-3;
  Real t_max = 10.0;
  Mode mode = Mode::Nonlinear;
  ShiftConvention shift_convention = ShiftConvention::SelfConsistent;
  SamplerKind sampler = SamplerKind::Default;
  int n_trajectories = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::string> observables;
  int record_stride = 1;
  std::string out_dir = ".";

  std::vector<OracleMode> oracle_modes;  // oracle subcommand
  std::string compare_ensemble;          // oracle: ensemble CSV to compare against

  int n_paths = 100000;      // noise-check
  std::vector<Real> times;   // qplot snapshot times
  int n_realizations = 20;   // cut-check
  CutParams cut;

  Json resolved;  // normalized config, embedded in every output header

  TimeGrid grid() const;
  ModelSpec make_model() const;
  CorrelationKernel resolved_kernel(const ModelSpec& model) const;
};

CorrelationKernel kernel_from_json(const Json& j);
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);

// Observable matrices by name for a given dimension: sx, sy, sz, sp, sm
// (dim 2) and q, p, n, a (boson spaces).
Matrix observable_by_name(const std::string& name, int dim);

std::string format_real(Real v);  // fixed 17-significant-digit scientific

// '#'-prefixed header lines (the resolved config among them), one column-name
// line, then numeric rows.
void write_csv(const std::string& path, const std::vector<std::string>& header_lines,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<Real>>& rows);

struct CsvTable {
  std::vector<std::string> header_lines;
  std::vector<std::string> columns;
  std::vector<std::vector<Real>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

void write_json(const std::string& path, const Json& j);

}  // namespace nmqsd
