#include "nmqsd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nmqsd/hilbert.hpp"

namespace nmqsd {

namespace {

void check_keys(const Json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

Real require_number(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j[key].get<Real>();
}

}  // namespace

CorrelationKernel kernel_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ConfigError("kernel: expected an object with a 'type' key");
  const std::string type = j["type"].get<std::string>();
  if (type == "exponential") {
    check_keys(j, "kernel", {"type", "gamma", "Omega"});
    return ExponentialKernel{require_number(j, "kernel", "gamma"),
                             j.value("Omega", 0.0)};
  }
  if (type == "single_mode") {
    check_keys(j, "kernel", {"type", "Omega"});
    return SingleModeKernel{require_number(j, "kernel", "Omega")};
  }
  if (type == "discrete_spectrum") {
    check_keys(j, "kernel", {"type", "modes"});
    DiscreteSpectrumKernel k;
    for (const auto& m : j.at("modes")) {
      check_keys(m, "kernel.modes[]", {"omega", "weight"});
      k.modes.push_back({require_number(m, "kernel.modes[]", "omega"),
                         require_number(m, "kernel.modes[]", "weight")});
    }
    return k;
  }
  if (type == "markov_delta") {
    check_keys(j, "kernel", {"type"});
    return MarkovDeltaKernel{};
  }
  if (type == "qbm_thermal") {
    check_keys(j, "kernel", {"type", "modes"});
    QBMThermalKernel k;
    for (const auto& m : j.at("modes")) {
      check_keys(m, "kernel.modes[]", {"omega", "chi2", "nbar"});
      k.modes.push_back({require_number(m, "kernel.modes[]", "omega"),
                         require_number(m, "kernel.modes[]", "chi2"),
                         require_number(m, "kernel.modes[]", "nbar")});
    }
    return k;
  }
  if (type == "finite_temp_pair") {
    check_keys(j, "kernel", {"type", "minus", "plus"});
    FiniteTempPairKernel k;
    for (const auto& m : j.at("minus"))
      k.minus.modes.push_back({require_number(m, "kernel.minus[]", "omega"),
                               require_number(m, "kernel.minus[]", "weight")});
    for (const auto& m : j.at("plus"))
      k.plus.modes.push_back({require_number(m, "kernel.plus[]", "omega"),
                              require_number(m, "kernel.plus[]", "weight")});
    return k;
  }
  throw ConfigError("kernel.type: unknown kernel type '" + type + "'");
}

namespace {

Json kernel_to_json(const CorrelationKernel& kernel) {
  Json j;
  std::visit(
      [&j](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          j = {{"type", "exponential"}, {"gamma", k.gamma}, {"Omega", k.Omega}};
        } else if constexpr (std::is_same_v<T, SingleModeKernel>) {
          j = {{"type", "single_mode"}, {"Omega", k.Omega}};
        } else if constexpr (std::is_same_v<T, DiscreteSpectrumKernel>) {
          j = {{"type", "discrete_spectrum"}, {"modes", Json::array()}};
          for (const auto& m : k.modes)
            j["modes"].push_back({{"omega", m.omega}, {"weight", m.weight}});
        } else if constexpr (std::is_same_v<T, MarkovDeltaKernel>) {
          j = {{"type", "markov_delta"}};
        } else if constexpr (std::is_same_v<T, QBMThermalKernel>) {
          j = {{"type", "qbm_thermal"}, {"modes", Json::array()}};
          for (const auto& m : k.modes)
            j["modes"].push_back({{"omega", m.omega}, {"chi2", m.chi2}, {"nbar", m.nbar}});
        } else {
          j = {{"type", "finite_temp_pair"}, {"minus", Json::array()}, {"plus", Json::array()}};
          for (const auto& m : k.minus.modes)
            j["minus"].push_back({{"omega", m.omega}, {"weight", m.weight}});
          for (const auto& m : k.plus.modes)
            j["plus"].push_back({{"omega", m.omega}, {"weight", m.weight}});
        }
      },
      kernel);
  return j;
}

}  // namespace

RunConfig parse_config(const Json& j) {
  check_keys(j, "config",
             {"model", "kernel", "grid", "mode", "n_trajectories", "master_seed", "observables",
              "record_stride", "out_dir", "shift_convention", "sampler", "modes",
              "compare_ensemble", "n_paths", "times", "n_realizations", "cut_params"});
  RunConfig c;

  if (j.contains("model")) {
    const Json& m = j["model"];
    check_keys(m, "model", {"name", "params"});
    if (!m.contains("name")) throw ConfigError("model: missing key 'name'");
    c.model_name = m["name"].get<std::string>();
    if (m.contains("params")) {
      if (!m["params"].is_object()) throw ConfigError("model.params: expected an object");
      for (const auto& p : m["params"].items()) {
        if (!p.value().is_number()) throw ConfigError("model.params." + p.key() + ": not a number");
        c.model_params[p.key()] = p.value().get<Real>();
      }
    }
  }

  if (j.contains("kernel")) c.kernel = kernel_from_json(j["kernel"]);

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    check_keys(g, "grid", {"dt", "t_max"});
    c.dt = require_number(g, "grid", "dt");
    c.t_max = require_number(g, "grid", "t_max");
    if (c.dt <= 0 || c.t_max <= 0) throw ConfigError("grid: dt and t_max must be positive");
  }

  if (j.contains("mode")) {
    const std::string m = j["mode"].get<std::string>();
    if (m == "linear")
      c.mode = Mode::Linear;
    else if (m == "nonlinear")
      c.mode = Mode::Nonlinear;
    else
      throw ConfigError("mode: expected 'linear' or 'nonlinear'");
  }

  if (j.contains("shift_convention")) {
    const std::string s = j["shift_convention"].get<std::string>();
    if (s == "self-consistent")
      c.shift_convention = ShiftConvention::SelfConsistent;
    else if (s == "posthoc")
      c.shift_convention = ShiftConvention::PostHoc;
    else
      throw ConfigError("shift_convention: expected 'self-consistent' or 'posthoc'");
  }

  if (j.contains("sampler")) {
    const std::string s = j["sampler"].get<std::string>();
    if (s == "default")
      c.sampler = SamplerKind::Default;
    else if (s == "spectral")
      c.sampler = SamplerKind::Spectral;
    else if (s == "cholesky")
      c.sampler = SamplerKind::Cholesky;
    else if (s == "ou")
      c.sampler = SamplerKind::OU;
    else
      throw ConfigError("sampler: unknown sampler '" + s + "'");
  }

  if (j.contains("n_trajectories")) c.n_trajectories = j["n_trajectories"].get<int>();
  if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("record_stride")) c.record_stride = j["record_stride"].get<int>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("observables"))
    for (const auto& o : j["observables"]) c.observables.push_back(o.get<std::string>());
  if (j.contains("modes"))
    for (const auto& m : j["modes"]) {
      check_keys(m, "modes[]", {"omega", "chi", "n_trunc"});
      c.oracle_modes.push_back({require_number(m, "modes[]", "omega"),
                                require_number(m, "modes[]", "chi"),
                                m.at("n_trunc").get<int>()});
    }
  if (j.contains("compare_ensemble")) c.compare_ensemble = j["compare_ensemble"].get<std::string>();
  if (j.contains("n_paths")) c.n_paths = j["n_paths"].get<int>();
  if (j.contains("times"))
    for (const auto& t : j["times"]) c.times.push_back(t.get<Real>());
  if (j.contains("n_realizations")) c.n_realizations = j["n_realizations"].get<int>();
  if (j.contains("cut_params")) {
    const Json& p = j["cut_params"];
    check_keys(p, "cut_params", {"omega1", "omega2", "lambda", "chi"});
    if (p.contains("omega1")) c.cut.omega1 = p["omega1"].get<Real>();
    if (p.contains("omega2")) c.cut.omega2 = p["omega2"].get<Real>();
    if (p.contains("lambda")) c.cut.lambda = p["lambda"].get<Real>();
    if (p.contains("chi")) c.cut.chi = p["chi"].get<Real>();
  }

  // Normalized copy for reproducibility headers.
  Json r = j;
  if (c.kernel) r["kernel"] = kernel_to_json(*c.kernel);
  r["grid"] = {{"dt", c.dt}, {"t_max", c.t_max}};
  r["master_seed"] = c.master_seed;
  r["n_trajectories"] = c.n_trajectories;
  c.resolved = r;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

TimeGrid RunConfig::grid() const {
  TimeGrid g;
  g.dt = dt;
  g.n_steps = std::max(1, int(std::lround(t_max / dt)));
  return g;
}

ModelSpec RunConfig::make_model() const {
  if (model_name.empty()) throw ConfigError("config: missing model.name");
  return model_by_name(model_name, model_params);
}

CorrelationKernel RunConfig::resolved_kernel(const ModelSpec& model) const {
  return kernel ? *kernel : model.default_kernel;
}

Matrix observable_by_name(const std::string& name, int dim) {
  if (dim == 2) {
    const auto s = spin_operators();
    if (name == "sx") return s.sx;
    if (name == "sy") return s.sy;
    if (name == "sz") return s.sz;
    if (name == "sp") return s.sp;
    if (name == "sm") return s.sm;
  } else {
    const auto b = boson_operators(dim);
    if (name == "q") return b.q;
    if (name == "p") return b.p;
    if (name == "n") return b.n;
    if (name == "a") return b.a;
  }
  throw ConfigError("unknown observable '" + name + "' for dimension " + std::to_string(dim));
}

std::string format_real(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header_lines,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<Real>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  for (const auto& line : header_lines) out << "# " << line << '\n';
  for (size_t c = 0; c < columns.size(); ++c) out << columns[c] << (c + 1 < columns.size() ? "," : "");
  out << '\n';
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c)
      out << format_real(row[c]) << (c + 1 < row.size() ? "," : "");
    out << '\n';
  }
}

int CsvTable::column(const std::string& name) const {
  for (size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return int(c);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.header_lines.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_columns) {
      while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
      have_columns = true;
      continue;
    }
    std::vector<Real> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace nmqsd
