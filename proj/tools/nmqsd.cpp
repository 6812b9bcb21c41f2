// Command-line front end: run ensembles, exact reference evolutions, noise
// statistics checks, Q-function snapshots, and the Heisenberg-cut comparison.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "nmqsd/analytic.hpp"
#include "nmqsd/ensemble.hpp"
#include "nmqsd/io.hpp"

namespace fs = std::filesystem;
using namespace nmqsd;

namespace {

struct CommonFlags {
  std::string config_path;
  int trajectories = -1;
  std::int64_t seed = -1;
  std::string out_dir;
  double dt = -1.0;
  double tmax = -1.0;
  std::string shift_convention;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON run-config path")->required();
  cmd->add_option("--trajectories", f.trajectories, "override trajectory count");
  cmd->add_option("--seed", f.seed, "override master seed");
  cmd->add_option("--out", f.out_dir, "override output directory");
  cmd->add_option("--dt", f.dt, "override grid dt");
  cmd->add_option("--tmax", f.tmax, "override grid t_max");
  cmd->add_option("--shift-convention", f.shift_convention,
                  "self-consistent or posthoc")
      ->check(CLI::IsMember({"self-consistent", "posthoc"}));
}

RunConfig load_with_overrides(const CommonFlags& f) {
  RunConfig c = load_config(f.config_path);
  if (f.trajectories >= 0) c.n_trajectories = f.trajectories;
  if (f.seed >= 0) c.master_seed = std::uint64_t(f.seed);
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.dt > 0) c.dt = f.dt;
  if (f.tmax > 0) c.t_max = f.tmax;
  if (f.shift_convention == "self-consistent")
    c.shift_convention = ShiftConvention::SelfConsistent;
  else if (f.shift_convention == "posthoc")
    c.shift_convention = ShiftConvention::PostHoc;
  c.resolved["grid"] = {{"dt", c.dt}, {"t_max", c.t_max}};
  c.resolved["n_trajectories"] = c.n_trajectories;
  c.resolved["master_seed"] = c.master_seed;
  if (!c.out_dir.empty()) fs::create_directories(c.out_dir);
  return c;
}

std::vector<std::string> reproducibility_header(const RunConfig& c) {
  return {"config: " + c.resolved.dump(), "seed: " + std::to_string(c.master_seed)};
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out_dir) / name).string();
}

std::vector<std::string> default_observables(int dim) {
  if (dim == 2) return {"sx", "sy", "sz"};
  return {"q", "p", "n"};
}

void emit_error(const char* kind, const std::string& message) {
  Json err = {{"error", {{"type", kind}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const DimensionTooLarge& e) {
    emit_error("dimension", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error("numerical", e.what());
    return 3;
  }
}

// ----- run --------------------------------------------------------------------

void write_trajectory_csv(const RunConfig& c, const std::string& name,
                          const std::vector<std::string>& obs_names,
                          const TrajectoryRecord& rec) {
  std::vector<std::string> cols{"t"};
  for (const auto& o : obs_names) {
    cols.push_back("re_" + o);
    cols.push_back("im_" + o);
  }
  cols.push_back("norm_sq");
  std::vector<std::vector<Real>> rows;
  for (size_t r = 0; r < rec.times.size(); ++r) {
    std::vector<Real> row{rec.times[r]};
    for (const Complex& v : rec.observables[r]) {
      row.push_back(v.real());
      row.push_back(v.imag());
    }
    row.push_back(rec.norm_sq[r]);
    rows.push_back(std::move(row));
  }
  write_csv(out_path(c, name), reproducibility_header(c), cols, rows);
}

int cmd_run(const CommonFlags& flags) {
  RunConfig c = load_with_overrides(flags);
  const ModelSpec model = c.make_model();
  const CorrelationKernel kernel = c.resolved_kernel(model);
  const TimeGrid grid = c.grid();

  std::vector<std::string> obs_names =
      c.observables.empty() ? default_observables(model.dim()) : c.observables;
  TrajectoryOptions topt;
  topt.mode = c.mode;
  topt.shift_convention = c.shift_convention;
  topt.sampler = c.sampler;
  topt.record_stride = c.record_stride;
  for (const auto& o : obs_names) topt.observables.push_back(observable_by_name(o, model.dim()));

  if (c.n_trajectories <= 16) {
    for (int i = 0; i < c.n_trajectories; ++i) {
      const TrajectoryRecord rec =
          run_trajectory(model, kernel, grid, derive_seed(c.master_seed, i), topt);
      write_trajectory_csv(c, "trajectory_" + std::to_string(i) + ".csv", obs_names, rec);
    }
  }

  EnsembleOptions eopt;
  eopt.n_trajectories = c.n_trajectories;
  eopt.master_seed = c.master_seed;
  eopt.trajectory = topt;
  const EnsembleResult ens = run_ensemble(model, kernel, grid, eopt);

  const int d = model.dim();
  std::vector<std::string> cols{"t"};
  if (d <= 8)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const std::string suf = std::to_string(i) + "_" + std::to_string(j);
        cols.push_back("re_rho_" + suf);
        cols.push_back("im_rho_" + suf);
        cols.push_back("se_rho_" + suf);
      }
  cols.push_back("mean_norm_sq");
  cols.push_back("se_norm_sq");
  for (const auto& o : obs_names) {
    cols.push_back("mean_" + o);
    cols.push_back("se_" + o);
  }
  std::vector<std::vector<Real>> rows;
  for (size_t r = 0; r < ens.times.size(); ++r) {
    std::vector<Real> row{ens.times[r]};
    if (d <= 8)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          row.push_back(ens.mean_rho[r](i, j).real());
          row.push_back(ens.mean_rho[r](i, j).imag());
          row.push_back(ens.se_rho[r](i, j));
        }
    row.push_back(ens.mean_norm[r]);
    row.push_back(ens.se_norm[r]);
    for (size_t o = 0; o < obs_names.size(); ++o) {
      row.push_back(ens.obs_mean[r][o]);
      row.push_back(ens.obs_se[r][o]);
    }
    rows.push_back(std::move(row));
  }
  write_csv(out_path(c, "ensemble.csv"), reproducibility_header(c), cols, rows);

  // analytic overlays for the two spin models
  if (model.name == "measurement_sigma_z" || model.name == "dissipative_spin") {
    const Matrix rho0 = model.psi0 * model.psi0.adjoint();
    AnalyticCurve curve;
    if (model.name == "measurement_sigma_z")
      curve = rho_sigma_z(rho0, model.omega, model.lambda, kernel, ens.times);
    else
      curve = rho_dissipative(rho0, model.omega, model.lambda, kernel, grid, c.record_stride);
    std::vector<std::string> acols{"t"};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const std::string suf = std::to_string(i) + "_" + std::to_string(j);
        acols.push_back("re_rho_" + suf);
        acols.push_back("im_rho_" + suf);
      }
    std::vector<std::vector<Real>> arows;
    for (size_t r = 0; r < curve.times.size(); ++r) {
      std::vector<Real> row{curve.times[r]};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          row.push_back(curve.values[r](i, j).real());
          row.push_back(curve.values[r](i, j).imag());
        }
      arows.push_back(std::move(row));
    }
    write_csv(out_path(c, "analytic.csv"), reproducibility_header(c), acols, arows);
  }

  Json summary = {{"config", c.resolved},
                  {"n_trajectories", ens.n},
                  {"n_absorbed", ens.n_absorbed},
                  {"n_truncation_suspect", ens.n_truncation_suspect},
                  {"n_failed", ens.n_failed},
                  {"n_record_points", ens.times.size()}};
  write_json(out_path(c, "summary.json"), summary);
  return 0;
}

// ----- oracle -----------------------------------------------------------------

int cmd_oracle(const CommonFlags& flags) {
  RunConfig c = load_with_overrides(flags);
  if (c.oracle_modes.empty()) throw ConfigError("oracle: config needs a 'modes' array");
  const ModelSpec model = c.make_model();
  MicroscopicModel micro{model.H, model.L, c.oracle_modes};
  const TimeGrid grid = c.grid();
  const std::vector<Matrix> rhos = evolve_exact(micro, model.psi0, grid, c.record_stride);

  std::vector<Real> times{0.0};
  for (int n = 0; n < grid.n_steps; ++n)
    if ((n + 1) % c.record_stride == 0 || n + 1 == grid.n_steps) times.push_back(grid.time(n + 1));

  const int d = model.dim();
  std::vector<std::string> cols{"t"};
  const bool full_rho = d <= 8;
  if (full_rho)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const std::string suf = std::to_string(i) + "_" + std::to_string(j);
        cols.push_back("re_rho_" + suf);
        cols.push_back("im_rho_" + suf);
      }
  else
    for (const auto& o : default_observables(d)) cols.push_back("mean_" + o);
  std::vector<Matrix> obs_mats;
  if (!full_rho)
    for (const auto& o : default_observables(d)) obs_mats.push_back(observable_by_name(o, d));

  std::vector<std::vector<Real>> rows;
  for (size_t r = 0; r < rhos.size(); ++r) {
    std::vector<Real> row{times[r]};
    if (full_rho)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          row.push_back(rhos[r](i, j).real());
          row.push_back(rhos[r](i, j).imag());
        }
    else
      for (const auto& A : obs_mats) row.push_back((A * rhos[r]).trace().real());
    rows.push_back(std::move(row));
  }
  write_csv(out_path(c, "oracle.csv"), reproducibility_header(c), cols, rows);

  if (!c.compare_ensemble.empty()) {
    const CsvTable ens = read_csv(c.compare_ensemble);
    const CsvTable orc = read_csv(out_path(c, "oracle.csv"));
    if (ens.rows.size() != orc.rows.size())
      throw ConfigError("oracle comparison: row count mismatch with " + c.compare_ensemble);
    Real max_dev = 0.0, max_sigma = 0.0;
    for (size_t col = 1; col < orc.columns.size(); ++col) {
      const std::string& name = orc.columns[col];
      const int ec = ens.column(name);
      if (ec < 0) continue;
      std::string se_name = name;
      const auto pos = se_name.find_first_of('_');
      se_name = "se" + se_name.substr(pos);  // re_rho_i_j -> se_rho_i_j, mean_x -> se_x
      const int sc = ens.column(se_name);
      for (size_t r = 0; r < orc.rows.size(); ++r) {
        const Real dev = std::abs(orc.rows[r][col] - ens.rows[r][ec]);
        max_dev = std::max(max_dev, dev);
        if (sc >= 0 && ens.rows[r][sc] > 0)
          max_sigma = std::max(max_sigma, dev / ens.rows[r][sc]);
      }
    }
    Json report = {{"config", c.resolved},
                   {"compared_to", c.compare_ensemble},
                   {"max_deviation", max_dev},
                   {"max_deviation_sigma", max_sigma}};
    write_json(out_path(c, "oracle_comparison.json"), report);
  }
  return 0;
}

// ----- noise-check ------------------------------------------------------------

int cmd_noise_check(const CommonFlags& flags) {
  RunConfig c = load_with_overrides(flags);
  if (!c.kernel) throw ConfigError("noise-check: config needs a 'kernel'");
  const CorrelationKernel kernel = *c.kernel;

  const int npts = 50;
  TimeGrid grid;
  grid.n_steps = npts - 1;
  grid.dt = c.t_max / grid.n_steps;

  Matrix sum_c = Matrix::Zero(npts, npts);   // Σ z_i z_j*
  Matrix sum_p = Matrix::Zero(npts, npts);   // Σ z_i z_j (pseudo-covariance)
  RealMatrix sumsq_c = RealMatrix::Zero(npts, npts);  // Σ |z_i z_j*|²
  RealMatrix sumsq_p = RealMatrix::Zero(npts, npts);
  for (int path = 0; path < c.n_paths; ++path) {
    const NoisePath np = sample_noise(kernel, grid, derive_seed(c.master_seed, path), c.sampler);
    for (int i = 0; i < npts; ++i)
      for (int j = 0; j <= i; ++j) {
        const Complex cij = np.z(i) * std::conj(np.z(j));
        const Complex pij = np.z(i) * np.z(j);
        sum_c(i, j) += cij;
        sum_p(i, j) += pij;
        sumsq_c(i, j) += std::norm(cij);
        sumsq_p(i, j) += std::norm(pij);
      }
  }

  const bool markov = is_markov(kernel);
  const Real n = Real(c.n_paths);
  Real worst_c = 0.0, worst_p = 0.0;
  std::vector<std::vector<Real>> rows;
  for (int i = 0; i < npts; ++i)
    for (int j = 0; j <= i; ++j) {
      const Complex emp = sum_c(i, j) / n;
      const Complex emp_p = sum_p(i, j) / n;
      const Complex expct =
          markov ? (i == j ? Complex(1.0 / grid.dt) : Complex(0.0))
                 : kernel_eval(kernel, grid.time(j), grid.time(i));  // M[z_t z*_s] = α(s,t)
      const Real se_c = std::sqrt(std::max(1e-300, sumsq_c(i, j) / n - std::norm(emp)) / n);
      const Real se_p = std::sqrt(std::max(1e-300, sumsq_p(i, j) / n - std::norm(emp_p)) / n);
      const Real zc = std::abs(emp - expct) / se_c;
      const Real zp = std::abs(emp_p) / se_p;
      worst_c = std::max(worst_c, zc);
      worst_p = std::max(worst_p, zp);
      rows.push_back({grid.time(i), grid.time(j), emp.real(), emp.imag(), expct.real(),
                      expct.imag(), zc, emp_p.real(), emp_p.imag(), zp});
    }
  write_csv(out_path(c, "noise_check.csv"), reproducibility_header(c),
            {"t", "s", "re_emp", "im_emp", "re_expected", "im_expected", "sigma_cov",
             "re_pseudo", "im_pseudo", "sigma_pseudo"},
            rows);
  const bool pass = worst_c <= 5.0 && worst_p <= 5.0;
  Json report = {{"config", c.resolved},
                 {"n_paths", c.n_paths},
                 {"max_sigma_covariance", worst_c},
                 {"max_sigma_pseudo", worst_p},
                 {"pass", pass}};
  write_json(out_path(c, "noise_check.json"), report);
  std::cout << (pass ? "PASS" : "FAIL") << " covariance " << worst_c << " sigma, pseudo "
            << worst_p << " sigma" << std::endl;
  return pass ? 0 : 3;
}

// ----- qplot ------------------------------------------------------------------

int cmd_qplot(const CommonFlags& flags) {
  RunConfig c = load_with_overrides(flags);
  if (c.model_name.empty()) c.model_name = "cat";
  const ModelSpec model = c.make_model();
  const CorrelationKernel kernel = c.resolved_kernel(model);
  const TimeGrid grid = c.grid();

  std::vector<Real> times = c.times;
  if (times.empty())
    for (Real t = 0.0; t <= c.t_max + 1e-12; t += 2.27 / model.omega) times.push_back(t);

  TrajectoryOptions topt;
  topt.mode = Mode::Nonlinear;
  topt.record_states = true;
  const TrajectoryRecord rec =
      run_trajectory(model, kernel, grid, derive_seed(c.master_seed, 0), topt);

  const PhaseSpaceGrid pg;
  Json manifest = {{"config", c.resolved}, {"snapshots", Json::array()}};
  for (size_t k = 0; k < times.size(); ++k) {
    size_t best = 0;
    for (size_t r = 1; r < rec.times.size(); ++r)
      if (std::abs(rec.times[r] - times[k]) < std::abs(rec.times[best] - times[k])) best = r;
    const RealMatrix Q = q_function(rec.states[best], pg);
    std::vector<std::vector<Real>> rows;
    for (int i = 0; i < pg.n_re; ++i)
      for (int j = 0; j < pg.n_im; ++j) rows.push_back({pg.re(i), pg.im(j), Q(i, j)});
    const std::string name = "q_" + std::to_string(k) + ".csv";
    write_csv(out_path(c, name), reproducibility_header(c), {"re_beta", "im_beta", "Q"}, rows);
    manifest["snapshots"].push_back({{"file", name}, {"t", rec.times[best]}});
  }
  write_json(out_path(c, "qplot_manifest.json"), manifest);
  return 0;
}

// ----- cut-check --------------------------------------------------------------

int cmd_cut_check(const CommonFlags& flags) {
  RunConfig c = load_with_overrides(flags);
  const TimeGrid grid = c.grid();
  const int stride = c.record_stride;

  std::vector<Real> max_dev;
  std::vector<Real> times;
  Real worst = 0.0, worst_id = 0.0;
  for (int r = 0; r < c.n_realizations; ++r) {
    const CutPairRecord rec = run_cut_pair(c.cut, grid, derive_seed(c.master_seed, r), stride);
    if (r == 0) {
      times = rec.times;
      max_dev.assign(rec.times.size(), 0.0);
    }
    for (size_t k = 0; k < rec.states.size(); ++k) {
      const Matrix d = rec.states[k].rho1() - rec.states[k].rho2();
      const Real dev = d.cwiseAbs().maxCoeff();
      max_dev[k] = std::max(max_dev[k], dev);
      worst = std::max(worst, dev);
      const CutPairState& s = rec.states[k];
      worst_id = std::max(worst_id, std::abs(s.c1 - s.v1));
      worst_id = std::max(worst_id, std::abs(s.c2 - (-I * s.F * s.v1)));
    }
  }
  std::vector<std::vector<Real>> rows;
  for (size_t k = 0; k < times.size(); ++k) rows.push_back({times[k], max_dev[k]});
  write_csv(out_path(c, "cut_check.csv"), reproducibility_header(c), {"t", "max_abs_rho1_minus_rho2"},
            rows);
  const bool pass = worst <= 1e-6 && worst_id <= 1e-6;
  Json report = {{"config", c.resolved},
                 {"n_realizations", c.n_realizations},
                 {"max_rho_deviation", worst},
                 {"max_identity_deviation", worst_id},
                 {"pass", pass}};
  write_json(out_path(c, "cut_check.json"), report);
  std::cout << (pass ? "PASS" : "FAIL") << " max|rho1-rho2| " << worst << ", identities "
            << worst_id << std::endl;
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-Markovian quantum state diffusion simulator"};
  app.require_subcommand(1);

  CommonFlags run_f, oracle_f, noise_f, qplot_f, cut_f;
  auto* run_cmd = app.add_subcommand("run", "trajectory/ensemble simulation");
  add_common(run_cmd, run_f);
  auto* oracle_cmd = app.add_subcommand("oracle", "exact system+environment reference");
  add_common(oracle_cmd, oracle_f);
  auto* noise_cmd = app.add_subcommand("noise-check", "sampler statistics validation");
  add_common(noise_cmd, noise_f);
  auto* qplot_cmd = app.add_subcommand("qplot", "Husimi Q-function snapshots");
  add_common(qplot_cmd, qplot_f);
  auto* cut_cmd = app.add_subcommand("cut-check", "Heisenberg-cut rho1 vs rho2");
  add_common(cut_cmd, cut_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) return guarded([&] { return cmd_run(run_f); });
  if (oracle_cmd->parsed()) return guarded([&] { return cmd_oracle(oracle_f); });
  if (noise_cmd->parsed()) return guarded([&] { return cmd_noise_check(noise_f); });
  if (qplot_cmd->parsed()) return guarded([&] { return cmd_qplot(qplot_f); });
  if (cut_cmd->parsed()) return guarded([&] { return cmd_cut_check(cut_f); });
  return 2;
}
