#include <doctest.h>

#include <cstdio>

#include "nmqsd/io.hpp"

using namespace nmqsd;

TEST_CASE("parse_config happy path") {
  const Json j = {
      {"model", {{"name", "dissipative_spin"}, {"params", {{"omega", 2.0}, {"lambda", 0.5}}}}},
      {"kernel", {{"type", "exponential"}, {"gamma", 3.0}, {"Omega", 2.0}}},
      {"grid", {{"dt", 0.002}, {"t_max", 4.0}}},
      {"mode", "linear"},
      {"shift_convention", "posthoc"},
      {"sampler", "cholesky"},
      {"n_trajectories", 250},
      {"master_seed", 42},
      {"observables", {"sz", "sx"}},
      {"record_stride", 10},
      {"out_dir", "/tmp/out"},
  };
  const RunConfig c = parse_config(j);
  CHECK(c.model_name == "dissipative_spin");
  CHECK(c.model_params.at("omega") == 2.0);
  CHECK(c.model_params.at("lambda") == 0.5);
  REQUIRE(c.kernel.has_value());
  const auto* ek = std::get_if<ExponentialKernel>(&*c.kernel);
  REQUIRE(ek != nullptr);
  CHECK(ek->gamma == 3.0);
  CHECK(ek->Omega == 2.0);
  CHECK(c.dt == 0.002);
  CHECK(c.t_max == 4.0);
  CHECK(c.mode == Mode::Linear);
  CHECK(c.shift_convention == ShiftConvention::PostHoc);
  CHECK(c.sampler == SamplerKind::Cholesky);
  CHECK(c.n_trajectories == 250);
  CHECK(c.master_seed == 42);
  REQUIRE(c.observables.size() == 2);
  CHECK(c.observables[0] == "sz");
  CHECK(c.record_stride == 10);
  CHECK(c.out_dir == "/tmp/out");
  CHECK(c.grid().n_steps == 2000);
  CHECK(c.grid().dt == 0.002);

  const ModelSpec m = c.make_model();
  CHECK(m.omega == 2.0);
  const CorrelationKernel rk = c.resolved_kernel(m);
  CHECK(std::get_if<ExponentialKernel>(&rk) != nullptr);

  // resolved copy carries the normalized kernel/grid/seed
  CHECK(c.resolved["kernel"]["type"] == "exponential");
  CHECK(c.resolved["grid"]["dt"] == 0.002);
  CHECK(c.resolved["master_seed"] == 42);
  CHECK(c.resolved["n_trajectories"] == 250);
}

TEST_CASE("parse_config defaults") {
  const RunConfig c = parse_config(Json::object());
  CHECK(c.dt == 1e-3);
  CHECK(c.t_max == 10.0);
  CHECK(c.mode == Mode::Nonlinear);
  CHECK(c.shift_convention == ShiftConvention::SelfConsistent);
  CHECK(c.sampler == SamplerKind::Default);
  CHECK(c.n_trajectories == 1);
  CHECK_FALSE(c.kernel.has_value());
  CHECK_THROWS_AS(c.make_model(), ConfigError);  // no model name
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config({{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"model", {{"name", "toy"}, {"extra", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"dt", 0.1}, {"t_max", 1.0}, {"steps", 5}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config({{"kernel", {{"type", "exponential"}, {"gamma", 1.0}, {"x", 2}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config({{"cut_params", {{"omega3", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"modes", {{{"omega", 1.0}, {"chi", 0.1}, {"cap", 3}}}}}),
                  ConfigError);
}

TEST_CASE("parse_config rejects bad values") {
  CHECK_THROWS_AS(parse_config({{"mode", "both"}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"shift_convention", "self"}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"sampler", "fft"}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"dt", -0.1}, {"t_max", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"dt", 0.1}}}}), ConfigError);  // t_max missing
  CHECK_THROWS_AS(parse_config({{"model", {{"params", {{"omega", 1.0}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"model", {{"name", "toy"}, {"params", {{"omega", "x"}}}}}}),
                  ConfigError);
}

TEST_CASE("kernel_from_json covers every kernel type") {
  {
    const auto k = kernel_from_json({{"type", "exponential"}, {"gamma", 2.0}});
    const auto* e = std::get_if<ExponentialKernel>(&k);
    REQUIRE(e != nullptr);
    CHECK(e->gamma == 2.0);
    CHECK(e->Omega == 0.0);  // optional
  }
  {
    const auto k = kernel_from_json({{"type", "single_mode"}, {"Omega", 0.7}});
    const auto* s = std::get_if<SingleModeKernel>(&k);
    REQUIRE(s != nullptr);
    CHECK(s->Omega == 0.7);
  }
  {
    const auto k = kernel_from_json(
        {{"type", "discrete_spectrum"},
         {"modes", {{{"omega", 1.0}, {"weight", 0.3}}, {{"omega", -1.0}, {"weight", 0.3}}}}});
    const auto* d = std::get_if<DiscreteSpectrumKernel>(&k);
    REQUIRE(d != nullptr);
    REQUIRE(d->modes.size() == 2);
    CHECK(d->modes[1].omega == -1.0);
  }
  {
    const auto k = kernel_from_json({{"type", "markov_delta"}});
    CHECK(std::get_if<MarkovDeltaKernel>(&k) != nullptr);
  }
  {
    const auto k = kernel_from_json(
        {{"type", "qbm_thermal"}, {"modes", {{{"omega", 1.0}, {"chi2", 0.2}, {"nbar", 1.5}}}}});
    const auto* q = std::get_if<QBMThermalKernel>(&k);
    REQUIRE(q != nullptr);
    CHECK(q->modes[0].nbar == 1.5);
  }
  {
    const auto k = kernel_from_json({{"type", "finite_temp_pair"},
                                     {"minus", {{{"omega", 1.0}, {"weight", 0.4}}}},
                                     {"plus", {{{"omega", -1.0}, {"weight", 0.1}}}}});
    const auto* f = std::get_if<FiniteTempPairKernel>(&k);
    REQUIRE(f != nullptr);
    CHECK(f->minus.modes[0].weight == 0.4);
    CHECK(f->plus.modes[0].omega == -1.0);
  }
  CHECK_THROWS_AS(kernel_from_json({{"type", "lorentzian"}}), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(Json::array()), ConfigError);
  CHECK_THROWS_AS(kernel_from_json({{"type", "exponential"}}), ConfigError);  // gamma missing
}

TEST_CASE("observable lookup by name") {
  const auto s = spin_operators();
  CHECK((observable_by_name("sy", 2) - s.sy).norm() == 0.0);
  CHECK((observable_by_name("sm", 2) - s.sm).norm() == 0.0);
  const auto b = boson_operators(8);
  CHECK((observable_by_name("q", 8) - b.q).norm() == 0.0);
  CHECK((observable_by_name("n", 8) - b.n).norm() == 0.0);
  CHECK_THROWS_AS(observable_by_name("q", 2), ConfigError);   // boson name in spin space
  CHECK_THROWS_AS(observable_by_name("sz", 8), ConfigError);  // spin name in boson space
  CHECK_THROWS_AS(observable_by_name("x", 4), ConfigError);
}

TEST_CASE("format_real round-trips doubles") {
  for (const Real v : {0.0, 1.0, -2.5e-17, 3.141592653589793, 1e300}) {
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(1.0) == "1.0000000000000000e+00");
}

TEST_CASE("csv write/read round trip") {
  const std::string path = "/tmp/nmqsd_test_io.csv";
  const std::vector<std::string> header = {"config: {}", "n=3"};
  const std::vector<std::string> cols = {"t", "re", "im"};
  const std::vector<std::vector<Real>> rows = {
      {0.0, 1.0, 0.0}, {0.1, 0.5403023058681398, -0.8414709848078965}, {0.2, -2.5e-17, 1e-3}};
  write_csv(path, header, cols, rows);
  const CsvTable table = read_csv(path);
  REQUIRE(table.header_lines.size() == 2);
  CHECK(table.header_lines[0] == "config: {}");
  CHECK(table.header_lines[1] == "n=3");
  REQUIRE(table.columns == cols);
  CHECK(table.column("re") == 1);
  CHECK(table.column("nope") == -1);
  REQUIRE(table.rows.size() == rows.size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) CHECK(table.rows[r][c] == rows[r][c]);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_csv("/tmp/nmqsd_missing.csv"), ConfigError);
}

TEST_CASE("json writer and config loader") {
  const std::string path = "/tmp/nmqsd_test_io.json";
  const Json j = {{"model", {{"name", "toy"}}}, {"grid", {{"dt", 0.01}, {"t_max", 2.0}}}};
  write_json(path, j);
  const RunConfig c = load_config(path);
  CHECK(c.model_name == "toy");
  CHECK(c.grid().n_steps == 200);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("/tmp/nmqsd_missing.json"), ConfigError);
}
