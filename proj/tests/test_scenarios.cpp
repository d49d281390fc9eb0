// Copyright 2026 The polariton-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polsim/errors.hpp"
#include "polsim/scenarios.hpp"

using namespace polsim;

namespace {

// Reduced grids so the whole suite stays quick; the physics keys keep their defaults.
ExperimentConfig small(const std::string& name) {
  auto c = ExperimentConfig::defaults(name);
  const Experiment e = c.experiment();
  if (e == Experiment::fig2a || e == Experiment::fig2c) c.set("sweep_points", "41");
  if (e == Experiment::fig2b || e == Experiment::fig2d) c.set("sweep_points", "401");
  if (e == Experiment::fig2e) c.set("sweep_points", "15");
  if (e == Experiment::fig2f) c.set("sweep_points", "41");
  if (e == Experiment::fig3) c.set("sweep_points", "301");
  if (e == Experiment::fig4a || e == Experiment::fig4b) c.set("sweep_points", "5");
  if (e == Experiment::fig4b) c.set("row_points", "2");
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("experiment names and configuration keys") {
  CHECK(to_string(parse_experiment("fig2c")) == "fig2c");
  CHECK(named_experiments().size() == 9);
  CHECK_THROWS_AS(parse_experiment("nonexistent"), ConfigError);

  auto c = ExperimentConfig::defaults("fig2a");
  CHECK_THROWS_AS(c.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("power_pw", "lots"), ConfigError);
  CHECK_THROWS_AS(c.set("n_fock", "6.5"), ConfigError);
  CHECK_THROWS_AS(c.set("n_harmonics", "auto"), ConfigError);  // fig2a has no harmonic truncation
  c.set("power_pw", "2.5");
  CHECK(c.number("power_pw") == 2.5);
  CHECK(c.overridden().count("power_pw") == 1);

  auto f3 = ExperimentConfig::defaults("fig3");
  f3.set("n_harmonics", "auto");
  f3.set("n_harmonics", "12");
  CHECK(*f3.numerics().n_harmonics == 12);
  CHECK_THROWS_AS(f3.set("n_harmonics", "0"), ConfigError);
}

TEST_CASE("sweep grids hit their endpoints") {
  SweepSpec lin{"x", -4.0, 4.0, 161, false};
  const auto v = lin.values();
  CHECK(v.front() == -4.0);
  CHECK(v.back() == 4.0);
  CHECK(v[80] == 0.0);
  SweepSpec lg{"p", 0.1, 1e7, 41, true};
  const auto w = lg.values();
  CHECK(w.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(w.back() == doctest::Approx(1e7).epsilon(1e-15));
  CHECK(w[5] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("config file overrides") {
  const auto path = std::filesystem::temp_directory_path() / "polsim_test_config.txt";
  {
    std::ofstream out(path);
    out << "# comment\n\npower_pw = 3\njitter_fwhm=0.5\n";
  }
  auto c = ExperimentConfig::defaults("fig2c");
  c.apply_file(path.string());
  CHECK(c.number("power_pw") == 3.0);
  CHECK(c.number("jitter_fwhm") == 0.5);
  {
    std::ofstream out(path);
    out << "not a pair\n";
  }
  CHECK_THROWS_AS(c.apply_file(path.string()), ConfigError);
  CHECK_THROWS_AS(c.apply_file("/nonexistent/config.txt"), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  const auto c = small("fig2c");
  const auto a = run(c, {1});
  const auto b = run(c, {1});
  const auto d = run(c, {3});
  CHECK(csv_text(a) == csv_text(b));
  CHECK(meta_text(a) == meta_text(b));
  CHECK(csv_text(a) == csv_text(d));
  CHECK(meta_text(a) == meta_text(d));

  const auto dir = std::filesystem::temp_directory_path() / "polsim_test_out";
  std::filesystem::remove_all(dir);
  write_outputs(a, dir.string());
  CHECK(slurp(dir / "fig2c.csv") == csv_text(a));
  CHECK(slurp(dir / "fig2c.meta.txt") == meta_text(a));
  std::filesystem::remove_all(dir);
}

TEST_CASE("every resolved key is consumed and echoed") {
  for (Experiment e : named_experiments()) {
    const auto c = small(to_string(e));
    CAPTURE(to_string(e));
    const auto r = run(c);
    std::set<std::string> keys;
    for (const auto& [k, v] : c.values()) keys.insert(k);
    CHECK(c.consumed() == keys);
    std::map<std::string, std::string> echoed;
    for (const auto& [k, v] : r.provenance) echoed[k] = v;
    for (const auto& [k, v] : c.values()) CHECK(echoed.at("config." + k) == v);
    CHECK(echoed.at("experiment") == to_string(e));
    CHECK((!r.curves.empty() || r.matrix.has_value()));
  }
}

TEST_CASE("fig2a table layout") {
  const auto r = run(small("fig2a"));
  const std::string csv = csv_text(r);
  CHECK(csv.substr(0, csv.find('\n')) == "detuning_ghz,transmission_norm");
  CHECK(r.scalars.at("fwhm_ghz") == doctest::Approx(1.3).epsilon(0.01));
}

TEST_CASE("triplet ratio fit") {
  SystemParams p;
  const auto space = build_space(5);
  InstrumentModel inst;
  std::vector<double> grid;
  for (int k = 0; k < 6; ++k) grid.push_back(5.0 * std::pow(10.0, 0.3 * k));
  const double r_true = 5.0;
  // The curve needs a point at the asymptote; the fit sees only the low-power part.
  auto s_at = [&](double r) {
    auto full = grid;
    full.push_back(1e7);
    auto y = saturation_curve(p.with_triplet_ratio(r), full, inst, space).y;
    y.pop_back();
    return y;
  };
  const Curve observed{"power_pw", "saturation_s", grid, s_at(r_true), {}, {}};

  const TripletFit fit = fit_triplet_ratio(p, observed, 0.01, 1000.0, space);
  CHECK(fit.ratio == doctest::Approx(r_true).epsilon(0.01));
  CHECK(!fit.at_boundary);

  auto residual_at = [&](double r) {
    const auto sim = s_at(r);
    double s = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) s += std::pow(sim[k] - observed.y[k], 2);
    return s;
  };
  CHECK(fit.residual <= residual_at(0.5 * fit.ratio));
  CHECK(fit.residual <= residual_at(2.0 * fit.ratio));

  SystemParams dark = p;
  dark.gamma_et = 0.0;
  const TripletFit flat = fit_triplet_ratio(dark, observed, 0.01, 1000.0, space);
  CHECK(flat.at_boundary);
}

TEST_CASE("saturation curve") {
  auto c = small("fig2e");
  const auto r = run(c);
  const Curve& s = r.curves[0];
  CHECK(r.scalars.at("low_power_slope") == doctest::Approx(1.0).epsilon(0.02));
  // Transmission rises toward the empty cavity once the molecule saturates.
  const auto& t = s.columns[1].second;
  CHECK(s.columns[1].first == "transmission_norm");
  for (size_t k = 1; k < t.size(); ++k) CHECK(t[k] >= t[k - 1]);
  CHECK(t.back() > 0.9);
  CHECK(t.back() <= 1.0 + 1e-9);

  SystemParams p;
  CHECK_THROWS_AS(rho_ee_asymptote(p, 1e3, build_space(5)), RangeError);
}

TEST_CASE("switching map rows") {
  SystemParams p;
  p.g = 0.63;
  p.eta_cpl = 0.18;
  p.gamma_tg = p.gamma_et / 100.0;
  const auto space = build_space(5);
  const Tone probe{0.0, 5.0};
  const std::vector<double> powers{0.0, 100.0, 1000.0, 5000.0};
  const auto m = switching_map(p, {0.3, 10.0}, powers, probe, space);
  const double off = m.values[0][0];
  for (double v : m.values[1]) CHECK(v == doctest::Approx(off).epsilon(0.05));
  for (size_t k = 0; k < powers.size(); ++k) {
    CHECK(m.values[0][k] == probe_transmission(p, {0.3, powers[k]}, probe, space).transmission);
  }
  CHECK(switching_contrast(p, {0.3, 0.0}, probe, space) == 0.0);
  CHECK(crossing_power(powers, m.values[0]) > 0.0);
  CHECK(std::isnan(crossing_power(powers, m.values[1])));
}

TEST_CASE("fig4a and the dashed row of fig4b agree") {
  const auto a = run(small("fig4a"));
  const auto b = run(small("fig4b"));
  REQUIRE(b.matrix);
  const auto& m = *b.matrix;
  int row = -1;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    if (std::abs(m.rows[i] - 0.3) < 1e-12) row = static_cast<int>(i);
  }
  REQUIRE(row >= 0);
  const auto& curve = a.curves[0];
  REQUIRE(curve.y.size() == m.cols.size());
  for (size_t k = 0; k < curve.y.size(); ++k) CHECK(std::abs(m.values[row][k] - curve.y[k]) < 1e-9);

  // Contrast rises with pump power up to its plateau.
  const auto& contrast = curve.columns.back().second;
  const size_t top = std::max_element(contrast.begin(), contrast.end()) - contrast.begin();
  for (size_t k = 1; k <= top; ++k) CHECK(contrast[k] > contrast[k - 1]);
}

TEST_CASE("default probe power is in the linear regime") {
  SystemParams p;
  p.g = 0.63;
  p.eta_cpl = 0.18;
  p.gamma_tg = p.gamma_et / 100.0;
  const auto space = build_space(6);
  const double probe = 0.1 * saturation_power(p, space);
  const double pump = power_for_photons_per_lifetime(1.0, p.kappa, p.lambda_nm);
  const double full = probe_transmission(p, {0.3, pump}, {0.0, probe}, space).transmission;
  const double half = probe_transmission(p, {0.3, pump}, {0.0, 0.5 * probe}, space).transmission;
  CHECK(std::abs(full - half) < 0.01 * half);
}

TEST_CASE("convergence check") {
  const auto fig2a = convergence_check(ExperimentConfig::defaults("fig2a"));
  CHECK(fig2a.pass);
  CHECK(fig2a.worst < 1e-8);
  CHECK(fig2a.n_fock_check == 8);

  auto starved = ExperimentConfig::defaults("custom");
  starved.set("n_fock", "2");
  starved.set("power_pw", "20000");
  starved.set("sweep_points", "11");
  const auto report = convergence_check(starved);
  CHECK(!report.pass);
  CHECK(report.worst >= 1e-4);
}
