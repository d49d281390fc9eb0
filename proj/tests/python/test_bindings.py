# Copyright 2026 The polariton-sim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import polariton_sim as ps


def test_version_and_names():
    assert ps.__version__ == "0.1.0"
    names = ps.experiment_names()
    assert names[:2] == ["fig2a", "fig2b"]
    assert "custom" in names and len(names) == 10


def test_cooperativity_and_units():
    assert ps.cooperativity(0.765, 1.3, 0.04) == pytest.approx(45.0, abs=0.5)
    flux = ps.power_to_flux(425.0, 785.0)
    assert flux == pytest.approx(425e-12 * 785e-9 / (6.62607015e-34 * 299792458.0), rel=1e-12)
    assert ps.power_for_photons_per_lifetime(0.24, 1.3, 785.0) == pytest.approx(496.0, rel=0.01)


def test_params_round_trip():
    p = ps.SystemParams()
    q = p.with_triplet_ratio(100.0)
    assert q.triplet_ratio() == pytest.approx(100.0)
    p.kappa = -1.0
    with pytest.raises(ps.InvalidArgument):
        p.validate()


def test_empty_cavity_steady_state():
    p = ps.SystemParams()
    p.g = 0.0
    s = ps.steady_state(p, ps.DriveSpec.monochromatic(0.0, 10.0), n_fock=6, frame=ps.CavityFrame.lab)
    assert s["rho"].shape == (18, 18)
    assert abs(s["rho"].trace() - 1.0) < 1e-12
    assert s["photon_number"] == pytest.approx(abs(s["field_mean"]) ** 2, rel=1e-6)


def test_g2_super_bunching():
    p = ps.SystemParams()
    g2 = ps.g2_correlation(p, ps.DriveSpec.monochromatic(0.0, 1.0), [0.0, 1.0], n_fock=4)
    assert g2[0] > 50.0
    assert all(math.isfinite(v) for v in g2)


def test_field_harmonics_parity():
    p = ps.SystemParams()
    drive = ps.DriveSpec.bichromatic(ps.Tone(-0.15, 50.0), ps.Tone(0.15, 50.0))
    alpha = ps.field_harmonics(p, drive, n_fock=4, n_harmonics=6)
    assert set(alpha) == set(range(-6, 7))
    assert abs(alpha[2]) < 1e-9 and abs(alpha[3]) > 0.0


def test_run_and_outputs(tmp_path):
    r = ps.run("fig2a", {"sweep_points": "21"})
    assert r.experiment == "fig2a"
    assert r.scalars["peak_count"] == 1.0
    table = r.table
    assert list(table) == ["detuning_ghz", "transmission_norm"]
    assert len(table["detuning_ghz"]) == 21
    assert r.csv.splitlines()[0] == "detuning_ghz,transmission_norm"
    r.write(str(tmp_path))
    assert (tmp_path / "fig2a.csv").read_text() == r.csv
    assert (tmp_path / "fig2a.meta.txt").read_text() == r.meta
    assert ps.run("fig2a", {"sweep_points": "21"}, workers=2).csv == r.csv


def test_config_errors():
    with pytest.raises(ps.ConfigError):
        ps.run("nonexistent")
    with pytest.raises(ps.ConfigError):
        ps.run("fig2a", {"no_such_key": "1"})
    with pytest.raises(ValueError):
        ps.run("fig2a", {"power_pw": "abc"})
    assert ps.default_config("fig2a")["kappa"] == "1.3"


def test_numerical_error():
    p = ps.SystemParams()
    p.gamma_et = 0.0
    p.gamma_tg = 0.0
    with pytest.raises(ps.NumericalError):
        ps.steady_state(p, ps.DriveSpec.monochromatic(0.0, 1.0))


def test_convergence_check():
    ok = ps.convergence_check("fig2a", {"sweep_points": "11"})
    assert ok["pass"] and ok["worst"] < 1e-8
    starved = ps.convergence_check("custom", {"n_fock": "2", "power_pw": "20000", "sweep_points": "11"})
    assert not starved["pass"]
