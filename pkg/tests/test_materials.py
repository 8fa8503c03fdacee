import dataclasses
import math
from importlib import resources

import pytest
from hypothesis import given, strategies as st
from scipy import constants as sc

from polaromech.errors import ConfigInvalid, OutOfRange, UnknownMaterial
from polaromech.materials import alloy_band_offsets, alloy_material, default_table, load_table, lookup_material

P_RANGE = st.floats(0.0, 0.25)


def test_gaas_anchors(gaas):
    assert gaas.poisson_ratio == 0.31
    assert abs(gaas.deformation_potential_e - gaas.deformation_potential_h) / sc.e == pytest.approx(9.7, rel=1e-12)
    assert gaas.refractive_index == 3.60


@pytest.mark.parametrize("name", ["GaAs", "AlAs", "InGaAs(0.05)", "InGaAs(0.25)"])
def test_lame_consistency_and_sound_speed(name):
    m = lookup_material(name)
    lam, mu = m.lame_lambda, m.lame_mu
    assert lam / (2 * (lam + mu)) == pytest.approx(m.poisson_ratio, rel=1e-6)
    c_s = m.plane_stress_sound_speed
    assert math.isfinite(c_s) and c_s > 0


def test_plane_stress_speed_near_tabulated_la(gaas):
    assert gaas.plane_stress_sound_speed == pytest.approx(gaas.sound_speed_LA, rel=0.15)


def test_heavy_hole_masses(gaas):
    assert gaas.effective_mass_h == pytest.approx(1 / (6.85 - 4.2), rel=1e-14)
    assert gaas.effective_mass_h_inplane == pytest.approx(1 / (6.85 + 2.1), rel=1e-14)


def test_lookup_is_bit_identical_and_immutable():
    a, b = lookup_material("InGaAs(0.05)"), lookup_material("InGaAs(0.05)")
    assert a == b
    with pytest.raises(dataclasses.FrozenInstanceError):
        a.density = 1.0


@pytest.mark.parametrize("name", ["InAs", "Si", "InGaAs(x)", "ingaas(0.1)", ""])
def test_unknown_material(name):
    with pytest.raises(UnknownMaterial):
        lookup_material(name)


@pytest.mark.parametrize("p", [-0.01, 0.26, 1.0])
def test_alloy_outside_fit_range(gaas, p):
    with pytest.raises(OutOfRange):
        alloy_band_offsets(p, gaas)
    with pytest.raises(OutOfRange):
        alloy_material(p)


def test_alloy_needs_gaas_host():
    with pytest.raises(UnknownMaterial):
        alloy_band_offsets(0.1, lookup_material("AlAs"))


def test_no_offset_without_indium(gaas):
    assert alloy_band_offsets(0.0, gaas) == (0.0, 0.0)


@given(P_RANGE)
def test_offset_sum_rule(p):
    gaas = lookup_material("GaAs")
    model = default_table().alloys["InGaAs"]
    d_ec, d_ev = alloy_band_offsets(p, gaas)
    assert d_ec >= 0 and d_ev >= 0
    assert d_ec + d_ev == pytest.approx(model.bandgap(0.0) - model.bandgap(p), rel=1e-14, abs=1e-30)
    assert 0 < model.conduction_offset_fraction(p) < 1


@given(P_RANGE, P_RANGE)
def test_bandgap_decreases_with_indium(p, q):
    model = default_table().alloys["InGaAs"]
    if p < q:
        assert model.bandgap(q) < model.bandgap(p)


def test_override_file_is_used(tmp_path):
    text = resources.files("polaromech.data").joinpath("materials.cfg").read_text()
    path = tmp_path / "m.cfg"
    path.write_text(text.replace("poisson_ratio = 0.31", "poisson_ratio = 0.30"))
    assert lookup_material("GaAs", load_table(path)).poisson_ratio == 0.30
    assert lookup_material("GaAs").poisson_ratio == 0.31


@pytest.mark.parametrize(
    "edit",
    [
        ("refractive_index = 3.60\n", ""),
        ("density = 5317 kg/m3", "density = 5317 m/s"),
        ("[alloy InGaAs]", "[mixture InGaAs]"),
    ],
)
def test_malformed_table(tmp_path, edit):
    text = resources.files("polaromech.data").joinpath("materials.cfg").read_text()
    path = tmp_path / "m.cfg"
    path.write_text(text.replace(*edit, 1))
    with pytest.raises(ConfigInvalid):
        load_table(path)
    with pytest.raises(ConfigInvalid):
        load_table(tmp_path / "absent.cfg")
