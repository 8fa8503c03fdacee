import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants as sc

from polaromech.errors import OutOfRange, QWOutsideSpacer, SingularTransfer
from polaromech.pillar_modes import (
    ALPHA01,
    PillarGeometry,
    calibrate_mass_factor,
    dbr_dispersion,
    envelope_deviation,
    envelope_peak,
    field_reductions,
    mass_calibration_factor,
    pillar_mech_mode,
    radiative_linewidth,
    reduction_point,
    transfer_matrix_envelope,
    vertical_envelope,
)

DBR = dbr_dispersion(3.5, 2.9, 850e-9)
OFFSETS = (15e-9, -15e-9, 39e-9, -39e-9)


@pytest.fixture(scope="module")
def pillar():
    return PillarGeometry(1.3e-6, DBR, qw_offsets=OFFSETS)


def test_dbr_effective_index_and_penetration():
    assert DBR.effective_index == pytest.approx(2 * 3.5 * 2.9 / 6.4, rel=1e-12)
    assert DBR.effective_index == pytest.approx(3.2, rel=0.02)
    assert 2 * DBR.penetration_length == pytest.approx(850e-9 / (2 * 0.6), rel=1e-12)
    assert DBR.penetration_length == pytest.approx(354.17e-9, rel=1e-5)


def test_bloch_phase_at_stop_band_centre():
    phase = DBR.bloch_phase(850e-9)
    assert phase.real == pytest.approx(np.pi, rel=1e-12)
    # exact per-period decay of a quarter-wave stack is n2/n1
    assert phase.imag == pytest.approx(np.log(3.5 / 2.9), rel=1e-9)
    assert DBR.complex_index(850e-9).real == pytest.approx(DBR.effective_index, rel=1e-12)


def test_homogeneous_stack_has_no_stop_band():
    flat = dbr_dispersion(3.2, 3.2)
    lam = np.linspace(600e-9, 1200e-9, 301)
    assert np.all(flat.complex_index(lam).imag == 0)


def test_stop_band_edges_are_real_outside():
    lam = np.array([700e-9, 1000e-9])
    assert np.all(DBR.complex_index(lam).imag == 0)


def test_vertical_envelope_normalized_and_odd(pillar):
    mode = vertical_envelope(pillar)
    z = np.linspace(-12e-6, 12e-6, 2_400_001)
    u = mode.vertical(z)
    assert np.trapezoid(u * u, z) == pytest.approx(1.0, rel=1e-6)
    assert mode.vertical(0.0) == 0.0
    np.testing.assert_allclose(mode.vertical(-z[:10]), -mode.vertical(z[:10]))


def test_radial_envelope_normalized(pillar):
    mode = vertical_envelope(pillar)
    r = np.linspace(0, pillar.radius, 200001)
    assert 2 * np.pi * np.trapezoid(mode.radial(r) ** 2 * r, r) == pytest.approx(1.0, rel=1e-6)
    assert abs(mode.radial(pillar.radius)) < 1e-12 * mode.radial(0.0)


def test_transfer_matrix_uniform_medium_is_a_standing_wave():
    flat = PillarGeometry(1e-6, dbr_dispersion(3.3, 3.3), n_pairs=3)
    z, u = transfer_matrix_envelope(flat)
    ref = np.sin(3.3 * flat.dbr.k0 * z)
    ref /= np.sqrt(2 * np.trapezoid(ref**2, z))
    np.testing.assert_allclose(u, ref, rtol=0, atol=1e-12 * np.abs(ref).max())


def test_transfer_matrix_rejects_unphysical_layers():
    with pytest.raises(SingularTransfer):
        transfer_matrix_envelope(PillarGeometry(1e-6, dbr_dispersion(3.5, 2.9, -850e-9)))


def test_envelope_matches_transfer_matrix(pillar):
    cmp = envelope_deviation(pillar)
    assert cmp.overlap_defect < 1e-3
    assert cmp.overlap_defect == pytest.approx(2.1147e-4, rel=1e-3)


def test_radiative_linewidth_below_measured(pillar):
    kappa_rad = radiative_linewidth(pillar) / (2 * np.pi)
    assert kappa_rad == pytest.approx(4.0837e9, rel=1e-4)
    # the rest of the 7.2 GHz total is residual absorption, which must be positive
    assert 7.2e9 - kappa_rad > 0


def test_more_pairs_narrow_the_cavity():
    widths = [radiative_linewidth(PillarGeometry(1.3e-6, DBR, n_pairs=n)) for n in (15, 20, 25)]
    assert widths[0] > widths[1] > widths[2]


def test_strain_normalization_exact_form(pillar):
    mode = pillar_mech_mode(pillar)
    optics = vertical_envelope(pillar)
    product = mode.strain_normalization * optics.vertical_normalization * optics.radial_normalization
    b, lt = DBR.beta, DBR.penetration_length
    z_star = np.arccos((1 + 4 * b * b * lt * lt) ** -0.5) / b
    assert reduction_point(DBR) == pytest.approx(z_star, rel=1e-15)
    assert product == pytest.approx(1 / (np.exp(-z_star / (2 * lt)) * np.sin(b * z_star)), rel=1e-12)
    assert product == pytest.approx(1.0972089, rel=1e-7)


@pytest.mark.xfail(strict=True, reason="exact normalization differs from the exponential estimate by 1.8e-3")
def test_strain_normalization_exponential_estimate(pillar):
    mode = pillar_mech_mode(pillar)
    optics = vertical_envelope(pillar)
    product = mode.strain_normalization * optics.vertical_normalization * optics.radial_normalization
    assert product == pytest.approx(np.exp(DBR.delta_n / (2 * DBR.effective_index)), rel=1e-3)


def test_strain_normalization_exponential_estimate_intrinsic_gap(pillar):
    optics = vertical_envelope(pillar)
    product = pillar_mech_mode(pillar).strain_normalization * optics.vertical_normalization * optics.radial_normalization
    assert product == pytest.approx(np.exp(DBR.delta_n / (2 * DBR.effective_index)), rel=2.5e-3)


def test_strain_is_axial_derivative_of_displacement(pillar):
    mode = pillar_mech_mode(pillar)
    z = np.linspace(-200e-9, 200e-9, 40001)
    r = 0.3e-6
    num = np.gradient(mode.displacement(r, z), z)
    np.testing.assert_allclose(mode.strain(r, z)[1:-1], num[1:-1], atol=2e-4 * np.abs(num).max())
    optics = vertical_envelope(pillar)
    du = np.gradient(optics.vertical(z), z)
    ref = mode.strain_normalization * optics.radial(r) * du
    np.testing.assert_allclose(mode.strain(r, z)[1:-1], ref[1:-1], atol=2e-4 * np.abs(ref).max())
    assert mode.displacement(0.0, reduction_point(DBR)) == pytest.approx(1.0, rel=1e-12)


def test_reference_pillar_mechanics(pillar):
    mode = pillar_mech_mode(pillar)
    assert mode.frequency == pytest.approx(19.6e9, rel=0.01)
    assert mode.mass == pytest.approx(0.7e-15, rel=0.10)
    assert mode.x_zpf == pytest.approx(0.8e-15, rel=0.10)
    assert 2 * mode.mass * mode.omega * mode.x_zpf**2 == pytest.approx(sc.hbar, rel=1e-12)
    expected = np.sqrt((2 * np.pi * 19.5e9) ** 2 + (ALPHA01 * 5270.0 / 2.6e-6) ** 2)
    assert mode.omega == pytest.approx(expected, rel=1e-14)


def test_frozen_mass_calibration_is_reproducible(pillar):
    assert calibrate_mass_factor(pillar, 0.7e-15) == pytest.approx(mass_calibration_factor(), rel=1e-12)


def test_large_pillar_tends_to_cutoff_from_above():
    freqs = [pillar_mech_mode(PillarGeometry(r, DBR)).omega for r in (0.5e-6, 1e-6, 3e-6, 30e-6)]
    assert np.all(np.diff(freqs) < 0)
    assert freqs[-1] > 2 * np.pi * 19.5e9
    assert freqs[-1] == pytest.approx(2 * np.pi * 19.5e9, rel=1e-4)


def test_zero_point_amplitude_scales_inverse_radius():
    radii = np.linspace(0.5e-6, 3e-6, 6)
    prod = np.array([pillar_mech_mode(PillarGeometry(r, DBR)).x_zpf * r for r in radii])
    assert np.ptp(prod) / prod.mean() < 0.02


def test_field_reductions_reference_offsets(pillar):
    mode = pillar_mech_mode(pillar)
    np.testing.assert_allclose(mode.eta_s[::2], [0.93, 0.62], atol=0.015)
    np.testing.assert_allclose(mode.eta_e[::2], [0.35, 0.80], atol=0.015)
    assert field_reductions(DBR, [0.0]) == ((1.0,), (0.0,))


@given(dz=st.floats(-60e-9, 60e-9))
def test_field_reductions_are_a_sin_cos_pair(dz):
    (s,), (e,) = field_reductions(DBR, [dz])
    assert s * s + e * e == pytest.approx(1.0, rel=1e-12)
    assert 0 <= s <= 1 and 0 <= e <= 1


def test_qw_outside_spacer_rejected():
    with pytest.raises(QWOutsideSpacer):
        PillarGeometry(1.3e-6, DBR, qw_offsets=(70e-9,))


def test_geometry_validation():
    with pytest.raises(OutOfRange):
        PillarGeometry(0.0, DBR)
    with pytest.raises(OutOfRange):
        dbr_dispersion(2.9, 3.5)


def test_envelope_peak_is_the_maximum():
    z = np.linspace(0, 400e-9, 400001)
    f = np.exp(-z / (2 * DBR.penetration_length)) * np.sin(DBR.beta * z)
    assert f.max() == pytest.approx(envelope_peak(DBR), rel=1e-9)
