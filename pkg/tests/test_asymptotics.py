import dataclasses

import numpy as np
import pytest

from bischro import (
    asymptotic_model,
    assemble,
    build_profile,
    characteristic_roots,
    constant_profile,
    eigenfunction_asymptote,
    gap_report,
    geometry,
    index_offset,
    solve_spectrum,
    spacing_report,
    trace_limit,
    trace_limit_report,
)
from bischro.asymptotics import _char_scaled

from .oracles import CLAMPED_ROOTS, beam_roots


def synthetic_spectrum(template, mus):
    """SpectralData stand-in carrying oracle frequencies (modes unused)."""
    mus = np.asarray(mus, dtype=float)
    return dataclasses.replace(
        template,
        eigenvalues=mus**4,
        wavenumbers=mus,
        traces=np.ones_like(mus),
        residuals=np.zeros_like(mus),
        trusted_count=len(mus),
    )


def test_roots_match_frozen_oracle(const_geometry):
    roots = characteristic_roots(const_geometry, 8)
    assert roots == pytest.approx(np.array(CLAMPED_ROOTS), rel=1e-12)


def test_second_spacing_near_pi(const_geometry):
    r = characteristic_roots(const_geometry, 2)
    # the deviation from pi is 0.587 percent, frozen from the oracle roots
    assert abs((r[1] - r[0]) / np.pi - 1) < 0.006
    assert abs((r[1] - r[0]) / np.pi - 1) > 0.005


def test_roots_scale_inversely_with_optical_length():
    r1 = characteristic_roots(1.0, 12)
    r2 = characteristic_roots(2.0, 12)
    assert r2 == pytest.approx(r1 / 2.0, rel=1e-13)


def test_root_residuals_below_gate():
    model = asymptotic_model(geometry(constant_profile()), 200)
    assert np.all(model.residuals <= 1e-10)
    assert np.all(np.diff(model.mu_tilde) > 0)
    # roots approach the half-integer grid from the cosine zeros
    k = np.arange(1, 201)
    assert model.mu_tilde[-1] == pytest.approx((k[-1] + 0.5) * np.pi, rel=1e-9)


def test_raw_residual_is_uncomputable_for_large_roots():
    # the cosh-amplified raw form |cos cosh - 1| blows up on the rounded
    # roots; this is why the module reports the scaled residual
    x = characteristic_roots(1.0, 20)[-1]
    raw = abs(np.cos(x) * np.cosh(x) - 1.0)
    assert raw > 1e3
    assert abs(_char_scaled(x)) < 1e-13


def test_spacing_report_constant(sd_const_512, const_geometry):
    table = spacing_report(sd_const_512, const_geometry)
    ratio = table.column("spacing_ratio")
    assert len(table) == sd_const_512.trusted_count - 1
    # compare against the oracle-root spacings at matching indices
    oracle = beam_roots(sd_const_512.trusted_count)
    for n in range(3, len(ratio)):
        expected = (oracle[n + 1] - oracle[n]) / np.pi
        assert ratio[n] == pytest.approx(expected, abs=5e-7)


def test_spacing_doubles_when_density_drops(const_profile):
    # rho -> rho/16 multiplies every eigenvalue by 16 exactly, so mu and
    # all spacings double exactly at the discrete level
    light = constant_profile(rho=1.0 / 16.0)
    sd_a = solve_spectrum(assemble(const_profile, 96), 8)
    sd_b = solve_spectrum(assemble(light, 96), 8)
    geo_a = geometry(const_profile)
    geo_b = geometry(light)
    sp_a = spacing_report(sd_a, geo_a).column("delta_mu")
    sp_b = spacing_report(sd_b, geo_b).column("delta_mu")
    assert sp_b == pytest.approx(2.0 * sp_a, rel=1e-9)
    # and the dimensionless ratio column is unchanged
    ra = spacing_report(sd_a, geo_a).column("spacing_ratio")
    rb = spacing_report(sd_b, geo_b).column("spacing_ratio")
    assert rb == pytest.approx(ra, rel=1e-9)


def test_variable_profile_spacing_settles(sd_var_2048, var_geometry):
    table = spacing_report(sd_var_2048, var_geometry)
    ratio = table.column("spacing_ratio")
    assert np.all(np.abs(ratio[14:24] - 1) < 0.01)


def test_gap_report_oracle_roots(sd_const_128, const_geometry):
    # feed exact characteristic roots through the report; the normalized
    # column must sit within 5 percent of 1 from n ~ 5 on and within
    # 0.2 percent at n = 20
    mus = characteristic_roots(const_geometry, 30)
    sd = synthetic_spectrum(sd_const_128, mus)
    table = gap_report(sd, const_geometry)
    normed = table.column("normalized_gap")
    n = table.column("n")
    assert abs(normed[n == 20][0] - 1) < 0.002
    assert np.all(np.abs(normed[4:] - 1) < 0.05)
    # small-n rows are present as diagnostics but not law-quality
    assert n[0] == 1
    assert np.all(table.column("delta_lambda") > 0)


def test_gap_positivity_computed(sd_const_512, const_geometry):
    table = gap_report(sd_const_512, const_geometry)
    assert np.all(table.column("delta_lambda") > 0)


def test_index_offset_is_one(sd_const_512, const_geometry):
    # first computed root sits near 1.5 pi/gamma: one step above the
    # half-integer enumeration that starts the cosine zeros
    assert index_offset(sd_const_512, const_geometry) == 1


def test_eigenfunction_asymptote_boundary_zeros(const_geometry):
    model = asymptotic_model(const_geometry, 12)
    for n in (1, 4, 12):
        assert abs(eigenfunction_asymptote(model, n, 0.0)) < 1e-12
        assert abs(eigenfunction_asymptote(model, n, 1.0)) < 1e-12


def test_eigenfunction_asymptote_matches_computed_mode(sd_const_512, const_geometry):
    model = asymptotic_model(const_geometry, 12)
    xs = np.linspace(0, 1, 64)
    n = 8
    approx = eigenfunction_asymptote(model, n, xs)
    mode = sd_const_512.op.evaluate(sd_const_512.modes[:, n - 1], xs)
    corr = abs(np.dot(approx, mode)) / (np.linalg.norm(approx) * np.linalg.norm(mode))
    assert corr >= 0.999


def test_asymptote_paths_agree_across_switch(const_geometry):
    from bischro.asymptotics import _STABLE_SWITCH
    model = asymptotic_model(const_geometry, 16)
    xs = np.linspace(0, 1, 23)
    for n in (1, 2, 3):
        mu_gamma = model.mu_tilde[n - 1] * const_geometry.optical_length
        assert mu_gamma < _STABLE_SWITCH
        direct = eigenfunction_asymptote(model, n, xs)
        stable = _stable_path(model, n, xs)
        assert stable == pytest.approx(direct, rel=1e-10, abs=1e-11)


def _stable_path(model, n, xs):
    import bischro.asymptotics as asym
    old = asym._STABLE_SWITCH
    asym._STABLE_SWITCH = -1.0
    try:
        return eigenfunction_asymptote(model, n, xs)
    finally:
        asym._STABLE_SWITCH = old


def test_asymptote_no_overflow_at_high_index(const_geometry):
    model = asymptotic_model(const_geometry, 40)
    vals = eigenfunction_asymptote(model, 40, np.linspace(0, 1, 11))
    assert np.all(np.isfinite(vals))


def test_trace_limit_constant_profile(sd_const_512, const_profile, const_geometry):
    assert trace_limit(const_profile, const_geometry) == pytest.approx(2.0, rel=1e-12)
    table = trace_limit_report(sd_const_512, const_profile, const_geometry)
    ratio = table.column("limit_ratio")
    assert np.all(np.abs(ratio[9:14] - 1) < 0.04)


def test_trace_limit_quartic_rescale_value():
    # rho = 16: amplitude(1) = 16^(-3/8), optical length 2, so the limit is
    # 2 * 16^(-3/8) * 4 / sqrt(2) = 2 (scale invariance of the quotient)
    p = constant_profile(rho=16.0)
    geo = geometry(p)
    assert trace_limit(p, geo) == pytest.approx(2.0, rel=1e-12)


def test_trace_ratio_column_scale_invariant(const_profile):
    sd_a = solve_spectrum(assemble(const_profile, 96), 9)
    heavy = constant_profile(rho=16.0)
    sd_b = solve_spectrum(assemble(heavy, 96), 9)
    ta = trace_limit_report(sd_a, const_profile, geometry(const_profile))
    tb = trace_limit_report(sd_b, heavy, geometry(heavy))
    assert tb.column("limit_ratio") == pytest.approx(ta.column("limit_ratio"), rel=1e-9)


def test_reports_demand_enough_trusted_modes(sd_const_512, const_geometry, const_profile):
    starved = dataclasses.replace(sd_const_512, trusted_count=2)
    with pytest.raises(ValueError):
        spacing_report(starved, const_geometry)
    with pytest.raises(ValueError):
        gap_report(starved, const_geometry)
    with pytest.raises(ValueError):
        trace_limit_report(starved, const_profile, const_geometry)
