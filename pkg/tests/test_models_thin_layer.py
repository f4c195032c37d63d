"""Thin-layer operator: form structure, z-collapse limit, spectral agreement."""

import numpy as np
import pytest

from mildlab.models import (
    build_thin_layer,
    form_monotonicity_check,
    quadratic_form,
    thin_layer_initial,
    thin_layer_limit,
    thin_layer_limit_1d,
)
from mildlab.models.thin_layer import z_variation
from mildlab.operators import spectrum
from model_fixtures import small_thin_layer


def test_z_flat_states_see_no_eps():
    nx, nz = 8, 6
    c = d = np.zeros(nx)
    u0 = np.cos(np.pi * np.linspace(0.0, 1.0, nx))
    u = np.repeat(u0, nz)
    lap_x = thin_layer_limit_1d(nx, c, d).matrix
    expected = np.repeat(lap_x @ u0, nz)
    for eps in (1.0, 0.25, 0.03125):
        gen = build_thin_layer(nx, nz, eps, c, d)
        assert np.max(np.abs(gen.matrix @ u - expected)) <= 1e-9


def test_pure_neumann_kernel_is_constant():
    nx, nz = 8, 6
    gen = build_thin_layer(nx, nz, 0.5, np.zeros(nx), np.zeros(nx))
    eigs = np.sort(-spectrum(gen))
    assert abs(eigs[0]) <= 1e-9
    const = np.ones(nx * nz)
    assert np.max(np.abs(gen.matrix @ const)) <= 1e-9


def test_form_strictly_increases_when_z_varies():
    nx, nz = 8, 6
    c = d = np.zeros(nx)
    rng = np.random.default_rng(17)
    u = rng.standard_normal(nx * nz)
    assert z_variation(nx, nz, u) > 0
    val_coarse = quadratic_form(build_thin_layer(nx, nz, 0.1, c, d), u)
    val_fine = quadratic_form(build_thin_layer(nx, nz, 0.05, c, d), u)
    assert val_fine > val_coarse


def test_projection_on_z_flat_and_odd_profiles():
    nx, nz = 8, 7
    _, proj = thin_layer_limit(nx, nz, np.zeros(nx), np.zeros(nx))
    u_flat = np.repeat(np.linspace(0.0, 1.0, nx), nz)
    assert np.max(np.abs(proj.apply(u_flat) - u_flat)) <= 1e-12
    z = np.linspace(0.0, 1.0, nz)
    u_odd = np.tile(z - 0.5, nx)
    assert np.max(np.abs(proj.apply(u_odd))) <= 1e-12


def test_limit_solution_matches_separation_of_variables():
    nx, nz = 16, 12
    c = np.full(nx, 0.6)
    d = np.full(nx, 0.4)  # constant potential mu = 1
    mu = 1.0
    gen, proj = thin_layer_limit(nx, nz, c, d)
    x_nodes = np.linspace(0.0, 1.0, nx)
    u0 = np.repeat(np.cos(np.pi * x_nodes), nz)
    assert np.max(np.abs(proj.apply(u0) - u0)) <= 1e-12
    h = 1.0 / (nx - 1)
    times = np.linspace(0.0, 1.0, 11)
    worst = 0.0
    for t in times:
        got = gen.propagator.apply(float(t), u0)
        closed = np.exp(-(np.pi ** 2 + mu) * t) * u0
        worst = max(worst, float(np.max(np.abs(got - closed))))
    assert worst <= h ** 2


def test_form_monotonicity_check_passes_and_reports():
    nx, nz = 8, 6
    report = form_monotonicity_check(nx, nz, np.full(nx, 0.3), np.full(nx, 0.2),
                                     [1.0, 0.5, 0.25, 0.125], probes=10)
    assert report.passed
    assert "passed" in report.summary()
    with pytest.raises(ValueError):
        form_monotonicity_check(nx, nz, np.zeros(nx), np.zeros(nx), [0.5, 1.0], probes=1)


def test_pure_z_probe_scales_like_eps_squared():
    nx, nz = 8, 6
    c = d = np.zeros(nx)
    z = np.linspace(0.0, 1.0, nz)
    u = np.tile(z - 0.5, nx)
    vals = {eps: quadratic_form(build_thin_layer(nx, nz, eps, c, d), u)
            for eps in (0.5, 0.25)}
    assert vals[0.25] / vals[0.5] == pytest.approx((0.5 / 0.25) ** 2, rel=1e-12)
    # and the absolute value is eps^-2 times the discrete z-variation
    assert vals[0.5] == pytest.approx(0.5 ** -2 * z_variation(nx, nz, u), rel=1e-12)


def test_weighted_symmetry_and_negative_semidefiniteness():
    nx, nz = 8, 6
    gen = build_thin_layer(nx, nz, 0.2, np.full(nx, 0.7), np.full(nx, 0.1))
    w = gen.grid.weights
    weighted = gen.matrix * w[:, None]
    assert np.max(np.abs(weighted - weighted.T)) <= 1e-10
    eigs = spectrum(gen)
    assert np.max(eigs) <= 1e-9
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = rng.standard_normal(nx * nz)
        rayleigh = (w * u) @ (gen.matrix @ u) / np.sum(w * u * u)
        assert rayleigh == pytest.approx(-quadratic_form(gen, u) / np.sum(w * u * u))
        assert quadratic_form(gen, u) >= -1e-10


def test_builder_validation():
    with pytest.raises(ValueError):
        build_thin_layer(2, 6, 0.5, np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        build_thin_layer(8, 6, 0.0, np.zeros(8), np.zeros(8))
    with pytest.raises(ValueError):
        build_thin_layer(8, 6, 0.5, -np.ones(8), np.zeros(8))


def test_initial_presets():
    nx, nz = 5, 4
    flat = thin_layer_initial(nx, nz, "flat", baseline=0.3)
    assert np.allclose(flat, 0.3)
    bump = thin_layer_initial(nx, nz, "bump-in-fast-component")
    pair = small_thin_layer()
    assert bump.shape == (nx * nz,)
    assert not np.allclose(bump, bump[0])
