"""Invariants every model pair must satisfy, whatever the model."""

import numpy as np

from model_fixtures import all_small_pairs


def test_limit_generator_commutes_with_projection():
    for name, pair in all_small_pairs().items():
        p = pair.projection.matrix
        a = pair.limit_generator.matrix
        assert np.max(np.abs(p @ a - a @ p)) <= 1e-8, name


def test_limit_reaction_is_projected_reaction_on_the_range():
    rng = np.random.default_rng(19)
    for name, pair in all_small_pairs().items():
        for _ in range(20):
            u = pair.projection.apply(rng.standard_normal(pair.dim))
            lhs = pair.projection.apply(pair.nonlinearity(0.4, u))
            rhs = pair.limit_nonlinearity(0.4, u)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10, name


def test_projected_states_pass_membership():
    rng = np.random.default_rng(20)
    for name, pair in all_small_pairs().items():
        u = pair.state(rng.standard_normal(pair.dim))
        pu = pair.project(u)
        assert pair.in_regularity_space(pu), name


def test_diffusion_blocks_annihilate_constants():
    pairs = all_small_pairs()
    for name in ("keener", "mck"):
        gen = pairs[name].family(16.0)
        assert np.max(np.abs(gen.matrix @ np.ones(gen.dim))) <= 1e-10, name


def test_sweeps_are_usable():
    for name, pair in all_small_pairs().items():
        assert len(pair.sweep) >= 4, name
        if pair.param_kind == "kappa":
            assert all(b > a for a, b in zip(pair.sweep, pair.sweep[1:])), name
        else:
            assert all(b < a for a, b in zip(pair.sweep, pair.sweep[1:])), name
