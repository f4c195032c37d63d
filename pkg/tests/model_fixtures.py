"""Small model pairs shared by the model and convergence test modules."""

import numpy as np

from mildlab.models import (
    MckParams,
    PoolGeometry,
    beta_on_resting_pool,
    build_custom_matrix,
    build_keener,
    build_mck,
    build_neuro,
    build_thin_layer_pair,
    cubic_activator_inhibitor,
)


def small_keener(kappas=(1.0, 4.0, 16.0, 64.0, 256.0), n=16):
    f1, f2, l1, l2 = cubic_activator_inhibitor()
    return build_keener(n, 1e-3, f1, f2, kappas, lip1=l1, lip2=l2)


def small_mck(kappas=(1.0, 4.0, 16.0, 64.0, 256.0), n=12):
    return build_mck(n, MckParams(), (10.0, 10.0, 10.0), kappas)


def small_thin_layer(eps=(1.0, 0.5, 0.25, 0.125, 0.0625), nx=8, nz=6):
    return build_thin_layer_pair(nx, nz, np.full(nx, 0.6), np.full(nx, 0.4), eps,
                                 reaction="logistic", reaction_rate=0.5)


def small_neuro(kappas=(1.0, 4.0, 16.0, 64.0, 256.0), n=40):
    geom = PoolGeometry()
    beta = beta_on_resting_pool(geom, n, 2.0)
    return build_neuro(n, geom, beta, 1.0, kappas)


def small_custom(kappas=(1.0, 4.0, 16.0, 64.0, 256.0)):
    matrix = np.array([[-1.0, 1.0, 0.0], [0.5, -1.5, 1.0], [0.0, 2.0, -2.0]])
    return build_custom_matrix(matrix, kappas)


def all_small_pairs():
    return {
        "keener": small_keener(),
        "mck": small_mck(),
        "thin_layer": small_thin_layer(),
        "neuro": small_neuro(),
        "custom_matrix": small_custom(),
    }
