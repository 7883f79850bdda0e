"""Shared helpers for the test suite."""
import numpy as np

from ellrank import BlockData, PairedSample


def block(seed, n, k, scale=1.0, shift=None):
    """Random full-rank data block with a reproducible seed."""
    rng = np.random.default_rng(seed)
    obs = scale * rng.standard_normal((n, k))
    if shift is not None:
        obs = obs + shift
    return BlockData(k=k, observations=obs)


def paired(seed, n, p, q):
    """Independent random paired sample."""
    rng = np.random.default_rng(seed)
    return PairedSample(
        block1=BlockData(k=p, observations=rng.standard_normal((n, p))),
        block2=BlockData(k=q, observations=rng.standard_normal((n, q))),
    )


def random_affine(rng, k, min_det=0.1):
    """Well-conditioned random invertible matrix and a shift vector."""
    while True:
        a = rng.standard_normal((k, k))
        if abs(np.linalg.det(a)) > min_det:
            return a, rng.standard_normal(k)


def transform_block(data, a, b):
    """Apply x -> a x + b to every observation of a block."""
    return BlockData(k=data.k, observations=data.observations @ a.T + b)


def transform_sample(sample, a1, b1, a2, b2):
    """Apply separate affine maps to the two blocks of a paired sample."""
    return PairedSample(
        block1=transform_block(sample.block1, a1, b1),
        block2=transform_block(sample.block2, a2, b2),
    )
