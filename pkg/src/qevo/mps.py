"""Trainable matrix-product-state feature extractor.

A chain of `n_sites` input-carrying cores (local physical dimension 2)
plus one output core with a free leg of size `out_dim`, inserted at the
middle position (n_sites + 1) // 2 of the (n_sites + 1)-core chain.
Contracting the chain with the per-component feature map
phi(v) = (1 - v, v) compresses an input vector of length n_sites into
`out_dim` real features.

Core shapes, left to right (m = bond dimension, d = 2):

    (d, m), (m, d, m) ... (m, out_dim, m) ... (m, d, m), (m, d)

Cores are initialized as identity-plus-noise: every core is a Kronecker
delta on its bond indices (boundaries: indicator of bond index 0),
replicated across the physical/output index, plus Gaussian noise.  With
zero noise the contraction of any input is the all-ones vector, so
freshly initialized extractors are not collapsed to zero output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

LOCAL_DIM = 2


def feature_map(v: float) -> tuple[float, float]:
    """Lift a scalar in [0, 1] to the local 2-vector (1 - v, v)."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"feature map input must lie in [0, 1], got {v!r}")
    return (1.0 - v, v)


def param_count(n_sites: int, bond_dim: int, out_dim: int) -> int:
    """Total number of real entries across all cores."""
    total = 0
    for shape in _core_shapes(n_sites, bond_dim, out_dim):
        size = 1
        for dim in shape:
            size *= dim
        total += size
    return total


def _core_shapes(n_sites: int, bond_dim: int, out_dim: int) -> list[tuple[int, ...]]:
    if n_sites < 2:
        raise ValueError("need at least 2 input sites to host an interior output core")
    if bond_dim < 1:
        raise ValueError("bond dimension must be >= 1")
    n_cores = n_sites + 1
    output_pos = n_cores // 2
    shapes: list[tuple[int, ...]] = []
    for pos in range(n_cores):
        if pos == 0:
            shapes.append((LOCAL_DIM, bond_dim))
        elif pos == n_cores - 1:
            shapes.append((bond_dim, LOCAL_DIM))
        elif pos == output_pos:
            shapes.append((bond_dim, out_dim, bond_dim))
        else:
            shapes.append((bond_dim, LOCAL_DIM, bond_dim))
    return shapes


@dataclass(eq=False)
class MpsFeatureExtractor:
    n_sites: int
    bond_dim: int
    out_dim: int
    cores: list[np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        expected = _core_shapes(self.n_sites, self.bond_dim, self.out_dim)
        if len(self.cores) != len(expected):
            raise ValueError(f"expected {len(expected)} cores, got {len(self.cores)}")
        for core, shape in zip(self.cores, expected):
            if core.shape != shape:
                raise ValueError(f"core shape {core.shape} does not match {shape}")

    @property
    def output_pos(self) -> int:
        return (self.n_sites + 1) // 2

    @property
    def param_count(self) -> int:
        return sum(core.size for core in self.cores)

    # stacked interior cores, cached for the einsum fast path in contract()
    @cached_property
    def _stack_left(self) -> np.ndarray | None:
        cores = self.cores[1:self.output_pos]
        return np.stack(cores) if cores else None

    @cached_property
    def _stack_right(self) -> np.ndarray | None:
        cores = self.cores[self.output_pos + 1:self.n_sites]
        return np.stack(cores) if cores else None


def identity_cores(n_sites: int, bond_dim: int, out_dim: int) -> list[np.ndarray]:
    """Noise-free base: bond-index deltas replicated over physical legs."""
    shapes = _core_shapes(n_sites, bond_dim, out_dim)
    cores = []
    for pos, shape in enumerate(shapes):
        core = np.zeros(shape)
        if pos == 0:  # left boundary (d, m): indicator of bond 0
            core[:, 0] = 1.0
        elif pos == len(shapes) - 1:  # right boundary (m, d)
            core[0, :] = 1.0
        else:  # (m, d_or_out, m): bond delta for every physical value
            core[:] = np.eye(bond_dim)[:, None, :]
        cores.append(core)
    return cores


def init_extractor(bond_dim: int, rng: np.random.Generator, noise_scale: float,
                   n_sites: int = 147, out_dim: int = 8) -> MpsFeatureExtractor:
    """Identity base plus Gaussian(0, 1) * noise_scale on every entry."""
    cores = [core + noise_scale * rng.standard_normal(core.shape)
             for core in identity_cores(n_sites, bond_dim, out_dim)]
    return MpsFeatureExtractor(n_sites, bond_dim, out_dim, cores)


def contract(extractor: MpsFeatureExtractor, values: np.ndarray) -> np.ndarray:
    """Left-to-right sweep; peak intermediate is (out_dim, bond_dim).

    values: the n_sites input components, each in [0, 1].
    Returns the out_dim-vector with the output leg left open.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (extractor.n_sites,):
        raise ValueError(
            f"expected {extractor.n_sites} input components, got {values.shape}")
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueError("input components must lie in [0, 1]")

    phi = np.empty((extractor.n_sites, LOCAL_DIM))
    phi[:, 0] = 1.0 - values
    phi[:, 1] = values

    pos = extractor.output_pos
    vec = phi[0] @ extractor.cores[0]  # (m,)
    if extractor._stack_left is not None:
        mats = np.einsum("kd,kadb->kab", phi[1:pos], extractor._stack_left)
        for mat in mats:
            vec = vec @ mat
    carry = np.einsum("a,aob->ob", vec, extractor.cores[pos])  # (out_dim, m)
    if extractor._stack_right is not None:
        mats = np.einsum("kd,kadb->kab", phi[pos:extractor.n_sites - 1],
                         extractor._stack_right)
        for mat in mats:
            carry = carry @ mat
    out = carry @ (extractor.cores[-1] @ phi[-1])
    assert np.all(np.isfinite(out)), "non-finite MPS contraction intermediate"
    return out


def flatten(extractor: MpsFeatureExtractor) -> np.ndarray:
    """All core entries as one vector: core-index major, row-major per core."""
    return np.concatenate([core.ravel() for core in extractor.cores])


def unflatten(values: np.ndarray, n_sites: int, bond_dim: int,
              out_dim: int) -> MpsFeatureExtractor:
    values = np.asarray(values, dtype=np.float64)
    shapes = _core_shapes(n_sites, bond_dim, out_dim)
    expected = param_count(n_sites, bond_dim, out_dim)
    if values.shape != (expected,):
        raise ValueError(f"expected {expected} entries, got {values.shape}")
    cores = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        cores.append(values[offset:offset + size].reshape(shape).copy())
        offset += size
    return MpsFeatureExtractor(n_sites, bond_dim, out_dim, cores)
