"""Ensembles of N spin-1/2: collective operators and random noise Hamiltonians.

The full 2^N-dimensional product space is kept throughout, since the noise
couples individual spins and leaks population out of the symmetric subspace.
Collective rotations and one-axis twisting act through the collective
operators J_alpha = sum_i j_{i,alpha}; their restriction to the symmetric
(Dicke) subspace reproduces the spin-N/2 matrices.

Noise instances hold explicit per-spin disorder terms and per-pair dipolar
couplings, each with its own axis, so an instance can be serialized and its
Hamiltonian reassembled exactly.  Coupling strengths are rescaled at draw
time so the disorder and dipolar parts hit requested operator norms exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

MAX_SPINS = 10

_sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_id = np.eye(2, dtype=complex)


def _check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be an integer in [1, {MAX_SPINS}], got {n!r}")
    return int(n)


def local_operator(n: int, i: int, op: np.ndarray) -> np.ndarray:
    """Single-site operator op on spin i, identity elsewhere; site 0 is the
    most significant factor of the Kronecker product."""
    n = _check_n(n)
    if not 0 <= i < n:
        raise ValueError(f"site index {i} out of range for {n} spins")
    out = np.array([[1]], dtype=complex)
    for k in range(n):
        out = np.kron(out, op if k == i else _id)
    return out


def _site_vector(n: int, i: int):
    return (
        local_operator(n, i, _sx),
        local_operator(n, i, _sy),
        local_operator(n, i, _sz),
    )


@lru_cache(maxsize=None)
def _collective(n: int):
    dim = 2**n
    jx = np.zeros((dim, dim), dtype=complex)
    jy = np.zeros((dim, dim), dtype=complex)
    jz = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        vx, vy, vz = _site_vector(n, i)
        jx += vx
        jy += vy
        jz += vz
    jz2 = jz @ jz
    for op in (jx, jy, jz, jz2):
        op.setflags(write=False)
    return jx, jy, jz, jz2


def collective_operators(n: int):
    """(Jx, Jy, Jz, Jz^2) on the full 2^n product space, read-only."""
    return _collective(_check_n(n))


@lru_cache(maxsize=None)
def symmetric_isometry(n: int) -> np.ndarray:
    """Isometry from the (n+1)-dimensional Dicke subspace into the product
    space, columns ordered m = n/2 down to -n/2."""
    n = _check_n(n)
    v = np.zeros((2**n, n + 1))
    for idx in range(2**n):
        k = bin(idx).count("1")
        v[idx, k] = 1 / np.sqrt(comb(n, k))
    v.setflags(write=False)
    return v


def operator_norm(h: np.ndarray) -> float:
    """Supremum operator norm (largest |eigenvalue|) of a Hermitian matrix."""
    return float(np.abs(np.linalg.eigvalsh(h)).max())


@dataclass(frozen=True)
class NoiseInstance:
    """Sampled disorder and dipolar couplings for an n-spin ensemble.

    disorder: tuple of (delta_i, axis) per spin; dipolar: tuple of
    ((i, j), Delta_ij, axis) over pairs i < j.  Under the rotating wave
    approximation every axis is +z and the dipolar coupling takes the
    secular form 3 j_iz j_jz - j_i . j_j.
    """

    n: int
    rwa: bool
    disorder: tuple
    dipolar: tuple

    def __post_init__(self):
        if len(self.disorder) > self.n:
            raise ValueError("more disorder terms than spins")
        for _, axis in self.disorder:
            if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
                raise ValueError("disorder axis is not unit norm")
        for (i, j), _, axis in self.dipolar:
            if not 0 <= i < j < self.n:
                raise ValueError(f"dipolar pair ({i}, {j}) must satisfy 0 <= i < j < n")
            if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
                raise ValueError("dipolar axis is not unit norm")
        if self.rwa:
            axes = [ax for _, ax in self.disorder] + [ax for _, _, ax in self.dipolar]
            for axis in axes:
                if abs(axis[0]) > 0 or abs(axis[1]) > 0 or axis[2] != 1.0:
                    raise ValueError("rwa instance must have all axes along +z")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rwa": self.rwa,
            "disorder": [[d, list(map(float, ax))] for d, ax in self.disorder],
            "dipolar": [
                [list(pair), c, list(map(float, ax))] for pair, c, ax in self.dipolar
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseInstance":
        return cls(
            n=int(data["n"]),
            rwa=bool(data["rwa"]),
            disorder=tuple((float(d), tuple(ax)) for d, ax in data["disorder"]),
            dipolar=tuple(
                (tuple(pair), float(c), tuple(ax)) for pair, c, ax in data["dipolar"]
            ),
        )


def _axis_site_op(n: int, i: int, axis) -> np.ndarray:
    vx, vy, vz = _site_vector(n, i)
    return axis[0] * vx + axis[1] * vy + axis[2] * vz


def assemble_noise(inst: NoiseInstance):
    """(H_err, H_dis, H_dd) rebuilt from a noise instance."""
    n = inst.n
    dim = 2**n
    h_dis = np.zeros((dim, dim), dtype=complex)
    for i, (delta, axis) in enumerate(inst.disorder):
        h_dis += delta * _axis_site_op(n, i, axis)
    h_dd = np.zeros((dim, dim), dtype=complex)
    for (i, j), coupling, axis in inst.dipolar:
        ji = _site_vector(n, i)
        jj = _site_vector(n, j)
        ei = sum(axis[a] * ji[a] for a in range(3))
        ej = sum(axis[a] * jj[a] for a in range(3))
        h_dd += coupling * (3 * ei @ ej - sum(ji[a] @ jj[a] for a in range(3)))
    return h_dis + h_dd, h_dis, h_dd


def _unit_sphere(rng) -> tuple:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def sample_noise(n, disorder_norm, dipolar_norm, rwa, seed):
    """Draw a noise instance with exact term norms; returns (instance, H_err).

    Coupling strengths are iid uniform on [-1, 1]; axes are +z under rwa and
    uniform on the sphere otherwise; the pair set is all i < j.  After the
    draw each term's couplings are rescaled so the assembled H_dis and H_dd
    have operator norms exactly equal to the requested targets (a zero
    target zeroes the term).  Deterministic given the seed, which may be an
    integer or a numpy Generator.
    """
    n = _check_n(n)
    if disorder_norm < 0 or dipolar_norm < 0:
        raise ValueError("target norms must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    zaxis = (0.0, 0.0, 1.0)
    disorder = tuple(
        (float(rng.uniform(-1, 1)), zaxis if rwa else _unit_sphere(rng))
        for _ in range(n)
    )
    dipolar = tuple(
        ((i, j), float(rng.uniform(-1, 1)), zaxis if rwa else _unit_sphere(rng))
        for i, j in combinations(range(n), 2)
    )
    inst = NoiseInstance(n=n, rwa=rwa, disorder=disorder, dipolar=dipolar)
    _, h_dis, h_dd = assemble_noise(inst)

    def rescale(target, h):
        if target == 0:
            return 0.0
        norm = operator_norm(h)
        if norm == 0:
            raise ValueError("sampled term has zero norm, cannot rescale")
        return target / norm

    fd = rescale(disorder_norm, h_dis)
    fp = rescale(dipolar_norm, h_dd)
    inst = NoiseInstance(
        n=n,
        rwa=rwa,
        disorder=tuple((d * fd, ax) for d, ax in inst.disorder),
        dipolar=tuple((pair, c * fp, ax) for pair, c, ax in inst.dipolar),
    )
    h_err = fd * h_dis + fp * h_dd
    return inst, h_err
