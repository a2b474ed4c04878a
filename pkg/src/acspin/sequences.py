"""Dynamical decoupling sequences built on finite rotation groups.

A sequence is specified by a small rotation group G, a generating set of
axis-angle pulses, and an Eulerian cycle on the Cayley graph of (G, gens):
every directed edge, meaning every (group element, generator) pair, is
traversed exactly once, so the pulse train visits each toggling frame with
each pulse and returns to the identity.  Group-averaging an error
Hamiltonian over the frames then cancels it at first order whenever it lies
in the sequence's correctable subspace.

Sequence configurations are stored as JSON (group order, generator
axis-angle pairs, pulse order, declared correctable noise families) and are
re-validated on load: edge count, Eulerian property, cycle closure, and the
decoupling residual of every declared family.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import combinations

import numpy as np

from .angmom import expm_hermitian
from .ensemble import collective_operators, operator_norm, sample_noise

RESIDUAL_TOL = 1e-10
CLOSURE_TOL = 1e-10
NOISE_FAMILIES = ("disorder", "dipolar_rwa", "dipolar_general")
_MAX_ORDER = 120


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """3x3 rotation by angle about axis (Rodrigues formula)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def axis_angle(r: np.ndarray):
    """Recover (unit axis, angle in [0, pi]) from a rotation matrix.

    The identity returns the z axis with angle 0; at angle pi the axis sign
    is arbitrary and the column of R + I with the largest norm is used.
    """
    angle = float(np.arccos(np.clip((np.trace(r).real - 1) / 2, -1.0, 1.0)))
    if angle < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if abs(angle - np.pi) < 1e-9:
        m = np.asarray(r, dtype=float) + np.eye(3)
        ax = m[:, int(np.argmax(np.linalg.norm(m, axis=0)))]
        return ax / np.linalg.norm(ax), float(np.pi)
    ax = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return ax / (2 * np.sin(angle)), angle


def _key(r: np.ndarray) -> tuple:
    return tuple(np.round(np.asarray(r, dtype=float), 8).ravel())


def close_group(generators, max_order: int = _MAX_ORDER):
    """Close a list of rotation matrices under multiplication (identity
    first); raises if the closure exceeds max_order elements."""
    elems = [np.eye(3)]
    seen = {_key(elems[0])}
    frontier = list(elems)
    while frontier:
        new = []
        for e in frontier:
            for g in generators:
                p = np.asarray(g) @ e
                k = _key(p)
                if k not in seen:
                    seen.add(k)
                    elems.append(p)
                    new.append(p)
                    if len(elems) > max_order:
                        raise ValueError(
                            f"group closure exceeded {max_order} elements; "
                            "generators may not generate a finite group"
                        )
        frontier = new
    return elems


def rotation_unitary(r: np.ndarray, operators) -> np.ndarray:
    """Represent a 3D rotation on a spin space given (Jx, Jy, Jz, ...)."""
    jx, jy, jz = operators[0], operators[1], operators[2]
    ax, angle = axis_angle(r)
    if angle == 0.0:
        return np.eye(jx.shape[0], dtype=complex)
    return expm_hermitian(ax[0] * jx + ax[1] * jy + ax[2] * jz, angle)


def symmetrize(unitaries, op: np.ndarray) -> np.ndarray:
    """Group average (1/|G|) sum_g U_g^dag op U_g; a projector onto the
    G-invariant operator subspace."""
    if len(unitaries) == 0:
        raise ValueError("empty group")
    return sum(u.conj().T @ op @ u for u in unitaries) / len(unitaries)


def eulerian_order(group, generators):
    """Eulerian cycle on the Cayley graph of (group, generators), returned
    as a tuple of generator indices starting and ending at the identity.

    Uses Hierholzer's algorithm; every (element, generator) edge appears
    exactly once and the composition of the full cycle is the identity.
    Raises if the generators do not generate the group.
    """
    if len(close_group(generators)) != len(group):
        raise ValueError("generators do not generate the group")
    idx = {_key(r): i for i, r in enumerate(group)}
    edges = [
        [[gi, idx[_key(np.asarray(g) @ group[i])], False] for gi, g in enumerate(generators)]
        for i in range(len(group))
    ]
    ptr = [0] * len(group)
    stack = [(idx[_key(np.eye(3))], None)]
    trail = []
    while stack:
        v, _ = stack[-1]
        advanced = False
        while ptr[v] < len(edges[v]):
            e = edges[v][ptr[v]]
            ptr[v] += 1
            if not e[2]:
                e[2] = True
                stack.append((e[1], e[0]))
                advanced = True
                break
        if not advanced:
            trail.append(stack.pop())
    trail.reverse()
    order = tuple(gi for _, gi in trail[1:])
    _check_cycle(group, generators, order)
    return order


def _check_cycle(group, generators, order):
    """Verify a pulse order is a closed Eulerian cycle on the Cayley graph."""
    n_edges = len(group) * len(generators)
    if len(order) != n_edges:
        raise ValueError(f"pulse order has {len(order)} edges, expected {n_edges}")
    frame = np.eye(3)
    used = set()
    for gi in order:
        edge = (_key(frame), gi)
        if edge in used:
            raise ValueError("pulse order repeats a Cayley-graph edge")
        used.add(edge)
        frame = np.asarray(generators[gi]) @ frame
    if np.abs(frame - np.eye(3)).max() > CLOSURE_TOL:
        raise ValueError("pulse order does not compose to the identity")


@lru_cache(maxsize=None)
def _group_cache(generators_key):
    gens = [rotation_matrix(ax, angle) for ax, angle in generators_key]
    return close_group(gens)


@dataclass(frozen=True)
class DDSequence:
    """A validated decoupling sequence configuration.

    generators: tuple of (axis 3-tuple, angle); pulse_order: tuple of
    generator indices along the Eulerian cycle; families: the noise
    families this sequence is declared to cancel.
    """

    name: str
    generators: tuple
    pulse_order: tuple
    families: tuple

    def __post_init__(self):
        for fam in self.families:
            if fam not in NOISE_FAMILIES:
                raise ValueError(f"unknown noise family {fam!r}")
        object.__setattr__(
            self,
            "generators",
            tuple(
                (tuple(float(x) for x in ax), float(angle))
                for ax, angle in self.generators
            ),
        )
        object.__setattr__(self, "pulse_order", tuple(int(i) for i in self.pulse_order))
        object.__setattr__(self, "families", tuple(str(f) for f in self.families))

    def group(self):
        return _group_cache(self.generators)

    def generator_matrices(self):
        return [rotation_matrix(ax, angle) for ax, angle in self.generators]

    def group_unitaries(self, operators):
        return [rotation_unitary(r, operators) for r in self.group()]

    def validate(self, n: int = 2, samples: int = 4, seed: int = 0) -> None:
        """Raise if the pulse order is not a closed Eulerian cycle or any
        declared family's decoupling residual exceeds tolerance."""
        _check_cycle(self.group(), self.generator_matrices(), self.pulse_order)
        for fam in self.families:
            res = verify_decoupling(self, fam, n=n, samples=samples, seed=seed)
            if res > RESIDUAL_TOL:
                raise ValueError(
                    f"sequence {self.name!r} leaks family {fam!r}: residual {res:.3e}"
                )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "group_order": len(self.group()),
            "generators": [
                {"axis": list(ax), "angle": angle} for ax, angle in self.generators
            ],
            "pulse_order": list(self.pulse_order),
            "families": list(self.families),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DDSequence":
        seq = cls(
            name=str(data["name"]),
            generators=tuple(
                (tuple(g["axis"]), float(g["angle"])) for g in data["generators"]
            ),
            pulse_order=tuple(data["pulse_order"]),
            families=tuple(data["families"]),
        )
        if len(seq.group()) != int(data["group_order"]):
            raise ValueError(
                f"config declares group order {data['group_order']}, "
                f"generators close to order {len(seq.group())}"
            )
        return seq


def save_sequence(seq: DDSequence, path) -> None:
    with open(path, "w") as fh:
        json.dump(seq.to_dict(), fh, indent=2)
        fh.write("\n")


def load_sequence(path, validate: bool = True) -> DDSequence:
    with open(path) as fh:
        seq = DDSequence.from_dict(json.load(fh))
    if validate:
        seq.validate()
    return seq


def load_named(name: str, validate: bool = True) -> DDSequence:
    """Load one of the packaged sequence configs ('tedd' or 'teddy')."""
    ref = resources.files("acspin") / "data" / f"{name}.json"
    seq = DDSequence.from_dict(json.loads(ref.read_text()))
    if validate:
        seq.validate()
    return seq


def _family_samples(family: str, n: int, samples: int, seed: int):
    if family not in NOISE_FAMILIES:
        raise ValueError(f"unknown noise family {family!r}")
    out = []
    for k in range(samples):
        if family == "disorder":
            _, h = sample_noise(n, 1.0, 0.0, rwa=False, seed=seed + k)
        elif family == "dipolar_rwa":
            _, h = sample_noise(n, 0.0, 1.0, rwa=True, seed=seed + k)
        else:
            _, h = sample_noise(n, 0.0, 1.0, rwa=False, seed=seed + k)
        out.append(h)
    return out


def verify_decoupling(
    seq: DDSequence, family: str, n: int = 2, samples: int = 4, seed: int = 0
) -> float:
    """Worst relative residual ||avg_g U_g^dag H U_g|| / ||H|| over sampled
    members of a noise family; a family the sequence cancels gives ~0."""
    ops = collective_operators(n)
    us = seq.group_unitaries(ops)
    worst = 0.0
    for h in _family_samples(family, n, samples, seed):
        worst = max(worst, operator_norm(symmetrize(us, h)) / operator_norm(h))
    return worst


def body_diagonal_axes():
    """The four cube body diagonals, unit normalized."""
    return [
        np.array(v) / np.sqrt(3.0)
        for v in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    ]


def tilted_axes():
    """Three coplanar-projection axes tilted to the magic angle from z:
    mutually orthogonal, each with z component 1/sqrt(3)."""
    return [
        np.array([1 / np.sqrt(2), -1 / np.sqrt(6), 1 / np.sqrt(3)]),
        np.array([-1 / np.sqrt(2), -1 / np.sqrt(6), 1 / np.sqrt(3)]),
        np.array([0.0, 2 / np.sqrt(6), 1 / np.sqrt(3)]),
    ]


def coordinate_axes():
    return [np.eye(3)[i] for i in range(3)]


def search_sequences(
    candidate_axes,
    angle: float,
    group_order: int,
    name: str = "found",
    n: int = 2,
    samples: int = 4,
    seed: int = 0,
):
    """Search unordered pairs of candidate axes for two-generator sequences.

    Each pair whose pulses close into a group of the requested order yields
    an Eulerian pulse order; the sequence is kept if it cancels at least the
    disorder family, and its families field records every family whose
    residual passes tolerance.  Returns a list of DDSequence.
    """
    found = []
    for i, j in combinations(range(len(candidate_axes)), 2):
        gens = [
            rotation_matrix(candidate_axes[i], angle),
            rotation_matrix(candidate_axes[j], angle),
        ]
        try:
            group = close_group(gens)
        except ValueError:
            continue
        if len(group) != group_order:
            continue
        order = eulerian_order(group, gens)
        seq = DDSequence(
            name=f"{name}-{i}{j}",
            generators=(
                (tuple(np.asarray(candidate_axes[i], dtype=float)), angle),
                (tuple(np.asarray(candidate_axes[j], dtype=float)), angle),
            ),
            pulse_order=order,
            families=(),
        )
        passing = tuple(
            fam
            for fam in NOISE_FAMILIES
            if verify_decoupling(seq, fam, n=n, samples=samples, seed=seed)
            <= RESIDUAL_TOL
        )
        if "disorder" not in passing:
            continue
        found.append(
            DDSequence(
                name=seq.name,
                generators=seq.generators,
                pulse_order=order,
                families=passing,
            )
        )
    return found
