"""Spin-j Hilbert space: operators, states, and elementary pulses.

Basis ordering convention: component k of a state vector is the amplitude on
|j, m> with m = j - k, i.e. m runs j, j-1, ..., -j from top to bottom.  All
operators are plain complex ndarrays in this basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

HERM_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class Spin:
    """Total angular momentum, stored doubled so half-integers are exact."""

    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 1:
            raise ValueError(f"two_j must be a positive integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order, m = j, j-1, ..., -j."""
        return (self.two_j - 2 * np.arange(self.dim)) / 2


def as_spin(j) -> Spin:
    """Coerce j (Spin, int, half-integer float, or Fraction) to a Spin."""
    if isinstance(j, Spin):
        return j
    two_j = 2 * Fraction(j)
    if two_j.denominator != 1:
        raise ValueError(f"j = {j!r} is not an integer or half-integer")
    return Spin(int(two_j))


@lru_cache(maxsize=None)
def _ops(two_j: int):
    spin = Spin(two_j)
    j = spin.j
    m = spin.m_values()
    # <j,m+1| J+ |j,m> = sqrt(j(j+1) - m(m+1)); with the descending-m basis
    # ordering J+ sits on the superdiagonal.
    raise_elem = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.zeros((spin.dim, spin.dim), dtype=complex)
    jp[np.arange(spin.dim - 1), np.arange(1, spin.dim)] = raise_elem
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m.astype(complex))
    jz2 = np.diag((m**2).astype(complex))
    for op in (jx, jy, jz, jz2):
        op.setflags(write=False)
    return jx, jy, jz, jz2


def spin_operators(j):
    """Return (Jx, Jy, Jz, Jz^2) for spin j as read-only complex matrices."""
    return _ops(as_spin(j).two_j)


def check_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> None:
    dev = np.abs(a - a.conj().T).max()
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e} > {tol:g})")


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > tol:
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e} > {tol:g})")


def expm_hermitian(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-i*scale*h) for Hermitian h, via spectral decomposition."""
    check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


@dataclass(frozen=True)
class SpinState:
    """Pure state of a single spin j; amplitudes in descending-m order."""

    spin: Spin
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.spin.dim,):
            raise ValueError(
                f"expected {self.spin.dim} amplitudes for 2j = {self.spin.two_j}, "
                f"got shape {amp.shape}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL:g}")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.spin.dim

    def overlap(self, other: "SpinState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "SpinState") -> float:
        return abs(self.overlap(other)) ** 2

    def expect(self, op: np.ndarray) -> float:
        val = np.vdot(self.amplitudes, op @ self.amplitudes)
        return float(val.real)

    def apply(self, u: np.ndarray) -> "SpinState":
        return SpinState(self.spin, u @ self.amplitudes)


def basis_state(j, m) -> SpinState:
    """|j, m>."""
    spin = as_spin(j)
    two_m = 2 * Fraction(m)
    if two_m.denominator != 1 or (spin.two_j - int(two_m)) % 2 or abs(int(two_m)) > spin.two_j:
        raise ValueError(f"m = {m!r} is not valid for 2j = {spin.two_j}")
    amp = np.zeros(spin.dim, dtype=complex)
    amp[(spin.two_j - int(two_m)) // 2] = 1.0
    return SpinState(spin, amp)


def rotation_pulse(j, axis: str, angle: float) -> np.ndarray:
    """Unitary for a rotation by `angle` about the x, y, or z axis."""
    jx, jy, jz, _ = spin_operators(j)
    op = {"x": jx, "y": jy, "z": jz}[axis]
    if axis == "z":
        # diagonal, take it exactly
        return np.diag(np.exp(-1j * angle * np.diag(op)))
    return expm_hermitian(op, angle)


def squeezing_pulse(j, eta: float) -> np.ndarray:
    """One-axis twisting unitary exp(-i*eta*Jz^2), exact since Jz is diagonal."""
    spin = as_spin(j)
    m = spin.m_values()
    return np.diag(np.exp(-1j * eta * m**2))


def coherent_state(j, theta: float, phi: float) -> SpinState:
    """Spin coherent state pointing along (theta, phi) on the sphere.

    Constructed as Rz(phi) Ry(theta) |j, j>, so theta = phi = 0 gives the
    +z-polarized stretched state.
    """
    spin = as_spin(j)
    amp = rotation_pulse(spin, "y", theta) @ basis_state(spin, spin.j).amplitudes
    amp = rotation_pulse(spin, "z", phi) @ amp
    return SpinState(spin, amp)


def initial_state(j) -> SpinState:
    """Coherent state along +y, the starting point of all pulse protocols."""
    return coherent_state(j, np.pi / 2, np.pi / 2)
