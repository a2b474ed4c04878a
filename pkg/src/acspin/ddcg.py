"""Dynamically corrected gates from Eulerian decoupling sequences.

A target gate (a rotation, a squeezing, or a composite of the two) is
protected by interleaving it with a decoupling sequence: the sequence's
pulses are played along an Eulerian cycle of its Cayley graph, a balanced
identity gate is inserted at the first visit of every non-initial group
element, and a stretched copy of the target (half amplitude, double
duration) closes the schedule.  The balanced identity shares the target's
first-order finite-duration error, so the group average cancels the error
of the gate together with that of the decoupling pulses, provided the
error lies in the sequence's correctable subspace.

Segments are piecewise-constant controls; simulation is exact piecewise
exponentiation.  Flip-angle errors multiply the control amplitude of a
segment according to its role in the schedule, which lets one error
parameter target the decoupling pulses, the balanced-pair halves, or
everything at once.
"""
from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass, replace

import numpy as np

from .angmom import expm_hermitian
from .ensemble import collective_operators, operator_norm
from .sequences import DDSequence, _key, symmetrize

ROLES = ("plain", "dd", "id_fwd", "id_rev", "stretched")
CORRECTABILITY_TOL = 1e-6
_QUAD_NODES = 32


@dataclass(frozen=True)
class PulseSegment:
    """One piecewise-constant control interval.

    kind selects the generator: a rotation about a unit axis, a z-axis
    squeezing (Jz^2), or an idle wait.  The signed amplitude is in rad/s,
    so amplitude * duration is the accumulated rotation or squeezing angle.
    """

    kind: str
    axis: tuple | None
    amplitude: float
    duration: float
    role: str = "plain"

    def __post_init__(self):
        if self.kind not in ("rotation", "squeezing", "idle"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.duration < 0:
            raise ValueError("segment duration must be nonnegative")
        if self.role not in ROLES:
            raise ValueError(f"unknown segment role {self.role!r}")
        if self.kind == "rotation":
            ax = np.asarray(self.axis, dtype=float)
            if abs(np.linalg.norm(ax) - 1.0) > 1e-10:
                raise ValueError("rotation axis must be unit norm")
            object.__setattr__(self, "axis", tuple(float(x) for x in ax))
        else:
            object.__setattr__(self, "axis", None)

    @property
    def angle(self) -> float:
        return self.amplitude * self.duration


def rotation_segment(axis, angle: float, chi: float, role: str = "plain") -> PulseSegment:
    """Rotation by `angle` about `axis` at pulse amplitude chi."""
    amp = chi if angle >= 0 else -chi
    return PulseSegment("rotation", tuple(axis), amp, abs(angle) / chi, role)


def squeezing_segment(eta: float, chi: float, role: str = "plain") -> PulseSegment:
    """Squeezing by angle eta (generator Jz^2) at pulse amplitude chi."""
    amp = chi if eta >= 0 else -chi
    return PulseSegment("squeezing", None, amp, abs(eta) / chi, role)


def idle_segment(duration: float) -> PulseSegment:
    return PulseSegment("idle", None, 0.0, duration, "plain")


def total_duration(segments) -> float:
    return float(sum(s.duration for s in segments))


def control_hamiltonian(segment: PulseSegment, operators) -> np.ndarray:
    """amplitude times the segment's generator on the given spin space."""
    jx, jy, jz, jz2 = operators
    if segment.kind == "rotation":
        ax = segment.axis
        return segment.amplitude * (ax[0] * jx + ax[1] * jy + ax[2] * jz)
    if segment.kind == "squeezing":
        return segment.amplitude * jz2
    return np.zeros_like(jx)


def balanced_pair(target) -> dict:
    """Stretched and identity profiles of a (possibly composite) target.

    The stretched member implements the target unitary at half amplitude
    over double duration; the identity member plays the target forward and
    then segment-reversed with negated amplitudes.  Both occupy the same
    total time and share the target's first-order finite-duration error.
    """
    target = list(target)
    stretched = [
        replace(s, amplitude=s.amplitude / 2, duration=2 * s.duration, role="stretched")
        for s in target
    ]
    identity = [replace(s, role="id_fwd") for s in target] + [
        replace(s, amplitude=-s.amplitude, role="id_rev") for s in reversed(target)
    ]
    return {"stretched": stretched, "identity": identity}


def flip_angle_profile(error_type: str, eps: float) -> dict:
    """Role-to-amplitude-multiplier map for one flip-angle error scenario.

    'dd' puts the error on decoupling pulses only.  'bp_type1' mis-scales
    every control by the same factor, so identity gates stay exact
    identities.  'bp_type2' flips the error sign on the reversed identity
    half, so each identity gate over-rotates by O(eps).
    """
    if error_type == "dd":
        return {"dd": 1 + eps}
    if error_type == "bp_type1":
        return {role: 1 + eps for role in ROLES}
    if error_type == "bp_type2":
        prof = {role: 1 + eps for role in ROLES}
        prof["id_rev"] = 1 - eps
        return prof
    raise ValueError(f"unknown error type {error_type!r}")


def simulate_schedule(segments, operators, h_err=None, profile=None) -> np.ndarray:
    """Exact piecewise propagator of a schedule under a static noise
    Hamiltonian, with role-based amplitude multipliers applied to the
    control only."""
    dim = operators[0].shape[0]
    u = np.eye(dim, dtype=complex)
    for seg in segments:
        mult = 1.0 if profile is None else profile.get(seg.role, 1.0)
        h = mult * control_hamiltonian(seg, operators)
        if h_err is not None:
            h = h + h_err
        u = expm_hermitian(h, seg.duration) @ u
    return u


def _segment_frames(segments, operators):
    """Per-segment eigendata for evaluating U(t) inside a schedule.

    Returns (starts, frames, u_total, tau) where frames[k] = (w, v, u0) give
    U(t) = v e^{-i w (t - t_k)} v^dag u0 on segment k.
    """
    dim = operators[0].shape[0]
    u = np.eye(dim, dtype=complex)
    starts, frames = [], []
    t = 0.0
    for seg in segments:
        h = control_hamiltonian(seg, operators)
        w, v = np.linalg.eigh(h)
        starts.append(t)
        frames.append((w, v, u))
        u = (v * np.exp(-1j * w * seg.duration)) @ v.conj().T @ u
        t += seg.duration
    return np.array(starts), frames, u, t


def propagator(segments, operators) -> np.ndarray:
    """Noise-free propagator of a schedule."""
    return _segment_frames(segments, operators)[2]


def _u_at(starts, frames, tau, t):
    k = min(bisect_right(starts, t) - 1, len(frames) - 1)
    w, v, u0 = frames[k]
    return (v * np.exp(-1j * w * (t - starts[k]))) @ v.conj().T @ u0


def _gl_nodes(a, b, nodes):
    x, wt = np.polynomial.legendre.leggauss(nodes)
    return (a + b) / 2 + (b - a) / 2 * x, (b - a) / 2 * wt


def toggling_first_order(segments, h_err, operators, nodes: int = _QUAD_NODES):
    """First toggling-frame integral Phi^[1] = int_0^tau U^dag(t) H_err U(t) dt
    by per-segment Gauss-Legendre quadrature."""
    starts, frames, _, tau = _segment_frames(segments, operators)
    phi = np.zeros_like(h_err, dtype=complex)
    t0 = 0.0
    for seg, start, (w, v, u0) in zip(segments, starts, frames):
        if seg.duration == 0:
            continue
        ts, wts = _gl_nodes(0.0, seg.duration, nodes)
        vh = v.conj().T
        for s, wt in zip(ts, wts):
            u = (v * np.exp(-1j * w * s)) @ vh @ u0
            phi += wt * (u.conj().T @ h_err @ u)
        t0 = start + seg.duration
    return phi


def finite_duration_error(segments, h_err, operators, nodes: int = _QUAD_NODES):
    """Duration-normalized first-order error Hamiltonian of a schedule,
    H_eff = Phi^[1] / tau; the first-order approximation degrades once
    tau * ||H_err|| approaches 1 (a warning is issued)."""
    tau = total_duration(segments)
    if tau == 0:
        raise ValueError("schedule has zero duration")
    small = tau * operator_norm(h_err)
    if small > 1.0:
        warnings.warn(
            f"tau*||H_err|| = {small:.2f}; first-order error Hamiltonian "
            "is outside its validity regime",
            stacklevel=2,
        )
    return toggling_first_order(segments, h_err, operators, nodes) / tau


def toggling_second_order(segments, h_err, operators, nodes: int = 16):
    """Second Magnus term in the toggling frame,
    Phi^[2] = (-i/2) int_0^tau dt1 int_0^t1 dt2 [Htilde(t1), Htilde(t2)],
    returned as a Hermitian matrix."""
    starts, frames, _, tau = _segment_frames(segments, operators)

    def htilde(t):
        u = _u_at(starts, frames, tau, t)
        return u.conj().T @ h_err @ u

    def inner_increment(a, b):
        # integral of Htilde over [a, b], split at segment boundaries
        acc = np.zeros_like(h_err, dtype=complex)
        cuts = [a] + [t for t in starts if a < t < b] + [b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            ts, wts = _gl_nodes(lo, hi, nodes)
            for s, wt in zip(ts, wts):
                acc += wt * htilde(s)
        return acc

    phi2 = np.zeros_like(h_err, dtype=complex)
    cum = np.zeros_like(h_err, dtype=complex)
    prev = 0.0
    for seg, start in zip(segments, starts):
        if seg.duration == 0:
            continue
        ts, wts = _gl_nodes(start, start + seg.duration, nodes)
        for t1, wt in zip(ts, wts):
            cum = cum + inner_increment(prev, t1)
            prev = t1
            h1 = htilde(t1)
            phi2 += wt * (h1 @ cum - cum @ h1)
    return -0.5j * phi2


@dataclass(frozen=True)
class DCGSchedule:
    """Assembled dynamically corrected gate.

    alpha is the duration overhead tau_DCG / tau of the schedule relative
    to the bare target, beta the fraction of tau spent on balanced-pair
    segments (identity gates plus the stretched target), gamma the
    accumulated control angle chi * tau of the bare target.
    """

    sequence_name: str
    segments: tuple
    target: tuple
    alpha: float
    beta: float
    gamma: float

    def duration(self) -> float:
        return total_duration(self.segments)


def _error_samples(n, samples, seed, families):
    if families is None:
        from .ensemble import sample_noise

        mixes = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        out = []
        for k in range(samples):
            dn, pn = mixes[k % len(mixes)]
            _, h = sample_noise(n, dn, pn, rwa=True, seed=seed + k)
            out.append(h)
        return out
    from .sequences import _family_samples

    out = []
    for fam in families:
        out.extend(_family_samples(fam, n, samples, seed))
    return out


def correctability_residual(
    seq: DDSequence, target, n: int = 4, samples: int = 3, seed: int = 0,
    nodes: int = _QUAD_NODES, families=None,
) -> float:
    """Worst relative residual of the target's finite-duration error under
    the sequence's group average.

    Error Hamiltonians are sampled from the rotating-wave noise model
    (pure disorder, pure dipolar, and an equal mix), matching the regime in
    which squeezing pulses have correctable errors; passing families
    overrides this with samples from the named noise families.  The default
    n = 4 is large enough for the many-body leakage of
    squeezing-then-rotation composites to show up, which pair ensembles
    cannot express.
    """
    ops = collective_operators(n)
    us = seq.group_unitaries(ops)
    tau = total_duration(target)
    worst = 0.0
    for h in _error_samples(n, samples, seed, families):
        # the residual ratio is scale invariant, so the first-order integral
        # is used directly without the small-parameter warning
        heff = toggling_first_order(target, h, ops, nodes) / tau
        scale = operator_norm(heff)
        if scale < 1e-14 * operator_norm(h):
            continue
        worst = max(worst, operator_norm(symmetrize(us, heff)) / scale)
    return worst


def assemble_dcg(
    seq: DDSequence,
    target,
    chi: float,
    check: bool = True,
    tol: float = CORRECTABILITY_TOL,
    n: int = 4,
    samples: int = 3,
    seed: int = 0,
) -> DCGSchedule:
    """Wrap a target gate in an Eulerian dynamically corrected schedule.

    Decoupling pulses follow the sequence's Eulerian cycle; a balanced
    identity gate is inserted at the first visit of each non-initial group
    element (|G| - 1 insertions) and the stretched target ends the
    schedule, so the noise-free composition equals the target unitary and
    the first-order toggling error cancels.  With check enabled, targets
    whose finite-duration error leaks out of the sequence's correctable
    subspace (for example a squeezing followed by a rotation) are rejected.
    """
    target = tuple(replace(s, role="plain") for s in target)
    if total_duration(target) == 0:
        raise ValueError("target has zero duration")
    if check:
        residual = correctability_residual(seq, target, n=n, samples=samples, seed=seed)
        if residual > tol:
            raise ValueError(
                f"finite-duration error of target leaks out of the correctable "
                f"subspace of sequence {seq.name!r} (residual {residual:.3e} > {tol:g})"
            )
    pair = balanced_pair(target)
    gens = seq.generator_matrices()
    frame = np.eye(3)
    visited = {_key(frame)}
    segments = []
    for gi in seq.pulse_order:
        ax, angle = seq.generators[gi]
        segments.append(rotation_segment(ax, angle, chi, role="dd"))
        frame = gens[gi] @ frame
        k = _key(frame)
        if k not in visited:
            visited.add(k)
            segments.extend(pair["identity"])
    segments.extend(pair["stretched"])
    tau = total_duration(target)
    bp_time = sum(
        s.duration for s in segments if s.role in ("id_fwd", "id_rev", "stretched")
    )
    return DCGSchedule(
        sequence_name=seq.name,
        segments=tuple(segments),
        target=target,
        alpha=total_duration(segments) / tau,
        beta=bp_time / tau,
        gamma=chi * tau,
    )


def state_prep_segments(cycles, chi: float):
    """Bare pulse list for a state-preparation protocol on an ensemble:
    a pi/2 rotation about x takes the all-up product state to the +y
    coherent state, then each cycle plays its y rotation and z squeezing
    (zero-angle pulses are skipped)."""
    segments = [rotation_segment((1.0, 0.0, 0.0), np.pi / 2, chi)]
    for theta, eta in cycles:
        if theta != 0:
            segments.append(rotation_segment((0.0, 1.0, 0.0), theta, chi))
        if eta != 0:
            segments.append(squeezing_segment(eta, chi))
    return segments


def per_pulse_schedule(segments, rotation_seq: DDSequence, squeezing_seq: DDSequence,
                       chi: float, check: bool = False):
    """Protect every pulse individually: rotations are wrapped with
    rotation_seq, squeezings with squeezing_seq."""
    out = []
    for seg in segments:
        seq = rotation_seq if seg.kind == "rotation" else squeezing_seq
        out.extend(assemble_dcg(seq, [seg], chi, check=check).segments)
    return out


def per_cycle_schedule(segments, seq: DDSequence, chi: float, check: bool = False):
    """Protect rotation+squeezing blocks as composites: each maximal run of
    segments ending in a squeezing pulse is wrapped as one target."""
    out = []
    block = []
    for seg in segments:
        block.append(seg)
        if seg.kind == "squeezing":
            out.extend(assemble_dcg(seq, block, chi, check=check).segments)
            block = []
    if block:
        out.extend(assemble_dcg(seq, block, chi, check=check).segments)
    return out
