"""Dynamically corrected gates: segments, toggling integrals, assembly.

Toggling-frame integrals are checked against dense Riemann quadrature, and
the structural claims about finite-duration errors (squeezing commutes,
rotations mix the noise axis through an SO(3) average with a traceless
signature) are verified against direct rotation-matrix integrals.
"""
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from acspin.ddcg import (
    DCGSchedule,
    PulseSegment,
    assemble_dcg,
    balanced_pair,
    control_hamiltonian,
    correctability_residual,
    finite_duration_error,
    flip_angle_profile,
    idle_segment,
    per_cycle_schedule,
    per_pulse_schedule,
    propagator,
    rotation_segment,
    simulate_schedule,
    squeezing_segment,
    state_prep_segments,
    toggling_first_order,
    toggling_second_order,
    total_duration,
)
from acspin.ensemble import (
    NoiseInstance,
    assemble_noise,
    collective_operators,
    local_operator,
    operator_norm,
    sample_noise,
)
from acspin.metrics import distance
from acspin.sequences import load_named, rotation_matrix

CHI = 1.0


def _ops(n):
    return collective_operators(n)


def test_segment_validation():
    with pytest.raises(ValueError):
        PulseSegment("drift", None, 1.0, 1.0)
    with pytest.raises(ValueError):
        PulseSegment("rotation", (1.0, 0.0, 0.0), 1.0, -0.5)
    with pytest.raises(ValueError):
        PulseSegment("rotation", (2.0, 0.0, 0.0), 1.0, 0.5)
    with pytest.raises(ValueError):
        PulseSegment("idle", None, 0.0, 1.0, role="spectator")
    seg = squeezing_segment(0.4, CHI)
    assert seg.axis is None
    assert seg.angle == pytest.approx(0.4)


def test_rotation_segment_signs():
    seg = rotation_segment((0.0, 1.0, 0.0), -np.pi / 3, 2.0)
    assert seg.amplitude == -2.0
    assert seg.duration == pytest.approx(np.pi / 6)
    assert seg.angle == pytest.approx(-np.pi / 3)


def test_control_hamiltonian_forms():
    jx, jy, jz, jz2 = _ops(2)
    ax = np.array([0.6, 0.0, 0.8])
    rseg = PulseSegment("rotation", tuple(ax), 1.3, 0.5)
    assert np.abs(control_hamiltonian(rseg, _ops(2)) - 1.3 * (0.6 * jx + 0.8 * jz)).max() < 1e-14
    sseg = squeezing_segment(-0.9, CHI)
    assert np.abs(control_hamiltonian(sseg, _ops(2)) + jz2).max() < 1e-14
    iseg = idle_segment(2.0)
    assert np.abs(control_hamiltonian(iseg, _ops(2))).max() == 0.0


def test_simulate_schedule_matches_dense_exponentials():
    ops = _ops(2)
    _, h_err = sample_noise(2, 0.2, 0.1, rwa=False, seed=8)
    segs = [
        rotation_segment((1.0, 0.0, 0.0), np.pi / 2, CHI),
        squeezing_segment(0.7, CHI),
        rotation_segment((0.0, 1.0, 0.0), -np.pi / 4, CHI),
    ]
    got = simulate_schedule(segs, ops, h_err=h_err)
    want = np.eye(4, dtype=complex)
    for s in segs:
        want = expm(-1j * s.duration * (control_hamiltonian(s, ops) + h_err)) @ want
    assert np.abs(got - want).max() < 1e-12
    assert np.abs(propagator(segs, ops) - simulate_schedule(segs, ops)).max() < 1e-13


def test_balanced_pair_structure_and_first_order_error():
    ops = _ops(2)
    target = [
        rotation_segment((0.0, 1.0, 0.0), np.pi / 2, CHI),
        squeezing_segment(0.6, CHI),
    ]
    pair = balanced_pair(target)
    stretched, identity = pair["stretched"], pair["identity"]
    assert [s.role for s in stretched] == ["stretched"] * 2
    assert [s.role for s in identity] == ["id_fwd"] * 2 + ["id_rev"] * 2
    assert total_duration(stretched) == total_duration(identity) == 2 * total_duration(target)
    for orig, st in zip(target, stretched):
        assert st.amplitude == orig.amplitude / 2
        assert st.duration == 2 * orig.duration
    # noise-free: identity composes to 1, stretched composes to the target
    assert np.abs(propagator(identity, ops) - np.eye(4)).max() < 1e-12
    assert np.abs(propagator(stretched, ops) - propagator(target, ops)).max() < 1e-12
    # both members carry the same first-order finite-duration error
    _, h_err = sample_noise(2, 0.5, 0.5, rwa=True, seed=2)
    phi_s = toggling_first_order(stretched, h_err, ops)
    phi_i = toggling_first_order(identity, h_err, ops)
    assert np.abs(phi_s - phi_i).max() < 1e-12 * operator_norm(h_err)


def test_toggling_first_order_against_riemann():
    ops = _ops(2)
    _, h_err = sample_noise(2, 0.4, 0.3, rwa=False, seed=5)
    segs = [
        rotation_segment((1.0, 0.0, 0.0), 1.1, CHI),
        squeezing_segment(0.9, CHI),
    ]
    got = toggling_first_order(segs, h_err, ops)
    # dense midpoint rule over the exact piecewise propagator
    steps = 4000
    tau = total_duration(segs)
    acc = np.zeros_like(h_err)
    dt = tau / steps
    for k in range(steps):
        t = (k + 0.5) * dt
        u = np.eye(4, dtype=complex)
        rem = t
        for s in segs:
            d = min(rem, s.duration)
            u = expm(-1j * d * control_hamiltonian(s, ops)) @ u
            rem -= d
            if rem <= 0:
                break
        acc += dt * (u.conj().T @ h_err @ u)
    assert np.abs(got - acc).max() < 1e-6
    assert np.abs(got - got.conj().T).max() < 1e-12


def test_finite_duration_error_warning_and_validation():
    ops = _ops(2)
    _, h_err = sample_noise(2, 1.0, 0.0, rwa=True, seed=0)
    segs = [rotation_segment((1.0, 0.0, 0.0), np.pi / 2, CHI)]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning):
            finite_duration_error(segs, h_err, ops)
    small = finite_duration_error(segs, 1e-3 * h_err, ops)
    assert operator_norm(small) < 1.1e-3
    with pytest.raises(ValueError):
        finite_duration_error([idle_segment(0.0)], h_err, ops)


def test_toggling_second_order_against_nested_quadrature():
    ops = _ops(1)
    _, h_err = sample_noise(1, 0.8, 0.0, rwa=False, seed=3)
    segs = [
        rotation_segment((0.0, 1.0, 0.0), 1.3, CHI),
        rotation_segment((1.0, 0.0, 0.0), -0.7, CHI),
    ]
    got = toggling_second_order(segs, h_err, ops)
    assert np.abs(got - got.conj().T).max() < 1e-10

    def u_at(t):
        u = np.eye(2, dtype=complex)
        rem = t
        for s in segs:
            d = min(rem, s.duration)
            u = expm(-1j * d * control_hamiltonian(s, ops)) @ u
            rem -= d
            if rem <= 0:
                break
        return u

    steps = 240
    tau = total_duration(segs)
    dt = tau / steps
    hts = []
    for k in range(steps):
        u = u_at((k + 0.5) * dt)
        hts.append(u.conj().T @ h_err @ u)
    acc = np.zeros_like(h_err)
    cum = np.zeros_like(h_err)
    for k in range(steps):
        cum = cum + dt * hts[k]
        inner = cum - 0.5 * dt * hts[k]  # trapezoid-style midpoint correction
        acc += dt * (hts[k] @ inner - inner @ hts[k])
    want = -0.5j * acc
    assert np.abs(got - want).max() < 5e-4
    # second Magnus term obeys the quadratic bound
    assert operator_norm(got) <= (tau * operator_norm(h_err)) ** 2 / 2 + 1e-12


def test_squeezing_commutes_with_secular_noise():
    """A squeezing pulse leaves the noise Hamiltonian untouched."""
    ops = _ops(3)
    _, h_err = sample_noise(3, 0.5, 0.5, rwa=True, seed=7)
    segs = [squeezing_segment(1.2, CHI)]
    heff = finite_duration_error(segs, h_err, ops)
    assert np.abs(heff - h_err).max() < 1e-10


def test_rotation_error_mixing_matrix():
    """For a rotation pulse the dipolar error mixes through M_ab with
    tr[3M - 1] = 0, M matching the time average of R_za R_zb."""
    n = 2
    ops = _ops(n)
    inst = NoiseInstance(
        n=n, rwa=True, disorder=(), dipolar=(((0, 1), 1.0, (0.0, 0.0, 1.0)),)
    )
    _, _, h_dd = assemble_noise(inst)
    axis = np.array([1.0, 2.0, -0.5])
    axis /= np.linalg.norm(axis)
    angle = 1.9
    seg = rotation_segment(tuple(axis), angle, CHI)
    with warnings.catch_warnings():
        # extraction is linear in the noise, so strength is irrelevant here
        warnings.simplefilter("ignore")
        heff = finite_duration_error([seg], h_dd, ops)

    paulis = [local_operator(n, 0, p) @ local_operator(n, 1, q)
              for p in _pauli_halves() for q in _pauli_halves()]
    mprime = np.array(
        [[(np.trace(heff @ paulis[3 * a + b]).real * 4) for b in range(3)]
         for a in range(3)]
    )
    # H_eff = 3 j_a M_ab j_b - j . j  =>  overlap matrix is 3M - 1
    assert abs(np.trace(mprime)) < 1e-10
    m = (mprime + np.eye(3)) / 3
    assert np.abs(m - m.T).max() < 1e-10
    # independent oracle: M_ab = (1/tau) int R_za(t) R_zb(t) dt
    steps = 20000
    acc = np.zeros((3, 3))
    for k in range(steps):
        r = rotation_matrix(axis, angle * (k + 0.5) / steps)
        acc += np.outer(r[2], r[2]) / steps
    assert np.abs(m - acc).max() < 1e-6


def _pauli_halves():
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    return (sx, sy, sz)


def test_composite_order_decides_correctability():
    tedd = load_named("tedd", validate=False)
    rot_then_sq = [
        rotation_segment((0.0, 1.0, 0.0), 0.8, CHI),
        squeezing_segment(0.7, CHI),
    ]
    sq_then_rot = list(reversed(rot_then_sq))
    assert correctability_residual(tedd, rot_then_sq) < 1e-8
    assert correctability_residual(tedd, sq_then_rot) > 1e-2
    with pytest.raises(ValueError):
        assemble_dcg(tedd, sq_then_rot, CHI, check=True)


def test_elementary_pulses_are_correctable():
    tedd = load_named("tedd", validate=False)
    teddy = load_named("teddy", validate=False)
    assert correctability_residual(tedd, [rotation_segment((0, 1.0, 0), np.pi / 2, CHI)]) < 1e-10
    assert correctability_residual(teddy, [squeezing_segment(np.pi / 2, CHI)]) < 1e-10


def test_assemble_dcg_rotation_structure():
    tedd = load_named("tedd", validate=False)
    target = [rotation_segment((1.0, 0.0, 0.0), np.pi / 2, CHI)]
    dcg = assemble_dcg(tedd, target, CHI)
    assert isinstance(dcg, DCGSchedule)
    roles = [s.role for s in dcg.segments]
    assert len(dcg.segments) == 47
    assert roles.count("dd") == 24
    assert roles.count("id_fwd") == roles.count("id_rev") == 11
    assert roles[-1] == "stretched"
    assert dcg.duration() == pytest.approx(28 * np.pi / CHI)
    assert dcg.alpha == pytest.approx(56.0)
    assert dcg.beta == pytest.approx(24.0)
    assert dcg.gamma == pytest.approx(np.pi / 2)
    # noise-free, the schedule implements exactly the bare target
    ops = _ops(2)
    assert distance(propagator(dcg.segments, ops), propagator(target, ops)) < 1e-10


def test_assemble_dcg_squeezing_structure():
    teddy = load_named("teddy", validate=False)
    target = [squeezing_segment(np.pi / 2, CHI)]
    dcg = assemble_dcg(teddy, target, CHI)
    assert len(dcg.segments) == 15
    assert dcg.alpha == pytest.approx(24.0)
    assert dcg.beta == pytest.approx(8.0)
    ops = _ops(2)
    assert distance(propagator(dcg.segments, ops), propagator(target, ops)) < 1e-10


def test_assemble_dcg_suppresses_first_order_error():
    tedd = load_named("tedd", validate=False)
    target = [rotation_segment((1.0, 0.0, 0.0), np.pi / 2, CHI)]
    dcg = assemble_dcg(tedd, target, CHI)
    ops = _ops(2)
    _, h_err = sample_noise(2, 0.6, 0.4, rwa=True, seed=11)
    phi_plain = toggling_first_order(target, h_err, ops)
    phi_dcg = toggling_first_order(dcg.segments, h_err, ops)
    assert operator_norm(phi_plain) > 0.1
    assert operator_norm(phi_dcg) < 1e-10


def test_assemble_dcg_rejects_zero_duration_target():
    tedd = load_named("tedd", validate=False)
    with pytest.raises(ValueError):
        assemble_dcg(tedd, [idle_segment(0.0)], CHI)


def test_flip_angle_profiles():
    assert flip_angle_profile("dd", 0.05) == {"dd": 1.05}
    t1 = flip_angle_profile("bp_type1", 0.05)
    assert set(t1) == {"plain", "dd", "id_fwd", "id_rev", "stretched"}
    assert all(v == pytest.approx(1.05) for v in t1.values())
    t2 = flip_angle_profile("bp_type2", 0.05)
    assert t2["id_rev"] == pytest.approx(0.95)
    assert t2["id_fwd"] == pytest.approx(1.05)
    with pytest.raises(ValueError):
        flip_angle_profile("axis", 0.05)


def test_identity_gates_under_error_profiles():
    """Type-1 errors keep identity gates exact; type-2 errors break them."""
    ops = _ops(2)
    target = [rotation_segment((0.0, 1.0, 0.0), np.pi / 2, CHI)]
    identity = balanced_pair(target)["identity"]
    eps = 0.05
    u1 = simulate_schedule(identity, ops, profile=flip_angle_profile("bp_type1", eps))
    assert np.abs(u1 - np.eye(4)).max() < 1e-12
    u2 = simulate_schedule(identity, ops, profile=flip_angle_profile("bp_type2", eps))
    assert np.abs(u2 - np.eye(4)).max() > 0.01
    # dd-only errors leave balanced-pair segments untouched
    u3 = simulate_schedule(identity, ops, profile=flip_angle_profile("dd", eps))
    assert np.abs(u3 - np.eye(4)).max() < 1e-12


def test_state_prep_segments_layout():
    segs = state_prep_segments(((0.0, np.pi / 2), (-0.3, 0.4)), CHI)
    kinds = [s.kind for s in segs]
    assert kinds == ["rotation", "squeezing", "rotation", "squeezing"]
    assert segs[0].axis == (1.0, 0.0, 0.0)
    assert segs[0].angle == pytest.approx(np.pi / 2)
    assert segs[2].angle == pytest.approx(-0.3)


def test_per_pulse_and_per_cycle_schedules():
    tedd = load_named("tedd", validate=False)
    teddy = load_named("teddy", validate=False)
    bare = state_prep_segments(((0.0, np.pi / 2),), CHI)  # x rotation + squeezing
    ops = _ops(2)
    want = propagator(bare, ops)

    pp = per_pulse_schedule(bare, tedd, teddy, CHI)
    pc = per_cycle_schedule(bare, tedd, CHI)
    assert distance(propagator(pp, ops), want) < 1e-10
    assert distance(propagator(pc, ops), want) < 1e-10
    # per-pulse wraps each bare pulse separately: 47 + 15 segments
    assert len(pp) == 47 + 15
    # per-cycle wraps the rotation+squeezing block once
    dd_count = sum(1 for s in pc if s.role == "dd")
    assert dd_count == 24
    assert sum(1 for s in pc if s.role == "id_fwd") == 2 * 11
