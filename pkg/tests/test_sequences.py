"""Decoupling groups, Eulerian pulse orders, and sequence configurations."""
import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from acspin.ensemble import collective_operators, operator_norm, sample_noise
from acspin.sequences import (
    DDSequence,
    NOISE_FAMILIES,
    RESIDUAL_TOL,
    axis_angle,
    body_diagonal_axes,
    close_group,
    coordinate_axes,
    eulerian_order,
    load_named,
    load_sequence,
    rotation_matrix,
    rotation_unitary,
    save_sequence,
    search_sequences,
    symmetrize,
    tilted_axes,
    verify_decoupling,
)


def test_rotation_matrix_against_scipy():
    rng = np.random.default_rng(4)
    for _ in range(10):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(-np.pi, np.pi)
        want = Rotation.from_rotvec(angle * axis).as_matrix()
        got = rotation_matrix(axis, angle)
        assert np.abs(got - want).max() < 1e-13


def test_axis_angle_roundtrip():
    rng = np.random.default_rng(5)
    for _ in range(10):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.1, np.pi - 0.1)
        ax, ang = axis_angle(rotation_matrix(axis, angle))
        assert ang == pytest.approx(angle, abs=1e-10)
        assert np.abs(ax - axis).max() < 1e-9
    # identity and angle-pi edge cases
    ax, ang = axis_angle(np.eye(3))
    assert ang == 0.0
    axis = np.array([1.0, 2.0, -1.0]) / np.sqrt(6)
    ax, ang = axis_angle(rotation_matrix(axis, np.pi))
    assert ang == pytest.approx(np.pi)
    assert min(np.abs(ax - axis).max(), np.abs(ax + axis).max()) < 1e-9


def test_close_group_orders():
    diag = body_diagonal_axes()
    tetra = close_group(
        [rotation_matrix(diag[0], 2 * np.pi / 3), rotation_matrix(diag[1], 2 * np.pi / 3)]
    )
    assert len(tetra) == 12
    klein = close_group(
        [rotation_matrix([1, 0, 0], np.pi), rotation_matrix([0, 1, 0], np.pi)]
    )
    assert len(klein) == 4
    dihedral = close_group(
        [rotation_matrix([0, 0, 1], np.pi / 2), rotation_matrix([1, 0, 0], np.pi)]
    )
    assert len(dihedral) == 8
    # identity always comes first
    assert np.abs(tetra[0] - np.eye(3)).max() == 0.0


def test_close_group_rejects_infinite_closure():
    with pytest.raises(ValueError):
        close_group([rotation_matrix([0, 0, 1], 0.1)], max_order=30)


def test_rotation_unitary_matches_axis_angle_exponential():
    ops = collective_operators(2)
    axis = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    r = rotation_matrix(axis, 2 * np.pi / 3)
    u = rotation_unitary(r, ops)
    # conjugating the spin vector must reproduce the classical rotation
    jvec = ops[:3]
    for a in range(3):
        rotated = u.conj().T @ jvec[a] @ u
        want = sum(r[a, b] * jvec[b] for b in range(3))
        assert np.abs(rotated - want).max() < 1e-12


def test_symmetrize_projects_and_averages():
    ops = collective_operators(1)
    diag = body_diagonal_axes()
    group = close_group(
        [rotation_matrix(diag[0], 2 * np.pi / 3), rotation_matrix(diag[1], 2 * np.pi / 3)]
    )
    us = [rotation_unitary(r, ops) for r in group]
    # a single-spin dipole has no tetrahedrally invariant component
    for h in ops[:3]:
        assert operator_norm(symmetrize(us, np.asarray(h))) < 1e-12
    # symmetrizing twice changes nothing (projector property)
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = (a + a.conj().T) / 2
    once = symmetrize(us, h)
    twice = symmetrize(us, once)
    assert np.abs(once - twice).max() < 1e-12
    with pytest.raises(ValueError):
        symmetrize([], h)


def test_eulerian_order_walks_every_edge_once():
    diag = body_diagonal_axes()
    gens = [rotation_matrix(diag[0], 2 * np.pi / 3), rotation_matrix(diag[1], 2 * np.pi / 3)]
    group = close_group(gens)
    order = eulerian_order(group, gens)
    assert len(order) == len(group) * len(gens)
    # independent walk: track visited (frame, generator) pairs and closure
    frame = np.eye(3)
    seen = set()
    keys = {tuple(np.round(g, 8).ravel()): i for i, g in enumerate(group)}
    for gi in order:
        node = keys[tuple(np.round(frame, 8).ravel())]
        assert (node, gi) not in seen
        seen.add((node, gi))
        frame = gens[gi] @ frame
    assert len(seen) == len(order)
    assert np.abs(frame - np.eye(3)).max() < 1e-10


def test_eulerian_order_requires_generating_set():
    gens = [rotation_matrix([1, 0, 0], np.pi)]
    group = close_group(
        [rotation_matrix([1, 0, 0], np.pi), rotation_matrix([0, 1, 0], np.pi)]
    )
    with pytest.raises(ValueError):
        eulerian_order(group, gens)


@pytest.mark.parametrize(
    "name,order,families",
    [
        ("tedd", 12, set(NOISE_FAMILIES)),
        ("teddy", 4, {"disorder", "dipolar_rwa"}),
    ],
)
def test_packaged_sequences_validate(name, order, families):
    seq = load_named(name)
    assert len(seq.group()) == order
    assert set(seq.families) == families
    assert len(seq.pulse_order) == 2 * order
    seq.validate(n=3, samples=3, seed=1)


def test_teddy_leaks_general_dipolar():
    seq = load_named("teddy", validate=False)
    res = verify_decoupling(seq, "dipolar_general", n=2, samples=4, seed=0)
    assert res > 1e-2


def test_tedd_cancels_general_dipolar():
    seq = load_named("tedd", validate=False)
    res = verify_decoupling(seq, "dipolar_general", n=3, samples=3, seed=2)
    assert res < RESIDUAL_TOL


def test_verify_decoupling_rejects_unknown_family():
    seq = load_named("tedd", validate=False)
    with pytest.raises(ValueError):
        verify_decoupling(seq, "flicker")


def test_search_body_diagonals_finds_full_cancellation():
    found = search_sequences(body_diagonal_axes(), 2 * np.pi / 3, 12, name="t")
    assert len(found) == 6  # every unordered pair of body diagonals works
    for seq in found:
        assert set(seq.families) == set(NOISE_FAMILIES)


def test_search_tilted_axes_finds_secular_cancellation():
    found = search_sequences(tilted_axes(), np.pi, 4, name="y")
    assert len(found) == 3
    for seq in found:
        assert set(seq.families) == {"disorder", "dipolar_rwa"}


def test_coordinate_klein_only_cancels_disorder():
    """Pi pulses about coordinate axes are not enough for secular dipolar
    noise; this is what forces the tilted-axis construction."""
    found = search_sequences(coordinate_axes(), np.pi, 4, name="c")
    assert len(found) == 3
    for seq in found:
        assert set(seq.families) == {"disorder"}


def test_sequence_roundtrip_and_tamper_detection(tmp_path):
    seq = load_named("teddy", validate=False)
    path = tmp_path / "seq.json"
    save_sequence(seq, path)
    back = load_sequence(path)
    assert back == seq
    import json

    data = json.loads(path.read_text())
    data["group_order"] = 6
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    with pytest.raises(ValueError):
        load_sequence(bad)
    # a repeated edge and a truncated order both break the Eulerian property
    data = json.loads(path.read_text())
    data["pulse_order"] = [0] * len(data["pulse_order"])
    repeated = tmp_path / "repeated.json"
    repeated.write_text(json.dumps(data))
    with pytest.raises(ValueError):
        load_sequence(repeated)
    data = json.loads(path.read_text())
    data["pulse_order"] = data["pulse_order"][:-1]
    short = tmp_path / "short.json"
    short.write_text(json.dumps(data))
    with pytest.raises(ValueError):
        load_sequence(short)


def test_sequence_rejects_unknown_family():
    with pytest.raises(ValueError):
        DDSequence(
            name="x",
            generators=(((1.0, 0.0, 0.0), np.pi),),
            pulse_order=(0, 0),
            families=("cosmic",),
        )
