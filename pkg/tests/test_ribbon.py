import numpy as np
import pytest

from ribbonopt.curves import integrate_frenet, make_preset
from ribbonopt.energy import FramingField, GridMismatch
from ribbonopt.ribbon import (
    EmptyMesh,
    RulingData,
    build_mesh,
    darboux_frames,
    flatness_report,
    ruling_directions,
    write_obj,
)

HELIX = make_preset("helix", [1.0, 0.5], 2 * np.pi)


def make_strip(curve, framing, n, w_frac=0.05, samples_across=3):
    frames = integrate_frenet(curve, n)
    dframes = darboux_frames(frames, framing)
    rulings = ruling_directions(curve, framing, dframes)
    mesh = build_mesh(frames, rulings, w=w_frac * curve.l, samples_across=samples_across)
    return frames, dframes, rulings, mesh


def constant_framing(curve, n, value):
    return FramingField(curve.l, np.full(n + 1, value))


def test_darboux_zero_rotation_returns_frenet_vectors():
    n = 64
    frames = integrate_frenet(HELIX, n)
    dframes = darboux_frames(frames, constant_framing(HELIX, n, 0.0))
    for f, d in zip(frames, dframes):
        assert np.allclose(d.n, f.P, atol=1e-12)
        assert np.allclose(d.u, -f.B, atol=1e-12)  # u = n x T


def test_darboux_quarter_turn_gives_binormal():
    n = 64
    frames = integrate_frenet(HELIX, n)
    dframes = darboux_frames(frames, constant_framing(HELIX, n, np.pi / 2))
    for f, d in zip(frames, dframes):
        assert np.allclose(d.n, f.B, atol=1e-10)


def test_darboux_orthonormal_right_handed():
    n = 128
    curve = make_preset("twisted_profile", [1.0, 0.3, 0.4, 0.6], 2.0)
    frames = integrate_frenet(curve, n)
    nodes = np.linspace(0, 2.0, n + 1)
    framing = FramingField(2.0, 0.7 * np.sin(2 * nodes) + 0.3 * nodes)
    for d in darboux_frames(frames, framing):
        m = np.stack([d.T, d.u, d.n])
        assert np.max(np.abs(m @ m.T - np.eye(3))) <= 1e-8
        assert np.linalg.det(m) > 0
        assert abs(np.dot(d.n, d.T)) <= 1e-10


def test_darboux_grid_mismatch():
    frames = integrate_frenet(HELIX, 16)
    with pytest.raises(GridMismatch):
        darboux_frames(frames, constant_framing(HELIX, 32, 0.0))


def test_ruling_frenet_framing_is_darboux_vector():
    # theta = 0: the ruling lies along tau*T + kappa*B, the axis direction
    # of the envelope of rectifying planes.
    n = 64
    frames = integrate_frenet(HELIX, n)
    framing = constant_framing(HELIX, n, 0.0)
    rulings = ruling_directions(HELIX, framing, darboux_frames(frames, framing))
    expected = np.array([0.5, 1.0, 0.0]) / np.hypot(0.5, 1.0)  # (tau T + kappa B)/|.|
    for f, d in zip(frames, rulings.directions):
        world = 0.5 * f.T + 1.0 * f.B
        world /= np.linalg.norm(world)
        assert min(np.linalg.norm(d - world), np.linalg.norm(d + world)) <= 1e-9


def test_ruling_degenerate_axes():
    n = 64
    # tau_g = 0, kappa_n != 0: ruling perpendicular to T in the tangent plane.
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    frames = integrate_frenet(curve, n)
    framing = constant_framing(curve, n, 0.3)
    dframes = darboux_frames(frames, framing)
    rulings = ruling_directions(curve, framing, dframes)
    for d, df in zip(rulings.directions, dframes):
        assert min(np.linalg.norm(d - df.u), np.linalg.norm(d + df.u)) <= 1e-12
    # kappa_n ~ 0, tau_g != 0: ruling along the tangent.
    framing = constant_framing(curve, n, np.pi / 2)
    nodes = np.linspace(0, 1, n + 1)
    framing = FramingField(1.0, np.pi / 2 + 0.5 * nodes)
    dframes = darboux_frames(frames, framing)
    rulings = ruling_directions(curve, framing, dframes)
    mid = n // 2  # theta crosses no singular level except near t=0
    assert np.all(rulings.valid)
    angles_expected = np.arctan2(-np.cos(framing.theta), 0.5)
    assert np.allclose(rulings.angles, angles_expected, atol=1e-12)


def test_ruling_grid_mismatch():
    frames = integrate_frenet(HELIX, 16)
    framing = constant_framing(HELIX, 16, 0.0)
    dframes = darboux_frames(frames, framing)
    with pytest.raises(GridMismatch):
        ruling_directions(HELIX, constant_framing(HELIX, 32, 0.0), dframes)


def test_build_mesh_rejects_bad_width():
    n = 16
    frames = integrate_frenet(HELIX, n)
    framing = constant_framing(HELIX, n, 0.0)
    rulings = ruling_directions(HELIX, framing, darboux_frames(frames, framing))
    with pytest.raises(ValueError):
        build_mesh(frames, rulings, w=0.0)
    with pytest.raises(ValueError):
        build_mesh(frames, rulings, w=0.1, samples_across=1)


def test_build_mesh_empty_when_no_valid_pairs():
    n = 8
    frames = integrate_frenet(HELIX, n)
    directions = np.full((n + 1, 3), np.nan)
    rulings = RulingData(
        directions=directions,
        angles=np.zeros(n + 1),
        valid=np.zeros(n + 1, dtype=bool),
    )
    with pytest.raises(EmptyMesh):
        build_mesh(frames, rulings, w=0.1)


def test_planar_strip_is_flat():
    # Circle with the binormal framing: the strip lies in the plane.
    curve = make_preset("helix", [1.0, 0.0], 2 * np.pi)
    framing = constant_framing(curve, 256, np.pi / 2)
    _, _, rulings, mesh = make_strip(curve, framing, 256)
    assert np.all(rulings.valid)
    report = flatness_report(mesh)
    assert report["max_defect"] <= 1e-10
    assert report["normal_drift_along_rulings"] <= 1e-10


def test_rectifying_developable_drift():
    framing = constant_framing(HELIX, 1024, 0.0)
    _, _, _, mesh = make_strip(HELIX, framing, 1024)
    report = flatness_report(mesh)
    assert report["normal_drift_along_rulings"] <= 1e-5
    assert report["max_defect"] <= 1e-10


def test_generic_framing_defect_small_and_refining():
    nodes = {n: np.linspace(0, HELIX.l, n + 1) for n in (256, 512)}
    reports = {}
    for n, ts in nodes.items():
        framing = FramingField(HELIX.l, 0.4 + 0.2 * np.sin(2 * np.pi * ts / HELIX.l))
        _, _, _, mesh = make_strip(HELIX, framing, n)
        reports[n] = flatness_report(mesh)
    assert reports[256]["max_defect"] <= 1e-10
    assert reports[512]["normal_drift_along_rulings"] <= 0.5 * reports[256][
        "normal_drift_along_rulings"
    ] + 1e-12


def test_centerline_normal_matches_rotated_normal():
    n = 512
    nodes = np.linspace(0, HELIX.l, n + 1)
    framing = FramingField(HELIX.l, 0.4 + 0.2 * np.sin(2 * np.pi * nodes / HELIX.l))
    _, dframes, _, mesh = make_strip(HELIX, framing, n, w_frac=0.01)
    center = mesh.vertex_normals[1::3]
    darboux_normals = np.array([d.n for d in dframes])
    err = min(
        np.max(np.linalg.norm(center - darboux_normals, axis=1)),
        np.max(np.linalg.norm(center + darboux_normals, axis=1)),
    )
    assert err <= 1e-6


def test_ruling_sign_flip_leaves_geometry():
    n = 64
    frames = integrate_frenet(HELIX, n)
    framing = constant_framing(HELIX, n, 0.2)
    rulings = ruling_directions(HELIX, framing, darboux_frames(frames, framing))
    flipped = RulingData(
        directions=-rulings.directions, angles=rulings.angles, valid=rulings.valid
    )
    mesh_a = build_mesh(frames, rulings, w=0.1)
    mesh_b = build_mesh(frames, flipped, w=0.1)
    va = np.array(sorted(map(tuple, np.round(mesh_a.vertices, 12))))
    vb = np.array(sorted(map(tuple, np.round(mesh_b.vertices, 12))))
    assert np.allclose(va, vb, atol=1e-12)
    ra = flatness_report(mesh_a)
    rb = flatness_report(mesh_b)
    assert ra["max_defect"] == pytest.approx(rb["max_defect"], abs=1e-12)


def test_write_obj_format(tmp_path):
    n = 16
    frames = integrate_frenet(HELIX, n)
    framing = constant_framing(HELIX, n, 0.2)
    rulings = ruling_directions(HELIX, framing, darboux_frames(frames, framing))
    mesh = build_mesh(frames, rulings, w=0.1)
    path = tmp_path / "ribbon.obj"
    write_obj(mesh, path)
    lines = path.read_text().strip().splitlines()
    v_lines = [ln for ln in lines if ln.startswith("v ")]
    f_lines = [ln for ln in lines if ln.startswith("f ")]
    assert len(v_lines) == len(mesh.vertices)
    assert len(f_lines) == len(mesh.faces)
    first = v_lines[0].split()
    assert np.allclose([float(x) for x in first[1:]], mesh.vertices[0])
    indices = np.array([[int(x) for x in ln.split()[1:]] for ln in f_lines])
    assert indices.min() >= 1 and indices.max() == len(mesh.vertices)
