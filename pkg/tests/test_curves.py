import numpy as np
import pytest

from ribbonopt.curves import (
    NonPositiveCurvature,
    eval_fields,
    field_bound,
    integrate_frenet,
    make_preset,
    make_sampled,
)


def closed_form_frame(kappa, tau, s):
    """Exact solution of the frame ODE for constant curvature and torsion.

    Starting from (origin, e1, e2, e3); independent oracle for the RK4
    integrator.  Covers the circle (tau = 0) and all circular helices.
    """
    s = np.asarray(s, dtype=float)
    w2 = kappa**2 + tau**2
    w = np.sqrt(w2)
    sin, cos = np.sin(w * s), np.cos(w * s)
    gamma = np.stack(
        [
            (tau**2 * s + kappa**2 * sin / w) / w2,
            kappa * (1.0 - cos) / w2,
            kappa * tau * (s - sin / w) / w2,
        ],
        axis=-1,
    )
    T = np.stack(
        [(tau**2 + kappa**2 * cos) / w2, kappa * sin / w, kappa * tau * (1.0 - cos) / w2],
        axis=-1,
    )
    return gamma, T


def max_position_error(kappa, tau, l, n):
    curve = make_preset("helix", [kappa, tau], l)
    frames = integrate_frenet(curve, n)
    s = np.array([f.t for f in frames])
    gamma = np.array([f.gamma for f in frames])
    exact, _ = closed_form_frame(kappa, tau, s)
    return np.max(np.linalg.norm(gamma - exact, axis=1))


def test_helix_preset_constant_fields():
    curve = make_preset("helix", [1.0, 0.5], 2 * np.pi)
    s = eval_fields(curve, 4)
    assert np.array_equal(s.kappa_nodes, np.ones(5))
    assert np.array_equal(s.tau_mid, np.full(4, 0.5))


def test_var_tau_preset_is_linear():
    curve = make_preset("constant_kappa_var_tau", [1.0, 0.0, 1.0], 1.0)
    s = eval_fields(curve, 4)
    assert np.allclose(s.tau_nodes, np.linspace(0, 1, 5))
    assert np.array_equal(s.kappa_mid, np.ones(4))


def test_preset_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_preset("helix", [-1.0, 0.5], 1.0)
    with pytest.raises(ValueError):
        make_preset("helix", [1.0, 0.5], 0.0)
    with pytest.raises(ValueError):
        make_preset("twisted_profile", [1.0, 1.5, 0.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        make_preset("nope", [1.0], 1.0)


def test_sampled_linear_interpolation():
    curve = make_sampled([0.0, 1.0], [1.0, 2.0], [0.0, 0.0])
    s = eval_fields(curve, 2)
    assert np.allclose(s.kappa_nodes, [1.0, 1.5, 2.0])


def test_sampled_rejects_nonpositive_kappa():
    with pytest.raises(NonPositiveCurvature):
        make_sampled([0.0, 0.5, 1.0], [1.0, 0.0, 1.0], [0.0, 0.0, 0.0])


def test_sampled_rejects_bad_grid():
    with pytest.raises(ValueError):
        make_sampled([0.5, 1.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        make_sampled([0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])


def test_circle_closes():
    curve = make_preset("helix", [1.0, 0.0], 2 * np.pi)
    frames = integrate_frenet(curve, 2000)
    assert np.linalg.norm(frames[-1].gamma - frames[0].gamma) < 1e-6


def test_helix_matches_closed_form():
    assert max_position_error(1.0, 0.5, 2 * np.pi, 2000) < 1e-6


def test_helix_radius_and_pitch():
    kappa, tau = 1.0, 0.5
    w2 = kappa**2 + tau**2
    curve = make_preset("helix", [kappa, tau], 2 * np.pi)
    frames = integrate_frenet(curve, 2000)
    # Axis of the helix: direction (tau T + kappa B)/w through gamma(0) + r P(0).
    f0 = frames[0]
    axis_dir = (tau * f0.T + kappa * f0.B) / np.sqrt(w2)
    axis_point = f0.gamma + (kappa / w2) * f0.P
    gamma = np.array([f.gamma for f in frames])
    rel = gamma - axis_point
    radial = rel - np.outer(rel @ axis_dir, axis_dir)
    assert np.max(np.abs(np.linalg.norm(radial, axis=1) - kappa / w2)) < 1e-6
    # Axial advance rate tau/w corresponds to pitch parameter tau/w2.
    rate = (frames[-1].gamma - f0.gamma) @ axis_dir / curve.l
    assert abs(rate / np.sqrt(w2) - tau / w2) < 1e-6


def test_frames_orthonormal_and_right_handed():
    curve = make_preset("twisted_profile", [1.0, 0.4, 0.3, 0.8], 3.0)
    for f in integrate_frenet(curve, 300):
        m = np.stack([f.T, f.P, f.B])
        assert np.max(np.abs(m @ m.T - np.eye(3))) <= 1e-8
        assert np.linalg.det(m) > 0


@pytest.mark.parametrize("kappa,tau", [(1.0, 0.0), (1.0, 0.5)])
def test_fourth_order_convergence(kappa, tau):
    e1 = max_position_error(kappa, tau, 2 * np.pi, 100)
    e2 = max_position_error(kappa, tau, 2 * np.pi, 200)
    assert 12.0 < e1 / e2 < 20.0


def test_eval_fields_deterministic():
    curve = make_preset("twisted_profile", [2.0, 0.3, 0.1, 0.7], 2.0)
    s1 = eval_fields(curve, 64)
    s2 = eval_fields(curve, 64)
    for a, b in zip(s1, s2):
        assert np.array_equal(a, b)


def test_field_bound():
    curve = make_preset("helix", [1.0, -2.5], 1.0)
    assert field_bound(curve, 16) == 2.5
