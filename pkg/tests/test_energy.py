import json

import numpy as np
import pytest

from ribbonopt.curves import make_preset
from ribbonopt.energy import (
    FramingField,
    GridMismatch,
    energy_E,
    energy_E_eps,
    energy_E_interval,
    framing_components,
    gradient_E_eps,
    gradient_fd_excess,
    integrand_extended,
)

HELIX = make_preset("helix", [1.0, 0.5], 2 * np.pi)


def constant_framing(l, n, value):
    return FramingField(l, np.full(n + 1, value))


def smooth_random_theta(rng, nodes, l):
    """Random framing with O(1) slopes (keeps the FD oracle well scaled)."""
    theta = rng.uniform(-np.pi, np.pi) + rng.uniform(-1.5, 1.5) * nodes
    for m in range(1, 4):
        theta += (
            rng.uniform(-0.5, 0.5)
            / m
            * np.sin(np.pi * m * nodes / l + rng.uniform(0, 2 * np.pi))
        )
    return theta


def test_framing_components():
    assert framing_components(1.0, 0.0, 0.0, 0.0) == (1.0, 0.0)
    kn, tg = framing_components(2.0, 0.3, np.pi / 2, -0.3)
    assert abs(kn) < 1e-15 and abs(tg) < 1e-15
    kn, tg = framing_components(1.0, 0.5, np.pi / 3, 0.0)
    # cos(pi/3) = 1/2 by hand
    assert abs(kn - 0.5) < 1e-15 and tg == 0.5


def test_integrand_extended_conventions():
    assert integrand_extended(0.0, 0.0) == 0.0
    assert integrand_extended(1.0, 1.0) == 4.0
    assert integrand_extended(0.0, 0.25) == np.inf
    out = integrand_extended([0.0, 1.0, 0.0], [0.0, 1.0, 2.0])
    assert np.array_equal(out, [0.0, 4.0, np.inf])


def test_integrand_is_sup_of_regularized():
    rng = np.random.default_rng(3)
    a = rng.uniform(0, 2, 50)
    b = rng.uniform(0, 2, 50)
    ext = integrand_extended(a, b)
    for eps in [1.0, 0.1, 1e-3, 1e-6]:
        assert np.all((a + b) ** 2 / (a + eps**2) <= ext + 1e-12)


def test_energy_of_frenet_framing_unit_curvature():
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    report = energy_E(curve, constant_framing(1.0, 8, 0.0))
    assert report.value == 1.0
    assert report.j_measure == 1.0


def test_energy_periodic_shift_invariance():
    curve = make_preset("helix", [1.0, 1.0], 1.0)
    base = energy_E(curve, constant_framing(1.0, 8, 0.0)).value
    assert base == 4.0
    for n in (1, 2, -3):
        shifted = energy_E(curve, constant_framing(1.0, 8, 2 * np.pi * n)).value
        assert abs(shifted - base) <= 1e-10 * base


def test_twist_following_framing_closed_form():
    # theta(t) = -tau*t makes the slope term vanish; the energy reduces to
    # int kappa^2 cos^2(tau t) dt = l/2 + sin(2 tau l)/(4 tau).
    tau, l, n = 2.0, 1.0, 4096
    curve = make_preset("helix", [1.0, tau], l)
    nodes = np.linspace(0.0, l, n + 1)
    framing = FramingField(l, -tau * nodes)
    expected = l / 2 + np.sin(2 * tau * l) / (4 * tau)
    assert abs(energy_E(curve, framing).value - expected) < 1e-6


def test_energy_eps_vanishing_numerator():
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    framing = constant_framing(1.0, 8, np.pi / 2)
    for eps in (1.0, 1e-2, 1e-6):
        assert energy_E_eps(curve, framing, eps).value < 1e-30


def test_energy_eps_monotone_in_eps():
    rng = np.random.default_rng(7)
    curve = make_preset("twisted_profile", [1.0, 0.3, 0.5, 0.5], 2.0)
    for _ in range(20):
        framing = FramingField(2.0, rng.normal(0.0, 2.0, 33))
        e_ext = energy_E(curve, framing).value
        values = [energy_E_eps(curve, framing, eps).value for eps in (1.0, 0.1, 1e-3)]
        assert values[0] <= values[1] * (1 + 1e-12)
        assert values[1] <= values[2] * (1 + 1e-12)
        assert values[2] <= e_ext * (1 + 1e-12)


def test_energy_eps_close_to_extended_away_from_singularities():
    l, n = 2.0, 256
    curve = make_preset("helix", [1.0, 0.5], l)
    nodes = np.linspace(0, l, n + 1)
    framing = FramingField(l, 0.3 + 0.2 * np.sin(2 * np.pi * nodes / l))
    mean = 0.5 * (framing.theta[:-1] + framing.theta[1:])
    min_a = np.min(np.cos(mean) ** 2)  # kappa = 1
    eps = 1e-6
    e_ext = energy_E(curve, framing).value
    e_eps = energy_E_eps(curve, framing, eps).value
    assert 0 <= e_ext - e_eps <= e_ext * eps**2 / min_a * (1 + 1e-9)
    assert e_ext - e_eps <= 1e-6 * e_ext


def test_interval_energy_additive():
    rng = np.random.default_rng(11)
    framing = FramingField(HELIX.l, rng.normal(0, 1, 65))
    total = energy_E(HELIX, framing).value
    assert energy_E_interval(HELIX, framing, 0, 64) == pytest.approx(total, rel=1e-12)
    split = energy_E_interval(HELIX, framing, 0, 20) + energy_E_interval(
        HELIX, framing, 20, 64
    )
    assert split == pytest.approx(total, rel=1e-12)
    with pytest.raises(IndexError):
        energy_E_interval(HELIX, framing, 5, 5)


def test_interval_energy_constant_integrand():
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    framing = constant_framing(1.0, 8, 0.0)
    assert energy_E_interval(curve, framing, 0, 4) == pytest.approx(0.5, rel=1e-14)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    n, l = 16, 1.0
    h = l / n
    nodes = np.linspace(0, l, n + 1)
    for _ in range(5):
        theta = smooth_random_theta(rng, nodes, l)
        kmid = rng.uniform(0.5, 2.0, n)
        tmid = rng.uniform(-1.5, 1.5, n)
        for eps in (1.0, 0.1, 1e-3):
            assert gradient_fd_excess(theta, h, kmid, tmid, eps) <= 1e-6


def test_gradient_zero_at_symmetric_minimum():
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    framing = constant_framing(1.0, 16, np.pi / 2)
    assert np.max(np.abs(gradient_E_eps(curve, framing, 0.1))) < 1e-12


def test_gradient_dirichlet_clamps_endpoints():
    rng = np.random.default_rng(5)
    framing = FramingField(HELIX.l, rng.normal(0, 1, 33))
    grad = gradient_E_eps(HELIX, framing, 0.1, bc="dirichlet")
    assert grad[0] == 0.0 and grad[-1] == 0.0
    free = gradient_E_eps(HELIX, framing, 0.1, bc="free")
    assert np.array_equal(free[1:-1], grad[1:-1])


def test_reflection_symmetry():
    rng = np.random.default_rng(13)
    theta = rng.normal(0, 1, 33)
    curve_pos = make_preset("helix", [1.0, 0.7], 1.0)
    curve_neg = make_preset("helix", [1.0, -0.7], 1.0)
    e1 = energy_E(curve_pos, FramingField(1.0, theta)).value
    e2 = energy_E(curve_neg, FramingField(1.0, -theta)).value
    assert e1 == e2


def test_quadrature_second_order():
    curve = make_preset("twisted_profile", [1.0, 0.3, 0.4, 0.3], 2.0)

    def value(n):
        nodes = np.linspace(0, 2.0, n + 1)
        return energy_E(curve, FramingField(2.0, 0.3 + 0.2 * np.sin(np.pi * nodes))).value

    d1 = value(64) - value(128)
    d2 = value(128) - value(256)
    assert 3.3 < d1 / d2 < 4.7


def test_normalized_representative():
    framing = FramingField(1.0, np.linspace(7.0, 9.0, 9))
    norm = framing.normalized()
    assert 0.0 <= norm.theta[0] < 2 * np.pi
    again = FramingField(1.0, framing.theta + 4 * np.pi).normalized()
    assert np.allclose(again.theta, norm.theta, atol=1e-9)


def test_report_serialization():
    curve = make_preset("helix", [1.0, 0.0], 1.0)
    report = energy_E(curve, constant_framing(1.0, 8, 0.0))
    data = json.loads(report.to_json())
    assert set(data) == {"E", "eps", "per_interval", "J_measure"}
    assert data["E"] == 1.0 and data["eps"] == 0.0
    # An exactly singular interval with twist renders as "inf".
    bad = FramingField(1.0, np.zeros(9))
    object.__setattr__(bad, "theta", bad.theta)  # keep dataclass frozen semantics
    per = report.per_interval.copy()
    report.per_interval = np.append(per, np.inf)
    report.value = np.inf
    assert json.loads(report.to_json())["E"] == "inf"


def test_grid_mismatch():
    framing = FramingField(1.0, np.zeros(9))
    with pytest.raises(GridMismatch):
        energy_E(HELIX, framing)
