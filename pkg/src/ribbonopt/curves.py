"""Space curves given by curvature and torsion profiles.

A curve is specified by its length ``l`` and two scalar fields ``kappa(t)``
(strictly positive) and ``tau(t)`` on ``[0, l]``; the curve itself is never
stored.  When point geometry is needed (ribbon export), the moving frame is
recovered by integrating the frame ODE

    T' = kappa * P,   P' = -kappa * T + tau * B,   B' = -tau * P,

with gamma' = T, from the standard start (origin, e1, e2, e3).
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .validation import as_float_array, check_interval_count, check_positive_scalar

PRESET_NAMES = ("helix", "twisted_profile", "constant_kappa_var_tau")


class NonPositiveCurvature(ValueError):
    """The curvature field is not strictly positive on the evaluation grid."""


@dataclass(frozen=True)
class CurveSpec:
    """A curve defined by length and curvature/torsion fields.

    ``kappa`` and ``tau`` are vectorized callables accepting arrays of
    arc-length values in ``[0, l]``.  ``source`` records how the spec was
    built (preset name with parameters, or sampled data) for serialization.
    """

    l: float
    kappa: Callable[[np.ndarray], np.ndarray]
    tau: Callable[[np.ndarray], np.ndarray]
    source: tuple

    def __post_init__(self):
        check_positive_scalar(self.l, "curve length l")


class FieldSamples(NamedTuple):
    """Curvature/torsion sampled on the uniform grid nodes and midpoints."""

    kappa_nodes: np.ndarray
    kappa_mid: np.ndarray
    tau_nodes: np.ndarray
    tau_mid: np.ndarray


@dataclass(frozen=True)
class FrenetFrame:
    """Moving frame sample: position and right-handed orthonormal (T, P, B)."""

    t: float
    gamma: np.ndarray
    T: np.ndarray
    P: np.ndarray
    B: np.ndarray


def _constant(value):
    value = float(value)

    def field(t):
        return np.full_like(np.asarray(t, dtype=np.float64), value)

    return field


def make_preset(name, params, l):
    """Build a :class:`CurveSpec` from a named closed-form family.

    Presets and their parameter lists:

    * ``helix``: ``[kappa0, tau0]``, constant curvature and torsion.
    * ``constant_kappa_var_tau``: ``[kappa0, tau0, tau1]``, constant
      curvature, affine torsion ``tau0 + tau1 * t``.
    * ``twisted_profile``: ``[kappa0, ripple, tau0, tau1]``, curvature
      ``kappa0 * (1 + ripple * sin(2 pi t / l))`` (requires ``|ripple| < 1``)
      and torsion ``tau0 + tau1 * cos(2 pi t / l)``.
    """
    l = check_positive_scalar(l, "curve length l")
    params = [float(p) for p in params]
    if name == "helix":
        if len(params) != 2:
            raise ValueError("helix preset takes params [kappa0, tau0]")
        kappa0, tau0 = params
        check_positive_scalar(kappa0, "helix curvature kappa0")
        kappa, tau = _constant(kappa0), _constant(tau0)
    elif name == "constant_kappa_var_tau":
        if len(params) != 3:
            raise ValueError(
                "constant_kappa_var_tau preset takes params [kappa0, tau0, tau1]"
            )
        kappa0, tau0, tau1 = params
        check_positive_scalar(kappa0, "curvature kappa0")
        kappa = _constant(kappa0)

        def tau(t):
            return tau0 + tau1 * np.asarray(t, dtype=np.float64)

    elif name == "twisted_profile":
        if len(params) != 4:
            raise ValueError(
                "twisted_profile preset takes params [kappa0, ripple, tau0, tau1]"
            )
        kappa0, ripple, tau0, tau1 = params
        check_positive_scalar(kappa0, "curvature kappa0")
        if abs(ripple) >= 1.0:
            raise ValueError("twisted_profile needs |ripple| < 1 to keep kappa > 0")
        omega = 2.0 * np.pi / l

        def kappa(t):
            return kappa0 * (1.0 + ripple * np.sin(omega * np.asarray(t, dtype=np.float64)))

        def tau(t):
            return tau0 + tau1 * np.cos(omega * np.asarray(t, dtype=np.float64))

    else:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return CurveSpec(l=l, kappa=kappa, tau=tau, source=("preset", name, tuple(params)))


def make_sampled(grid, kappa_values, tau_values):
    """Build a :class:`CurveSpec` from sampled fields, linearly interpolated.

    The grid must be strictly increasing with ``grid[0] == 0``; its last entry
    defines the curve length.  At least 2 nodes are required.
    """
    grid = as_float_array(grid, "sample grid")
    if grid.shape[0] < 2:
        raise ValueError("sampled fields need at least 2 nodes")
    if grid[0] != 0.0:
        raise ValueError("sample grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("sample grid must be strictly increasing")
    kv = as_float_array(kappa_values, "kappa samples", length=grid.shape[0])
    tv = as_float_array(tau_values, "tau samples", length=grid.shape[0])
    if np.any(kv <= 0.0):
        raise NonPositiveCurvature("sampled kappa must be strictly positive")
    l = float(grid[-1])

    def kappa(t):
        return np.interp(np.asarray(t, dtype=np.float64), grid, kv)

    def tau(t):
        return np.interp(np.asarray(t, dtype=np.float64), grid, tv)

    return CurveSpec(
        l=l, kappa=kappa, tau=tau, source=("sampled", tuple(grid), tuple(kv), tuple(tv))
    )


def grid_nodes(l, n_intervals):
    return np.linspace(0.0, l, n_intervals + 1)


def eval_fields(curve, n_intervals):
    """Sample kappa and tau on the uniform grid nodes and interval midpoints.

    Returns a :class:`FieldSamples` with node arrays of length ``N + 1`` and
    midpoint arrays of length ``N``.  Raises :class:`NonPositiveCurvature` if
    any curvature sample is ``<= 0`` (exact zero included).
    """
    n = check_interval_count(n_intervals)
    nodes = grid_nodes(curve.l, n)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    kappa_nodes = np.asarray(curve.kappa(nodes), dtype=np.float64)
    kappa_mid = np.asarray(curve.kappa(mids), dtype=np.float64)
    tau_nodes = np.asarray(curve.tau(nodes), dtype=np.float64)
    tau_mid = np.asarray(curve.tau(mids), dtype=np.float64)
    if np.any(kappa_nodes <= 0.0) or np.any(kappa_mid <= 0.0):
        raise NonPositiveCurvature("kappa must be strictly positive on the grid")
    return FieldSamples(kappa_nodes, kappa_mid, tau_nodes, tau_mid)


def field_bound(curve, n_intervals):
    """Largest of sup|kappa| and sup|tau| over the grid samples."""
    s = eval_fields(curve, n_intervals)
    return float(
        max(
            np.max(np.abs(s.kappa_nodes)),
            np.max(np.abs(s.kappa_mid)),
            np.max(np.abs(s.tau_nodes)),
            np.max(np.abs(s.tau_mid)),
        )
    )


def _orthonormalize(T, P):
    T = T / np.linalg.norm(T)
    P = P - np.dot(P, T) * T
    P = P / np.linalg.norm(P)
    B = np.cross(T, P)
    return T, P, B


def integrate_frenet(curve, n_intervals):
    """Integrate the frame ODE with classical RK4, one step per grid interval.

    The frame is re-orthonormalized (Gram-Schmidt on T, P; B = T x P) after
    every step, so the returned triads are right-handed and orthonormal to
    well below 1e-8.  Returns ``N + 1`` :class:`FrenetFrame` samples starting
    from (origin, e1, e2, e3).
    """
    n = check_interval_count(n_intervals)
    nodes = grid_nodes(curve.l, n)
    h = curve.l / n

    def rhs(t, state):
        gamma, T, P, B = state
        k = float(curve.kappa(t))
        tau = float(curve.tau(t))
        return np.array([T, k * P, -k * T + tau * B, -tau * P])

    state = np.array(
        [np.zeros(3), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])]
    )
    frames = [FrenetFrame(0.0, state[0].copy(), state[1].copy(), state[2].copy(), state[3].copy())]
    for i in range(n):
        t = nodes[i]
        k1 = rhs(t, state)
        k2 = rhs(t + 0.5 * h, state + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, state + 0.5 * h * k2)
        k4 = rhs(t + h, state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        T, P, B = _orthonormalize(state[1], state[2])
        state = np.array([state[0], T, P, B])
        frames.append(FrenetFrame(float(nodes[i + 1]), state[0].copy(), T, P, B))
    return frames
