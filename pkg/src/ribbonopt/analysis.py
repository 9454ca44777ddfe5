"""Singular-point detection and numerical certification of framing bounds.

A parameter ``t`` is a singular point of a framing when ``theta(t)`` lies in
``pi/2 + pi*Z``, i.e. where the energy density's denominator vanishes and
the ribbon is momentarily planar.  This module locates those points on
piecewise-linear framings and evaluates, with explicit left- and right-hand
sides, the quantitative bounds that constrain them: the interval
lower bound on ``|theta(a) - theta(b)|``, the guaranteed singular-point
count for strongly twisted curves, the isolation radius around a singular
point with nonvanishing torsion, and the coercivity/Morrey estimates.

All certification routines allow a 1e-9 absolute slack on the deficit so
quadrature noise cannot produce false violations.
"""

from dataclasses import dataclass

import numpy as np

from .curves import eval_fields, field_bound
from .energy import discrete_l4_slope, energy_E, energy_E_interval

CERT_SLACK = 1e-9
HALF_PI = 0.5 * np.pi


class TorsionVanishes(ValueError):
    """The torsion has a zero or a sign change on the requested interval."""


class ZeroTorsionAtPoint(ValueError):
    """Isolation is not claimed where the torsion vanishes."""


@dataclass(frozen=True)
class SingularPoint:
    """A framing angle crossing or touching a singular level.

    ``k`` identifies the level ``pi/2 + k*pi``; ``bracket`` is the grid
    bracket the point was refined in (for tangency plateaus, the plateau
    extent).
    """

    t: float
    k: int
    kind: str
    bracket: tuple


@dataclass(frozen=True)
class IntervalBound:
    """Both sides of the interval estimate on ``|theta(a) - theta(b)|``.

    ``lhs >= rhs`` is guaranteed (up to certification slack) whenever the
    torsion does not vanish on ``[a, b]`` and the interval energy is finite;
    ``A`` is the minimal ``|tau|`` and ``B`` the maximal ``|kappa*cos(theta)|``
    over the interval.
    """

    a: float
    b: float
    A: float
    B: float
    lhs: float
    rhs: float

    @property
    def holds(self):
        return self.lhs >= self.rhs - CERT_SLACK


def _level_index(theta_value):
    return int(np.round((theta_value - HALF_PI) / np.pi))


def _bisect_crossing(theta_fn, level, lo, hi, refine_tol):
    # theta is linear on [lo, hi], so theta - level changes sign exactly
    # once; |cos(theta)| <= |theta - level| bounds the residual.
    g_lo = theta_fn(lo) - level
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = theta_fn(mid) - level
        if abs(np.cos(theta_fn(mid))) <= refine_tol or hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
        if (g_lo < 0) != (g_mid < 0):
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return mid


def find_singular_points(framing, refine_tol=1e-9):
    """Locate singular points of a piecewise-linear framing.

    Node values within ``refine_tol`` of a singular level are taken as
    on-level: runs of consecutive on-level nodes collapse to one point,
    classified as a crossing when the cosine changes sign across the run and
    as a tangency otherwise.  Elsewhere, every singular level strictly
    between two adjacent node values yields a crossing, refined by bisection
    of ``cos(theta(t))`` (several levels inside one interval are all found).
    Results are sorted and deduplicated within 1e-9.
    """
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    nodes = framing.nodes()
    theta = framing.theta
    n = framing.n_intervals
    cos_nodes = np.cos(theta)
    on_level = np.abs(cos_nodes) <= refine_tol
    found = []

    # Runs of on-level nodes: crossings if the sign flips across the run.
    i = 0
    while i <= n:
        if not on_level[i]:
            i += 1
            continue
        j = i
        while j + 1 <= n and on_level[j + 1]:
            j += 1
        left = cos_nodes[i - 1] if i > 0 else None
        right = cos_nodes[j + 1] if j < n else None
        if left is not None and right is not None and (left < 0) != (right < 0):
            kind = "crossing"
        else:
            kind = "tangency"
        bracket = (nodes[max(i - 1, 0)], nodes[min(j + 1, n)])
        t_star = 0.5 * (nodes[i] + nodes[j])
        found.append(SingularPoint(float(t_star), _level_index(framing(t_star)), kind, bracket))
        i = j + 1

    # Crossings of each singular level strictly between the node values
    # (levels attained exactly at a node are handled by the runs above).
    for i in range(n):
        lo_v, hi_v = sorted((theta[i], theta[i + 1]))
        k_lo = int(np.ceil((lo_v - HALF_PI) / np.pi))
        k_hi = int(np.floor((hi_v - HALF_PI) / np.pi))
        for k in range(k_lo, k_hi + 1):
            level = HALF_PI + k * np.pi
            if not (lo_v < level < hi_v):
                continue
            t_star = _bisect_crossing(framing, level, nodes[i], nodes[i + 1], refine_tol)
            found.append(
                SingularPoint(float(t_star), k, "crossing", (float(nodes[i]), float(nodes[i + 1])))
            )

    found.sort(key=lambda sp: sp.t)
    unique = []
    for sp in found:
        if unique and abs(sp.t - unique[-1].t) <= 1e-9:
            continue
        unique.append(sp)
    return unique


def _midrange_fields(curve, framing, a_idx, b_idx):
    samples = eval_fields(curve, framing.n_intervals)
    tau = samples.tau_mid[a_idx:b_idx]
    if np.any(tau == 0.0) or np.any(tau > 0) != np.all(tau > 0):
        raise TorsionVanishes("torsion has a zero or sign change on the interval")
    mean = 0.5 * (framing.theta[a_idx:b_idx] + framing.theta[a_idx + 1 : b_idx + 1])
    kcos = np.abs(samples.kappa_mid[a_idx:b_idx] * np.cos(mean))
    return np.min(np.abs(tau)), np.max(kcos)


def check_interval_lemma(curve, framing, a_idx, b_idx):
    """Evaluate both sides of the interval bound over grid range [a_idx, b_idx].

    Requires the torsion to be bounded away from zero on the interval
    (checked on the midpoint samples, raising :class:`TorsionVanishes`).
    """
    n = framing.n_intervals
    if not (0 <= a_idx < b_idx <= n):
        raise IndexError(f"need 0 <= a_idx < b_idx <= {n}")
    A, B = _midrange_fields(curve, framing, a_idx, b_idx)
    dt = (b_idx - a_idx) * framing.h
    e_interval = energy_E_interval(curve, framing, a_idx, b_idx)
    lhs = abs(framing.theta[a_idx] - framing.theta[b_idx])
    if np.isfinite(e_interval):
        rhs = A * dt - np.sqrt(B) * dt**0.75 * e_interval**0.25
    else:
        # Infinite interval energy makes the estimate vacuous.
        rhs = -np.inf
    nodes = framing.nodes()
    return IntervalBound(
        a=float(nodes[a_idx]), b=float(nodes[b_idx]), A=float(A), B=float(B),
        lhs=float(lhs), rhs=float(rhs),
    )


def verify_count_theorem(curve, result, n):
    """Check the guaranteed singular-point count on a solved framing.

    Applicable when the result converged, the torsion is constant (samples
    equal to 1e-12) and ``|tau| > n*pi/l + max|kappa|``; then the minimizer
    must carry at least ``n`` singular points.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    framing = result.theta_min
    samples = eval_fields(curve, framing.n_intervals)
    tau_all = np.concatenate([samples.tau_nodes, samples.tau_mid])
    constant = np.max(tau_all) - np.min(tau_all) <= 1e-12
    kappa_max = max(np.max(np.abs(samples.kappa_nodes)), np.max(np.abs(samples.kappa_mid)))
    threshold = n * np.pi / curve.l + kappa_max
    applicable = bool(result.converged and constant and abs(tau_all[0]) > threshold)
    count = len(find_singular_points(framing))
    return {
        "applicable": applicable,
        "count": count,
        "pass": (not applicable) or count >= n,
    }


def _window_values(fn, center, eps, l, dense=257):
    lo = max(center - eps, 0.0)
    hi = min(center + eps, l)
    ts = np.linspace(lo, hi, dense)
    return np.asarray(fn(ts), dtype=np.float64)


def isolation_radius(curve, framing, singular_point):
    """Radius around a singular point certified free of same-level recurrences.

    Two window constraints are intersected: the continuity window in which
    the framing stays within ``pi`` of its value at the point, and the
    largest ``eps`` for which ``min |tau|`` over the window still dominates
    ``Lambda^(1/4) * eps^(1/8) * E^(3/8)`` (located by bisection; both sides
    are monotone in ``eps``).  Requires finite energy and nonzero torsion at
    the point.
    """
    t0 = singular_point.t
    if float(curve.tau(t0)) == 0.0:
        raise ZeroTorsionAtPoint(f"torsion vanishes at t = {t0}")
    energy = energy_E(curve, framing).value
    if not np.isfinite(energy):
        raise ValueError("isolation radius needs a finite-energy framing")
    lam = field_bound(curve, framing.n_intervals)
    theta0 = float(framing(t0))
    quant_rate = lam**0.25 * energy**0.375

    def continuity_ok(eps):
        dev = np.max(np.abs(_window_values(framing, t0, eps, curve.l) - theta0))
        return dev <= np.pi

    def quantitative_ok(eps):
        tau_min = np.min(np.abs(_window_values(curve.tau, t0, eps, curve.l)))
        return tau_min >= quant_rate * eps**0.125

    def largest(predicate):
        lo, hi = 1e-15, curve.l
        if predicate(hi):
            return hi
        if not predicate(lo):
            return lo
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if predicate(mid):
                lo = mid
            else:
                hi = mid
        return lo

    return float(min(largest(continuity_ok), largest(quantitative_ok)))


def isolation_report(curve, framing):
    """Per-singular-point isolation radii and same-level clearances.

    For every detected singular point with nonzero torsion, reports the
    certified radius and the distance to the nearest other point on the
    same level (infinity if none); ``pass`` checks the clearance against
    the radius.  Cross-level spacing is observational only.
    """
    points = find_singular_points(framing)
    rows = []
    for sp in points:
        same = [q.t for q in points if q.k == sp.k and q.t != sp.t]
        nearest = min((abs(q - sp.t) for q in same), default=np.inf)
        try:
            radius = isolation_radius(curve, framing, sp)
        except ZeroTorsionAtPoint:
            rows.append(
                {"t": sp.t, "k": sp.k, "radius": None,
                 "nearest_same_branch": nearest, "pass": True, "claimed": False}
            )
            continue
        rows.append(
            {"t": sp.t, "k": sp.k, "radius": radius,
             "nearest_same_branch": nearest,
             "pass": bool(nearest >= radius - CERT_SLACK), "claimed": True}
        )
    return rows


def coercivity_probe(curve, framing, paper_constant=False):
    """Evaluate the coercivity lower bound ``Lambda^2 E >= s/16 - Lambda^4 l``.

    ``s`` is the discrete fourth power of the slope seminorm.  The bound is
    the rederived one; ``paper_constant=True`` swaps the subtracted term for
    ``2*Lambda*l`` (reported for information only -- that constant is not
    implied by the derivation and can fail).
    """
    lam = field_bound(curve, framing.n_intervals)
    energy = energy_E(curve, framing).value
    slope4 = discrete_l4_slope(framing)
    lhs = lam * lam * energy
    subtracted = 2.0 * lam * curve.l if paper_constant else lam**4 * curve.l
    rhs = slope4 / 16.0 - subtracted
    return {"lhs": float(lhs), "rhs": float(rhs), "pass": bool(lhs >= rhs - CERT_SLACK)}


def morrey_probe(framing):
    """Worst deficit of the Hoelder bound over all node pairs.

    Checks ``|theta_i - theta_j| <= |t_i - t_j|^(3/4) * (sum h slope^4)^(1/4)``
    for every pair; the returned deficit is negative or tiny when the bound
    holds.
    """
    nodes = framing.nodes()
    theta = framing.theta
    seminorm = discrete_l4_slope(framing) ** 0.25
    gaps = np.abs(theta[:, None] - theta[None, :])
    allowed = np.abs(nodes[:, None] - nodes[None, :]) ** 0.75 * seminorm
    deficit = float(np.max(gaps - allowed))
    return {"max_deficit": deficit, "pass": bool(deficit <= CERT_SLACK)}


def random_smooth_framing(rng, l, n_intervals, drift=1.5, wobble=1.0, modes=5):
    """Seeded random framing with bounded slopes, for the property suites."""
    from .energy import FramingField

    nodes = np.linspace(0.0, l, n_intervals + 1)
    theta = rng.uniform(0.0, 2.0 * np.pi) + rng.uniform(-drift, drift) * nodes
    for m in range(1, modes + 1):
        amp = rng.uniform(-wobble, wobble) / m
        theta += amp * np.sin(np.pi * m * nodes / l + rng.uniform(0.0, 2.0 * np.pi))
    return FramingField(l, theta)
