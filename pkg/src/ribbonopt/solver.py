"""Minimization of the ribbon bending energy by eps-continuation.

The unregularized energy has a discontinuous integrand wherever the framing
crosses a singular level, so it is not minimized directly.  Instead each
start is driven through a decreasing schedule of regularization parameters,
warm-starting every stage from the previous one; the regularized minima
increase monotonically toward the unregularized minimum as eps shrinks.

Each stage runs a line-search descent with Armijo backtracking (sufficient
decrease 1e-4, backtracking factor 0.5) stopping at a max-norm gradient
tolerance.  The default direction is a Levenberg-damped Newton step -- the
discrete energy couples only adjacent nodes, so its Hessian is tridiagonal
and the Newton system costs O(N) -- which satisfies the same contract as
plain gradient descent (monotone energy, identical stopping rule) while
needing orders of magnitude fewer iterations on fine grids.  Plain gradient
descent remains available via ``method="gd"``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solveh_banded

from .curves import eval_fields, grid_nodes
from .energy import (
    FramingField,
    eps_energy_gradient,
    eps_energy_value,
    integrand_extended,
    interval_terms,
)
from .validation import check_interval_count

ARMIJO_C = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-16

START_PHASES = tuple(k * np.pi / 4.0 for k in range(8))

STATUS_GRAD_TOL = "grad_tol"
STATUS_MAX_ITERS = "max_iters"
STATUS_LINE_SEARCH_STALL = "line_search_stall"


@dataclass
class SolverConfig:
    """Grid, schedule, stopping and boundary settings for :func:`solve`."""

    n_intervals: int = 512
    eps0: float = 1.0
    eps_ratio: float = 0.5
    eps_min: float = 1e-4
    # Per-interval stationarity tolerance: descent stops once the max-norm
    # of the discrete gradient drops below grad_tol * n_intervals.
    grad_tol: float = 1e-8
    max_iters: int = 5000
    bc: str = "free"
    bc_values: Optional[tuple] = None
    starts: Optional[list] = None
    method: str = "newton"

    def __post_init__(self):
        check_interval_count(self.n_intervals)
        if not (self.eps0 > self.eps_min > 0):
            raise ValueError("need eps0 > eps_min > 0")
        if not (0 < self.eps_ratio < 1):
            raise ValueError("eps_ratio must lie in (0, 1)")
        if self.bc not in ("free", "dirichlet"):
            raise ValueError(f"bc must be 'free' or 'dirichlet', got {self.bc!r}")
        if self.bc == "dirichlet":
            if self.bc_values is None or len(self.bc_values) != 2:
                raise ValueError("dirichlet bc needs bc_values=(a, b)")
            self.bc_values = (float(self.bc_values[0]), float(self.bc_values[1]))
        if self.method not in ("newton", "gd"):
            raise ValueError(f"method must be 'newton' or 'gd', got {self.method!r}")


@dataclass
class SolveResult:
    """Best framing over all starts, with the continuation trace."""

    theta_min: FramingField
    E_min: float
    eps_trace: list
    start_used: str
    converged: bool


@dataclass
class _StageInfo:
    value: float
    iterations: int
    status: str
    energies: list = field(default_factory=list)


def eps_schedule(cfg):
    values = []
    eps = cfg.eps0
    while eps > cfg.eps_min * (1.0 + 1e-12):
        values.append(eps)
        eps *= cfg.eps_ratio
    values.append(cfg.eps_min)
    return values


def dirichlet_targets(a, b):
    """Endpoint values shifted by the same whole number of turns.

    The shift ``2*pi*floor(a / 2*pi)`` puts the left endpoint in
    ``[0, 2*pi)`` without changing the energy.
    """
    shift = 2.0 * np.pi * np.floor(a / (2.0 * np.pi))
    return a - shift, b - shift


def _affine_to_endpoints(theta, nodes, l, a, b):
    corrected = theta + (a - theta[0])
    return corrected + (nodes / l) * (b - corrected[-1])


def initial_guesses(curve, cfg):
    """Standard multistart family for the continuation.

    Eight twist-following starts ``theta(t) = c - int_0^t tau`` (which keep
    the slope term of the integrand at zero) and eight constants, for phase
    offsets c in ``{0, pi/4, ..., 7*pi/4}``.  Under dirichlet boundary
    conditions each start is affinely corrected to meet the endpoint values
    exactly.  ``cfg.starts`` overrides the family; entries may be
    ``("twist", c)``, ``("constant", c)``, or ``("array", values)``.
    """
    n = cfg.n_intervals
    samples = eval_fields(curve, n)
    nodes = grid_nodes(curve.l, n)
    h = curve.l / n
    twist = np.concatenate(
        [[0.0], np.cumsum(0.5 * h * (samples.tau_nodes[:-1] + samples.tau_nodes[1:]))]
    )

    def materialize(kind, arg):
        if kind == "twist":
            return -twist + float(arg)
        if kind == "constant":
            return np.full(n + 1, float(arg))
        if kind == "array":
            values = np.asarray(arg, dtype=np.float64)
            if values.shape != (n + 1,):
                raise ValueError(f"array start must have {n + 1} values")
            return values.copy()
        raise ValueError(f"unknown start kind {kind!r}")

    if cfg.starts is None:
        rules = [("twist", c) for c in START_PHASES] + [
            ("constant", c) for c in START_PHASES
        ]
    else:
        rules = [(entry[0], entry[1]) for entry in cfg.starts]

    guesses = []
    for k, (kind, arg) in enumerate(rules):
        theta = materialize(kind, arg)
        if cfg.bc == "dirichlet":
            a, b = dirichlet_targets(*cfg.bc_values)
            theta = _affine_to_endpoints(theta, nodes, curve.l, a, b)
            theta[0], theta[-1] = a, b
        label = f"{kind}:{k}"
        guesses.append((label, FramingField(curve.l, theta)))
    return guesses


def eps_energy_hessian_banded(theta, h, kappa_mid, tau_mid, eps, fixed_ends=False):
    """Tridiagonal Hessian of the discrete regularized energy.

    Returns ``(diag, off)`` with ``off[i]`` coupling nodes ``i`` and
    ``i + 1``.  Under ``fixed_ends`` the endpoint rows/columns are replaced
    by identity so Newton steps leave the endpoints untouched.
    """
    slope = np.diff(theta) / h
    mean = 0.5 * (theta[:-1] + theta[1:])
    k2 = kappa_mid * kappa_mid
    a = k2 * np.cos(mean) ** 2
    s = slope + tau_mid
    b = s * s
    d = a + eps * eps
    n_ab = a + b
    g_a = n_ab * (2.0 * d - n_ab) / (d * d)
    g_b = 2.0 * n_ab / d
    g_aa = 2.0 * (d - n_ab) ** 2 / d**3
    g_ab = 2.0 * (d - n_ab) / (d * d)
    g_bb = 2.0 / d
    p = -0.5 * k2 * np.sin(2.0 * mean)  # da/dtheta_i = da/dtheta_{i+1}
    a_mm4 = -0.5 * k2 * np.cos(2.0 * mean)  # d2a/dtheta^2 terms
    qr = 2.0 * s / h  # db/dtheta_{i+1} = -db/dtheta_i
    base = g_aa * p * p + g_a * a_mm4
    cross = 2.0 * g_ab * p * qr
    curv = g_bb * qr * qr
    lap = 2.0 * g_b / (h * h)
    diag = np.zeros_like(theta)
    diag[:-1] += h * (base - cross + curv + lap)
    diag[1:] += h * (base + cross + curv + lap)
    off = h * (base - curv - lap)
    if fixed_ends:
        diag[0] = 1.0
        diag[-1] = 1.0
        off[0] = 0.0
        off[-1] = 0.0
    return diag, off


def _newton_direction(grad, diag, off):
    """Solve the (damped) tridiagonal Newton system for a descent direction."""
    scale = np.max(np.abs(diag)) or 1.0
    damping = 0.0
    for _ in range(6):
        ab = np.zeros((2, len(diag)))
        ab[0, 1:] = off
        ab[1] = diag + damping
        try:
            step = solveh_banded(ab, -grad)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)) and np.dot(grad, step) < 0:
            return step
        damping = max(1e-8 * scale, damping * 100.0)
    return -grad


def _descend(theta, h, kappa_mid, tau_mid, eps, cfg):
    fixed = cfg.bc == "dirichlet"

    def value(x):
        return eps_energy_value(x, h, kappa_mid, tau_mid, eps)

    def gradient(x):
        return eps_energy_gradient(x, h, kappa_mid, tau_mid, eps, fixed_ends=fixed)

    theta = theta.copy()
    f = value(theta)
    g = gradient(theta)
    energies = [f]
    iterations = 0
    status = STATUS_MAX_ITERS
    tol = cfg.grad_tol * cfg.n_intervals
    while True:
        if np.max(np.abs(g)) <= tol:
            status = STATUS_GRAD_TOL
            break
        if iterations >= cfg.max_iters:
            status = STATUS_MAX_ITERS
            break
        if cfg.method == "newton":
            diag, off = eps_energy_hessian_banded(
                theta, h, kappa_mid, tau_mid, eps, fixed_ends=fixed
            )
            direction = _newton_direction(g, diag, off)
        else:
            direction = -g
        slope = np.dot(g, direction)
        step = 1.0 if cfg.method == "newton" else min(
            1.0, 1.0 / max(np.max(np.abs(g)), 1e-12)
        )
        accepted = False
        while step >= MIN_STEP:
            trial = theta + step * direction
            f_trial = value(trial)
            # Strict decrease: a trial that only ties f (the Armijo margin
            # can underflow next to f) makes no progress and must count as
            # a stall, not an accepted step.
            if f_trial <= f + ARMIJO_C * step * slope and f_trial < f:
                accepted = True
                break
            step *= BACKTRACK
        if not accepted:
            status = STATUS_LINE_SEARCH_STALL
            break
        theta = trial
        f = f_trial
        g = gradient(theta)
        energies.append(f)
        iterations += 1
    return theta, _StageInfo(value=f, iterations=iterations, status=status, energies=energies)


def minimize_at_eps(curve, start, eps, cfg):
    """Descend the regularized energy from ``start`` at a fixed ``eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    samples = eval_fields(curve, cfg.n_intervals)
    h = curve.l / cfg.n_intervals
    theta, _ = _descend(start.theta, h, samples.kappa_mid, samples.tau_mid, eps, cfg)
    return FramingField(curve.l, theta)


def _extended_value(theta, h, kappa_mid, tau_mid):
    a, b, _ = interval_terms(theta, h, kappa_mid, tau_mid)
    return float(np.sum(h * np.asarray(integrand_extended(a, b))))


def solve(curve, cfg):
    """Best framing over the multistart continuation.

    Each start is continued through the eps schedule with warm starts; the
    final reported energy is the unregularized extended value.  Ties between
    starts (within 1e-12 relative) resolve to the smallest start index.  In
    the free case the winner is normalized so ``theta(0)`` lies in
    ``[0, 2*pi)``; under dirichlet conditions the endpoint values are pinned
    exactly throughout and left untouched.
    """
    samples = eval_fields(curve, cfg.n_intervals)
    h = curve.l / cfg.n_intervals
    schedule = eps_schedule(cfg)
    best = None
    for index, (label, start) in enumerate(initial_guesses(curve, cfg)):
        theta = start.theta
        trace = []
        converged = False
        for eps in schedule:
            theta, info = _descend(theta, h, samples.kappa_mid, samples.tau_mid, eps, cfg)
            trace.append((eps, info.value, info.iterations))
            converged = info.status == STATUS_GRAD_TOL
        value = _extended_value(theta, h, samples.kappa_mid, samples.tau_mid)
        candidate = (value, index, label, theta, trace, converged)
        if best is None:
            best = candidate
        else:
            improvement = best[0] - value
            if improvement > 1e-12 * max(abs(best[0]), abs(value)):
                best = candidate
    value, _, label, theta, trace, converged = best
    framing = FramingField(curve.l, theta)
    if cfg.bc == "free":
        framing = framing.normalized()
        value = _extended_value(framing.theta, h, samples.kappa_mid, samples.tau_mid)
    return SolveResult(
        theta_min=framing,
        E_min=value,
        eps_trace=trace,
        start_used=label,
        converged=converged,
    )
