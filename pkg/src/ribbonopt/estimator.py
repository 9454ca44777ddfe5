"""Scikit-learn style front end for the framing solver.

``MinimalBendingFraming`` follows the estimator protocol: construction only
stores hyperparameters (grid size, continuation schedule, boundary
conditions), ``fit`` runs the solver on a curve and exposes the solution
through trailing-underscore attributes, and ``predict`` evaluates the
fitted framing angle at arbitrary arc-length positions, so the solver
composes with pipelines and parameter search utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .analysis import find_singular_points
from .curves import CurveSpec
from .solver import SolverConfig, solve


class MinimalBendingFraming(BaseEstimator):
    """Minimal-bending-energy framing of a curve with positive curvature.

    Parameters mirror :class:`ribbonopt.solver.SolverConfig`.  Fitted
    attributes:

    ``theta_``
        Framing angle at the ``n_intervals + 1`` grid nodes.
    ``energy_``
        Bending energy of the fitted framing (extended value).
    ``result_``
        Full :class:`ribbonopt.solver.SolveResult` with the continuation
        trace.
    ``singular_points_``
        Detected singular points of the fitted framing.
    """

    def __init__(
        self,
        n_intervals=512,
        eps0=1.0,
        eps_ratio=0.5,
        eps_min=1e-4,
        grad_tol=1e-8,
        max_iters=5000,
        bc="free",
        bc_values=None,
        method="newton",
    ):
        self.n_intervals = n_intervals
        self.eps0 = eps0
        self.eps_ratio = eps_ratio
        self.eps_min = eps_min
        self.grad_tol = grad_tol
        self.max_iters = max_iters
        self.bc = bc
        self.bc_values = bc_values
        self.method = method

    def _config(self):
        return SolverConfig(
            n_intervals=self.n_intervals,
            eps0=self.eps0,
            eps_ratio=self.eps_ratio,
            eps_min=self.eps_min,
            grad_tol=self.grad_tol,
            max_iters=self.max_iters,
            bc=self.bc,
            bc_values=self.bc_values,
            method=self.method,
        )

    def fit(self, X, y=None):
        """Solve for the optimal framing of the curve ``X``.

        Parameters
        ----------
        X : CurveSpec
            The curve, given by its curvature/torsion fields and length.
        y : ignored
        """
        if not isinstance(X, CurveSpec):
            raise TypeError(
                "MinimalBendingFraming.fit expects a CurveSpec "
                "(see ribbonopt.make_preset / make_sampled)"
            )
        result = solve(X, self._config())
        self.curve_ = X
        self.result_ = result
        self.framing_ = result.theta_min
        self.theta_ = result.theta_min.theta.copy()
        self.energy_ = result.E_min
        self.converged_ = result.converged
        self.singular_points_ = find_singular_points(result.theta_min)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError(
                "this MinimalBendingFraming instance is not fitted yet"
            )

    def predict(self, T):
        """Framing angle at arc-length positions ``T`` (linear interpolation)."""
        self._check_fitted()
        T = np.asarray(T, dtype=np.float64)
        if np.any(T < 0) or np.any(T > self.curve_.l):
            raise ValueError(f"positions must lie in [0, {self.curve_.l}]")
        return self.framing_(T)

    def fit_predict(self, X, T, y=None):
        return self.fit(X).predict(T)

    def score(self, X=None, y=None):
        """Negative bending energy (larger is better)."""
        self._check_fitted()
        return -self.energy_
