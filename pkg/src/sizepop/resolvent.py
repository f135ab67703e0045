"""Resolvent of the recruitment-free generator and its dissipativity.

Solves ``u - lam * (A~_h - omega I) u = h`` and measures, over random right
hand sides, the ratio ``||u||_X / ||h||_X`` and the sign of ``u`` for
nonnegative ``h``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import GeneratorMatrix, Grid, _check_dim, assemble_generator
from .errors import ArgumentError
from .evolution import _solver
from .model import Model, norm_weights

DEFAULT_LAMBDAS = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class ResolventReport:
    omega: float
    lam: float
    samples: int
    max_ratio: float
    positivity_violations: int
    worst_entry: float
    seed: int | None = None
    omega_min: float | None = None

    @property
    def below_omega_min(self) -> bool:
        return self.omega_min is not None and self.omega < self.omega_min

    def passed(self, ratio_tol: float = 1e-10) -> bool:
        return self.max_ratio <= 1.0 + ratio_tol and self.positivity_violations == 0


def omega_min(model: Model) -> float:
    """Smallest shift omega >= 0 for which both boundary terms are dissipative."""
    if model.bc.conservative:
        # gamma(0)/c1 - gamma'(0) - c0 = 0 and -gamma(m)/c2 - gamma'(m) - cm = 0
        return max(0.0, -model.value("mu", 0.0), -model.value("mu", model.m))
    w = norm_weights(model)
    m = model.m
    left = model.value("gamma", 0.0) / w.c1 - (
        model.deriv("gamma", 0.0) + model.value("mu", 0.0) + model.bc.c0
    )
    right = -model.value("gamma", m) / w.c2 - (
        model.deriv("gamma", m) + model.value("mu", m) + model.bc.cm
    )
    return max(0.0, left, right)


def solve_resolvent(G_tilde: GeneratorMatrix, lam: float, omega: float, h) -> np.ndarray:
    """Solve ``(I - lam (A~_h - omega I)) u = h``.

    ``h`` may be a matrix whose columns are independent right hand sides.
    """
    if not lam > 0:
        raise ArgumentError(f"lambda must be positive (got {lam!r})")
    if G_tilde.has_recruitment:
        raise ArgumentError("resolvent expects the generator assembled without recruitment")
    h = _check_dim(G_tilde, h)
    solve = _solver(G_tilde, 1.0 + lam * omega, lam, f"resolvent, lambda={lam:g}, omega={omega:g}")
    return solve(h)


def dissipativity_check(
    model: Model,
    grid: Grid,
    lambda_set=DEFAULT_LAMBDAS,
    omega: float | None = None,
    n_samples: int = 100,
    seed: int | None = 0,
) -> ResolventReport:
    """Probe the dissipativity estimate and resolvent positivity.

    Signed right hand sides are drawn uniformly from [-1, 1] and nonnegative
    ones from [0, 1], ``n_samples`` of each for every lambda.  ``omega``
    defaults to :func:`omega_min`.  A solution entry below -1e-12 for a
    nonnegative ``h`` counts as one positivity violation.
    """
    if n_samples < 1:
        raise ArgumentError("n_samples must be >= 1")
    w_min = omega_min(model)
    if omega is None:
        omega = w_min
    G = assemble_generator(model, grid, recruitment=False)
    w = G.weights[:, None]
    rng = np.random.default_rng(seed)
    n = G.size
    max_ratio, arg_lam = 0.0, float(lambda_set[0])
    violations, worst = 0, np.inf
    for lam in lambda_set:
        H = rng.uniform(-1.0, 1.0, size=(n, n_samples))
        U = solve_resolvent(G, lam, omega, H)
        ratios = (w * np.abs(U)).sum(axis=0) / (w * np.abs(H)).sum(axis=0)
        if ratios.max() > max_ratio:
            max_ratio, arg_lam = float(ratios.max()), float(lam)
        Hp = rng.uniform(0.0, 1.0, size=(n, n_samples))
        Up = solve_resolvent(G, lam, omega, Hp)
        violations += int(np.any(Up < -1e-12, axis=0).sum())
        worst = min(worst, float(Up.min()))
    return ResolventReport(
        omega=float(omega),
        lam=arg_lam,
        samples=n_samples,
        max_ratio=max_ratio,
        positivity_violations=violations,
        worst_entry=worst,
        seed=seed,
        omega_min=w_min,
    )
