"""Time integration of ``u' = A_h u``."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .discretization import GeneratorMatrix, Grid, _check_dim, assemble_generator, total_mass
from .errors import ArgumentError, NonFiniteError, SolveError
from .model import Model

logger = logging.getLogger(__name__)

SCHEMES = ("implicit_euler", "crank_nicolson")

# pivot ratio below which a factorization is declared singular
_SINGULAR_RTOL = 1e-14


class PositivityWarning(UserWarning):
    """Step size too large for the positivity guarantee."""


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    boundary_series: list = field(default_factory=list)
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    min_entry: float = np.inf

    def record(self, t, u, mass, snapshot):
        self.times.append(t)
        self.masses.append(mass)
        self.boundary_series.append((float(u[0]), float(u[-1])))
        self.min_entry = min(self.min_entry, float(u.min()))
        if snapshot:
            self.snapshot_times.append(t)
            self.snapshots.append(u.copy())

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]


class _Solver:
    """Factorization of ``alpha*I - beta*A_h`` (sparse LU when A_h is banded).

    Each solve is followed by one step of iterative refinement.  Without it
    the mass error of a single step is a fixed multiple of the (rounded)
    weighted column sums, which accumulates coherently over long runs.
    """

    def __init__(self, G: GeneratorMatrix, alpha: float, beta: float, what: str):
        self._G, self._alpha, self._beta = G, alpha, beta
        n = G.size
        if G.has_recruitment:
            M = alpha * np.eye(n) - beta * G.dense()
            with warnings.catch_warnings():
                # singularity is reported below as SolveError
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(M, check_finite=True)
            piv_abs = np.abs(np.diag(lu))
            self._solve = lambda rhs: sla.lu_solve((lu, piv), rhs, check_finite=False)
        else:
            M = alpha * sps.identity(n, format="csc") - beta * G.local.tocsc()
            try:
                lu = spla.splu(M.tocsc())
            except RuntimeError as exc:
                raise SolveError(f"{what}: factorization failed ({exc})") from None
            piv_abs = np.abs(lu.U.diagonal())
            self._solve = lu.solve
        scale = piv_abs.max() if piv_abs.size else 0.0
        if scale == 0.0 or piv_abs.min() <= _SINGULAR_RTOL * scale:
            cond = np.inf if piv_abs.min() == 0.0 else scale / piv_abs.min()
            raise SolveError(f"{what}: system is singular (pivot-ratio condition estimate {cond:.3g})")

    def __call__(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        x = self._solve(rhs)
        if not np.all(np.isfinite(x)):
            return x
        r = rhs - (self._alpha * x - self._beta * self._G.matvec(x))
        return x + self._solve(r)


def _solver(G: GeneratorMatrix, alpha: float, beta: float, what: str) -> _Solver:
    key = (alpha, beta)
    solver = G._cache.get(key)
    if solver is None:
        solver = _Solver(G, alpha, beta, what)
        G._cache[key] = solver
    return solver


def _check_dt(dt):
    if not dt > 0:
        raise ArgumentError(f"time step must be positive (got {dt!r})")


def step_implicit_euler(G: GeneratorMatrix, u, dt: float) -> np.ndarray:
    """One implicit Euler step: solve ``(I - dt A_h) u_new = u``.

    Nonnegative input stays nonnegative while ``dt * G.lognorm_bound < 1``,
    since ``I - dt A_h`` is then a nonsingular M-matrix.  The smaller bound
    ``G.birth_bound`` alone is not sufficient in general.
    """
    _check_dt(dt)
    u = _check_dim(G, u)
    return _solver(G, 1.0, dt, f"implicit Euler, dt={dt:g}")(u)


def step_crank_nicolson(G: GeneratorMatrix, u, dt: float) -> np.ndarray:
    """One Crank-Nicolson step; conservative but not positivity preserving.

    Uses ``(I - a A)^{-1} (I + a A) = 2 (I - a A)^{-1} - I`` with ``a = dt/2``,
    which avoids forming ``A u`` and keeps the mass roundoff at the level of
    a single solve.
    """
    _check_dt(dt)
    u = _check_dim(G, u)
    return 2.0 * _solver(G, 1.0, 0.5 * dt, f"Crank-Nicolson, dt={dt:g}")(u) - u


_STEPPERS = {"implicit_euler": step_implicit_euler, "crank_nicolson": step_crank_nicolson}


def n_steps(dt: float, T: float) -> int:
    _check_dt(dt)
    if not T >= dt * (1 - 1e-12):
        raise ArgumentError(f"final time T={T!r} must be at least dt={dt!r}")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        logger.warning("T=%g is not a multiple of dt=%g; stopping at t=%g", T, dt, n * dt)
    return n


def simulate(
    model: Model | None,
    grid: Grid | None,
    u0,
    dt: float,
    T: float,
    scheme: str = "implicit_euler",
    snapshot_stride: int = 1,
    generator: GeneratorMatrix | None = None,
) -> Trajectory:
    """Integrate from ``u0`` up to time ``T`` with a fixed step ``dt``.

    Masses and boundary values are recorded every step, snapshots every
    ``snapshot_stride`` steps (and always at the final time).  Pass a
    prebuilt ``generator`` to skip assembly; ``model`` and ``grid`` may then
    be ``None``.
    """
    if scheme not in _STEPPERS:
        raise ArgumentError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if snapshot_stride < 1:
        raise ArgumentError("snapshot_stride must be >= 1")
    G = generator if generator is not None else assemble_generator(model, grid)
    u = _check_dim(G, u0).copy()
    if not np.all(np.isfinite(u)):
        raise NonFiniteError("initial state has non-finite entries")
    steps = n_steps(dt, T)
    if scheme == "crank_nicolson":
        warnings.warn("Crank-Nicolson does not guarantee positivity", PositivityWarning, stacklevel=2)
    elif dt * max(G.birth_bound, G.lognorm_bound) >= 1.0:
        warnings.warn(
            f"dt * max(B_q, nu) = {dt * max(G.birth_bound, G.lognorm_bound):.3g} >= 1: "
            "implicit Euler positivity not guaranteed",
            PositivityWarning,
            stacklevel=2,
        )
    step = _STEPPERS[scheme]
    traj = Trajectory()
    traj.record(0.0, u, total_mass(u, G), True)
    for k in range(1, steps + 1):
        u = step(G, u, dt)
        if not np.all(np.isfinite(u)):
            raise NonFiniteError(f"non-finite state at step {k} (t={k * dt:g})")
        traj.record(k * dt, u, total_mass(u, G), k % snapshot_stride == 0 or k == steps)
    return traj
