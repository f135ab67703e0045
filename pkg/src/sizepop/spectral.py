"""Malthusian parameter, stable size profile and asymptotic diagnostics.

The spectral bound of the (Metzler) generator is found by shifted inverse
iteration on ``(sigma I - A_h)^{-1}``.  The iteration starts at the
Gershgorin shift ``sigma = omega_bound + 1``.  Once the iterate is strictly
positive the shift is replaced by the Collatz-Wielandt upper bound
``max_i (A v)_i / v_i`` (Noda iteration).  That bound never drops below
``s(A_h)``, so the shifted resolvent stays entrywise nonnegative, and
``[min_i (A v)_i / v_i, max_i (A v)_i / v_i]`` brackets the eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import connected_components

from .discretization import GeneratorMatrix
from .errors import ArgumentError, ConvergenceError, DegenerateError
from .evolution import Trajectory

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralResult:
    malthus: float
    right_vector: np.ndarray
    left_vector: np.ndarray
    residual: float
    left_residual: float
    iterations: int
    irreducible: bool
    weights: np.ndarray
    bracket: tuple = (-np.inf, np.inf)

    def project(self, u) -> np.ndarray:
        """Rank-one projection ``v <phi, u>``."""
        return self.right_vector * float(np.dot(self.left_vector, u))


def irreducibility_check(G) -> bool:
    """Strong connectivity of the graph of positive off-diagonal entries.

    ``G`` is a :class:`GeneratorMatrix` or a square array.
    """
    A = G.dense() if isinstance(G, GeneratorMatrix) else np.asarray(G, dtype=float)
    pattern = A > 0
    np.fill_diagonal(pattern, False)
    n_comp, _ = connected_components(pattern, directed=True, connection="strong")
    return n_comp == 1


def _perron(A, w, sigma0, tol, max_iter, what):
    """Inverse iteration for the eigenvalue of maximal real part of Metzler ``A``.

    Returns ``(lam, v, residual, iterations, bracket)``; ``v`` is scaled to unit
    weighted l1 norm and residual is ``||A v - lam v||_w``.
    """
    n = A.shape[0]
    eye = np.eye(n)
    # roundoff floor of A @ v for unit-scale v
    floor = 16.0 * np.finfo(float).eps * float(np.abs(A).sum(axis=1).max())
    v = np.ones(n) / np.sum(w)
    sigma = sigma0
    lu = sla.lu_factor(sigma * eye - A)
    fixed_shift = True
    bracket = (-np.inf, np.inf)
    lam, resid = np.nan, np.inf
    for it in range(max_iter + 1):
        Av = A @ v
        lam = float(np.dot(w, Av) / np.dot(w, v))
        if np.all(v > 0):
            q = Av / v
            lo, hi = float(q.min()), float(q.max())
            bracket = (lo, hi)
            lam = min(max(lam, lo), hi)
        resid = float(np.dot(w, np.abs(Av - lam * v)))
        scale = max(1.0, abs(lam))
        tight = bracket[1] - bracket[0] <= tol * scale + floor
        if resid <= tol * scale + floor and (tight or not np.all(v > 0)):
            return lam, v, resid, it, bracket
        if it == max_iter:
            break
        if np.all(v > 0) and bracket[1] < sigma:
            # Noda shift: an upper bound of s(A), so the resolvent stays >= 0
            sigma = bracket[1]
            fixed_shift = False
            with np.errstate(all="ignore"):
                lu = sla.lu_factor(sigma * eye - A, check_finite=False)
        with np.errstate(all="ignore"):
            x = sla.lu_solve(lu, v, check_finite=False)
        if not np.all(np.isfinite(x)):
            if not fixed_shift and resid <= RESIDUAL_TOL * scale + floor:
                # shift hit the eigenvalue to machine precision
                return lam, v, resid, it, bracket
            raise DegenerateError(f"{what}: iterate became non-finite at iteration {it}")
        nrm = float(np.dot(w, np.abs(x)))
        if nrm == 0.0:
            raise DegenerateError(f"{what}: iterate collapsed to zero at iteration {it}")
        x /= nrm
        k = int(np.argmax(np.abs(x)))
        v = x if x[k] > 0 else -x
    raise ConvergenceError(
        f"{what}: no convergence after {max_iter} iterations (residual {resid:.3g})", residual=resid
    )


def spectral_bound(G: GeneratorMatrix, tol: float = 1e-12, max_iter: int = 10000) -> SpectralResult:
    """Perron pair of ``A_h``: spectral bound, right and left eigenvectors.

    The right vector is normalized to unit total mass, the left vector to
    ``<left, right> = 1``.  Convergence requires the relative weighted
    residual (and, for positive iterates, the Collatz-Wielandt bracket
    width) to drop below ``tol``.
    """
    A = G.dense()
    w = G.weights
    sigma0 = G.omega_bound + 1.0
    lam, v, resid, its, bracket = _perron(A, w, sigma0, tol, max_iter, "right eigenvector")
    # left problem: A^T is Metzler too; measure it in the dual (max |phi_i|/w_i) norm
    lam_l, phi, _, its_l, _ = _perron(A.T, np.ones_like(w), sigma0, tol, max_iter, "left eigenvector")

    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    mass = float(np.dot(w, v))
    if mass != 0.0:
        v = v / mass
    pairing = float(np.dot(phi, v))
    if pairing == 0.0:
        raise DegenerateError("left and right eigenvectors are orthogonal")
    phi = phi / pairing
    residual = float(np.dot(w, np.abs(A @ v - lam * v)) / np.dot(w, np.abs(v)))
    left_residual = float(np.max(np.abs(A.T @ phi - lam * phi) / w) / np.max(np.abs(phi) / w))
    return SpectralResult(
        malthus=lam,
        right_vector=v,
        left_vector=phi,
        residual=residual,
        left_residual=left_residual,
        iterations=its + its_l,
        irreducible=irreducibility_check(A),
        weights=w,
        bracket=bracket,
    )


def growth_rate_from_trajectory(traj: Trajectory, window) -> float:
    """Least-squares slope of ``log(total mass)`` against time over ``window``."""
    t_a, t_b = window
    if not t_b > t_a:
        raise ArgumentError(f"window must satisfy t_b > t_a (got {window!r})")
    t = np.asarray(traj.times)
    M = np.asarray(traj.masses)
    sel = (t >= t_a) & (t <= t_b)
    if sel.sum() < 2:
        raise ArgumentError(f"window {window!r} contains fewer than two samples")
    if np.any(M[sel] <= 0):
        raise ArgumentError("total mass must be positive on the window")
    slope, _ = np.polyfit(t[sel], np.log(M[sel]), 1)
    return float(slope)


def aeg_diagnostic(traj: Trajectory, spec: SpectralResult) -> list[tuple[float, float]]:
    """Weighted-norm distance of each mass-normalized snapshot to the stable profile."""
    if not traj.snapshots:
        raise ArgumentError("trajectory has no snapshots")
    w = spec.weights
    v = spec.right_vector / float(np.dot(w, spec.right_vector))
    out = []
    for t, u in zip(traj.snapshot_times, traj.snapshots):
        mass = float(np.dot(w, u))
        if mass <= 0:
            raise ArgumentError(f"snapshot at t={t:g} has nonpositive mass")
        out.append((float(t), float(np.dot(w, np.abs(u / mass - v)))))
    return out
