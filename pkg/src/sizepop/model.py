"""Continuous model ingredients: coefficients, kernels, boundary constants.

The model is the linear size-structured equation

    u_t + (gamma u)_s = (d u_s)_s - mu u + int_0^m beta(s, y) u(y) dy

on (0, m), closed by dynamic (Wentzell-Robin) boundary conditions with
constants b0, bm, c0, cm.  Everything here is immutable; validation is
report-based (``validate``) and only the convenience ``require_admissible``
raises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import RegularGridInterpolator

from .errors import AdmissibilityError, ArgumentError, DomainError

#: default number of points of the admissibility sample grid
N_VALIDATION_SAMPLES = 257


# ---------------------------------------------------------------------------
# scalar coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def value_at(self, s):
        s = np.asarray(s, dtype=float)
        return np.full(s.shape, self.value) if s.ndim else self.value

    def deriv_at(self, s, side="right"):
        s = np.asarray(s, dtype=float)
        return np.zeros(s.shape) if s.ndim else 0.0


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with coefficients in ascending degree."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ArgumentError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def value_at(self, s):
        out = P.polyval(np.asarray(s, dtype=float), self.coeffs)
        return float(out) if np.ndim(out) == 0 else out

    def deriv_at(self, s, side="right"):
        out = P.polyval(np.asarray(s, dtype=float), P.polyder(self.coeffs))
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Table:
    """Piecewise linear interpolant through ``(s, v)`` breakpoints.

    The derivative at a breakpoint is the slope of the segment to its right
    (``side="right"``) or left (``side="left"``); the outermost breakpoints
    always use their only adjacent segment.
    """

    breakpoints: tuple

    def __post_init__(self):
        pts = tuple((float(s), float(v)) for s, v in self.breakpoints)
        if len(pts) < 2:
            raise ArgumentError("table needs at least two breakpoints")
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ArgumentError("table breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", pts)

    @cached_property
    def _xs(self):
        return np.array([p[0] for p in self.breakpoints])

    @cached_property
    def _vs(self):
        return np.array([p[1] for p in self.breakpoints])

    @cached_property
    def _slopes(self):
        return np.diff(self._vs) / np.diff(self._xs)

    @property
    def support(self):
        return self._xs[0], self._xs[-1]

    def _check(self, s):
        lo, hi = self.support
        if np.any(s < lo) or np.any(s > hi):
            raise DomainError(f"table defined on [{lo}, {hi}] only")

    def value_at(self, s):
        s = np.asarray(s, dtype=float)
        self._check(s)
        out = np.interp(s, self._xs, self._vs)
        return float(out) if out.ndim == 0 else out

    def deriv_at(self, s, side="right"):
        s = np.asarray(s, dtype=float)
        self._check(s)
        nseg = len(self._slopes)
        idx = np.searchsorted(self._xs, s, side="right" if side == "right" else "left") - 1
        idx = np.clip(idx, 0, nseg - 1)
        out = self._slopes[idx]
        return float(out) if out.ndim == 0 else out


Coefficient = Union[Constant, Polynomial, Table]


def evaluate(coef: Coefficient, s, m: float | None = None):
    """Value of ``coef`` at ``s``; with ``m`` given, ``s`` must lie in [0, m]."""
    _check_domain(s, m)
    return coef.value_at(s)


def evaluate_deriv(coef: Coefficient, s, m: float | None = None):
    """Derivative of ``coef`` at ``s``.

    Tables use the right-segment slope at breakpoints, except at ``s == m``
    where the left segment is used.
    """
    _check_domain(s, m)
    if m is None or not isinstance(coef, Table):
        return coef.deriv_at(s)
    s_arr = np.asarray(s, dtype=float)
    right = np.asarray(coef.deriv_at(s_arr, side="right"))
    left = np.asarray(coef.deriv_at(s_arr, side="left"))
    out = np.where(s_arr == m, left, right)
    return float(out) if out.ndim == 0 else out


def _check_domain(s, m):
    if m is None:
        return
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > m) or np.any(np.isnan(s)):
        raise DomainError(f"size must lie in [0, {m}]")


# ---------------------------------------------------------------------------
# recruitment kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantKernel:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def matrix(self, s, y):
        """Return ``beta(s_i, y_j)`` as an array of shape ``(len(s), len(y))``."""
        return np.full((np.size(s), np.size(y)), self.value)


@dataclass(frozen=True)
class SeparableKernel:
    """beta(s, y) = f(s) * g(y)."""

    f: Coefficient
    g: Coefficient

    def matrix(self, s, y):
        fs = np.broadcast_to(self.f.value_at(np.atleast_1d(s)), (np.size(s),))
        gy = np.broadcast_to(self.g.value_at(np.atleast_1d(y)), (np.size(y),))
        return np.outer(fs, gy)


@dataclass(frozen=True)
class GridKernel:
    """Bilinear interpolation of tabulated values ``values[i][j] = beta(s_i, y_j)``."""

    s_nodes: tuple
    y_nodes: tuple
    values: tuple

    def __post_init__(self):
        s_nodes = tuple(float(v) for v in self.s_nodes)
        y_nodes = tuple(float(v) for v in self.y_nodes)
        values = tuple(tuple(float(v) for v in row) for row in self.values)
        if len(s_nodes) < 2 or len(y_nodes) < 2:
            raise ArgumentError("kernel grid needs at least two nodes per axis")
        for nodes in (s_nodes, y_nodes):
            if any(b <= a for a, b in zip(nodes, nodes[1:])):
                raise ArgumentError("kernel grid nodes must be strictly increasing")
        if len(values) != len(s_nodes) or any(len(r) != len(y_nodes) for r in values):
            raise ArgumentError("kernel values must have shape (len(s_nodes), len(y_nodes))")
        object.__setattr__(self, "s_nodes", s_nodes)
        object.__setattr__(self, "y_nodes", y_nodes)
        object.__setattr__(self, "values", values)

    @cached_property
    def _interp(self):
        return RegularGridInterpolator(
            (np.array(self.s_nodes), np.array(self.y_nodes)),
            np.array(self.values),
            method="linear",
            bounds_error=True,
        )

    def matrix(self, s, y):
        S, Y = np.meshgrid(np.atleast_1d(s), np.atleast_1d(y), indexing="ij")
        try:
            return self._interp(np.stack([S.ravel(), Y.ravel()], axis=-1)).reshape(S.shape)
        except ValueError as exc:
            raise DomainError(f"kernel grid does not cover the requested sizes: {exc}") from None


Kernel = Union[ConstantKernel, SeparableKernel, GridKernel]


# ---------------------------------------------------------------------------
# boundary constants, weights, model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryConstants:
    """Constants of the dynamic boundary conditions.

    ``conservative`` records that the constants were produced by
    :func:`conservative_constants`; the identities b0 - gamma(0) = d(0) and
    gamma(m) + bm = d(m) are then used exactly instead of being recomputed
    in floating point.
    """

    b0: float
    bm: float
    c0: float
    cm: float
    conservative: bool = False

    def violations(self) -> list[str]:
        out = []
        for name, val, strict in (
            ("b0", self.b0, True),
            ("bm", self.bm, True),
            ("c0", self.c0, False),
            ("cm", self.cm, False),
        ):
            if not math.isfinite(val):
                out.append(f"{name} must be finite")
            elif strict and val <= 0.0:
                out.append(f"{name} must be positive (got {val:g})")
            elif not strict and val < 0.0:
                out.append(f"{name} must be nonnegative (got {val:g})")
        return out


class NormWeights(NamedTuple):
    c1: float
    c2: float


@dataclass(frozen=True)
class Model:
    m: float
    mu: Coefficient
    gamma: Coefficient
    d: Coefficient
    beta: Kernel
    bc: BoundaryConstants = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        if self.bc is None:
            object.__setattr__(self, "bc", conservative_constants(self.gamma, self.d, self.m))

    def value(self, name: str, s):
        return evaluate(getattr(self, name), s, self.m)

    def deriv(self, name: str, s):
        return evaluate_deriv(getattr(self, name), s, self.m)

    @cached_property
    def rho0(self) -> float:
        return self.value("mu", 0.0) + self.bc.c0 + self.deriv("gamma", 0.0)

    @cached_property
    def rhom(self) -> float:
        return self.value("mu", self.m) + self.bc.cm + self.deriv("gamma", self.m)


def conservative_constants(gamma: Coefficient, d: Coefficient, m: float) -> BoundaryConstants:
    """Boundary constants that conserve total population without birth and death.

    Returns ``(b0, bm, c0, cm) = (d(0) + gamma(0), d(m) - gamma(m),
    gamma(0) - gamma'(0), -gamma(m) - gamma'(m))``.

    Raises
    ------
    AdmissibilityError
        If b0 or bm is not positive or c0 or cm is negative, i.e. the growth
        rate is incompatible with a conservative boundary.
    """
    if not m > 0:
        raise ArgumentError("maximum size m must be positive")
    g0, gm = evaluate(gamma, 0.0, m), evaluate(gamma, m, m)
    gp0, gpm = evaluate_deriv(gamma, 0.0, m), evaluate_deriv(gamma, m, m)
    d0, dm = evaluate(d, 0.0, m), evaluate(d, m, m)
    bc = BoundaryConstants(
        b0=d0 + g0, bm=dm - gm, c0=g0 - gp0, cm=-gm - gpm, conservative=True
    )
    bad = bc.violations()
    if bad:
        raise AdmissibilityError(
            [f"conservative boundary constants: {v}" for v in bad]
        )
    return bc


def norm_weights(model: Model) -> NormWeights:
    """Boundary weights c1 = d(0)/(b0 - gamma(0)), c2 = d(m)/(gamma(m) + bm)."""
    if model.bc.conservative:
        return NormWeights(1.0, 1.0)
    den0 = model.bc.b0 - model.value("gamma", 0.0)
    denm = model.value("gamma", model.m) + model.bc.bm
    bad = []
    if not den0 > 0:
        bad.append(f"b0 - gamma(0) must be positive (got {den0:g})")
    if not denm > 0:
        bad.append(f"gamma(m) + bm must be positive (got {denm:g})")
    if bad:
        raise AdmissibilityError(bad)
    return NormWeights(model.value("d", 0.0) / den0, model.value("d", model.m) / denm)


def _coverage(name, coef, m):
    if isinstance(coef, Table):
        lo, hi = coef.support
        if lo > 0.0 or hi < m:
            return [f"table for {name} does not cover [0, m] (covers [{lo:g}, {hi:g}])"]
    return []


def validate(model: Model, n_samples: int = N_VALIDATION_SAMPLES) -> list[str]:
    """Return the list of admissibility violations (empty when admissible).

    Sign constraints are checked on a uniform sample grid of ``n_samples``
    points of [0, m] (``n_samples`` x ``n_samples`` for the kernel).
    """
    if not (math.isfinite(model.m) and model.m > 0):
        return ["maximum size m must be positive"]
    out = []
    for name in ("mu", "gamma", "d"):
        out += _coverage(name, getattr(model, name), model.m)
    if isinstance(model.beta, GridKernel):
        b = model.beta
        if b.s_nodes[0] > 0 or b.y_nodes[0] > 0 or b.s_nodes[-1] < model.m or b.y_nodes[-1] < model.m:
            out.append("kernel grid does not cover [0, m] x [0, m]")
    if out:
        return out

    s = np.linspace(0.0, model.m, max(int(n_samples), 2))
    d = np.asarray(model.value("d", s))
    mu = np.asarray(model.value("mu", s))
    gamma = np.asarray(model.value("gamma", s))
    for name, vals in (("d", d), ("mu", mu), ("gamma", gamma)):
        if not np.all(np.isfinite(vals)):
            out.append(f"{name} must be finite on [0, m]")
    if np.any(d <= 0):
        k = int(np.argmin(d))
        out.append(f"diffusion must be strictly positive (d = {d[k]:g} at s = {s[k]:g})")
    if np.any(mu < 0):
        k = int(np.argmin(mu))
        out.append(f"mortality must be nonnegative (mu = {mu[k]:g} at s = {s[k]:g})")
    beta = model.beta.matrix(s, s)
    if not np.all(np.isfinite(beta)):
        out.append("recruitment kernel must be finite")
    elif np.any(beta < 0):
        i, j = np.unravel_index(int(np.argmin(beta)), beta.shape)
        out.append(
            f"recruitment kernel must be nonnegative "
            f"(beta = {beta[i, j]:g} at s = {s[i]:g}, y = {s[j]:g})"
        )

    bc = model.bc
    out += bc.violations()
    den0 = bc.b0 - gamma[0]
    denm = gamma[-1] + bc.bm
    if not den0 > 0:
        out.append(f"b0 - gamma(0) must be positive (got {den0:g})")
    if not denm > 0:
        out.append(f"gamma(m) + bm must be positive (got {denm:g})")
    if bc.conservative:
        ref = (d[0] + gamma[0], d[-1] - gamma[-1],
               gamma[0] - model.deriv("gamma", 0.0), -gamma[-1] - model.deriv("gamma", model.m))
        got = (bc.b0, bc.bm, bc.c0, bc.cm)
        if not all(math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-14) for a, b in zip(ref, got)):
            out.append("boundary constants flagged conservative do not match gamma and d")
    return out


def require_admissible(model: Model) -> None:
    """Raise :class:`AdmissibilityError` listing every violation, if any."""
    bad = validate(model)
    if bad:
        raise AdmissibilityError(bad)


def as_coefficient(value) -> Coefficient:
    """Coerce a number or a coefficient object into a coefficient."""
    if isinstance(value, (Constant, Polynomial, Table)):
        return value
    if isinstance(value, (int, float)):
        return Constant(value)
    raise ArgumentError(f"cannot interpret {value!r} as a coefficient")


def as_kernel(value) -> Kernel:
    if isinstance(value, (ConstantKernel, SeparableKernel, GridKernel)):
        return value
    if isinstance(value, (int, float)):
        return ConstantKernel(value)
    raise ArgumentError(f"cannot interpret {value!r} as a kernel")


def make_model(
    m: float,
    mu=0.0,
    gamma=0.0,
    d=1.0,
    beta=0.0,
    bc: BoundaryConstants | Sequence[float] | None = None,
) -> Model:
    """Build a :class:`Model`, accepting plain numbers for constant ingredients.

    ``bc=None`` selects the conservative boundary constants.
    """
    gamma, d = as_coefficient(gamma), as_coefficient(d)
    if bc is None:
        bc = conservative_constants(gamma, d, m)
    elif not isinstance(bc, BoundaryConstants):
        bc = BoundaryConstants(*map(float, bc))
    return Model(m=m, mu=as_coefficient(mu), gamma=gamma, d=d, beta=as_kernel(beta), bc=bc)
