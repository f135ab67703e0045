"""Method-of-lines generator for the size-structured model.

Vertex-centred grid s_i = i*h, i = 0..N.  Nodes 0 and N carry the boundary
compartments, nodes 1..N-1 the interior density.  Transport is written in
flux form with face fluxes

    F_{i+1/2} = gamma_{i+1/2} * u_up - d_{i+1/2} * (u_{i+1} - u_i) / h

(upwinded by the sign of gamma at the face).  The boundary rows use the same
face fluxes as the neighbouring interior rows, so the weighted sum
``sum_i w_i (A u)_i`` telescopes exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .errors import ArgumentError, DimensionError
from .model import Model, norm_weights, require_admissible


@dataclass(frozen=True)
class Grid:
    m: float
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ArgumentError(f"grid needs N >= 2 (got {self.N!r})")
        if not self.m > 0:
            raise ArgumentError(f"maximum size m must be positive (got {self.m!r})")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.m / self.N

    @property
    def nodes(self) -> np.ndarray:
        s = np.arange(self.N + 1) * self.h
        s[-1] = self.m
        return s

    @property
    def faces(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h


def build_grid(m: float, N: int) -> Grid:
    return Grid(m, N)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Discrete generator ``A_h = local + recruitment``.

    Attributes
    ----------
    lower, diag, upper:
        Diagonals of the tridiagonal local part (transport, mortality and
        boundary rows); ``lower[i]`` is entry ``(i+1, i)``, ``upper[i]`` is
        entry ``(i, i+1)``.
    recruitment:
        Dense recruitment matrix.  Columns 0 and N are zero.
    weights:
        Mass weights ``(c1, h, ..., h, c2)``.
    omega_bound:
        Gershgorin bound on the spectral abscissa.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    recruitment: np.ndarray
    weights: np.ndarray
    omega_bound: float
    grid: Grid | None = None
    boundary_exchange: tuple = (0.0, 0.0)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name in ("lower", "diag", "upper", "recruitment", "weights"):
            getattr(self, name).setflags(write=False)

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    @property
    def local(self) -> sps.csr_matrix:
        return sps.diags(
            [self.lower, self.diag, self.upper], offsets=[-1, 0, 1], format="csr"
        )

    @property
    def has_recruitment(self) -> bool:
        flag = self._cache.get("has_recruitment")
        if flag is None:
            flag = self._cache["has_recruitment"] = bool(np.any(self.recruitment))
        return flag

    def _bands(self, u):
        if u.ndim == 1:
            return self.lower, self.diag, self.upper
        return self.lower[:, None], self.diag[:, None], self.upper[:, None]

    def dense(self) -> np.ndarray:
        A = self.recruitment.copy()
        n = self.size
        A[np.arange(n), np.arange(n)] += self.diag
        A[np.arange(1, n), np.arange(n - 1)] += self.lower
        A[np.arange(n - 1), np.arange(1, n)] += self.upper
        return A

    def matvec(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, di, up = self._bands(u)
        out = di * u
        out[1:] += lo * u[:-1]
        out[:-1] += up * u[1:]
        if self.has_recruitment:
            out += self.recruitment @ u
        return out

    def rmatvec(self, phi) -> np.ndarray:
        """Transposed action ``A_h^T phi``."""
        phi = np.asarray(phi, dtype=float)
        lo, di, up = self._bands(phi)
        out = di * phi
        out[:-1] += lo * phi[1:]
        out[1:] += up * phi[:-1]
        if self.has_recruitment:
            out += self.recruitment.T @ phi
        return out

    @property
    def birth_bound(self) -> float:
        """Largest row sum of the recruitment matrix (B_q)."""
        return float(np.max(self.recruitment.sum(axis=1)))

    @property
    def lognorm_bound(self) -> float:
        """Weighted l1 logarithmic norm of A_h, an upper bound of s(A_h).

        ``dt * lognorm_bound < 1`` makes ``I - dt A_h`` a nonsingular M-matrix
        (positive weighted column sums), so implicit Euler is positive and
        grows the weighted norm by at most ``1 / (1 - dt * lognorm_bound)``.
        """
        w = self.weights
        col = self.diag * w + self.recruitment.T @ w
        col[:-1] += self.lower * w[1:]
        col[1:] += self.upper * w[:-1]
        return float(np.max(col / w))


def face_fluxes(model: Model, grid: Grid):
    """Coefficients ``(a, b)`` with ``F_{i+1/2} = a_i u_i + b_i u_{i+1}``."""
    sf = grid.faces
    gf = np.broadcast_to(model.value("gamma", sf), sf.shape)
    df = np.broadcast_to(model.value("d", sf), sf.shape)
    a = np.maximum(gf, 0.0) + df / grid.h
    b = np.minimum(gf, 0.0) - df / grid.h
    return a, b


def assemble_generator(model: Model, grid: Grid, recruitment: bool = True) -> GeneratorMatrix:
    """Assemble ``A_h`` for ``model`` on ``grid``.

    With ``recruitment=False`` the recruitment part is dropped (the operator
    used in the resolvent analysis).

    For non-conservative boundary constants the boundary rows are scaled by
    1/c1 (1/c2) and carry the extra diagonal term
    ``gamma(0)/c1 - gamma'(0) - c0`` (``-gamma(m)/c2 - gamma'(m) - cm``),
    which vanishes for conservative constants.
    """
    if grid.m != model.m:
        raise ArgumentError(f"grid length {grid.m} differs from model size {model.m}")
    require_admissible(model)
    nw = norm_weights(model)
    N, h, m = grid.N, grid.h, grid.m
    s = grid.nodes
    a, b = face_fluxes(model, grid)
    mu = np.broadcast_to(model.value("mu", s), s.shape).astype(float)

    diag = -mu.copy()
    lower = np.zeros(N)
    upper = np.zeros(N)
    # interior rows: -(F_{i+1/2} - F_{i-1/2}) / h
    i = np.arange(1, N)
    diag[i] += (-a[i] + b[i - 1]) / h
    upper[i] = -b[i] / h
    lower[i - 1] = a[i - 1] / h

    if model.bc.conservative:
        x0 = xm = 0.0
    else:
        x0 = model.value("gamma", 0.0) / nw.c1 - model.deriv("gamma", 0.0) - model.bc.c0
        xm = -model.value("gamma", m) / nw.c2 - model.deriv("gamma", m) - model.bc.cm
    # row 0: -F_{1/2}/c1 ; row N: +F_{N-1/2}/c2
    diag[0] += -a[0] / nw.c1 + x0
    upper[0] = -b[0] / nw.c1
    diag[N] += b[N - 1] / nw.c2 + xm
    lower[N - 1] = a[N - 1] / nw.c2

    R = np.zeros((N + 1, N + 1))
    if recruitment:
        R[:, 1:N] = h * model.beta.matrix(s, s[1:N])

    weights = np.full(N + 1, h)
    weights[0], weights[N] = nw.c1, nw.c2

    absrow = np.abs(R).sum(axis=1) - np.abs(np.diag(R))
    absrow[1:] += np.abs(lower)
    absrow[:-1] += np.abs(upper)
    omega_bound = float(np.max(diag + np.diag(R) + absrow))
    return GeneratorMatrix(
        lower=lower,
        diag=diag,
        upper=upper,
        recruitment=R,
        weights=weights,
        omega_bound=omega_bound,
        grid=grid,
        boundary_exchange=(float(x0), float(xm)),
    )


def _check_dim(G: GeneratorMatrix, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[0] != G.size:
        raise DimensionError(f"state has {u.shape[0]} entries, generator expects {G.size}")
    return u


def apply_generator(G: GeneratorMatrix, u) -> np.ndarray:
    return G.matvec(_check_dim(G, u))


def total_mass(u, G: GeneratorMatrix) -> float:
    """Weighted sum ``sum_i w_i u_i``; the weighted norm for nonnegative ``u``."""
    return float(np.dot(G.weights, _check_dim(G, u)))


def weighted_norm(u, G: GeneratorMatrix) -> float:
    return float(np.dot(G.weights, np.abs(_check_dim(G, u))))


def birth_death_rates(model: Model, G: GeneratorMatrix, u) -> tuple[float, float]:
    """Total birth rate B and death rate D of state ``u``.

    For conservative boundary constants ``sum_i w_i (A_h u)_i == B - D``.
    """
    u = _check_dim(G, u)
    s = G.grid.nodes if G.grid is not None else np.linspace(0.0, model.m, G.size)
    mu = np.broadcast_to(model.value("mu", s), s.shape)
    B = float(np.dot(G.weights, G.recruitment @ u))
    D = float(np.dot(G.weights, mu * u))
    return B, D


def boundary_exchange_rate(G: GeneratorMatrix, u) -> float:
    """Mass gained through the boundary compartments (zero when conservative)."""
    u = _check_dim(G, u)
    x0, xm = G.boundary_exchange
    return float(G.weights[0] * x0 * u[0] + G.weights[-1] * xm * u[-1])
