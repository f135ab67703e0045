"""Structural property checks run by ``sizepop check``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .discretization import assemble_generator, birth_death_rates, boundary_exchange_rate
from .evolution import PositivityWarning, simulate
from .model import ConstantKernel, Constant
from .resolvent import DEFAULT_LAMBDAS, dissipativity_check

CONSERVATION_TOL = 1e-10
BALANCE_TOL = 1e-12
POSITIVITY_TOL = -1e-12
DISSIPATIVITY_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def balance_check(cfg: RunConfig, n_states: int = 100) -> CheckResult:
    """``d/dt mass = B - D (+ boundary exchange)`` on random states."""
    G = assemble_generator(cfg.model, cfg.grid)
    A_abs = np.abs(G.dense())
    rng = np.random.default_rng(cfg.run.seed)
    worst = 0.0
    for _ in range(n_states):
        u = rng.uniform(0.0, 1.0, G.size)
        lhs = float(np.dot(G.weights, G.matvec(u)))
        B, D = birth_death_rates(cfg.model, G, u)
        E = boundary_exchange_rate(G, u)
        scale = float(np.dot(G.weights, A_abs @ u))
        worst = max(worst, abs(lhs - (B - D + E)) / scale)
    return CheckResult(
        "balance", worst <= BALANCE_TOL, worst,
        f"max relative mismatch {worst:.3g} over {n_states} states (tol {BALANCE_TOL:g})",
    )


def conservation_check(cfg: RunConfig) -> CheckResult:
    """Mass drift of the birth- and death-free model over the configured run."""
    if not cfg.model.bc.conservative:
        return CheckResult("conservation", True, float("nan"),
                           "skipped: boundary constants are not conservative")
    model = replace(cfg.model, mu=Constant(0.0), beta=ConstantKernel(0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        traj = simulate(model, cfg.grid, cfg.initial_state(), cfg.run.dt, cfg.run.T,
                        scheme=cfg.run.scheme, snapshot_stride=10**9)
    M = np.asarray(traj.masses)
    drift = float(np.max(np.abs(M - M[0])) / abs(M[0]))
    return CheckResult(
        "conservation", drift <= CONSERVATION_TOL, drift,
        f"relative mass drift {drift:.3g} with beta = mu = 0 (tol {CONSERVATION_TOL:g})",
    )


def positivity_check(cfg: RunConfig) -> CheckResult:
    """Implicit Euler run of the full model from the configured initial state."""
    G = assemble_generator(cfg.model, cfg.grid)
    dt = cfg.run.dt
    bound = max(G.birth_bound, G.lognorm_bound)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        traj = simulate(None, None, cfg.initial_state(), dt, cfg.run.T,
                        scheme="implicit_euler", snapshot_stride=10**9, generator=G)
    mn = traj.min_entry
    note = "" if dt * bound < 1 else f"; dt*bound = {dt * bound:.3g} >= 1, no guarantee"
    return CheckResult(
        "positivity", mn >= POSITIVITY_TOL, mn,
        f"min entry {mn:.3g} over {len(traj.times) - 1} implicit Euler steps{note}",
    )


def dissipativity_result(cfg: RunConfig, samples: int = 100, omega: float | None = None):
    rep = dissipativity_check(cfg.model, cfg.grid, DEFAULT_LAMBDAS, omega, samples, cfg.run.seed)
    ok = rep.max_ratio <= 1.0 + DISSIPATIVITY_TOL and rep.positivity_violations == 0
    detail = (
        f"max ||u||/||h|| = {rep.max_ratio:.12g}, positivity violations {rep.positivity_violations}, "
        f"omega = {rep.omega:g} (omega_min = {rep.omega_min:g})"
    )
    if rep.below_omega_min:
        detail += " [below omega_min: no guarantee]"
    return CheckResult("dissipativity", ok, rep.max_ratio, detail), rep


def run_checks(cfg: RunConfig, samples: int = 100, omega: float | None = None):
    diss, rep = dissipativity_result(cfg, samples, omega)
    return [balance_check(cfg), conservation_check(cfg), positivity_check(cfg), diss], rep
