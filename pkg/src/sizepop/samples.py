"""Named reference models and a random admissible-model generator."""
from __future__ import annotations

import numpy as np

from .errors import AdmissibilityError
from .model import (
    BoundaryConstants,
    ConstantKernel,
    GridKernel,
    Model,
    Polynomial,
    SeparableKernel,
    make_model,
    validate,
)


def pure_diffusion(m: float = 1.0, d: float = 1.0) -> Model:
    return make_model(m, d=d)


def pure_death(mu: float = 0.3, m: float = 1.0) -> Model:
    return make_model(m, mu=mu, d=1.0)


def pure_birth(beta: float = 0.4, m: float = 1.0) -> Model:
    return make_model(m, d=1.0, beta=beta)


def reference_model(beta: float = 0.4, mu: float = 0.1) -> Model:
    """gamma = 0.5 (1 - s), d = 0.2 on [0, 1], conservative boundary."""
    return make_model(1.0, mu=mu, gamma=Polynomial([0.5, -0.5]), d=0.2, beta=beta)


def _linear(rng, lo, hi, m):
    """Random affine coefficient with values in [lo, hi] at both ends."""
    a, b = rng.uniform(lo, hi, size=2)
    return Polynomial([a, (b - a) / m])


def random_kernel(rng, m: float, scale: float = 1.0, positive: bool = True):
    lo = 0.05 * scale if positive else 0.0
    kind = rng.integers(3)
    if kind == 0:
        return ConstantKernel(rng.uniform(max(lo, 0.1 * scale), scale))
    if kind == 1:
        return SeparableKernel(_linear(rng, max(lo, 0.2), 1.0, m), _linear(rng, max(lo, 0.2), scale, m))
    nodes = np.linspace(0.0, m, 5)
    vals = rng.uniform(lo, scale, size=(5, 5))
    return GridKernel(tuple(nodes), tuple(nodes), tuple(map(tuple, vals)))


def random_model(
    rng: np.random.Generator,
    conservative: bool = True,
    birth: bool = True,
    birth_scale: float = 1.0,
    max_tries: int = 1000,
) -> Model:
    """Draw an admissible model with affine mu, gamma, d.

    Conservative draws use the conservative boundary constants, others draw
    b0, bm, c0, cm directly subject to the weight denominators being
    positive.  ``birth=False`` gives a zero kernel.
    """
    for _ in range(max_tries):
        m = float(rng.uniform(0.5, 2.0))
        d = _linear(rng, 0.05, 1.0, m)
        mu = _linear(rng, 0.0, 0.5, m)
        g1 = -rng.uniform(0.0, 1.0)
        # conservative constants need gamma(0) >= gamma'(0) and gamma(m) + gamma'(m) <= 0
        g0 = rng.uniform(g1, -g1 * (m + 1.0))
        gamma = Polynomial([g0, g1])
        beta = random_kernel(rng, m, birth_scale) if birth else ConstantKernel(0.0)
        if conservative:
            try:
                model = make_model(m, mu=mu, gamma=gamma, d=d, beta=beta)
            except AdmissibilityError:
                continue
        else:
            gm = g0 + g1 * m
            b0 = max(g0, 0.0) + rng.uniform(0.05, 1.0)
            bm = max(-gm, 0.0) + rng.uniform(0.05, 1.0)
            c0, cm = rng.uniform(0.0, 1.0, size=2)
            model = make_model(m, mu=mu, gamma=gamma, d=d, beta=beta,
                               bc=BoundaryConstants(b0, bm, c0, cm))
        if not validate(model):
            return model
    raise RuntimeError("could not draw an admissible model")
