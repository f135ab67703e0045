"""Run configuration: YAML parsing, serialization and initial states.

Example::

    model:
      m: 1.0
      mu: 0.1                        # bare number = constant
      gamma: {polynomial: [0.5, -0.5]}
      d: {table: [[0, 0.2], [1, 0.3]]}
      beta: {separable: {f: 1.0, g: {polynomial: [0, 1]}}}
      boundary: conservative         # or {b0: .., bm: .., c0: .., cm: ..}
    grid: {N: 64}
    run: {scheme: implicit_euler, dt: 0.001, T: 10, snapshot_stride: 100, seed: 0}
    initial: {gaussian: {center: 0.5, width: 0.1, amplitude: 1}}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .discretization import Grid
from .errors import AdmissibilityError, ArgumentError, DomainError, ParseError
from .evolution import SCHEMES
from .model import (
    BoundaryConstants,
    Constant,
    ConstantKernel,
    GridKernel,
    Model,
    Polynomial,
    SeparableKernel,
    Table,
    conservative_constants,
    validate,
)

_TOP_KEYS = {"model", "grid", "run", "initial"}
_MODEL_KEYS = {"m", "mu", "gamma", "d", "beta", "boundary"}
_RUN_KEYS = {"scheme", "dt", "T", "snapshot_stride", "seed"}


@dataclass(frozen=True)
class RunSettings:
    scheme: str = "implicit_euler"
    dt: float = 1e-3
    T: float = 1.0
    snapshot_stride: int = 100
    seed: int = 0


@dataclass(frozen=True)
class InitialCondition:
    kind: str = "constant"
    value: float = 1.0
    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0
    table: tuple = ()

    def evaluate(self, grid: Grid) -> np.ndarray:
        s = grid.nodes
        if self.kind == "constant":
            return np.full(s.shape, self.value)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * ((s - self.center) / self.width) ** 2)
        return np.asarray(Table(self.table).value_at(s), dtype=float)


@dataclass(frozen=True)
class RunConfig:
    model: Model
    N: int = 64
    run: RunSettings = field(default_factory=RunSettings)
    initial: InitialCondition = field(default_factory=InitialCondition)

    @property
    def grid(self) -> Grid:
        return Grid(self.model.m, self.N)

    def initial_state(self) -> np.ndarray:
        return self.initial.evaluate(self.grid)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class _Ctx:
    """Tracks the YAML node tree so errors can report line numbers."""

    def __init__(self, root):
        self.root = root

    def line(self, path):
        node = self.root
        for key in path:
            if isinstance(node, yaml.MappingNode):
                for k, v in node.value:
                    if k.value == key:
                        node = v
                        break
                else:
                    break
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
            else:
                break
        return node.start_mark.line + 1 if node is not None else None

    def fail(self, path, message):
        key = ".".join(str(p) for p in path) or None
        raise ParseError(message, key=key, line=self.line(path))


def _num(ctx, path, value, positive=False, integer=False):
    if isinstance(value, bool):
        ctx.fail(path, "expected a number, got a boolean")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            ctx.fail(path, f"expected a number, got {value!r}")
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        ctx.fail(path, f"expected a finite number, got {value!r}")
    if integer:
        if float(value) != int(value):
            ctx.fail(path, f"expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    if positive and value <= 0:
        ctx.fail(path, f"must be positive, got {value!r}")
    return value


def _mapping(ctx, path, value, allowed, required=()):
    if not isinstance(value, dict):
        ctx.fail(path, f"expected a mapping, got {type(value).__name__}")
    for k in value:
        if k not in allowed:
            ctx.fail(path + [k], f"unknown key (allowed: {', '.join(sorted(allowed))})")
    for k in required:
        if k not in value:
            ctx.fail(path, f"missing required key '{k}'")
    return value


def _single(ctx, path, value, allowed):
    _mapping(ctx, path, value, allowed)
    if len(value) != 1:
        ctx.fail(path, f"expected exactly one of: {', '.join(sorted(allowed))}")
    return next(iter(value.items()))


def _pairs(ctx, path, value):
    if not isinstance(value, list) or len(value) < 2:
        ctx.fail(path, "expected a list of at least two [s, v] pairs")
    out = []
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            ctx.fail(path + [i], "expected an [s, v] pair")
        out.append((_num(ctx, path + [i, 0], pair[0]), _num(ctx, path + [i, 1], pair[1])))
    return tuple(out)


def _coefficient(ctx, path, value):
    if not isinstance(value, dict):
        return Constant(_num(ctx, path, value))
    kind, arg = _single(ctx, path, value, {"constant", "polynomial", "table"})
    sub = path + [kind]
    try:
        if kind == "constant":
            return Constant(_num(ctx, sub, arg))
        if kind == "polynomial":
            if not isinstance(arg, list) or not arg:
                ctx.fail(sub, "expected a non-empty list of coefficients")
            return Polynomial(tuple(_num(ctx, sub + [i], c) for i, c in enumerate(arg)))
        return Table(_pairs(ctx, sub, arg))
    except ArgumentError as exc:
        ctx.fail(sub, str(exc))


def _kernel(ctx, path, value):
    if not isinstance(value, dict):
        return ConstantKernel(_num(ctx, path, value))
    kind, arg = _single(ctx, path, value, {"constant", "separable", "grid"})
    sub = path + [kind]
    try:
        if kind == "constant":
            return ConstantKernel(_num(ctx, sub, arg))
        if kind == "separable":
            _mapping(ctx, sub, arg, {"f", "g"}, required=("f", "g"))
            return SeparableKernel(_coefficient(ctx, sub + ["f"], arg["f"]),
                                   _coefficient(ctx, sub + ["g"], arg["g"]))
        _mapping(ctx, sub, arg, {"s", "y", "values"}, required=("s", "y", "values"))
        for k in ("s", "y", "values"):
            if not isinstance(arg[k], list):
                ctx.fail(sub + [k], "expected a list")
        s = tuple(_num(ctx, sub + ["s", i], v) for i, v in enumerate(arg["s"]))
        y = tuple(_num(ctx, sub + ["y", i], v) for i, v in enumerate(arg["y"]))
        vals = []
        for i, row in enumerate(arg["values"]):
            if not isinstance(row, list):
                ctx.fail(sub + ["values", i], "expected a list")
            vals.append(tuple(_num(ctx, sub + ["values", i, j], v) for j, v in enumerate(row)))
        return GridKernel(s, y, tuple(vals))
    except ArgumentError as exc:
        ctx.fail(sub, str(exc))


def _model(ctx, raw):
    path = ["model"]
    _mapping(ctx, path, raw, _MODEL_KEYS, required=("m",))
    m = _num(ctx, path + ["m"], raw["m"], positive=True)
    mu = _coefficient(ctx, path + ["mu"], raw.get("mu", 0.0))
    gamma = _coefficient(ctx, path + ["gamma"], raw.get("gamma", 0.0))
    d = _coefficient(ctx, path + ["d"], raw.get("d", 1.0))
    beta = _kernel(ctx, path + ["beta"], raw.get("beta", 0.0))
    boundary = raw.get("boundary", "conservative")
    try:
        if boundary == "conservative":
            bc = conservative_constants(gamma, d, m)
        else:
            bpath = path + ["boundary"]
            if isinstance(boundary, str):
                ctx.fail(bpath, f"expected 'conservative' or a mapping, got {boundary!r}")
            _mapping(ctx, bpath, boundary, {"b0", "bm", "c0", "cm"}, required=("b0", "bm", "c0", "cm"))
            bc = BoundaryConstants(*(_num(ctx, bpath + [k], boundary[k]) for k in ("b0", "bm", "c0", "cm")))
        model = Model(m=m, mu=mu, gamma=gamma, d=d, beta=beta, bc=bc)
        bad = validate(model)
    except DomainError as exc:
        raise AdmissibilityError(str(exc)) from None
    if bad:
        raise AdmissibilityError(bad)
    return model


def _run(ctx, raw):
    path = ["run"]
    _mapping(ctx, path, raw, _RUN_KEYS)
    defaults = RunSettings()
    scheme = raw.get("scheme", defaults.scheme)
    if scheme not in SCHEMES:
        ctx.fail(path + ["scheme"], f"unknown scheme {scheme!r} (expected one of {', '.join(SCHEMES)})")
    dt = _num(ctx, path + ["dt"], raw.get("dt", defaults.dt), positive=True)
    T = _num(ctx, path + ["T"], raw.get("T", defaults.T), positive=True)
    if T < dt:
        ctx.fail(path + ["T"], "T must be at least dt")
    stride = _num(ctx, path + ["snapshot_stride"], raw.get("snapshot_stride", defaults.snapshot_stride),
                  positive=True, integer=True)
    seed = _num(ctx, path + ["seed"], raw.get("seed", defaults.seed), integer=True)
    return RunSettings(scheme=scheme, dt=dt, T=T, snapshot_stride=stride, seed=seed)


def _initial(ctx, raw, m):
    path = ["initial"]
    kind, arg = _single(ctx, path, raw, {"constant", "gaussian", "table"})
    sub = path + [kind]
    if kind == "constant":
        value = _num(ctx, sub, arg)
        if value < 0:
            ctx.fail(sub, "initial population must be nonnegative")
        return InitialCondition(kind="constant", value=value)
    if kind == "gaussian":
        _mapping(ctx, sub, arg, {"center", "width", "amplitude"}, required=("center", "width"))
        amp = _num(ctx, sub + ["amplitude"], arg.get("amplitude", 1.0))
        if amp < 0:
            ctx.fail(sub + ["amplitude"], "initial population must be nonnegative")
        return InitialCondition(
            kind="gaussian",
            center=_num(ctx, sub + ["center"], arg["center"]),
            width=_num(ctx, sub + ["width"], arg["width"], positive=True),
            amplitude=amp,
        )
    pts = _pairs(ctx, sub, arg)
    if any(v < 0 for _, v in pts):
        ctx.fail(sub, "initial population must be nonnegative")
    if pts[0][0] > 0 or pts[-1][0] < m:
        ctx.fail(sub, "initial table must cover [0, m]")
    try:
        Table(pts)
    except ArgumentError as exc:
        ctx.fail(sub, str(exc))
    return InitialCondition(kind="table", table=pts)


def parse_config(text: str) -> RunConfig:
    """Parse YAML ``text`` into a validated :class:`RunConfig`.

    Raises
    ------
    ParseError
        Malformed YAML, unknown keys or ill-typed values (with line and key).
    AdmissibilityError
        The model violates a sign or boundary constraint.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(getattr(exc, "problem", exc)), line=mark.line + 1 if mark else None) from None
    ctx = _Ctx(root)
    if raw is None:
        raise ParseError("empty configuration")
    _mapping(ctx, [], raw, _TOP_KEYS, required=("model",))
    model = _model(ctx, raw["model"])
    grid_raw = _mapping(ctx, ["grid"], raw.get("grid", {}), {"N"})
    N = _num(ctx, ["grid", "N"], grid_raw.get("N", 64), integer=True)
    if N < 2:
        ctx.fail(["grid", "N"], "grid needs N >= 2")
    run = _run(ctx, raw.get("run", {}))
    initial = _initial(ctx, raw.get("initial", {"constant": 1.0}), model.m)
    return RunConfig(model=model, N=N, run=run, initial=initial)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _coef_data(c):
    if isinstance(c, Constant):
        return c.value
    if isinstance(c, Polynomial):
        return {"polynomial": list(c.coeffs)}
    return {"table": [list(p) for p in c.breakpoints]}


def _kernel_data(k):
    if isinstance(k, ConstantKernel):
        return k.value
    if isinstance(k, SeparableKernel):
        return {"separable": {"f": _coef_data(k.f), "g": _coef_data(k.g)}}
    return {"grid": {"s": list(k.s_nodes), "y": list(k.y_nodes), "values": [list(r) for r in k.values]}}


def config_data(cfg: RunConfig) -> dict:
    """Plain-data form of ``cfg`` (the inverse of :func:`parse_config`)."""
    mdl = cfg.model
    bc = mdl.bc
    boundary = "conservative" if bc.conservative else {"b0": bc.b0, "bm": bc.bm, "c0": bc.c0, "cm": bc.cm}
    ini = cfg.initial
    if ini.kind == "constant":
        initial = {"constant": ini.value}
    elif ini.kind == "gaussian":
        initial = {"gaussian": {"center": ini.center, "width": ini.width, "amplitude": ini.amplitude}}
    else:
        initial = {"table": [list(p) for p in ini.table]}
    return {
        "model": {
            "m": mdl.m,
            "mu": _coef_data(mdl.mu),
            "gamma": _coef_data(mdl.gamma),
            "d": _coef_data(mdl.d),
            "beta": _kernel_data(mdl.beta),
            "boundary": boundary,
        },
        "grid": {"N": cfg.N},
        "run": {
            "scheme": cfg.run.scheme,
            "dt": cfg.run.dt,
            "T": cfg.run.T,
            "snapshot_stride": cfg.run.snapshot_stride,
            "seed": cfg.run.seed,
        },
        "initial": initial,
    }


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_data(cfg), sort_keys=False)
