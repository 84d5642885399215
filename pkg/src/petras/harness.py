"""Tolerance sweeps, order fitting and result emission."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .engine import estimate_T0, mpa_integrate, petras_integrate
from .errors import DomainError, IterationCapExceeded
from .flows import FlowConfig, leftward_flow, rightward_flow
from .geometry import EngineConfig
from .integrands import get_integrand
from .quadrature import get_spec, required_points

__all__ = ["SweepConfig", "Row", "FitResult", "sweep", "fit_order", "emit",
           "read_csv", "config_hash", "MODES", "CSV_COLUMNS"]

MODES = ("petras", "mpa", "flow_right", "flow_left")
CSV_COLUMNS = ("epsilon", "Z", "N", "q", "bad_final", "wall_ms")


@dataclass(frozen=True)
class SweepConfig:
    """One experiment: a log-spaced tolerance grid and what to run at each point.

    Flow modes use ``p``, ``gamma``, ``A``, ``M`` and ``beta``; ``flow_left``
    also needs ``T0`` or estimates it from a synchronized run of ``fn``.
    """

    fn: str = "sin_inv"
    a: float = -1.0
    b: float = 1.0
    eps_start: float = 1e-2
    eps_stop: float = 1e-5
    eps_count: int = 7
    A: float = 1.25
    c: float = 2.0
    rule: str = "gauss"
    mode: str = "petras"
    output: Optional[str] = None
    p: float = 2.0
    gamma: float = 1.0
    M: float = 1.0
    beta: float = 1.0
    T0: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.eps_count) != self.eps_count or self.eps_count < 3:
            raise DomainError("eps_count must be an integer >= 3")
        if not (self.eps_start > self.eps_stop > 0):
            raise DomainError("need eps_start > eps_stop > 0")
        if not self.a < self.b:
            raise DomainError("need a < b")
        get_spec(self.rule)

    @property
    def eps_grid(self) -> np.ndarray:
        return np.logspace(math.log10(self.eps_start), math.log10(self.eps_stop),
                           int(self.eps_count))

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise DomainError(f"bad JSON in {path}: {e}") from None
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Row:
    epsilon: float
    Z: int
    N: int
    q: float
    bad_final: int
    wall_ms: float

    def as_tuple(self):
        return tuple(getattr(self, k) for k in CSV_COLUMNS)


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    model: str
    degenerate: bool = False


def config_hash(cfg: SweepConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _engine_row(cfg: SweepConfig, eps: float) -> Row:
    f = get_integrand(cfg.fn)
    ecfg = EngineConfig(epsilon=eps, A=cfg.A, c=cfg.c, rule=cfg.rule)
    run = petras_integrate if cfg.mode == "petras" else mpa_integrate
    t0 = time.perf_counter()
    q, st, _ = run(f, cfg.a, cfg.b, ecfg)
    wall = 1e3 * (time.perf_counter() - t0)
    n = required_points(get_spec(cfg.rule), cfg.b - cfg.a, cfg.c, st.M, eps)
    if st.N != n * st.Z:
        raise AssertionError("evaluation count differs from n * Z")
    return Row(float(eps), st.Z, st.N, q, st.bad_final, wall)


def _flow_row(cfg: SweepConfig, eps: float, T0: Optional[float]) -> Row:
    fc = FlowConfig(cfg.p, cfg.gamma, cfg.A)
    t0 = time.perf_counter()
    if cfg.mode == "flow_right":
        tr = rightward_flow(fc, eps / (2.0 * cfg.M), cfg.beta)
    else:
        tr = leftward_flow(fc, cfg.beta, eps / (cfg.M * T0))
    wall = 1e3 * (time.perf_counter() - t0)
    return Row(float(eps), tr.steps, tr.steps, 0.0, 0, wall)


def sweep(cfg: SweepConfig) -> list[Row]:
    """Run every tolerance of the grid, largest first.

    A bisection-cap error is re-raised with ``epsilon`` and the rows
    finished so far attached.
    """
    rows: list[Row] = []
    T0 = cfg.T0
    if cfg.mode == "flow_left" and T0 is None:
        f = get_integrand(cfg.fn)
        T0 = estimate_T0(f, cfg.a, cfg.b, EngineConfig(cfg.eps_start, A=cfg.A, c=cfg.c))
    for eps in cfg.eps_grid:
        try:
            if cfg.mode in ("petras", "mpa"):
                rows.append(_engine_row(cfg, eps))
            else:
                rows.append(_flow_row(cfg, eps, T0))
        except IterationCapExceeded as e:
            e.epsilon = float(eps)
            e.rows = rows
            e.args = (f"{e.args[0]} (epsilon = {eps:g})",)
            raise
    return rows


def _columns(table):
    if isinstance(table, dict):
        return np.asarray(table["epsilon"], float), np.asarray(table["Z"], float)
    eps = np.array([r.epsilon if isinstance(r, Row) else r[0] for r in table], float)
    Z = np.array([r.Z if isinstance(r, Row) else r[1] for r in table], float)
    return eps, Z


def fit_order(table, model: str = "power") -> FitResult:
    """Least-squares fit of ``ln Z`` (power) or ``Z`` (loglin) against ``ln(1/eps)``."""
    if model not in ("power", "loglin"):
        raise DomainError(f"model must be power or loglin, got {model!r}")
    eps, Z = _columns(table)
    if eps.size < 3:
        raise DomainError("need at least 3 rows to fit")
    if np.any(eps <= 0) or (model == "power" and np.any(Z <= 0)):
        raise DomainError("epsilon and (for the power model) Z must be positive")
    x = np.log(1.0 / eps)
    y = np.log(Z) if model == "power" else Z
    if np.all(y == y[0]):
        return FitResult(0.0, float(y[0]), math.nan, model, degenerate=True)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return FitResult(float(slope), float(intercept), min(max(r2, 0.0), 1.0), model)


def read_csv(path) -> list[Row]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or tuple(rd.fieldnames) != CSV_COLUMNS:
            raise DomainError(f"expected columns {','.join(CSV_COLUMNS)}")
        return [Row(float(r["epsilon"]), int(r["Z"]), int(r["N"]), float(r["q"]),
                    int(r["bad_final"]), float(r["wall_ms"])) for r in rd]


def _write_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in table:
            w.writerow([repr(r.epsilon), r.Z, r.N, repr(r.q), r.bad_final, f"{r.wall_ms:.3f}"])


def _gnuplot_script(csv_name: str, fit: Optional[FitResult]) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'ln(1/epsilon)'",
        "set ylabel 'ln Z'",
        "set grid",
    ]
    plot = f"plot '{csv_name}' using (log(1/$1)):(log($2)) with linespoints title 'ln Z'"
    if fit is not None and fit.model == "power":
        lines.append(f"fit_line(x) = {fit.slope!r}*x + {fit.intercept!r}")
        plot += f", fit_line(x) with lines title 'slope {fit.slope:.3f}'"
    lines.append(plot)
    return "\n".join(lines) + "\n"


def emit(table, fit: Optional[FitResult], fmt: str, path,
         config: Optional[SweepConfig] = None, csv_path=None):
    """Write ``table`` as csv, json or a gnuplot script.

    The gnuplot script reads a CSV next to it (``csv_path``, default the
    script path with a ``.csv`` suffix), which is written if missing.
    """
    if not table:
        raise DomainError("empty table")
    if fmt == "csv":
        _write_csv(table, path)
    elif fmt == "json":
        doc = {"table": [asdict(r) for r in table],
               "fit": asdict(fit) if fit is not None else None,
               "config_hash": config_hash(config) if config is not None else None,
               "config": config.to_dict() if config is not None else None}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    elif fmt == "gnuplot":
        if csv_path is None:
            csv_path = os.path.splitext(str(path))[0] + ".csv"
        if not os.path.exists(csv_path):
            _write_csv(table, csv_path)
        rel = os.path.relpath(csv_path, os.path.dirname(os.path.abspath(path)))
        with open(path, "w") as fh:
            fh.write(_gnuplot_script(rel, fit))
    else:
        raise DomainError(f"unknown format {fmt!r}")


def load_json(path):
    """Inverse of ``emit(..., 'json', ...)``: returns ``(table, fit, config_hash)``."""
    with open(path) as fh:
        doc = json.load(fh)
    table = [Row(**r) for r in doc["table"]]
    fit = FitResult(**doc["fit"]) if doc.get("fit") else None
    return table, fit, doc.get("config_hash")
