"""Adaptive bisection integrator and its synchronized variant.

All intervals descend from ``[a, b]`` by halving, so an interval at depth
``k`` has nominal length ``(b - a) / 2**k``. Always bisecting the longest bad
interval (leftmost first) therefore sweeps the tree one depth at a time,
left to right. The loop below exploits that: it classifies the children of a
depth in large vectorised chunks and then replays the sequential stopping
rule over the parents in order, which gives exactly the partition the
one-at-a-time loop would produce.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IterationCapExceeded
from .geometry import EngineConfig, RegionSpec, ellipse_minor_axis, rects_in_region
from .integrands import Integrand, classify_rects, upper_bound, _rect_geometry
from .quadrature import (EvalCounter, QuadratureSpec, apply_many, build_rule,
                         get_spec, required_points)

__all__ = ["PartitionState", "RunStats", "petras_integrate", "mpa_integrate",
           "classify", "analytic_interval_count_stability", "estimate_T0",
           "BISECTION_CAP"]

BISECTION_CAP = 10_000_000
CHUNK = 1 << 16


@dataclass
class PartitionState:
    """Intervals tiling ``[a, b]`` in order, with a proper/bad flag each."""

    lo: np.ndarray
    hi: np.ndarray
    proper: np.ndarray
    depth: np.ndarray
    a: float
    b: float

    @classmethod
    def from_parts(cls, a, b, parts):
        lo = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
        hi = np.concatenate([p[1] for p in parts]) if parts else np.empty(0)
        st = np.concatenate([p[2] for p in parts]) if parts else np.empty(0, bool)
        dp = np.concatenate([p[3] for p in parts]) if parts else np.empty(0, int)
        order = np.argsort(lo, kind="stable")
        return cls(lo[order], hi[order], st[order].astype(bool), dp[order], a, b)

    def __len__(self):
        return self.lo.size

    @property
    def J(self) -> np.ndarray:
        return np.flatnonzero(self.proper)

    def lengths(self) -> np.ndarray:
        return (self.b - self.a) * np.ldexp(1.0, -self.depth)

    @property
    def bad_length(self) -> float:
        return math.fsum(self.lengths()[~self.proper])

    def is_tiling(self) -> bool:
        if len(self) == 0:
            return False
        return (self.lo[0] == self.a and self.hi[-1] == self.b
                and bool(np.all(self.hi[:-1] == self.lo[1:])))

    def proper_union(self) -> list[tuple[float, float]]:
        """Proper intervals merged into maximal disjoint segments."""
        out: list[list[float]] = []
        for lo, hi in zip(self.lo[self.proper], self.hi[self.proper]):
            if out and out[-1][1] == lo:
                out[-1][1] = hi
            else:
                out.append([lo, hi])
        return [(float(u), float(v)) for u, v in out]

    def dump(self) -> str:
        lines = [f"{lo:.17g} {hi:.17g} {'proper' if st else 'bad'}"
                 for lo, hi, st in zip(self.lo, self.hi, self.proper)]
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.dump())


@dataclass
class RunStats:
    Z: int
    N: int
    n_points: int
    q: float
    bisections: int
    bad_final: int
    bad_length: float
    M: float
    wall_time: float
    levels: int = 0
    extra: dict = field(default_factory=dict)


def classify(f: Integrand, lo: float, hi: float, cfg: EngineConfig, M: float) -> bool:
    """Proper iff ``f`` is known analytic on the rectangle and its bound is at most ``c*M``."""
    if not lo < hi:
        raise DomainError(f"degenerate interval [{lo}, {hi}]")
    return bool(classify_rects(f, [lo], [hi], cfg.A, cfg.c * M)[0])


def _oracle_classifier(f, cfg, M):
    cM = cfg.c * M
    return lambda lo, hi: classify_rects(f, lo, hi, cfg.A, cM)


def _region_classifier(region: RegionSpec, cfg):
    def cls(lo, hi):
        xl, xh, H = _rect_geometry(lo, hi, cfg.A)
        return rects_in_region(xl, xh, H, region)
    return cls


def _resolve_spec(cfg: EngineConfig, spec: Optional[QuadratureSpec]) -> QuadratureSpec:
    return spec if spec is not None else get_spec(cfg.rule)


def _finish(f, a, b, cfg, spec, M, parts, bisections, levels, t0, extra=None):
    part = PartitionState.from_parts(a, b, parts)
    n = required_points(spec, b - a, cfg.c, M, cfg.epsilon)
    rule = build_rule(spec, n)
    counter = EvalCounter()
    J = part.J
    if J.size:
        vals = apply_many(rule, f.real_eval, part.lo[J], part.hi[J], counter)
        q = math.fsum(vals)
    else:
        q = 0.0
    Z = int(J.size)
    stats = RunStats(Z=Z, N=counter.count, n_points=n, q=q, bisections=bisections,
                     bad_final=int(len(part) - Z), bad_length=part.bad_length, M=M,
                     wall_time=time.perf_counter() - t0, levels=levels,
                     extra=extra or {})
    assert stats.N == n * Z
    return q, stats, part


def _run(f, a, b, cfg, spec, classifier_factory, synchronized, cap):
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    t0 = time.perf_counter()
    spec = _resolve_spec(cfg, spec)
    M = upper_bound(f, a, b)
    if M == 0.0:
        M = 1.0  # f vanishes identically on [a, b]; any positive M is valid
    if not math.isfinite(M):
        raise DomainError("upper bound on [a, b] is not finite")
    classify_batch = classifier_factory(M)
    tol = cfg.epsilon / (2.0 * M)
    L0 = b - a

    # finished intervals: lists of (lo, hi, proper, depth) arrays
    parts = []
    bad_lo = np.array([a], dtype=float)
    bad_hi = np.array([b], dtype=float)
    root_ok = classify_batch(bad_lo, bad_hi)
    if root_ok[0]:
        parts.append((bad_lo, bad_hi, np.array([True]), np.array([0])))
        return _finish(f, a, b, cfg, spec, M, parts, 0, 0, t0)

    depth = 0
    bisections = 0
    while True:
        m = bad_lo.size
        if m * math.ldexp(L0, -depth) <= tol:
            break
        Lhalf = math.ldexp(L0, -(depth + 1))
        accepted = 0  # proper children created so far at this depth
        next_lo, next_hi = [], []
        s = 0
        while s < m:
            if bisections >= cap:
                raise IterationCapExceeded(
                    f"bisection cap {cap} exceeded at depth {depth + 1}",
                    _partial(a, b, parts + _bad_parts(next_lo, next_hi, depth + 1),
                             bad_lo[s:], bad_hi[s:], depth), bisections)
            e = min(m, s + CHUNK, s + cap - bisections)
            p_lo, p_hi = bad_lo[s:e], bad_hi[s:e]
            mid = 0.5 * (p_lo + p_hi)
            k = e - s
            c_lo = np.empty(2 * k)
            c_hi = np.empty(2 * k)
            c_lo[0::2], c_hi[0::2] = p_lo, mid
            c_lo[1::2], c_hi[1::2] = mid, p_hi
            if np.any(~(c_lo < c_hi)):
                raise IterationCapExceeded(
                    "interval width underflow",
                    _partial(a, b, parts + _bad_parts(next_lo, next_hi, depth + 1),
                             bad_lo[s:], bad_hi[s:], depth), bisections)
            ok = classify_batch(c_lo, c_hi)
            j = k
            if not synchronized:
                # bad length before bisecting parent s+i is (2m - accepted - C_i) * Lhalf
                C = accepted + np.concatenate([[0], np.cumsum(ok[0::2].astype(np.int64) + ok[1::2])])
                stop = (2 * m - C) * Lhalf <= tol
                if stop.any():
                    j = int(np.argmax(stop))
            c_lo, c_hi, ok = c_lo[:2 * j], c_hi[:2 * j], ok[:2 * j]
            bisections += j
            accepted += int(ok.sum())
            parts.append((c_lo[ok], c_hi[ok], np.ones(int(ok.sum()), bool),
                          np.full(int(ok.sum()), depth + 1)))
            next_lo.append(c_lo[~ok])
            next_hi.append(c_hi[~ok])
            if j < k:
                # stopped partway through this depth
                rest = _bad_parts(next_lo, next_hi, depth + 1)
                rest.append((bad_lo[s + j:], bad_hi[s + j:], np.zeros(m - s - j, bool),
                             np.full(m - s - j, depth)))
                return _finish(f, a, b, cfg, spec, M, parts + rest, bisections, depth + 1, t0)
            s = e
        bad_lo = np.concatenate(next_lo)
        bad_hi = np.concatenate(next_hi)
        depth += 1
        if bad_lo.size == 0:
            break
    parts.append((bad_lo, bad_hi, np.zeros(bad_lo.size, bool), np.full(bad_lo.size, depth)))
    return _finish(f, a, b, cfg, spec, M, parts, bisections, depth, t0)


def _bad_parts(los, his, depth):
    if not los:
        return []
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    return [(lo, hi, np.zeros(lo.size, bool), np.full(lo.size, depth))]


def _partial(a, b, parts, bad_lo, bad_hi, depth):
    rest = (bad_lo, bad_hi, np.zeros(bad_lo.size, bool), np.full(bad_lo.size, depth))
    return PartitionState.from_parts(a, b, parts + [rest])


def petras_integrate(f: Integrand, a: float, b: float, cfg: EngineConfig,
                     spec: Optional[QuadratureSpec] = None, cap: int = BISECTION_CAP):
    """Integrate ``f`` over ``[a, b]`` to within ``cfg.epsilon``.

    Returns ``(q, stats, partition)``. Bad intervals contribute nothing to
    ``q``; their total length is at most ``epsilon / (2M)`` on exit.
    """
    factory = lambda M: _oracle_classifier(f, cfg, M)
    return _run(f, a, b, cfg, spec, factory, synchronized=False, cap=cap)


def mpa_integrate(f: Integrand, a: float, b: float, cfg: EngineConfig,
                  spec: Optional[QuadratureSpec] = None, region: Optional[RegionSpec] = None,
                  classifier: str = "region", cap: int = BISECTION_CAP):
    """Synchronized variant: every bad interval is halved before the stopping test.

    With ``classifier="region"`` an interval is accepted when its rectangle
    lies inside ``region`` (default: the integrand's own power-law region),
    which is the acceptance rule the upper-bound analysis works with. With
    ``classifier="oracle"`` the usual analytic/bound test is used instead.
    Integrands without a singular point always use the oracle test.
    """
    if region is None:
        region = f.ppc_region()
    if classifier not in ("region", "oracle"):
        raise DomainError(f"unknown classifier {classifier!r}")
    if classifier == "region" and region is not None and region.S:
        factory = lambda M: _region_classifier(region, cfg)
    else:
        factory = lambda M: _oracle_classifier(f, cfg, M)
    return _run(f, a, b, cfg, spec, factory, synchronized=True, cap=cap)


def analytic_interval_count_stability(f: Integrand, a: float, b: float,
                                      cfg: EngineConfig, eps_list) -> list[int]:
    """Proper-interval count for each tolerance; constant for analytic ``f``."""
    out = []
    for eps in eps_list:
        c = EngineConfig(epsilon=eps, A=cfg.A, c=cfg.c, rule=cfg.rule)
        out.append(petras_integrate(f, a, b, c)[1].Z)
    return out


def estimate_T0(f: Integrand, a: float, b: float, cfg: EngineConfig,
                region: Optional[RegionSpec] = None) -> float:
    """Empirical ``T0`` with ``alpha_L = epsilon / (M * T0)``.

    ``alpha_L`` is the distance from the first singular point to the nearest
    proper interval on its right at the end of a synchronized run.
    """
    _, stats, part = mpa_integrate(f, a, b, cfg, region=region)
    if not f.singular_set:
        raise DomainError("integrand has no singular point")
    s = f.singular_set[0]
    right = part.lo[part.proper & (part.lo >= s)]
    if right.size == 0:
        raise DomainError("no proper interval to the right of the singular point")
    alpha_L = float(right.min() - s)
    return cfg.epsilon / (stats.M * alpha_L)
