"""Boundary-touching rectangle chains inside a power-law region around 0.

For a region ``|y| <= gamma * |x|**p`` and a point ``x > 0``, the longest
step ``d`` such that the rho-rectangle of ``[x, x + d]`` (or ``[x - d, x]``)
still fits solves ``(x - g*d)**p = h*d`` with ``h = B / (2*gamma)`` and
``g = (A - 1)/2`` for steps to the right, ``(A + 1)/2`` for steps to the left.
Iterating that step gives the flows used to count intervals near a singular
point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PetrasError
from .geometry import ellipse_minor_axis

__all__ = ["FlowConfig", "FlowTrace", "solve_d", "solve_d_array", "solve_c",
           "d_bounds_check", "DBoundsReport", "rightward_flow", "leftward_flow",
           "t_lower_p_gt_1", "t_upper_p_gt_1", "k_lower_p_le_1", "k_upper_p_le_1",
           "bound_evaluators", "MAX_ITER"]

MAX_ITER = 200
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class FlowConfig:
    p: float
    gamma: float
    A: float = 1.25

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"p must be > 0, got {self.p!r}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")
        ellipse_minor_axis(self.A)

    @property
    def B(self) -> float:
        return ellipse_minor_axis(self.A)

    @property
    def h(self) -> float:
        return self.B / (2.0 * self.gamma)

    @property
    def g_left(self) -> float:
        return 0.5 * (self.A - 1.0)

    @property
    def g_right(self) -> float:
        return 0.5 * (self.A + 1.0)

    def g(self, side: str) -> float:
        if side in ("left", "L", "right_flow"):
            return self.g_left
        if side in ("right", "R", "left_flow"):
            return self.g_right
        raise DomainError(f"unknown side {side!r}")

    def x_tilde(self, g: float) -> float:
        """Upper end of the range where the ``c(x)`` characterization applies."""
        if self.p == 1:
            raise DomainError("x_tilde is undefined for p = 1")
        t = math.log(self.h / g) / (self.p - 1.0)
        return math.exp(t) if t < 709.0 else math.inf


def _residual(x, g, h, p, d):
    return max(x - g * d, 0.0) ** p - h * d


def solve_d(x: float, g: float, cfg: FlowConfig) -> float:
    """Smallest nonnegative root of ``(x - g*d)**p = h*d``.

    The residual falls strictly from ``x**p`` at ``d = 0`` to ``-h*x/g`` at
    ``d = x/g``, so the root is unique in that bracket. Newton steps are
    taken when they stay inside the bracket, bisection otherwise.
    """
    if not g > 0:
        raise DomainError("g must be > 0")
    if x <= 0:
        return 0.0
    p, h = cfg.p, cfg.h
    if p == 1.0:
        return x / (g + h)
    lo, hi = 0.0, x / g
    # start from the small-x approximation d ~ x**p / h, clipped into the bracket
    d = min(x ** p / h, 0.5 * hi)
    for _ in range(MAX_ITER):
        u = x - g * d
        F = (u ** p if u > 0 else 0.0) - h * d
        if F == 0.0:
            return d
        if F > 0:
            lo = d
        else:
            hi = d
        dF = -p * g * u ** (p - 1.0) - h if u > 0 else -h
        nd = d - F / dF
        if not lo < nd < hi:
            nd = 0.5 * (lo + hi)
        if nd == d or hi - lo <= 2.0 * math.ulp(hi):
            break
        d = nd
    # pick the bracket end with the smaller residual
    best = min((lo, hi, d), key=lambda t: abs(_residual(x, g, h, p, t)))
    return best


def solve_d_array(x, g: float, cfg: FlowConfig) -> np.ndarray:
    """Vectorised pure-bisection root of the same equation."""
    x = np.asarray(x, dtype=float)
    p, h = cfg.p, cfg.h
    lo = np.zeros_like(x)
    hi = np.where(x > 0, x / g, 0.0)
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        u = np.maximum(x - g * mid, 0.0)
        pos = u ** p - h * mid > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    r_lo = np.abs(np.maximum(x - g * lo, 0.0) ** p - h * lo)
    r_hi = np.abs(np.maximum(x - g * hi, 0.0) ** p - h * hi)
    return np.where(x > 0, np.where(r_lo <= r_hi, lo, hi), 0.0)


def _bisect_decreasing(G, lo=0.0, hi=1.0):
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if G(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(G(lo)) <= abs(G(hi)) else hi


def solve_c(x: float, g: float, cfg: FlowConfig) -> float:
    """The normalised step ``c(x)`` in ``[0, 1]``.

    For ``p > 1`` it solves ``(1 - c*(g/h)*x**(p-1))**p = c`` and the step is
    ``d = c * x**p / h``. For ``p < 1`` it solves
    ``c = (1 - c*k)**(1/p)`` with ``k = (h/g)**(1/p) * x**(1/p - 1)`` and the
    step is ``d = (x/g) * (1 - c*k)``.
    """
    p, h = cfg.p, cfg.h
    if p == 1.0:
        raise DomainError("c(x) is only defined for p != 1")
    if x < 0 or x > cfg.x_tilde(g) * (1 + 1e-15):
        raise DomainError(f"x = {x!r} outside [0, x_tilde]")
    if p > 1:
        k = min((g / h) * x ** (p - 1.0), 1.0)
        return _bisect_decreasing(lambda c: (1.0 - c * k) ** p - c)
    k = min((h / g) ** (1.0 / p) * x ** (1.0 / p - 1.0), 1.0)
    return _bisect_decreasing(lambda c: max(1.0 - c * k, 0.0) ** (1.0 / p) - c)


def d_from_c(x: float, g: float, cfg: FlowConfig, c: float) -> float:
    p, h = cfg.p, cfg.h
    if p > 1:
        return c * x ** p / h
    k = (h / g) ** (1.0 / p) * x ** (1.0 / p - 1.0)
    return (x / g) * (1.0 - c * k)


@dataclass
class DBoundsReport:
    """Empirical constants of the two-sided bound on ``d(x)``.

    For ``p > 1`` these are ``min`` and ``max`` of ``d/x**p``; for ``p < 1``
    of ``(1/g - d/x) / x**(1/p - 1)``; for ``p = 1`` of ``d/x``.
    """

    c_low: float
    c_high: float
    below_region_bound: bool
    below_x_over_g: bool
    increasing: bool
    max_residual: float

    @property
    def c2(self):
        return self.c_low

    @property
    def c1(self):
        return self.c_high

    @property
    def ok(self) -> bool:
        return (0 < self.c_low <= self.c_high and self.below_region_bound
                and self.below_x_over_g and self.increasing)


def d_bounds_check(cfg: FlowConfig, g: float, x_grid) -> DBoundsReport:
    x = np.sort(np.asarray(x_grid, dtype=float))
    x = x[x > 0]
    if x.size == 0:
        raise DomainError("grid has no positive points")
    d = np.array([solve_d(float(t), g, cfg) for t in x])
    p, h = cfg.p, cfg.h
    if p > 1:
        ratio = d / x ** p
    elif p < 1:
        ratio = (1.0 / g - d / x) / x ** (1.0 / p - 1.0)
    else:
        ratio = d / x
    res = np.abs(np.maximum(x - g * d, 0.0) ** p - h * d)
    cap = (2.0 / cfg.B) * cfg.gamma * x ** p
    # equality only when g*d vanishes against x in floating point
    unresolved = (x - g * d) == x
    return DBoundsReport(
        c_low=float(ratio.min()), c_high=float(ratio.max()),
        below_region_bound=bool(np.all((d < cap) | (unresolved & (d <= cap)))),
        below_x_over_g=bool(np.all(d <= x / g)),
        increasing=bool(np.all(np.diff(d) > 0)),
        max_residual=float((res / np.maximum(1.0, h * d)).max()))


@dataclass
class FlowTrace:
    points: np.ndarray
    steps: int
    start: float
    stop_threshold: float
    direction: str

    def step_lengths(self) -> np.ndarray:
        return np.abs(np.diff(self.points))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "x", "d"])
            d = self.step_lengths()
            for i, x in enumerate(self.points):
                w.writerow([i, repr(float(x)), repr(float(d[i])) if i < d.size else ""])


def rightward_flow(cfg: FlowConfig, start: float, beta: float,
                   max_steps: int = 10_000_000) -> FlowTrace:
    """``x <- x + d_L(x)`` from ``start`` until ``x >= beta``."""
    if not start > 0:
        raise DomainError("start must be > 0")
    g = cfg.g_left
    pts = [start]
    x = start
    while x < beta:
        if len(pts) > max_steps:
            raise PetrasError(f"flow exceeded {max_steps} steps")
        d = solve_d(x, g, cfg)
        if d < UNDERFLOW:
            raise PetrasError(f"step underflow at x = {x!r}")
        x = x + d
        pts.append(x)
    return FlowTrace(np.array(pts), len(pts) - 1, start, beta, "right")


def leftward_flow(cfg: FlowConfig, beta: float, alpha_L: float,
                  max_steps: int = 10_000_000) -> FlowTrace:
    """``y <- y - d_R(y)`` from ``beta`` until ``y <= alpha_L``."""
    if not alpha_L > 0:
        raise DomainError("alpha_L must be > 0")
    g = cfg.g_right
    pts = [beta]
    y = beta
    while y > alpha_L:
        if len(pts) > max_steps:
            raise PetrasError(f"flow exceeded {max_steps} steps")
        d = solve_d(y, g, cfg)
        if d < UNDERFLOW:
            raise PetrasError(f"step underflow at y = {y!r}")
        y = y - d
        pts.append(y)
    return FlowTrace(np.array(pts), len(pts) - 1, beta, alpha_L, "left")


# closed-form step-count bounds ------------------------------------------------

def t_lower_p_gt_1(p, M, beta, epsilon, c1):
    """Lower bound on rightward steps from ``epsilon/(2M)`` to ``beta`` when ``d <= c1 x**p``."""
    if not p > 1:
        raise DomainError("this bound needs p > 1")
    k = c1 * (p - 1.0)
    return (2.0 * M) ** (p - 1.0) / (k * epsilon ** (p - 1.0)) - 1.0 / (k * beta ** (p - 1.0))


def t_upper_p_gt_1(p, M, beta, epsilon, c2, T0):
    """Upper bound on leftward steps from ``beta`` down to ``epsilon/(M T0)`` when ``d >= c2 x**p``."""
    if not p > 1:
        raise DomainError("this bound needs p > 1")
    a = 0.5 * c2
    return ((M * T0 * beta / epsilon) ** (p - 1.0) - 1.0) / (a * beta ** (p - 1.0) * (p - 1.0))


def k_lower_p_le_1(M, eta, epsilon, g_right):
    return math.log(2.0 * M * eta / epsilon) / math.log(1.0 + 1.0 / g_right) - 1.0


def k_upper_p_le_1(M, eta, epsilon, g, T0):
    return math.log(eta * M * T0 / epsilon) / math.log(1.0 + 1.0 / (4.0 * g - 1.0)) + 1.0


def bound_evaluators(cfg: FlowConfig, M: float, beta: float, eta: float,
                     epsilon: float, c1=None, c2=None, T0=None) -> dict:
    """Values of the closed-form step-count bounds that apply to ``cfg.p``.

    Bounds whose constants were not supplied are reported as ``None``.
    """
    out = {"t_lower_p_gt_1": None, "t_upper_p_gt_1": None,
           "k_lower_p_le_1": None, "k_upper_p_le_1": None}
    if cfg.p > 1:
        if c1 is not None:
            out["t_lower_p_gt_1"] = t_lower_p_gt_1(cfg.p, M, beta, epsilon, c1)
        if c2 is not None and T0 is not None:
            out["t_upper_p_gt_1"] = t_upper_p_gt_1(cfg.p, M, beta, epsilon, c2, T0)
    else:
        out["k_lower_p_le_1"] = k_lower_p_le_1(M, eta, epsilon, cfg.g_right)
        if T0 is not None:
            out["k_upper_p_le_1"] = k_upper_p_le_1(M, eta, epsilon, cfg.g_right, T0)
    return out
