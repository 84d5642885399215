"""Real intervals, rho-rectangles and power-law regions around singular points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Interval",
    "RhoRectangle",
    "RegionSpec",
    "EngineConfig",
    "ellipse_minor_axis",
    "rho_rectangle",
    "rect_in_region",
    "rects_in_region",
    "region_boundary_point",
]


def ellipse_minor_axis(A: float) -> float:
    """Return ``sqrt(A**2 - 1)``, the only height factor compatible with ``A``.

    An ellipse with foci at the interval ends and semi-axes ``A*d/2``,
    ``B*d/2`` is inscribed in the rectangle exactly when ``B`` has this value.
    """
    if not A > 1.0:
        raise DomainError(f"A must be > 1, got {A!r}")
    return math.sqrt((A - 1.0) * (A + 1.0))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"degenerate interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class RhoRectangle:
    """Axis-aligned rectangle centred on the midpoint of ``[alpha, beta]``.

    Its half-width is ``A*(beta-alpha)/2`` and its half-height ``B*(beta-alpha)/2``.
    """

    alpha: float
    beta: float
    A: float
    B: float

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise DomainError(f"alpha must be < beta, got [{self.alpha}, {self.beta}]")
        if not self.A > 1.0:
            raise DomainError(f"A must be > 1, got {self.A!r}")
        if not self.B > 0.0:
            raise DomainError(f"B must be > 0, got {self.B!r}")

    @property
    def center(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    @property
    def half_width(self) -> float:
        return 0.5 * self.A * (self.beta - self.alpha)

    @property
    def half_height(self) -> float:
        return 0.5 * self.B * (self.beta - self.alpha)

    @property
    def x_range(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    @property
    def y_range(self) -> tuple[float, float]:
        return -self.half_height, self.half_height

    def contains(self, z: complex) -> bool:
        return (abs(z.real - self.center) <= self.half_width
                and abs(z.imag) <= self.half_height)


def rho_rectangle(alpha: float, beta: float, A: float, B: float) -> RhoRectangle:
    return RhoRectangle(alpha, beta, A, B)


@dataclass(frozen=True)
class RegionSpec:
    """The set ``{x + iy : |y| <= gamma * dist(x, S)**p}``.

    With an empty ``S`` the region is the whole plane.
    """

    p: float
    gamma: float
    S: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"p must be > 0, got {self.p!r}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")
        S = tuple(float(s) for s in self.S)
        if any(b <= a for a, b in zip(S, S[1:])):
            raise DomainError("singular points must be strictly increasing")
        object.__setattr__(self, "S", S)

    def dist(self, x):
        """Distance from ``x`` (scalar or array) to the singular set."""
        if not self.S:
            return np.full(np.shape(x), np.inf) if np.ndim(x) else math.inf
        s = np.asarray(self.S)
        xa = np.asarray(x, dtype=float)
        idx = np.searchsorted(s, xa)
        left = s[np.clip(idx - 1, 0, len(s) - 1)]
        right = s[np.clip(idx, 0, len(s) - 1)]
        out = np.minimum(np.abs(xa - left), np.abs(xa - right))
        return float(out) if np.ndim(x) == 0 else out

    def boundary_height(self, x):
        return self.gamma * self.dist(x) ** self.p

    def contains(self, z: complex) -> bool:
        if not self.S:
            return True
        return abs(z.imag) <= self.boundary_height(z.real)


def rect_in_region(r: RhoRectangle, reg: RegionSpec) -> bool:
    """Exact containment of a rho-rectangle in a power-law region.

    The binding constraint is the top edge. Between singular points the
    allowed height is unimodal (it peaks at midpoints), so its minimum over
    the x-range is attained at an endpoint unless a singular point falls
    inside the range, where it is zero.
    """
    if not reg.S:
        return True
    xl, xh = r.x_range
    return bool(rects_in_region(np.array([xl]), np.array([xh]), r.half_height, reg)[0])


def rects_in_region(xl, xh, half_height, reg: RegionSpec) -> np.ndarray:
    """Vectorised containment test for rectangles given by their x-ranges."""
    xl = np.asarray(xl, dtype=float)
    xh = np.asarray(xh, dtype=float)
    H = np.broadcast_to(np.asarray(half_height, dtype=float), xl.shape)
    if not reg.S:
        return np.ones(xl.shape, dtype=bool)
    s = np.asarray(reg.S)
    # a singular point in [xl, xh] forces the allowed height to 0
    hit = np.searchsorted(s, xl, side="left") < np.searchsorted(s, xh, side="right")
    allowed = reg.gamma * np.minimum(reg.dist(xl), reg.dist(xh)) ** reg.p
    return ~hit & (H <= allowed)


def region_boundary_point(reg: RegionSpec, x: float, side: int = 1) -> complex:
    if not reg.S:
        raise DomainError("region without singular points has no boundary")
    sign = 1.0 if side >= 0 else -1.0
    return complex(x, sign * reg.boundary_height(x))


@dataclass(frozen=True)
class EngineConfig:
    """Constants of one integration run.

    ``B`` is derived from ``A``; passing an inconsistent ``B`` is an error.
    """

    epsilon: float
    A: float = 1.25
    c: float = 2.0
    rule: str = "gauss"
    B: float | None = field(default=None)

    def __post_init__(self):
        B = ellipse_minor_axis(self.A)
        if self.B is not None and not math.isclose(self.B, B, rel_tol=1e-12, abs_tol=0.0):
            raise DomainError(f"B must equal sqrt(A^2-1) = {B!r}, got {self.B!r}")
        object.__setattr__(self, "B", B)
        if not self.c > 1.0:
            raise DomainError(f"c must be > 1, got {self.c!r}")
        if not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be > 0, got {self.epsilon!r}")
        if self.rule not in ("gauss", "cc", "clenshaw_curtis"):
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
