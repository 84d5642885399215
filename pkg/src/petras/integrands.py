"""Built-in piecewise analytic integrands and the oracles the engine consumes.

Each integrand carries a real evaluator, a complex point evaluator, a box
enclosure, a closed-form upper bound on the real line, and its set of
non-analytic points. ``complex_bound`` turns the enclosure into a bound on
``sup |f|`` over a rho-rectangle by subdividing the rectangle's boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import boxes
from .boxes import ComplexBox
from .errors import DomainError, PreconditionError
from .geometry import (EngineConfig, RegionSpec, ellipse_minor_axis,
                       rects_in_region)

__all__ = [
    "Integrand",
    "get_integrand",
    "registered_ids",
    "upper_bound",
    "is_analytic",
    "complex_bound",
    "complex_bounds",
    "classify_rects",
    "probe_wedge_blowup",
    "wedge_lower_bound",
    "probe_parabola_bound",
    "check_ppc_on_samples",
    "PPCReport",
]

K_LEVELS = (1, 2, 4, 8, 16, 32, 64)
STABILIZATION = 0.01
N_SAMPLE = 16


@dataclass(frozen=True)
class Integrand:
    """A test integrand and everything the oracles need to know about it.

    ``ppc_order`` and ``ppc_gamma`` describe a power-law region around the
    singular set inside which the oracle bound stays below ``2 * M`` on
    ``[-1, 1]``; the modified algorithm uses it for its acceptance test.
    """

    id: str
    singular_set: tuple[float, ...]
    real_eval: Callable[[np.ndarray], np.ndarray]
    complex_eval: Callable[[np.ndarray], np.ndarray]
    enclosure_eval: Callable[[ComplexBox], ComplexBox]
    sup_bound: Callable[[float, float], float]
    exact_integral: Optional[Callable[[float, float], float]] = None
    ppc_order: Optional[float] = None
    ppc_gamma: Optional[float] = None
    real_on_real_axis: bool = field(default=True)

    def __call__(self, x):
        return self.real_eval(np.asarray(x, dtype=float))

    def ppc_region(self) -> Optional[RegionSpec]:
        if self.ppc_order is None:
            return None
        return RegionSpec(self.ppc_order, self.ppc_gamma, self.singular_set)


# -- registry --------------------------------------------------------------

def _sin_inv_pow(n: int) -> Integrand:
    def real(x):
        with np.errstate(divide="ignore"):
            return np.sin(1.0 / x ** n)

    def cplx(z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.sin(1.0 / z ** n)

    def encl(b):
        return boxes.sin(boxes.recip(boxes.power(b, n)))

    def exact(a, b):
        if n % 2 == 1 and a == -b:
            return 0.0
        if n == 1:
            return _sin_inv_antiderivative(b) - _sin_inv_antiderivative(a)
        return None

    name = "sin_inv" if n == 1 else f"sin_inv_pow:{n}"
    # |Im(1/z^n)| <= n * gamma on D^{n+1}_gamma near 0; keep cosh of it well below 2
    return Integrand(name, (0.0,), real, cplx, encl, lambda a, b: 1.0, exact,
                     ppc_order=n + 1, ppc_gamma=0.5 / n)


def _sin_inv_antiderivative(x: float) -> float:
    # d/dx [x sin(1/x) - Ci(1/x)] = sin(1/x) for x > 0; the function is odd
    if x == 0.0:
        return 0.0
    t = abs(x)
    _, ci = special.sici(1.0 / t)
    return t * math.sin(1.0 / t) - ci


def _zk_sin_inv(k: int) -> Integrand:
    def real(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x == 0.0, 0.0, x ** k * np.sin(1.0 / x))

    def cplx(z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            zk = z ** k
            s = np.sin(1.0 / z)
            out = zk * s
            # inf * 0 in the complex product gives nan where the modulus is infinite
            lost = np.isnan(out) & ~np.isnan(s) & (zk != 0)
            return np.where(lost, complex(math.inf, math.inf), out)

    def encl(b):
        return boxes.mul(boxes.power(b, k), boxes.sin(boxes.recip(b)))

    def sup(a, b):
        return max(abs(a), abs(b)) ** k

    return Integrand(f"zk_sin_inv:{k}", (0.0,), real, cplx, encl, sup, None,
                     ppc_order=2.0, ppc_gamma=0.5)


def _abs_x() -> Integrand:
    def exact(a, b):
        def F(x):
            return 0.5 * x * abs(x)
        return F(b) - F(a)

    return Integrand("abs_x", (0.0,), np.abs, _complex_abs, boxes.abs_real,
                     lambda a, b: max(abs(a), abs(b)), exact,
                     ppc_order=1.0, ppc_gamma=1.0)


def _complex_abs(z):
    z = np.asarray(z, dtype=complex)
    return np.where(z.real >= 0, z, -z)


def _exp_x() -> Integrand:
    def exact(a, b):
        return math.exp(a) * math.expm1(b - a)

    return Integrand("exp_x", (), np.exp, np.exp, boxes.exp,
                     lambda a, b: math.exp(b), exact)


def _sin_x() -> Integrand:
    def exact(a, b):
        return 2.0 * math.sin(0.5 * (a + b)) * math.sin(0.5 * (b - a))

    return Integrand("sin_x", (), np.sin, np.sin, boxes.sin,
                     lambda a, b: _sup_abs_sin(a, b), exact)


def _sup_abs_sin(a, b):
    if b - a >= math.pi:
        return 1.0
    k = math.ceil((a - math.pi / 2) / math.pi)
    if math.pi / 2 + k * math.pi <= b:
        return 1.0
    return max(abs(math.sin(a)), abs(math.sin(b)))


def _recip_shift(s: float) -> Integrand:
    def real(x):
        return 1.0 / (x + s)

    def encl(b):
        return boxes.recip(boxes.shift(b, s))

    def sup(a, b):
        if a <= -s <= b:
            return math.inf
        return 1.0 / min(abs(a + s), abs(b + s))

    def exact(a, b):
        if a <= -s <= b:
            return None
        if a + s > 0:
            return math.log1p((b - a) / (a + s))
        return -math.log1p((b - a) / (-(b + s)))

    return Integrand(f"recip:{s:g}", (-s,), real, real, encl, sup, exact,
                     ppc_order=1.0, ppc_gamma=0.25)


def _const(v: float) -> Integrand:
    def real(x):
        return np.full(np.shape(x), v, dtype=float)

    def cplx(z):
        return np.full(np.shape(z), v, dtype=complex)

    def encl(b):
        return boxes.const(v, b.shape)

    return Integrand(f"const:{v:g}", (), real, cplx, encl,
                     lambda a, b: abs(v), lambda a, b: v * (b - a))


def _exp_inv_sq() -> Integrand:
    def real(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x == 0.0, 0.0, np.exp(-1.0 / (x * x)))

    def cplx(z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.exp(-1.0 / (z * z))

    def encl(b):
        return boxes.exp(boxes.neg(boxes.recip(boxes.sqr(b))))

    def F(x):
        # antiderivative on x > 0, continuous at 0 with F(0) = 0; f is even
        if x == 0.0:
            return 0.0
        t = abs(x)
        val = t * math.exp(-1.0 / (t * t)) - math.sqrt(math.pi) * math.erfc(1.0 / t)
        return math.copysign(val, x)

    def sup(a, b):
        m = max(abs(a), abs(b))
        return math.exp(-1.0 / (m * m)) if m > 0 else 0.0

    return Integrand("exp_inv_sq", (0.0,), real, cplx, encl, sup,
                     lambda a, b: F(b) - F(a), ppc_order=1.0, ppc_gamma=0.25)


def get_integrand(name: str) -> Integrand:
    """Look up a built-in integrand by id, e.g. ``sin_inv`` or ``zk_sin_inv:2``."""
    head, _, arg = name.partition(":")
    try:
        if head == "sin_inv" and not arg:
            return _sin_inv_pow(1)
        if head == "sin_inv_pow":
            n = int(arg)
            if n < 1:
                raise ValueError
            return _sin_inv_pow(n)
        if head == "zk_sin_inv":
            k = int(arg)
            if k < 0:
                raise ValueError
            return _zk_sin_inv(k)
        if head == "const":
            return _const(float(arg))
        if head == "recip":
            return _recip_shift(float(arg))
    except ValueError:
        raise DomainError(f"bad integrand parameter in {name!r}") from None
    simple = {"abs_x": _abs_x, "exp_x": _exp_x, "sin_x": _sin_x, "exp_inv_sq": _exp_inv_sq}
    if head in simple and not arg:
        return simple[head]()
    raise DomainError(f"unknown integrand {name!r}")


def registered_ids() -> list[str]:
    return ["sin_inv", "sin_inv_pow:<n>", "zk_sin_inv:<k>", "abs_x", "exp_x",
            "const:<v>", "exp_inv_sq", "sin_x", "recip:<s>"]


# -- oracles ---------------------------------------------------------------

def upper_bound(f: Integrand, a: float, b: float) -> float:
    """Certified ``M >= sup |f|`` on ``[a, b]``."""
    if not a < b:
        raise DomainError(f"empty interval [{a}, {b}]")
    return float(f.sup_bound(a, b))


def _rect_geometry(lo, hi, A):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    B = ellipse_minor_axis(A)
    d = hi - lo
    c = 0.5 * (lo + hi)
    w = 0.5 * A * d
    H = 0.5 * B * d
    # widen slightly so the float rectangle covers the exact one
    xl = boxes._down(c - w)
    xh = boxes._up(c + w)
    H = boxes._up(H)
    return xl, xh, H


def _analytic_mask(f: Integrand, xl, xh):
    if not f.singular_set:
        return np.ones(np.shape(xl), dtype=bool)
    s = np.asarray(f.singular_set)
    return np.searchsorted(s, xl, side="left") == np.searchsorted(s, xh, side="right")


def is_analytic(f: Integrand, alpha: float, beta: float, A: float) -> bool:
    """True only if ``f`` is analytic on the rho-rectangle of ``[alpha, beta]``."""
    if not alpha < beta:
        raise DomainError(f"alpha must be < beta, got [{alpha}, {beta}]")
    xl, xh, _ = _rect_geometry([alpha], [beta], A)
    return bool(_analytic_mask(f, xl, xh)[0])


def _boundary_boxes(xl, xh, H, k, full):
    """Cover the rectangle boundary with ``k`` segments per edge.

    Returns bounds of shape ``(m, nseg)``. For integrands real on the real
    axis ``|f|`` is symmetric under conjugation, so the upper half of the
    boundary is enough.
    """
    t = np.linspace(0.0, 1.0, k + 1)
    xs = xl[:, None] + (xh - xl)[:, None] * t[None, :]
    xs[:, 0] = xl
    xs[:, -1] = xh
    ybot = -H if full else np.zeros_like(H)
    ys = ybot[:, None] + (H - ybot)[:, None] * t[None, :]
    ys[:, 0] = ybot
    ys[:, -1] = H
    segs_rl, segs_rh, segs_il, segs_ih = [], [], [], []
    # top edge
    segs_rl.append(xs[:, :-1]); segs_rh.append(xs[:, 1:])
    segs_il.append(np.repeat(H[:, None], k, 1)); segs_ih.append(np.repeat(H[:, None], k, 1))
    # left and right edges
    for x in (xl, xh):
        segs_rl.append(np.repeat(x[:, None], k, 1)); segs_rh.append(np.repeat(x[:, None], k, 1))
        segs_il.append(ys[:, :-1]); segs_ih.append(ys[:, 1:])
    if full:
        segs_rl.append(xs[:, :-1]); segs_rh.append(xs[:, 1:])
        segs_il.append(np.repeat(-H[:, None], k, 1)); segs_ih.append(np.repeat(-H[:, None], k, 1))
    return tuple(np.concatenate(s, axis=1) for s in (segs_rl, segs_rh, segs_il, segs_ih))


def _bound_at_level(f: Integrand, xl, xh, H, k):
    rl, rh, il, ih = _boundary_boxes(xl, xh, H, k, not f.real_on_real_axis)
    shape = rl.shape
    box = ComplexBox(rl.ravel(), rh.ravel(), il.ravel(), ih.ravel())
    with np.errstate(all="ignore"):
        mags = f.enclosure_eval(box).magnitude_bound()
    mags = np.where(np.isnan(mags), np.inf, mags)
    return mags.reshape(shape).max(axis=1)


def _sample_lower(f: Integrand, xl, xh, H):
    t = np.linspace(0.0, 1.0, N_SAMPLE)
    z = (xl[:, None] + (xh - xl)[:, None] * t[None, :]) + 1j * H[:, None]
    with np.errstate(all="ignore"):
        v = np.abs(f.complex_eval(z))
    v = np.where(np.isnan(v), 0.0, v)
    return v.max(axis=1)


def complex_bounds(f: Integrand, lo, hi, A: float) -> np.ndarray:
    """Vectorised ``complex_bound`` over many intervals.

    The boundary of each rectangle is split into ``k`` segments per edge for
    ``k`` in 1, 2, 4, ..., 64; refinement stops once two consecutive levels
    agree within 1 %. The result is the smallest bound seen, each of which
    is sound by the maximum modulus principle.
    """
    xl, xh, H = _rect_geometry(lo, hi, A)
    if not np.all(_analytic_mask(f, xl, xh)):
        raise PreconditionError("complex_bound called on a rectangle where f is not known analytic")
    n = xl.shape[0]
    best = np.full(n, np.inf)
    prev = np.full(n, np.nan)
    active = np.arange(n)
    for k in K_LEVELS:
        if active.size == 0:
            break
        b = _bound_at_level(f, xl[active], xh[active], H[active], k)
        best[active] = np.minimum(best[active], b)
        with np.errstate(invalid="ignore"):
            stable = np.abs(b - prev[active]) <= STABILIZATION * b
        prev[active] = b
        active = active[~stable]
    return best


def complex_bound(f: Integrand, alpha: float, beta: float, A: float) -> float:
    """Upper bound for ``sup |f|`` over the rho-rectangle of ``[alpha, beta]``."""
    if not alpha < beta:
        raise DomainError(f"alpha must be < beta, got [{alpha}, {beta}]")
    return float(complex_bounds(f, [alpha], [beta], A)[0])


def classify_rects(f: Integrand, lo, hi, A: float, cM: float) -> np.ndarray:
    """Proper/bad status for many intervals at once.

    Equivalent to ``is_analytic and complex_bound <= cM`` but stops refining
    as soon as the answer is decided: a sampled value of ``|f|`` above
    ``cM`` already rules the interval out, and any level whose bound is
    below ``cM`` rules it in.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    xl, xh, H = _rect_geometry(lo, hi, A)
    status = np.zeros(lo.shape, dtype=bool)
    active = np.flatnonzero(_analytic_mask(f, xl, xh))
    if active.size == 0:
        return status
    sample = _sample_lower(f, xl[active], xh[active], H[active])
    active = active[~(sample > cM * (1.0 + 1e-9))]
    best = np.full(lo.shape, np.inf)
    prev = np.full(lo.shape, np.nan)
    for k in K_LEVELS:
        if active.size == 0:
            break
        b = _bound_at_level(f, xl[active], xh[active], H[active], k)
        best[active] = np.minimum(best[active], b)
        ok = best[active] <= cM
        status[active[ok]] = True
        with np.errstate(invalid="ignore"):
            stable = np.abs(b - prev[active]) <= STABILIZATION * b
        prev[active] = b
        active = active[~ok & ~stable]
    return status


# -- probes ------------------------------------------------------------------

def wedge_lower_bound(gamma: float, x) -> np.ndarray:
    """Lower bound for ``|sin(1/z)|`` at ``z = x + i*gamma*x``."""
    t = gamma / (np.asarray(x, dtype=float) * (gamma * gamma + 1.0))
    with np.errstate(over="ignore"):
        return np.sinh(t)


def probe_wedge_blowup(gamma: float, x_seq) -> np.ndarray:
    """``|sin(1/z)|`` along the wedge edge ``z = x + i*gamma*x``."""
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    x = np.asarray(x_seq, dtype=float)
    with np.errstate(over="ignore"):
        return np.abs(np.sin(1.0 / (x + 1j * gamma * x)))


def probe_parabola_bound(p: int, gamma: float, x_seq) -> float:
    """Largest ``|sin(1/z**(p-1))|`` on the curve ``z = x + i*gamma*x**p``.

    Points with ``x == 0`` are skipped.
    """
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    if p < 2:
        raise DomainError("p must be an integer >= 2")
    x = np.asarray(x_seq, dtype=float)
    x = x[x != 0.0]
    if x.size == 0:
        return 0.0
    z = x + 1j * gamma * np.abs(x) ** p
    return float(np.max(np.abs(np.sin(1.0 / z ** (p - 1)))))


@dataclass
class PPCReport:
    n_samples: int
    n_in_region: int
    violations: int
    examples: list = field(default_factory=list)


def check_ppc_on_samples(f: Integrand, reg: RegionSpec, cfg: EngineConfig,
                         n_samples: int, a: float = -1.0, b: float = 1.0,
                         seed: int = 0) -> PPCReport:
    """Falsification test of the positive condition on random intervals.

    Left endpoints are uniform on ``[a, b]`` and lengths log-uniform, so that
    short intervals close to singular points, the only ones that fit inside
    a power-law region there, are actually drawn.
    """
    if n_samples <= 0:
        return PPCReport(0, 0, 0)
    rng = np.random.default_rng(seed)
    x = rng.uniform(a, b, n_samples)
    span = b - x
    length = span * np.exp(rng.uniform(np.log(1e-9), 0.0, n_samples))
    y = np.minimum(x + length, b)
    keep = y > x
    x, y = x[keep], y[keep]
    xl, xh, H = _rect_geometry(x, y, cfg.A)
    inside = rects_in_region(xl, xh, H, reg)
    x, y = x[inside], y[inside]
    cM = cfg.c * upper_bound(f, a, b)
    report = PPCReport(n_samples, int(inside.sum()), 0)
    if x.size == 0:
        return report
    xl, xh, _ = _rect_geometry(x, y, cfg.A)
    analytic = _analytic_mask(f, xl, xh)
    bound = np.full(x.shape, np.inf)
    if np.any(analytic):
        bound[analytic] = complex_bounds(f, x[analytic], y[analytic], cfg.A)
    bad = ~analytic | (bound > cM)
    report.violations = int(bad.sum())
    report.examples = [(float(u), float(v), float(m)) for u, v, m in zip(x[bad], y[bad], bound[bad])][:10]
    return report
