"""Rectangular complex enclosures, vectorised over numpy arrays.

A :class:`ComplexBox` holds four arrays ``re_lo, re_hi, im_lo, im_hi``; element
``i`` encloses a set of complex numbers. Every operation returns a box that
contains the image of its argument boxes, padded outward by a few units in
the last place to absorb rounding in the float evaluation. Rounding is not
directed, so enclosures are sound up to that padding, not formally verified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAD_ULPS = 4
_TWO_PI = 2.0 * np.pi
_HALF_PI = 0.5 * np.pi
# beyond this |u| the period search in sin/cos loses accuracy; fall back to [-1, 1]
_TRIG_ARG_LIMIT = 1e6


def _down(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.isinf(x), x, x - PAD_ULPS * np.spacing(np.abs(x)))


def _up(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.isinf(x), x, x + PAD_ULPS * np.spacing(np.abs(x)))


def _pad(lo, hi):
    lo = _down(lo)
    hi = _up(hi)
    bad = np.isnan(lo) | np.isnan(hi)
    if np.any(bad):
        lo = np.where(bad, -np.inf, lo)
        hi = np.where(bad, np.inf, hi)
    return lo, hi


@dataclass
class ComplexBox:
    re_lo: np.ndarray
    re_hi: np.ndarray
    im_lo: np.ndarray
    im_hi: np.ndarray

    @classmethod
    def from_bounds(cls, re_lo, re_hi, im_lo, im_hi) -> "ComplexBox":
        arrs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (re_lo, re_hi, im_lo, im_hi)))
        return cls(*(np.array(a) for a in arrs))

    @classmethod
    def point(cls, z) -> "ComplexBox":
        z = np.asarray(z, dtype=complex)
        return cls.from_bounds(z.real, z.real, z.imag, z.imag)

    @property
    def shape(self):
        return self.re_lo.shape

    def magnitude_bound(self) -> np.ndarray:
        """Upper bound for ``|w|`` over each box: the largest corner modulus."""
        mr = np.maximum(np.abs(self.re_lo), np.abs(self.re_hi))
        mi = np.maximum(np.abs(self.im_lo), np.abs(self.im_hi))
        return _up(np.hypot(mr, mi))

    def contains(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return ((self.re_lo <= w.real) & (w.real <= self.re_hi)
                & (self.im_lo <= w.imag) & (w.imag <= self.im_hi))

    def contains_zero(self) -> np.ndarray:
        return (self.re_lo <= 0) & (self.re_hi >= 0) & (self.im_lo <= 0) & (self.im_hi >= 0)


# -- real interval helpers (pairs of arrays) ---------------------------------

def _imul(al, ah, bl, bh):
    p1, p2, p3, p4 = al * bl, al * bh, ah * bl, ah * bh
    # 0 * inf -> nan; such a product is treated as unbounded by _pad
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    # round outward now: a later subtraction may cancel the leading digits
    return _down(lo), _up(hi)


def _isqr(l, h):
    l2, h2 = l * l, h * h
    hi = np.maximum(l2, h2)
    lo = np.where((l <= 0) & (h >= 0), 0.0, np.minimum(l2, h2))
    return np.maximum(_down(lo), 0.0), _up(hi)


def _isin(l, h):
    """Range of sin over [l, h]."""
    sl, sh = np.sin(l), np.sin(h)
    lo, hi = np.minimum(sl, sh), np.maximum(sl, sh)
    # first maximiser pi/2 + 2k pi at or after l, first minimiser -pi/2 + 2k pi
    kmax = np.ceil((l - _HALF_PI) / _TWO_PI)
    kmin = np.ceil((l + _HALF_PI) / _TWO_PI)
    hi = np.where(_HALF_PI + _TWO_PI * kmax <= h, 1.0, hi)
    lo = np.where(-_HALF_PI + _TWO_PI * kmin <= h, -1.0, lo)
    wide = (h - l >= _TWO_PI) | (np.maximum(np.abs(l), np.abs(h)) > _TRIG_ARG_LIMIT)
    lo = np.where(wide, -1.0, lo)
    hi = np.where(wide, 1.0, hi)
    return lo, hi


def _icos(l, h):
    """Range of cos over [l, h]."""
    cl, ch = np.cos(l), np.cos(h)
    lo, hi = np.minimum(cl, ch), np.maximum(cl, ch)
    kmax = np.ceil(l / _TWO_PI)
    kmin = np.ceil((l - np.pi) / _TWO_PI)
    hi = np.where(_TWO_PI * kmax <= h, 1.0, hi)
    lo = np.where(np.pi + _TWO_PI * kmin <= h, -1.0, lo)
    wide = (h - l >= _TWO_PI) | (np.maximum(np.abs(l), np.abs(h)) > _TRIG_ARG_LIMIT)
    lo = np.where(wide, -1.0, lo)
    hi = np.where(wide, 1.0, hi)
    return lo, hi


def _icosh(l, h):
    cl, ch = np.cosh(l), np.cosh(h)
    hi = np.maximum(cl, ch)
    lo = np.where((l <= 0) & (h >= 0), 1.0, np.minimum(cl, ch))
    return lo, hi


# -- box operations ------------------------------------------------------------

def const(value, shape) -> ComplexBox:
    v = complex(value)
    return ComplexBox.from_bounds(np.full(shape, v.real), v.real, v.imag, v.imag)


def add(a: ComplexBox, b: ComplexBox) -> ComplexBox:
    rl, rh = _pad(a.re_lo + b.re_lo, a.re_hi + b.re_hi)
    il, ih = _pad(a.im_lo + b.im_lo, a.im_hi + b.im_hi)
    return ComplexBox(rl, rh, il, ih)


def shift(a: ComplexBox, s: float) -> ComplexBox:
    """``a + s`` for a real constant ``s``."""
    rl, rh = _pad(a.re_lo + s, a.re_hi + s)
    return ComplexBox(rl, rh, a.im_lo.copy(), a.im_hi.copy())


def neg(a: ComplexBox) -> ComplexBox:
    return ComplexBox(-a.re_hi, -a.re_lo, -a.im_hi, -a.im_lo)


def scale(a: ComplexBox, k: float) -> ComplexBox:
    """``k * a`` for a real constant ``k``."""
    rl, rh = sorted_pair(a.re_lo * k, a.re_hi * k)
    il, ih = sorted_pair(a.im_lo * k, a.im_hi * k)
    rl, rh = _pad(rl, rh)
    il, ih = _pad(il, ih)
    return ComplexBox(rl, rh, il, ih)


def sorted_pair(x, y):
    return np.minimum(x, y), np.maximum(x, y)


def mul(a: ComplexBox, b: ComplexBox) -> ComplexBox:
    acl, ach = _imul(a.re_lo, a.re_hi, b.re_lo, b.re_hi)
    bdl, bdh = _imul(a.im_lo, a.im_hi, b.im_lo, b.im_hi)
    adl, adh = _imul(a.re_lo, a.re_hi, b.im_lo, b.im_hi)
    bcl, bch = _imul(a.im_lo, a.im_hi, b.re_lo, b.re_hi)
    rl, rh = _pad(acl - bdh, ach - bdl)
    il, ih = _pad(adl + bcl, adh + bch)
    return ComplexBox(rl, rh, il, ih)


def sqr(a: ComplexBox) -> ComplexBox:
    """``a**2`` with the real part computed without the x*x dependency loss."""
    x2l, x2h = _isqr(a.re_lo, a.re_hi)
    y2l, y2h = _isqr(a.im_lo, a.im_hi)
    xyl, xyh = _imul(a.re_lo, a.re_hi, a.im_lo, a.im_hi)
    rl, rh = _pad(x2l - y2h, x2h - y2l)
    il, ih = _pad(2.0 * xyl, 2.0 * xyh)
    return ComplexBox(rl, rh, il, ih)


def power(a: ComplexBox, n: int) -> ComplexBox:
    if n < 0:
        return recip(power(a, -n))
    if n == 0:
        return const(1.0, a.shape)
    result = None
    base = a
    while True:
        if n & 1:
            result = base if result is None else mul(result, base)
        n >>= 1
        if not n:
            return result
        base = sqr(base)


def recip(a: ComplexBox) -> ComplexBox:
    """``1 / a``; boxes containing zero map to the whole plane.

    Real and imaginary parts of ``1/w`` are harmonic, so their extremes over
    a box lie on its edges; along each edge they are one-variable functions
    with at most two interior critical points, which are enumerated here.
    """
    xl, xh, yl, yh = a.re_lo, a.re_hi, a.im_lo, a.im_hi
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        def _scaled(x, y):
            # divide through by a power of two near max(|x|, |y|) so the
            # squares neither overflow nor underflow; the scaling is exact
            _, e = np.frexp(np.maximum(np.abs(x), np.abs(y)))
            xs, ys = np.ldexp(x, -e), np.ldexp(y, -e)
            return xs, ys, xs * xs + ys * ys, e

        def re_f(x, y):
            xs, _, den, e = _scaled(x, y)
            return np.ldexp(xs / den, -e)

        def im_f(x, y):
            _, ys, den, e = _scaled(x, y)
            return np.ldexp(-ys / den, -e)

        corners = [(xl, yl), (xl, yh), (xh, yl), (xh, yh)]
        re_vals = [re_f(x, y) for x, y in corners]
        im_vals = [im_f(x, y) for x, y in corners]
        base_re = re_vals[0]
        base_im = im_vals[0]

        # re: horizontal edges at x = +-|y0|; vertical edges at y = 0
        for y0 in (yl, yh):
            for sgn in (1.0, -1.0):
                xs = sgn * np.abs(y0)
                ok = (xs >= xl) & (xs <= xh)
                re_vals.append(np.where(ok, re_f(xs, y0), base_re))
        zero_y = (yl <= 0) & (yh >= 0)
        for x0 in (xl, xh):
            re_vals.append(np.where(zero_y, re_f(x0, 0.0 * x0), base_re))

        # im: vertical edges at y = +-|x0|; horizontal edges at x = 0
        for x0 in (xl, xh):
            for sgn in (1.0, -1.0):
                ys = sgn * np.abs(x0)
                ok = (ys >= yl) & (ys <= yh)
                im_vals.append(np.where(ok, im_f(x0, ys), base_im))
        zero_x = (xl <= 0) & (xh >= 0)
        for y0 in (yl, yh):
            im_vals.append(np.where(zero_x, im_f(0.0 * y0, y0), base_im))

        rl = np.minimum.reduce(re_vals)
        rh = np.maximum.reduce(re_vals)
        il = np.minimum.reduce(im_vals)
        ih = np.maximum.reduce(im_vals)
    rl, rh = _pad(rl, rh)
    il, ih = _pad(il, ih)
    z = a.contains_zero()
    if np.any(z):
        rl = np.where(z, -np.inf, rl)
        rh = np.where(z, np.inf, rh)
        il = np.where(z, -np.inf, il)
        ih = np.where(z, np.inf, ih)
    return ComplexBox(rl, rh, il, ih)


def exp(a: ComplexBox) -> ComplexBox:
    with np.errstate(over="ignore", invalid="ignore"):
        ml, mh = np.exp(a.re_lo), np.exp(a.re_hi)
        cl, ch = _icos(a.im_lo, a.im_hi)
        sl, sh = _isin(a.im_lo, a.im_hi)
        rl, rh = _imul(ml, mh, cl, ch)
        il, ih = _imul(ml, mh, sl, sh)
    rl, rh = _pad(rl, rh)
    il, ih = _pad(il, ih)
    return ComplexBox(rl, rh, il, ih)


def sin(a: ComplexBox) -> ComplexBox:
    """``sin(u + iv) = sin u cosh v + i cos u sinh v``."""
    with np.errstate(over="ignore", invalid="ignore"):
        sl, sh = _isin(a.re_lo, a.re_hi)
        cl, ch = _icos(a.re_lo, a.re_hi)
        chl, chh = _icosh(a.im_lo, a.im_hi)
        shl, shh = np.sinh(a.im_lo), np.sinh(a.im_hi)
        rl, rh = _imul(sl, sh, chl, chh)
        il, ih = _imul(cl, ch, shl, shh)
    rl, rh = _pad(rl, rh)
    il, ih = _pad(il, ih)
    return ComplexBox(rl, rh, il, ih)


def abs_real(a: ComplexBox) -> ComplexBox:
    """Analytic continuation of ``|x|``: ``z`` on Re z > 0, ``-z`` on Re z < 0.

    Boxes meeting the imaginary axis are outside the domain of analyticity
    and map to the whole plane.
    """
    pos = a.re_lo > 0
    negv = a.re_hi < 0
    n = neg(a)
    out = ComplexBox(
        np.where(pos, a.re_lo, np.where(negv, n.re_lo, -np.inf)),
        np.where(pos, a.re_hi, np.where(negv, n.re_hi, np.inf)),
        np.where(pos, a.im_lo, np.where(negv, n.im_lo, -np.inf)),
        np.where(pos, a.im_hi, np.where(negv, n.im_hi, np.inf)),
    )
    return out
