"""Configurable-precision real and complex arithmetic.

Values are stored as 1, 2 or 4 non-overlapping float64 components per element
(native double, double-double, quad-double).  All kernels are written with
error-free transformations (two_sum / two_prod with Dekker splitting) and work
elementwise on numpy arrays, so extended-precision code vectorizes the same
way ordinary numpy code does.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker split constant

NCOMP = {"native-double": 1, "double-double": 2, "quad-double": 4}
EPSILON = {
    "native-double": 2.0 ** -53,
    "double-double": 2.0 ** -104,
    "quad-double": 2.0 ** -200,
}


@dataclass(frozen=True)
class PrecisionConfig:
    """Arithmetic mode used end-to-end in a run."""

    mode: str = "native-double"

    def __post_init__(self):
        if self.mode not in NCOMP:
            raise ValueError(f"unknown precision mode {self.mode!r}")

    @property
    def ncomp(self) -> int:
        return NCOMP[self.mode]

    @property
    def epsilon(self) -> float:
        """Unit roundoff of the mode."""
        return EPSILON[self.mode]


NATIVE = PrecisionConfig("native-double")
DOUBLE_DOUBLE = PrecisionConfig("double-double")
QUAD_DOUBLE = PrecisionConfig("quad-double")


# ---------------------------------------------------------------------------
# error-free transformations (scalar or ndarray)
# ---------------------------------------------------------------------------

def two_sum(a, b):
    """s, e with s = fl(a+b) and s + e == a + b exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    """two_sum assuming |a| >= |b|."""
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    """p, e with p = fl(a*b) and p + e == a*b exactly (Dekker split)."""
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


# ---------------------------------------------------------------------------
# double-double kernels on raw component pairs
# ---------------------------------------------------------------------------

def _dd_add(x0, x1, y0, y1):
    s0, e0 = two_sum(x0, y0)
    s1, e1 = two_sum(x1, y1)
    e0 = e0 + s1
    s0, e0 = quick_two_sum(s0, e0)
    e0 = e0 + e1
    return quick_two_sum(s0, e0)


def _dd_mul(x0, x1, y0, y1):
    p, e = two_prod(x0, y0)
    e = e + (x0 * y1 + x1 * y0)
    return quick_two_sum(p, e)


def _dd_mul_f(x0, x1, f):
    p, e = two_prod(x0, f)
    e = e + x1 * f
    return quick_two_sum(p, e)


def _dd_div(x0, x1, y0, y1):
    q0 = x0 / y0
    p0, p1 = _dd_mul_f(y0, y1, q0)
    r0, r1 = _dd_add(x0, x1, -p0, -p1)
    q1 = r0 / y0
    p0, p1 = _dd_mul_f(y0, y1, q1)
    r0, r1 = _dd_add(r0, r1, -p0, -p1)
    q2 = r0 / y0
    s0, s1 = quick_two_sum(q0, q1)
    return _dd_add(s0, s1, q2, np.zeros_like(q2))


# ---------------------------------------------------------------------------
# quad-double kernels: term lists compressed by VecSum passes
# ---------------------------------------------------------------------------

def _sort_desc(parts):
    """Exact elementwise reordering by decreasing magnitude (zeros last)."""
    stack = np.stack(np.broadcast_arrays(*parts))
    order = np.argsort(-np.abs(stack), axis=0, kind="stable")
    stack = np.take_along_axis(stack, order, axis=0)
    return [stack[i] for i in range(stack.shape[0])]


def _vec_sum(parts, passes=4, sort=True):
    """Error-free compression of a term list; the sum is preserved exactly.

    Terms are ordered by decreasing magnitude before each two_sum sweep
    (reordering is exact), so compression quality does not depend on the
    incoming term order and zero components sink to the tail.
    """
    parts = list(parts)
    n = len(parts)
    for _ in range(passes):
        if sort and n > 2:
            parts = _sort_desc(parts)
        for i in range(n - 2, -1, -1):
            parts[i], parts[i + 1] = two_sum(parts[i], parts[i + 1])
    if sort and n > 2:
        parts = _sort_desc(parts)
    return parts


def _qd_renorm(terms):
    parts = _vec_sum(terms)
    out = parts[:4]
    while len(out) < 4:
        out.append(np.zeros_like(np.asarray(terms[0], dtype=float)))
    return tuple(out)


def _qd_add(x, y):
    return _qd_renorm(list(x) + list(y))


def _qd_mul(x, y):
    terms = []
    for i in range(4):
        for j in range(4):
            if i + j <= 3:
                p, e = two_prod(x[i], y[j])
                terms.append(p)
                terms.append(e)
            elif i + j == 4:
                terms.append(x[i] * y[j])
    return _qd_renorm(terms)


def _qd_neg(x):
    return tuple(-c for c in x)


def _qd_mul_f(x, f):
    terms = []
    for i in range(4):
        p, e = two_prod(x[i], f)
        terms.append(p)
        if i < 3:
            terms.append(e)
    return _qd_renorm(terms)


def _qd_div(x, y):
    q = []
    r = x
    for _ in range(5):
        qi = r[0] / y[0]
        q.append(qi)
        r = _qd_add(r, _qd_neg(_qd_mul_f(y, qi)))
    return _qd_renorm(q)


# ---------------------------------------------------------------------------
# Real: multi-component float array
# ---------------------------------------------------------------------------

def _as_array(x):
    return np.asarray(x, dtype=np.float64)


class Real:
    """Real array with 1, 2 or 4 float64 components per element.

    Immutable by convention: operations return new instances.  Component 0 is
    the leading (rounded) value; trailing components hold the residual.
    """

    __slots__ = ("c",)

    def __init__(self, comps):
        self.c = tuple(comps)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_float(cls, x, ncomp=1):
        x = _as_array(x)
        return cls((x,) + tuple(np.zeros_like(x) for _ in range(ncomp - 1)))

    @classmethod
    def zeros(cls, shape, ncomp=1):
        return cls(tuple(np.zeros(shape) for _ in range(ncomp)))

    @classmethod
    def from_decimal_string(cls, s, ncomp=2):
        """Round a decimal literal into ncomp components (exact cascade)."""
        with decimal.localcontext() as ctx:
            ctx.prec = 80
            rem = decimal.Decimal(s)
            comps = []
            for _ in range(ncomp):
                h = float(rem)
                comps.append(h)
                rem = rem - decimal.Decimal(h)
        return cls(tuple(_as_array(c) for c in comps))

    # -- bookkeeping ---------------------------------------------------------

    @property
    def ncomp(self):
        return len(self.c)

    @property
    def shape(self):
        return np.shape(self.c[0])

    @property
    def size(self):
        return np.size(self.c[0])

    @property
    def hi(self):
        return self.c[0]

    def to_float(self):
        """Collapse to float64 (sum of components)."""
        out = self.c[-1].copy() if self.ncomp > 1 else np.asarray(self.c[0])
        for comp in self.c[-2::-1]:
            out = out + comp
        return out

    def promote(self, ncomp):
        if ncomp < self.ncomp:
            raise ValueError("cannot demote without rounding; use round_to")
        if ncomp == self.ncomp:
            return self
        pad = tuple(np.zeros_like(self.c[0]) for _ in range(ncomp - self.ncomp))
        return Real(self.c + pad)

    def round_to(self, ncomp):
        if ncomp >= self.ncomp:
            return self.promote(ncomp)
        parts = _vec_sum(list(self.c))
        return Real(tuple(parts[:ncomp]))

    def copy(self):
        return Real(tuple(np.array(comp, copy=True) for comp in self.c))

    # -- shape manipulation --------------------------------------------------

    def reshape(self, *shape):
        return Real(tuple(np.reshape(comp, shape) for comp in self.c))

    def __getitem__(self, idx):
        return Real(tuple(comp[idx] for comp in self.c))

    def setitem(self, idx, value):
        """In-place element assignment (used while building matrices)."""
        value = _coerce(value, self.ncomp)
        for mine, theirs in zip(self.c, value.c):
            mine[idx] = theirs

    @classmethod
    def stack(cls, items, axis=0):
        n = max(r.ncomp for r in items)
        items = [r.promote(n) for r in items]
        return cls(tuple(np.stack([r.c[k] for r in items], axis=axis) for k in range(n)))

    @classmethod
    def concatenate(cls, items, axis=0):
        n = max(r.ncomp for r in items)
        items = [r.promote(n) for r in items]
        return cls(tuple(np.concatenate([r.c[k] for r in items], axis=axis) for k in range(n)))

    def broadcast_to(self, shape):
        return Real(tuple(np.broadcast_to(comp, shape) for comp in self.c))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        a, b = _pair(self, other)
        n = a.ncomp
        if n == 1:
            return Real((a.c[0] + b.c[0],))
        if n == 2:
            return Real(_dd_add(a.c[0], a.c[1], b.c[0], b.c[1]))
        return Real(_qd_add(a.c, b.c))

    __radd__ = __add__

    def __neg__(self):
        return Real(tuple(-comp for comp in self.c))

    def __sub__(self, other):
        a, b = _pair(self, other)
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = _pair(self, other)
        n = a.ncomp
        if n == 1:
            return Real((a.c[0] * b.c[0],))
        if n == 2:
            return Real(_dd_mul(a.c[0], a.c[1], b.c[0], b.c[1]))
        return Real(_qd_mul(a.c, b.c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = _pair(self, other)
        n = a.ncomp
        if n == 1:
            return Real((a.c[0] / b.c[0],))
        if n == 2:
            return Real(_dd_div(a.c[0], a.c[1], b.c[0], b.c[1]))
        return Real(_qd_div(a.c, b.c))

    def __rtruediv__(self, other):
        return _coerce(other, self.ncomp) / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise TypeError("only nonnegative integer powers")
        out = Real.from_float(np.ones(self.shape), self.ncomp)
        base = self
        k = int(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- predicates ----------------------------------------------------------

    def sign(self):
        s = np.sign(self.c[0])
        for comp in self.c[1:]:
            s = np.where(s == 0, np.sign(comp), s)
        return s

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def abs(self):
        neg = self.sign() < 0
        return Real(tuple(np.where(neg, -comp, comp) for comp in self.c))

    # -- reductions ----------------------------------------------------------

    def sum(self, axis=None):
        """Pairwise compensated sum along an axis (deterministic)."""
        if self.ncomp == 1:
            return Real((np.sum(self.c[0], axis=axis),))
        work = self
        if axis is None:
            work = self.reshape(-1)
            axis = 0
        n = work.shape[axis]
        while n > 1:
            half = n // 2
            lo = work.take_axis(slice(0, half), axis)
            hi = work.take_axis(slice(half, 2 * half), axis)
            merged = lo + hi
            if n % 2:
                merged = Real.concatenate(
                    [merged, work.take_axis(slice(2 * half, n), axis)], axis=axis
                )
            work = merged
            n = work.shape[axis]
        return work.take_axis(0, axis)

    def take_axis(self, sl, axis):
        idx = [slice(None)] * len(self.shape)
        idx[axis] = sl
        return self[tuple(idx)]

    def max_abs(self):
        """Largest |element| (selected on collapsed values)."""
        flat = self.abs().reshape(-1)
        return flat[int(np.argmax(flat.to_float()))]

    def dot(self, other):
        return (self * other).sum()

    def __repr__(self):
        return f"Real(ncomp={self.ncomp}, value={self.to_float()!r})"


def _coerce(x, ncomp):
    if isinstance(x, Real):
        return x.promote(ncomp) if x.ncomp < ncomp else x
    return Real.from_float(x, ncomp)


def _pair(a, b):
    if not isinstance(b, Real):
        b = Real.from_float(b, 1)
    n = max(a.ncomp, b.ncomp)
    return a.promote(n) if a.ncomp < n else a, b.promote(n) if b.ncomp < n else b


def sqrt(x: Real) -> Real:
    """Componentwise square root, Newton-refined to the working precision."""
    if x.ncomp == 1:
        return Real((np.sqrt(x.c[0]),))
    s = np.sqrt(x.c[0])
    r = Real.from_float(s, x.ncomp)
    # r <- r + (x - r^2) / (2 r), iterated to quad precision if needed
    for _ in range(1 if x.ncomp == 2 else 2):
        r = r + (x - r * r) / (2.0 * r)
    return r


def nth_root(x: Real, k: int) -> Real:
    """k-th root of a positive value via Newton from the native estimate."""
    if x.ncomp == 1:
        return Real((np.power(x.c[0], 1.0 / k),))
    r = Real.from_float(np.power(x.c[0], 1.0 / k), x.ncomp)
    for _ in range(2 if x.ncomp == 2 else 3):
        r = r - (r ** k - x) / (float(k) * r ** (k - 1))
    return r


# ---------------------------------------------------------------------------
# trigonometry (needed for eigenphases and the truncated-Taylor transform)
# ---------------------------------------------------------------------------

_PI_DIGITS = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899863"


def pi_real(ncomp: int) -> Real:
    return Real.from_decimal_string(_PI_DIGITS, ncomp)


def _sin_cos_reduced(r: Real):
    """Taylor series for |r| <= pi/4."""
    # enough terms for the mode's epsilon at |r| <= pi/4
    nterm = 32 if r.ncomp == 2 else 60
    s = Real.from_float(np.zeros(r.shape), r.ncomp)
    c = Real.from_float(np.zeros(r.shape), r.ncomp)
    term = Real.from_float(np.ones(r.shape), r.ncomp)
    fact = 1.0
    for k in range(nterm):
        if k % 4 == 0:
            c = c + term
        elif k % 4 == 1:
            s = s + term
        elif k % 4 == 2:
            c = c - term
        else:
            s = s - term
        fact = k + 1.0
        term = term * r / fact
    return s, c


def sin_cos(x: Real):
    """sin and cos at working precision via Cody-Waite reduction mod pi/2."""
    if x.ncomp == 1:
        return Real((np.sin(x.c[0]),)), Real((np.cos(x.c[0]),))
    half_pi = pi_real(x.ncomp) * 0.5
    k = np.rint(x.c[0] / half_pi.c[0])
    r = x - half_pi * Real.from_float(k, x.ncomp)
    s, c = _sin_cos_reduced(r)
    q = np.mod(k, 4.0)
    sin_out = [np.where(q == 0, sc, np.where(q == 1, cc, np.where(q == 2, -sc, -cc)))
               for sc, cc in zip(s.c, c.c)]
    cos_out = [np.where(q == 0, cc, np.where(q == 1, -sc, np.where(q == 2, -cc, sc)))
               for sc, cc in zip(s.c, c.c)]
    return Real(tuple(sin_out)), Real(tuple(cos_out))


def atan2(y: Real, x: Real) -> Real:
    """Working-precision atan2 via one Newton correction of the native value."""
    if y.ncomp == 1 and x.ncomp == 1:
        return Real((np.arctan2(y.c[0], x.c[0]),))
    n = max(y.ncomp, x.ncomp)
    y = y.promote(n)
    x = x.promote(n)
    phi0 = Real.from_float(np.arctan2(y.to_float(), x.to_float()), n)
    for _ in range(1 if n == 2 else 2):
        s, c = sin_cos(phi0)
        num = y * c - x * s
        den = x * c + y * s
        phi0 = phi0 + num / den
    return phi0


# ---------------------------------------------------------------------------
# decimal formatting (round-trip printing for extended modes)
# ---------------------------------------------------------------------------

def format_real(x, mode: str = "native-double") -> str:
    """Print with 17 (native) or 35 (extended) significant digits."""
    if isinstance(x, Real):
        comps = [np.asarray(comp).item() for comp in x.c]
    else:
        comps = [float(x)]
    if mode == "native-double" or len(comps) == 1:
        return repr(float(comps[0] if len(comps) == 1 else sum(comps)))
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        total = sum((decimal.Decimal(comp) for comp in comps), decimal.Decimal(0))
        ctx.prec = 35
        return str(+total)


def parse_real(s: str, ncomp: int) -> Real:
    return Real.from_decimal_string(s, ncomp)


# ---------------------------------------------------------------------------
# Complex on top of Real
# ---------------------------------------------------------------------------

class Complex:
    """Complex array with Real re/im parts; same component discipline."""

    __slots__ = ("re", "im")

    def __init__(self, re: Real, im: Real):
        n = max(re.ncomp, im.ncomp)
        self.re = re.promote(n)
        self.im = im.promote(n)

    @classmethod
    def from_complex128(cls, z, ncomp=1):
        z = np.asarray(z, dtype=np.complex128)
        return cls(Real.from_float(z.real, ncomp), Real.from_float(z.imag, ncomp))

    @classmethod
    def zeros(cls, shape, ncomp=1):
        return cls(Real.zeros(shape, ncomp), Real.zeros(shape, ncomp))

    @classmethod
    def eye(cls, dim, ncomp=1):
        return cls.from_complex128(np.eye(dim, dtype=np.complex128), ncomp)

    @property
    def ncomp(self):
        return self.re.ncomp

    @property
    def shape(self):
        return self.re.shape

    def to_complex128(self):
        return self.re.to_float() + 1j * self.im.to_float()

    def promote(self, ncomp):
        return Complex(self.re.promote(ncomp), self.im.promote(ncomp))

    def copy(self):
        return Complex(self.re.copy(), self.im.copy())

    def conj(self):
        return Complex(self.re, -self.im)

    def reshape(self, *shape):
        return Complex(self.re.reshape(*shape), self.im.reshape(*shape))

    def __getitem__(self, idx):
        return Complex(self.re[idx], self.im[idx])

    def setitem(self, idx, value):
        value = _coerce_complex(value, self.ncomp)
        self.re.setitem(idx, value.re)
        self.im.setitem(idx, value.im)

    def __add__(self, other):
        other = _coerce_complex(other, self.ncomp)
        return Complex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Complex(-self.re, -self.im)

    def __sub__(self, other):
        other = _coerce_complex(other, self.ncomp)
        return Complex(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        if isinstance(other, Real):
            return Complex(self.re * other, self.im * other)
        if not isinstance(other, Complex) and not np.iscomplexobj(np.asarray(other)):
            return Complex(self.re * other, self.im * other)
        other = _coerce_complex(other, self.ncomp)
        return Complex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            return Complex(self.re / other, self.im / other)
        other = _coerce_complex(other, self.ncomp)
        den = other.re * other.re + other.im * other.im
        num = self * other.conj()
        return Complex(num.re / den, num.im / den)

    def abs2(self) -> Real:
        return self.re * self.re + self.im * self.im

    def abs(self) -> Real:
        return sqrt(self.abs2())

    def sum(self, axis=None):
        return Complex(self.re.sum(axis), self.im.sum(axis))

    # -- linear algebra (k-loop; dims are small in extended modes) ----------

    def matmul(self, other: "Complex") -> "Complex":
        a, b = self, _coerce_complex(other, self.ncomp)
        if a.ncomp == 1 and b.ncomp == 1:
            return Complex.from_complex128(a.to_complex128() @ b.to_complex128())
        *batch_a, n, k = a.shape
        *batch_b, k2, m = b.shape
        assert k == k2, "inner dimensions must match"
        out = None
        for t in range(k):
            col = a[..., :, t].reshape(*a.shape[:-1], 1)
            row = b[..., t, :].reshape(*b.shape[:-2], 1, m)
            term = col * row
            out = term if out is None else out + term
        return out

    def matvec(self, v: "Complex") -> "Complex":
        a, b = self, _coerce_complex(v, self.ncomp)
        if a.ncomp == 1 and b.ncomp == 1:
            z = np.einsum("...ij,...j->...i", a.to_complex128(), b.to_complex128())
            return Complex.from_complex128(z)
        k = a.shape[-1]
        out = None
        for t in range(k):
            bt = b[..., t]
            bt = bt.reshape(*bt.shape, 1) if bt.shape else bt
            term = a[..., :, t] * bt
            out = term if out is None else out + term
        return out

    def dagger(self) -> "Complex":
        swap = list(range(len(self.shape)))
        swap[-2], swap[-1] = swap[-1], swap[-2]
        return Complex(
            Real(tuple(np.transpose(comp, swap) for comp in self.re.c)),
            Real(tuple(-np.transpose(comp, swap) for comp in self.im.c)),
        )

    def trace(self) -> "Complex":
        idx = np.arange(self.shape[-1])
        return self[..., idx, idx].sum(axis=-1)

    def max_abs(self) -> float:
        z = self.to_complex128()
        return float(np.max(np.abs(z))) if z.size else 0.0

    def __repr__(self):
        return f"Complex(ncomp={self.ncomp}, value={self.to_complex128()!r})"


def _coerce_complex(x, ncomp):
    if isinstance(x, Complex):
        return x.promote(ncomp) if x.ncomp < ncomp else x
    if isinstance(x, Real):
        return Complex(x, Real.zeros(x.shape, x.ncomp)).promote(ncomp)
    z = np.asarray(x)
    if np.iscomplexobj(z):
        return Complex.from_complex128(z, ncomp)
    return Complex(Real.from_float(z, ncomp), Real.from_float(np.zeros_like(np.asarray(z, dtype=float)), ncomp))
