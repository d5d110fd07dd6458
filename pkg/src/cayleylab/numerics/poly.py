"""Real polynomials: barycentric interpolation, least-squares fits, bases.

Polynomials live either in the monomial basis (plain powers of x, used only
for coefficient-sum bounds) or in the Chebyshev basis on a stated interval
(the default everywhere conditioning matters).  Basis conversion is done in
exact rational arithmetic with a single final rounding per coefficient, so
round-trips are clean in every precision mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DuplicateNode, IllConditioned
from .precision import Complex, NATIVE, PrecisionConfig, Real, _pair


def _as_real(x, ncomp=1):
    if isinstance(x, Real):
        return x.promote(max(x.ncomp, ncomp))
    return Real.from_float(np.asarray(x, dtype=float), ncomp)


def _cheb_u(x: Real, interval) -> Real:
    a, b = interval
    return (x * 2.0 - (a + b)) / (b - a)


def chebyshev_design(x: Real, degree: int, interval=(-1.0, 1.0)) -> Real:
    """Design matrix T_k(u(x)), k = 0..degree, shape (N, degree+1)."""
    u = _cheb_u(x, interval)
    cols = [Real.from_float(np.ones(x.shape), x.ncomp), u]
    for _ in range(2, degree + 1):
        cols.append(u * cols[-1] * 2.0 - cols[-2])
    cols = cols[: degree + 1]
    return Real.stack(cols, axis=-1)


def monomial_design(x: Real, degree: int) -> Real:
    cols = [Real.from_float(np.ones(x.shape), x.ncomp)]
    for _ in range(degree):
        cols.append(cols[-1] * x)
    return Real.stack(cols, axis=-1)


@dataclass
class RealPolynomial:
    """Degree-d polynomial in a declared basis.

    basis "monomial": p(x) = sum c_k x^k (natural interval [0, 1]);
    basis "chebyshev": p(x) = sum c_k T_k(u), u = (2x - a - b)/(b - a).
    """

    coefficients: Real
    basis: str = "chebyshev"
    interval: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.basis not in ("chebyshev", "monomial"):
            raise ValueError(f"unknown basis {self.basis!r}")
        self.coefficients = _as_real(self.coefficients)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def ncomp(self) -> int:
        return self.coefficients.ncomp

    def __call__(self, x):
        x = _as_real(x, self.ncomp)
        c = self.coefficients.promote(max(self.ncomp, x.ncomp))
        if self.basis == "monomial":
            out = c[self.degree].broadcast_to(x.shape)
            for k in range(self.degree - 1, -1, -1):
                out = out * x + c[k]
            return out
        u = _cheb_u(x, self.interval)
        bk1 = Real.zeros(x.shape, c.ncomp)
        bk2 = Real.zeros(x.shape, c.ncomp)
        for k in range(self.degree, 0, -1):
            bk = u * bk1 * 2.0 - bk2 + c[k]
            bk2, bk1 = bk1, bk
        return u * bk1 - bk2 + c[0]

    # -- exact basis conversion ---------------------------------------------

    def _coeff_fractions(self):
        out = []
        for k in range(self.degree + 1):
            f = Fraction(0)
            for comp in self.coefficients.c:
                f += Fraction(float(np.asarray(comp)[k]))
            out.append(f)
        return out

    def to_basis(self, basis: str, interval=None) -> "RealPolynomial":
        """Convert basis/interval exactly (Fractions), round once at the end."""
        if interval is None:
            interval = self.interval if basis == "chebyshev" else (0.0, 1.0)
        mono = self._to_monomial_fractions()
        if basis == "monomial":
            coeffs = mono
        else:
            coeffs = _monomial_to_chebyshev_fractions(mono, interval)
        return RealPolynomial(_fractions_to_real(coeffs, self.ncomp), basis, interval)

    def _to_monomial_fractions(self):
        cf = self._coeff_fractions()
        if self.basis == "monomial":
            return cf
        a, b = Fraction(float(self.interval[0])), Fraction(float(self.interval[1]))
        alpha = -(a + b) / (b - a)
        beta = Fraction(2) / (b - a)
        t_prev = [Fraction(1)]
        t_cur = [alpha, beta]
        acc = [Fraction(0)] * (self.degree + 1)
        _acc_add(acc, t_prev, cf[0])
        if self.degree >= 1:
            _acc_add(acc, t_cur, cf[1])
        for k in range(2, self.degree + 1):
            t_next = _poly_lin_mul(t_cur, alpha, beta, scale=2)
            _acc_sub(t_next, t_prev)
            t_prev, t_cur = t_cur, t_next
            _acc_add(acc, t_cur, cf[k])
        return acc

    def coefficient_sum(self) -> float:
        """sum |a_i| in the monomial rendering on [-1, 1] (bound checks)."""
        mono = self.to_basis("monomial") if self.basis != "monomial" else self
        return float(np.sum(np.abs(mono.coefficients.to_float())))


def _acc_add(acc, poly, scale):
    for i, c in enumerate(poly):
        acc[i] += c * scale


def _acc_sub(poly, other):
    for i, c in enumerate(other):
        poly[i] -= c


def _poly_lin_mul(poly, alpha, beta, scale=1):
    """scale * (alpha + beta x) * poly, as Fraction lists."""
    out = [Fraction(0)] * (len(poly) + 1)
    for i, c in enumerate(poly):
        out[i] += scale * alpha * c
        out[i + 1] += scale * beta * c
    return out


def _monomial_to_chebyshev_fractions(mono, interval):
    a, b = Fraction(float(interval[0])), Fraction(float(interval[1]))
    # substitute x = ((b-a) u + (a+b)) / 2 exactly, collecting powers of u
    p = (b - a) / 2
    q = (a + b) / 2
    d = len(mono) - 1
    upoly = [Fraction(0)] * (d + 1)
    pw = [Fraction(1)]  # (q + p u)^k
    for k, c in enumerate(mono):
        for i, t in enumerate(pw):
            upoly[i] += c * t
        if k < d:
            pw = _poly_lin_mul(pw, q, p)
    # u^n -> Chebyshev via u*T_k = (T_{k+1} + T_{k-1})/2, Horner-style
    cheb = [Fraction(0)] * (d + 1)
    for n in range(d, -1, -1):
        cheb = _cheb_mul_u(cheb)
        cheb[0] += upoly[n]
    return cheb


def _cheb_mul_u(cheb):
    """u * (sum c_k T_k) via u T_k = (T_{k+1} + T_{k-1})/2, u T_0 = T_1."""
    out = [Fraction(0)] * len(cheb)
    for k, c in enumerate(cheb):
        if c == 0:
            continue
        if k == 0:
            if len(out) > 1:
                out[1] += c
        else:
            out[k - 1] += c / 2
            if k + 1 < len(out):
                out[k + 1] += c / 2
    return out


def _fractions_to_real(fracs, ncomp):
    comps = [np.zeros(len(fracs)) for _ in range(ncomp)]
    for i, f in enumerate(fracs):
        rem = f
        for c in comps:
            h = float(rem)
            c[i] = h
            rem = rem - Fraction(h)
    return Real(tuple(comps))


# ---------------------------------------------------------------------------
# barycentric interpolation / extrapolation
# ---------------------------------------------------------------------------

def lagrange_extrapolate(points, target):
    """Value at ``target`` of the unique interpolant through the points.

    Uses the second barycentric form, which is valid outside the node
    interval; |points| = d+1 determines the degree d.
    """
    xs, ys = _split_points(points)
    n = xs.shape[0]
    t = _as_real(target, xs.ncomp)
    # barycentric weights w_i = 1 / prod_{j != i} (x_i - x_j)
    num = None
    den = None
    for i in range(n):
        w = Real.from_float(1.0, xs.ncomp)
        for j in range(n):
            if j == i:
                continue
            diff = xs[i] - xs[j]
            if diff.sign() == 0:
                raise DuplicateNode(f"nodes {i} and {j} coincide")
            w = w / diff
        dt = t - xs[i]
        if dt.sign() == 0:
            return ys[i]
        term = w / dt
        num = term * ys[i] if num is None else num + term * ys[i]
        den = term if den is None else den + term
    return num / den


def _split_points(points):
    if (isinstance(points, tuple) and len(points) == 2
            and isinstance(points[0], (Real, np.ndarray, list))):
        xs, ys = points
        return _as_real(xs), _as_real(ys)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if xs and isinstance(xs[0], Real):
        return Real.stack(xs), Real.stack([_as_real(y) for y in ys])
    return _as_real(np.asarray(xs, dtype=float)), _as_real(np.asarray(ys, dtype=float))


# ---------------------------------------------------------------------------
# least squares with iterative refinement
# ---------------------------------------------------------------------------

@dataclass
class PolyFit:
    polynomial: RealPolynomial
    residuals: Real
    max_residual: float
    condition: float


def lstsq_refined(design: Real, y: Real, weights=None, iterations: int = 4) -> Real:
    """Least-squares solve with float64 factorization and working-precision
    residual refinement; accurate to the working precision of the data."""
    a_hi = design.to_float()
    w = np.ones(a_hi.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    ws = np.sqrt(w)
    aw = a_hi * ws[:, None]
    c, *_ = np.linalg.lstsq(aw, y.to_float() * ws, rcond=None)
    coeff = Real.from_float(c, design.ncomp)
    if design.ncomp > 1:
        for _ in range(iterations):
            r = y - _design_apply(design, coeff)
            dc, *_ = np.linalg.lstsq(aw, r.to_float() * ws, rcond=None)
            coeff = coeff + Real.from_float(dc, design.ncomp)
    return coeff


def _design_apply(design: Real, coeff: Real) -> Real:
    out = None
    k = design.shape[1]
    for t in range(k):
        term = design[:, t] * coeff[t]
        out = term if out is None else out + term
    return out


def poly_fit(points, degree: int, basis: str = "chebyshev", interval=None,
             precision: PrecisionConfig = NATIVE) -> PolyFit:
    """Least-squares fit in the requested basis; residuals reported.

    Raises IllConditioned when the design matrix condition estimate exceeds
    1/epsilon of the working precision.
    """
    xs, ys = _split_points(points)
    xs = xs.promote(precision.ncomp)
    ys = ys.promote(precision.ncomp)
    if xs.shape[0] < degree + 1:
        raise ValueError("need at least degree+1 points")
    if interval is None:
        xf = xs.to_float()
        interval = (float(xf.min()), float(xf.max()))
        if basis == "monomial":
            interval = (0.0, 1.0)
    if basis == "chebyshev":
        design = chebyshev_design(xs, degree, interval)
    else:
        design = monomial_design(xs, degree)
    cond = float(np.linalg.cond(design.to_float()))
    if cond > 1.0 / precision.epsilon:
        raise IllConditioned(f"design condition {cond:.3e} exceeds 1/epsilon")
    coeff = lstsq_refined(design, ys)
    poly = RealPolynomial(coeff, basis, interval)
    residuals = ys - _design_apply(design, coeff)
    max_res = float(np.max(np.abs(residuals.to_float()))) if residuals.size else 0.0
    return PolyFit(poly, residuals, max_res, cond)


def chebyshev_nodes(count: int, interval=(-1.0, 1.0)) -> np.ndarray:
    """Chebyshev points of the first kind, ascending."""
    a, b = interval
    k = np.arange(count)
    u = np.cos((2 * k + 1) * np.pi / (2 * count))
    return np.sort((u + 1.0) * 0.5 * (b - a) + a)


def chebyshev_t_value(degree: int, x) -> np.ndarray:
    """T_d(x) for |x| possibly > 1 (three-term recurrence, float64)."""
    x = np.asarray(x, dtype=float)
    if degree == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = x.copy()
    for _ in range(degree - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur
