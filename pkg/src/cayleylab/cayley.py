"""Unitary deformations along the Cayley path and their diagnostics.

The central object is the map taking a unitary H with eigenphases phi_j to
H(theta) with eigenphases 2*arctan((1-theta)*tan(phi_j/2)): the identity at
theta=1, H itself at theta=0.  A truncated-Taylor alternative (generally
non-unitary) is provided for comparison, plus statistical estimators for the
distance between the deformed and Haar ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularPhase
from .numerics import (
    Complex,
    NATIVE,
    Real,
    SeededRng,
    SpectralDecomposition,
    UnitaryMatrix,
    atan2,
    unitary_eigendecomposition,
)
from .numerics.unitary import PHASE_GUARD


@dataclass(frozen=True)
class EigenMargin:
    """Eigenphase margin beta: spectra must avoid +-pi by at least beta."""

    beta: float
    dim: int = 4

    def __post_init__(self):
        if not 0 < self.beta < np.pi:
            raise ValueError("margin must lie in (0, pi)")

    @property
    def good_probability(self) -> float:
        """Haar lower bound 1 - N*beta/pi for an all-phases-in-margin draw."""
        return max(0.0, 1.0 - self.dim * self.beta / np.pi)


@dataclass(frozen=True)
class TransformKind:
    """Which one-parameter deformation a perturbed family uses."""

    kind: str = "cayley"
    taylor_terms: int = 12

    def __post_init__(self):
        if self.kind not in ("cayley", "truncated-taylor"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "truncated-taylor" and self.taylor_terms < 1:
            raise ValueError("truncated-taylor needs at least one term")


CAYLEY = TransformKind("cayley")


def eigenphase_transform(phi: float, theta: float) -> float:
    """f_theta(phi) = 2 arctan((1-theta) tan(phi/2)); monotone, fixes 0."""
    if abs(phi) >= np.pi:
        raise SingularPhase("eigenphase transform is singular at +-pi")
    return 2.0 * math.atan((1.0 - theta) * math.tan(phi / 2.0))


def margin_good(phases, margin: EigenMargin) -> bool:
    """True iff every phase lies in [-pi + beta, pi - beta]."""
    phases = np.asarray(phases, dtype=float)
    return bool(np.all(np.abs(phases) <= np.pi - margin.beta))


def cayley_eigenvalue_factors(tan_half: Real, thetas: Real) -> Complex:
    """Batched factors (1 + i a)/(1 - i a), a = (1-theta) tan(phi/2).

    Shapes: tan_half (J,), thetas (N,) -> (N, J).  Purely algebraic, so it
    works in any precision mode.
    """
    n = max(tan_half.ncomp, thetas.ncomp)
    t = tan_half.promote(n).reshape(1, -1)
    u = (1.0 - thetas.promote(n)).reshape(-1, 1)
    a = u * t
    a2 = a * a
    den = a2 + 1.0
    return Complex((1.0 - a2) / den, (a * 2.0) / den)


def _phase_real(spec: SpectralDecomposition) -> Real:
    """Eigenphases at working precision (native atan2 + Newton refinement)."""
    lam = spec.eigenvalues
    return atan2(lam.im, lam.re)


def taylor_eigenvalue_factors(spec: SpectralDecomposition, thetas: Real,
                              terms: int) -> tuple[Complex, float]:
    """lambda_j * sum_{k<=K} (-theta * i phi_j)^k / k!, plus the truncation
    error estimate max_j (theta |phi_j|)^{K+1} / (K+1)!."""
    phi = _phase_real(spec)
    n = max(phi.ncomp, thetas.ncomp)
    phi = phi.promote(n).reshape(1, -1)
    th = thetas.promote(n).reshape(-1, 1)
    # z = -i * phi * theta
    zr = Real.zeros((th.shape[0], phi.shape[1]), n)
    zi = -(th * phi)
    z = Complex(zr, zi)
    acc = Complex(Real.from_float(np.ones(zi.shape), n), Real.zeros(zi.shape, n))
    term = acc
    for k in range(1, terms + 1):
        term = term * z * (1.0 / k)
        acc = acc + term
    lam = spec.eigenvalues.promote(n)
    lam = Complex(lam.re.reshape(1, -1), lam.im.reshape(1, -1))
    factors = lam * acc
    phi_max = float(np.max(np.abs(spec.phases))) if spec.phases.size else 0.0
    th_max = float(np.max(np.abs(thetas.to_float())))
    trunc = (th_max * phi_max) ** (terms + 1) / math.factorial(terms + 1)
    return factors, trunc


def assemble_from_factors(spec: SpectralDecomposition, factors: Complex) -> Complex:
    """Sum_j factor_j |psi_j><psi_j|, batched over the leading axis."""
    v = spec.vectors.promote(factors.ncomp)
    out = None
    for j in range(spec.dim):
        col = v[:, j].reshape(-1, 1)
        mj = col * col.conj().reshape(1, -1)  # (dim, dim)
        fj = factors[:, j].reshape(-1, 1, 1)
        term = mj * fj  # broadcasts to (N, dim, dim)
        out = term if out is None else out + term
    return out


def transform_spectral(spec: SpectralDecomposition, thetas: Real,
                       kind: TransformKind = CAYLEY):
    """Batched H(theta) for all theta values; returns (matrices, trunc_err)."""
    if kind.kind == "cayley":
        factors = cayley_eigenvalue_factors(spec.tan_half(), thetas)
        trunc = 0.0
    else:
        factors, trunc = taylor_eigenvalue_factors(spec, thetas, kind.taylor_terms)
    return assemble_from_factors(spec, factors), trunc


def cayley_transform(u: UnitaryMatrix, theta: float,
                     spec: SpectralDecomposition | None = None) -> UnitaryMatrix:
    """Spectral Cayley transform H(theta); eigenvectors unchanged.

    Raises SingularPhase if the spectrum touches the +-pi guard band.
    """
    if spec is None:
        spec = unitary_eigendecomposition(u)
    thetas = Real.from_float(np.array([float(theta)]), u.precision.ncomp)
    mats, _ = transform_spectral(spec, thetas, CAYLEY)
    return UnitaryMatrix(mats[0], u.precision, tol_factor=1e4)


def cayley_resolvent(u: UnitaryMatrix, theta: float) -> np.ndarray:
    """Resolvent form (theta I + (2-theta) H) divided by ((2-theta) I + theta H).

    Native-precision cross-check for the spectral route.
    """
    h = u.to_complex128()
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    num = theta * eye + (2.0 - theta) * h
    den = (2.0 - theta) * eye + theta * h
    return num @ np.linalg.inv(den)


def truncated_taylor_transform(u: UnitaryMatrix, theta: float, terms: int,
                               spec: SpectralDecomposition | None = None):
    """H * sum_{k<=K} (-theta log H)^k / k! (generally non-unitary).

    Returns (matrix, truncation_error_estimate); the principal log is taken
    on eigenphases in (-pi, pi).
    """
    if spec is None:
        spec = unitary_eigendecomposition(u)
    if np.any(np.pi - np.abs(spec.phases) < PHASE_GUARD):
        raise SingularPhase("principal log undefined at eigenphase +-pi")
    thetas = Real.from_float(np.array([float(theta)]), u.precision.ncomp)
    factors, trunc = taylor_eigenvalue_factors(spec, thetas, terms)
    return assemble_from_factors(spec, factors)[0], trunc


# ---------------------------------------------------------------------------
# ensemble diagnostics
# ---------------------------------------------------------------------------

def haar_phases_batch(dim: int, count: int, rng: SeededRng) -> np.ndarray:
    """Sorted eigenphase vectors of `count` Haar samples, shape (count, dim)."""
    g = rng.generator()
    z = (g.standard_normal((count, dim, dim))
         + 1j * g.standard_normal((count, dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.einsum("...ii->...i", r)
    q = q * (d / np.abs(d))[:, None, :]
    phases = np.angle(np.linalg.eigvals(q))
    return np.sort(phases, axis=1)


def apply_eigenphase_map(phases: np.ndarray, theta: float) -> np.ndarray:
    return 2.0 * np.arctan((1.0 - theta) * np.tan(phases / 2.0))


@dataclass
class TvEstimate:
    estimate: float
    stderr: float
    bins: int
    samples: int


def eigenphase_tv_estimate(theta: float, dim: int, samples: int, bins: int,
                           rng: SeededRng, bootstrap: int = 100) -> TvEstimate:
    """Histogram TV distance between joint eigenphases of the theta-deformed
    ensemble and Haar; the eigenvector distributions coincide, so the phases
    carry all of the total variation."""
    if samples < 10 ** 3:
        raise ValueError("need at least 1e3 samples")
    if bins < 20:
        raise ValueError("need at least 20 bins per axis")
    a = apply_eigenphase_map(haar_phases_batch(dim, samples, rng.substream(0)), theta)
    b = haar_phases_batch(dim, samples, rng.substream(1))
    edges = [np.linspace(-np.pi, np.pi, bins + 1)] * dim
    ha, _ = np.histogramdd(a, bins=edges)
    hb, _ = np.histogramdd(b, bins=edges)
    est = 0.5 * np.abs(ha / samples - hb / samples).sum()
    boots = np.empty(bootstrap)
    g = rng.substream(2).generator()
    pa = (ha / samples).ravel()
    pb = (hb / samples).ravel()
    for i in range(bootstrap):
        ra = g.multinomial(samples, pa) / samples
        rb = g.multinomial(samples, pb) / samples
        boots[i] = 0.5 * np.abs(ra - rb).sum()
    return TvEstimate(float(est), float(boots.std(ddof=1)), bins, samples)
