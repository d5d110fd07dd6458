"""Dense complex unitaries: Haar sampling and spectral decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..errors import ConvergenceFailure, NonNormalInput, SingularPhase
from .precision import Complex, NATIVE, PrecisionConfig, Real, sqrt
from .rng import SeededRng

PHASE_GUARD = 1e-9  # phases this close to +-pi are rejected by tan-half users


class UnitaryMatrix:
    """Square complex matrix, unitary to within 100*dim*epsilon by default."""

    __slots__ = ("mat", "precision")

    def __init__(self, mat: Complex, precision: PrecisionConfig = NATIVE,
                 check: bool = True, tol_factor: float = 100.0):
        if len(mat.shape) != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("unitary must be square")
        self.mat = mat.promote(precision.ncomp)
        self.precision = precision
        if check:
            defect = self.unitarity_defect()
            tol = tol_factor * self.dim * precision.epsilon
            if defect > max(tol, 1e-300):
                raise NonNormalInput(
                    f"unitarity defect {defect:.3e} exceeds {tol:.3e}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def unitarity_defect(self) -> float:
        """max-norm of U†U - I."""
        g = self.mat.dagger().matmul(self.mat)
        eye = Complex.eye(self.dim, self.mat.ncomp)
        return (g - eye).max_abs()

    def to_complex128(self) -> np.ndarray:
        return self.mat.to_complex128()

    @classmethod
    def from_complex128(cls, z, precision: PrecisionConfig = NATIVE, **kw):
        return cls(Complex.from_complex128(z, precision.ncomp), precision, **kw)

    def matmul(self, other: "UnitaryMatrix", tol_factor: float = 1000.0) -> "UnitaryMatrix":
        return UnitaryMatrix(self.mat.matmul(other.mat), self.precision,
                             tol_factor=tol_factor)


def _mgs_orthonormalize(a: Complex, passes: int = 2) -> Complex:
    """Modified Gram-Schmidt with positive-real diagonal of R (in place logic,
    returns a new matrix).  Two passes give orthogonality at working precision."""
    dim = a.shape[0]
    cols = [a[:, j] for j in range(dim)]
    for _ in range(passes):
        for j in range(dim):
            v = cols[j]
            for k in range(j):
                q = cols[k]
                proj = (q.conj() * v).sum()
                v = v - q * proj
            norm = sqrt(v.abs2().sum())
            cols[j] = Complex(v.re / norm, v.im / norm)
    out = Complex.zeros((dim, dim), a.ncomp)
    for j, col in enumerate(cols):
        out.setitem((slice(None), j), col)
    return out


def haar_unitary(dim: int, rng: SeededRng,
                 precision: PrecisionConfig = NATIVE) -> UnitaryMatrix:
    """Haar sample: complex Ginibre then QR with positive-real R diagonal.

    The phase convention makes the sample exactly Haar, not merely unitary.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    g = rng.generator()
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / np.sqrt(2.0)
    if precision.ncomp == 1:
        q, r = scipy.linalg.qr(z)
        d = np.diag(r)
        q = q * (d / np.abs(d))
        return UnitaryMatrix.from_complex128(q, precision)
    # extended modes: MGS normalization has real positive R diagonal by
    # construction, which is exactly the Haar phase convention.
    a = Complex.from_complex128(z, precision.ncomp)
    return UnitaryMatrix(_mgs_orthonormalize(a), precision)


@dataclass
class SpectralDecomposition:
    """Eigenphases in (-pi, pi] (sorted ascending) and orthonormal eigenvectors.

    ``eigenvalues`` carries the unit-circle values at working precision;
    ``phases`` is their float64 rendering used for margins and reports.
    """

    phases: np.ndarray
    eigenvalues: Complex
    vectors: Complex
    precision: PrecisionConfig = field(default=NATIVE)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def reconstruct(self) -> Complex:
        """Sum_j lambda_j |psi_j><psi_j|."""
        v = self.vectors
        lam = self.eigenvalues
        out = None
        for j in range(self.dim):
            col = v[:, j].reshape(-1, 1)
            term = (col * col.conj().reshape(1, -1)) * lam[j]
            out = term if out is None else out + term
        return out

    def reconstruction_error(self, u: UnitaryMatrix) -> float:
        return (self.reconstruct() - u.mat).max_abs()

    def tan_half(self) -> Real:
        """tan(phi_j / 2) = Im(lambda) / (1 + Re(lambda)), algebraically.

        Raises SingularPhase when any phase is within the guard of +-pi.
        """
        if np.any(np.pi - np.abs(self.phases) < PHASE_GUARD):
            raise SingularPhase("eigenphase within guard of +-pi; resample the gate")
        lam = self.eigenvalues
        return lam.im / (lam.re + 1.0)


def unitary_eigendecomposition(u: UnitaryMatrix, tol: float | None = None
                               ) -> SpectralDecomposition:
    """Spectral decomposition of a unitary, sorted by eigenphase.

    Native mode reduces to the complex Schur form (QR iteration with
    deflation); extended modes refine with a complex Jacobi iteration on a
    Hermitian combination of (U+U†)/2 and (U-U†)/(2i), warm-started from the
    native factorization.
    """
    precision = u.precision
    if tol is None:
        tol = 1e-12 if precision.ncomp == 1 else 1e4 * precision.epsilon
    defect = u.unitarity_defect()
    if defect > max(tol, 100 * u.dim * precision.epsilon):
        raise NonNormalInput(f"input not unitary to tol: defect {defect:.3e}")

    z = u.to_complex128()
    try:
        t, zv = scipy.linalg.schur(z, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise ConvergenceFailure(str(exc)) from exc

    if precision.ncomp == 1:
        eigvals = np.diag(t)
        phases = np.angle(eigvals)
        order = np.argsort(phases, kind="stable")
        phases = phases[order]
        vectors = Complex.from_complex128(zv[:, order])
        lam = Complex.from_complex128(eigvals[order])
        dec = SpectralDecomposition(phases, lam, vectors, precision)
    else:
        dec = _eigendecomposition_extended(u, zv, tol)

    err = dec.reconstruction_error(u)
    if err > max(tol, 1e4 * u.dim * precision.epsilon):
        raise ConvergenceFailure(
            f"reconstruction error {err:.3e} exceeds tolerance")
    return dec


_ALPHAS = (0.7390851332151607, 1.8214828, 2.5301234, 0.3183099)


def _eigendecomposition_extended(u: UnitaryMatrix, z0: np.ndarray,
                                 tol: float) -> SpectralDecomposition:
    ncomp = u.precision.ncomp
    dim = u.dim
    umat = u.mat
    a = (umat + umat.dagger()) * 0.5
    b = (umat - umat.dagger()) * (-0.5j)
    v0 = _mgs_orthonormalize(Complex.from_complex128(z0, ncomp))

    last_off = np.inf
    for alpha in _ALPHAS:
        c = a * float(np.cos(alpha)) + b * float(np.sin(alpha))
        v = v0
        m = v.dagger().matmul(c).matmul(v)
        scale = max(m.max_abs(), 1.0)
        target = 4.0 * dim * u.precision.epsilon * scale
        ok = False
        for _ in range(12):
            off = _max_offdiag(m)
            if off <= target:
                ok = True
                break
            m, v = _jacobi_sweep(m, v)
        if not ok:
            continue
        d = v.dagger().matmul(umat).matmul(v)
        off_u = _max_offdiag(d)
        if off_u <= max(tol, 100.0 * dim * u.precision.epsilon):
            idx = np.arange(dim)
            eigvals = d[idx, idx]
            phases = np.angle(eigvals.to_complex128())
            order = np.argsort(phases, kind="stable")
            perm = Complex.from_complex128(
                np.eye(dim, dtype=np.complex128)[:, order], ncomp)
            return SpectralDecomposition(
                phases[order], eigvals[order], v.matmul(perm), u.precision)
        last_off = min(last_off, off_u)
    raise ConvergenceFailure(
        f"jacobi refinement left off-diagonal mass {last_off:.3e}")


def _max_offdiag(m: Complex) -> float:
    z = np.abs(m.to_complex128())
    np.fill_diagonal(z, 0.0)
    return float(z.max()) if z.size else 0.0


def _jacobi_sweep(m: Complex, v: Complex):
    """One cyclic sweep of complex Jacobi rotations on Hermitian m."""
    dim = m.shape[0]
    for p in range(dim - 1):
        for q in range(p + 1, dim):
            beta = m[p, q]
            absb_f = float(np.abs(beta.to_complex128()))
            if absb_f == 0.0:
                continue
            absb = sqrt(beta.abs2())
            app = m[p, p].re
            aqq = m[q, q].re
            tau = (aqq - app) / (absb * 2.0)
            sgn = tau.sign()
            sgn = np.where(sgn == 0, 1.0, sgn)
            t = Real.from_float(sgn, tau.ncomp) / (tau.abs() + sqrt(tau * tau + 1.0))
            cth = 1.0 / sqrt(t * t + 1.0)
            sth = t * cth
            w = beta / absb  # unit modulus
            r = Complex.eye(dim, m.ncomp)
            r.setitem((p, p), Complex(cth, Real.zeros((), cth.ncomp)))
            r.setitem((q, q), Complex(cth, Real.zeros((), cth.ncomp)))
            r.setitem((p, q), w * sth)
            r.setitem((q, p), -(w.conj() * sth))
            m = r.dagger().matmul(m).matmul(r)
            v = v.matmul(r)
    return m, v
