"""The known denominator Q(theta) and the numerator's polynomial structure.

Q(theta) = prod over pad gates and eigenphases of (1 + (1-theta)^2 tan^2(phi/2))
is independent of the Feynman path and of the noise trajectory, so
P(theta) = Pr[0^n](C(theta)) * Q(theta) is a polynomial whose degree is
bounded by the architecture (8m for two-qubit circuits).  Q(1) = 1 exactly:
at theta = 1 every factor is the literal float 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .circuits import PerturbedFamily
from .errors import SingularPhase
from .numerics import (
    NATIVE,
    PrecisionConfig,
    Real,
    format_real,
    poly_fit,
)
from .numerics.poly import chebyshev_nodes
from .simulator import NoiseModel, family_output_probs, output_prob


@dataclass
class DenominatorSpec:
    """Eigenphase data of the pad, ready for batched Q evaluation."""

    tan_half: Real                 # all tan(phi/2) values, flattened
    phases: np.ndarray             # float rendering, flattened
    precision: PrecisionConfig = field(default=NATIVE)

    @classmethod
    def from_pad_seed(cls, seed, precision: PrecisionConfig = NATIVE):
        parts = [spec.tan_half() for spec in seed.spectra]
        tan_half = Real.concatenate([p.reshape(-1) for p in parts])
        phases = np.concatenate([spec.phases for spec in seed.spectra])
        if np.any(np.abs(phases) >= np.pi):
            raise SingularPhase("pad spectrum touches +-pi")
        return cls(tan_half, phases, precision)

    def q_values(self, thetas: Real) -> Real:
        """Q at every theta; pairwise compensated product over the factors."""
        n = max(thetas.ncomp, self.tan_half.ncomp)
        u = (1.0 - thetas.promote(n)).reshape(-1, 1)
        t = self.tan_half.promote(n).reshape(1, -1)
        a = u * t
        factors = a * a + 1.0          # (N, J), each >= 1; exactly 1 at theta=1
        return _pairwise_product(factors)

    def q_at(self, theta: float) -> Real:
        th = Real.from_float(np.array([float(theta)]), self.precision.ncomp)
        return self.q_values(th)[0]

    def k_bound(self, thetas: Real) -> float:
        """K = max Q over the grid (exact from the seed, not the worst case)."""
        return float(np.max(self.q_values(thetas).to_float()))


def _pairwise_product(factors: Real) -> Real:
    work = factors
    count = work.shape[-1]
    while count > 1:
        half = count // 2
        lo = work[..., :half]
        hi = work[..., half:2 * half]
        merged = lo * hi
        if count % 2:
            merged = Real.concatenate([merged, work[..., 2 * half:count]], axis=-1)
        work = merged
        count = work.shape[-1]
    return work[..., 0]


@dataclass
class NumeratorSamples:
    """Grid samples of P(theta) = oracle(C(theta)) * Q(theta)."""

    thetas: Real
    values: Real
    q_values: Real
    delta: float          # per-point bound delta * K
    k_bound: float
    flags: np.ndarray     # per-point failure flags (oracle errors)

    def to_csv(self) -> str:
        mode = "native-double" if self.thetas.ncomp == 1 else (
            "double-double" if self.thetas.ncomp == 2 else "quad-double")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta", "y", "q", "flag"])
        tf = self.thetas
        for i in range(tf.shape[0]):
            writer.writerow([
                format_real(tf[i], mode),
                format_real(self.values[i], mode),
                format_real(self.q_values[i], mode),
                int(self.flags[i]),
            ])
        return buf.getvalue()


def numerator_samples(family: PerturbedFamily, grid, prob_fn, delta: float,
                      spec: DenominatorSpec | None = None) -> NumeratorSamples:
    """y_i = prob_fn(member(theta_i)) * Q(theta_i); corruption is expected,
    so oracle failures become per-point flags instead of aborts."""
    ncomp = family.precision.ncomp
    thetas = grid if isinstance(grid, Real) else Real.from_float(
        np.asarray(grid, dtype=float), ncomp)
    if spec is None:
        spec = DenominatorSpec.from_pad_seed(family.seed, family.precision)
    q = spec.q_values(thetas)
    count = thetas.shape[0]
    values = Real.zeros((count,), max(ncomp, q.ncomp))
    flags = np.zeros(count, dtype=bool)
    for i in range(count):
        theta = float(thetas.to_float()[i])
        try:
            p = prob_fn(family.member(theta))
        except Exception:
            flags[i] = True
            continue
        if not isinstance(p, Real):
            p = Real.from_float(float(p), ncomp)
        values.setitem((i,), p * q[i])
    k = float(np.max(q.to_float()))
    return NumeratorSamples(thetas, values, q, delta * k, k, flags)


def numerator_samples_batched(family: PerturbedFamily, grid,
                              delta: float, noise: NoiseModel | None = None,
                              spec: DenominatorSpec | None = None
                              ) -> NumeratorSamples:
    """Batched exact-simulator variant (the pipelines' fast path)."""
    ncomp = family.precision.ncomp
    thetas = grid if isinstance(grid, Real) else Real.from_float(
        np.asarray(grid, dtype=float), ncomp)
    if spec is None:
        spec = DenominatorSpec.from_pad_seed(family.seed, family.precision)
    q = spec.q_values(thetas)
    probs, _ = family_output_probs(family, thetas, noise)
    values = probs * q
    k = float(np.max(q.to_float()))
    flags = np.zeros(thetas.shape[0], dtype=bool)
    return NumeratorSamples(thetas, values, q, delta * k, k, flags)


@dataclass
class DegreeReport:
    degree: int
    passes: bool
    relative_residual: float
    tolerance: float
    max_abs_value: float
    fit_nodes: np.ndarray
    q_bits: bytes          # exact bit pattern of the Q grid (identity checks)


def _chebyshev_subset(grid: np.ndarray, count: int) -> np.ndarray:
    """Indices of grid points closest to the Chebyshev nodes (deduplicated)."""
    nodes = chebyshev_nodes(count, (grid[0], grid[-1]))
    picked: list[int] = []
    for node in nodes:
        i = int(np.argmin(np.abs(grid - node)))
        while i in picked:
            i += 1
        picked.append(i)
    return np.array(sorted(picked), dtype=int)


def verify_rational_degree(family: PerturbedFamily, degree: int | None = None,
                           tol: float = 1e-8, grid_max: float = 0.5,
                           grid_size: int | None = None,
                           noise: NoiseModel | None = None,
                           delta: float = 0.0) -> DegreeReport:
    """Fit a degree-d polynomial to P samples at d+1 Chebyshev-placed nodes
    and check the held-out residual against tol * max|P|."""
    if degree is None:
        degree = family.base.architecture.degree_bound()
    if grid_size is None:
        grid_size = 2 * family.base.architecture.degree_bound() + 3
    if grid_size < degree + 2:
        raise ValueError("need at least degree+2 grid points")
    grid = np.linspace(0.0, grid_max, grid_size)
    samples = numerator_samples_batched(family, grid, delta, noise)
    return degree_check_from_samples(samples, degree, tol)


def degree_check_from_samples(samples: NumeratorSamples, degree: int,
                              tol: float) -> DegreeReport:
    grid = samples.thetas.to_float()
    fit_idx = _chebyshev_subset(grid, degree + 1)
    held = np.setdiff1d(np.arange(grid.shape[0]), fit_idx)
    xs = samples.thetas[fit_idx]
    ys = samples.values[fit_idx]
    interval = (float(grid[0]), float(grid[-1]))
    precision = NATIVE if samples.thetas.ncomp == 1 else (
        PrecisionConfig("double-double") if samples.thetas.ncomp == 2
        else PrecisionConfig("quad-double"))
    fit = poly_fit((xs, ys), degree, "chebyshev", interval, precision)
    predicted = fit.polynomial(samples.thetas[held])
    resid = (predicted - samples.values[held]).abs()
    max_abs = float(np.max(np.abs(samples.values.to_float())))
    rel = float(np.max(resid.to_float())) / max(max_abs, 1e-300)
    return DegreeReport(
        degree=degree,
        passes=bool(rel <= tol),
        relative_residual=rel,
        tolerance=tol,
        max_abs_value=max_abs,
        fit_nodes=fit_idx,
        q_bits=samples.q_values.to_float().tobytes(),
    )
