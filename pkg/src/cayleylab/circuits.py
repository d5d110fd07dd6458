"""Circuit architectures, the one-time pad, and theta-perturbed families."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cayley import CAYLEY, EigenMargin, TransformKind, margin_good, transform_spectral
from .errors import ResampleBudgetExceeded, ValidationError
from .numerics import (
    Complex,
    NATIVE,
    PrecisionConfig,
    Real,
    SeededRng,
    SpectralDecomposition,
    UnitaryMatrix,
    format_real,
    haar_unitary,
    parse_real,
    unitary_eigendecomposition,
)

MAX_SLOT_ARITY = 6  # dense gates up to 64x64 (Fourier-sampling U_f)


@dataclass(frozen=True)
class Architecture:
    """Qubit count plus an ordered list of gate slots (tuples of qubits)."""

    n: int
    slots: tuple

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(tuple(s) for s in self.slots))
        if self.m < 1:
            raise ValidationError("architecture needs at least one slot")
        for slot in self.slots:
            if len(slot) < 1 or len(slot) > MAX_SLOT_ARITY:
                raise ValidationError(f"slot arity {len(slot)} unsupported")
            if len(set(slot)) != len(slot):
                raise ValidationError("slot repeats a qubit")
            if any(q < 0 or q >= self.n for q in slot):
                raise ValidationError("slot qubit index out of range")

    @property
    def m(self) -> int:
        return len(self.slots)

    def slot_dim(self, i: int) -> int:
        return 2 ** len(self.slots[i])

    def degree_bound(self) -> int:
        """Polynomial degree bound for Pr*Q: sum over slots of 2*2^arity."""
        return sum(2 * self.slot_dim(i) for i in range(self.m))


def brickwork(n: int, depth: int) -> Architecture:
    """Alternating nearest-neighbor two-qubit layout.

    Odd layers pair (2k, 2k+1), even layers pair (2k+1, 2k+2).
    """
    if n < 2 or depth < 1:
        raise ValidationError("brickwork needs n >= 2, depth >= 1")
    slots = []
    for layer in range(1, depth + 1):
        start = 0 if layer % 2 == 1 else 1
        q = start
        while q + 1 < n:
            slots.append((q, q + 1))
            q += 2
    return Architecture(n, tuple(slots))


class Circuit:
    """Gates (dense complex matrices) assigned to an architecture's slots."""

    __slots__ = ("architecture", "gates", "precision")

    def __init__(self, architecture: Architecture, gates,
                 precision: PrecisionConfig = NATIVE):
        if len(gates) != architecture.m:
            raise ValidationError("one gate per slot required")
        self.architecture = architecture
        self.precision = precision
        mats = []
        for i, g in enumerate(gates):
            mat = g.mat if isinstance(g, UnitaryMatrix) else g
            if not isinstance(mat, Complex):
                mat = Complex.from_complex128(np.asarray(mat, dtype=complex),
                                              precision.ncomp)
            want = architecture.slot_dim(i)
            if mat.shape != (want, want):
                raise ValidationError(
                    f"gate {i} has shape {mat.shape}, slot needs {want}x{want}")
            mats.append(mat.promote(precision.ncomp))
        self.gates = mats

    @property
    def n(self) -> int:
        return self.architecture.n

    @property
    def m(self) -> int:
        return self.architecture.m

    def unitarity_defect(self) -> float:
        worst = 0.0
        for g in self.gates:
            dim = g.shape[0]
            defect = (g.dagger().matmul(g) - Complex.eye(dim, g.ncomp)).max_abs()
            worst = max(worst, defect)
        return worst


# ---------------------------------------------------------------------------
# JSON serialization: {n, slots, gates: [[re, im] row-major ...]}
# ---------------------------------------------------------------------------

def circuit_to_json(circuit: Circuit) -> dict:
    """Native entries serialize as numbers (bit-exact round trip); extended
    modes as 40-significant-digit strings."""
    native = circuit.precision.ncomp == 1
    gates = []
    for g in circuit.gates:
        entries = []
        dim = g.shape[0]
        for i in range(dim):
            for j in range(dim):
                re = g.re[i, j]
                im = g.im[i, j]
                if native:
                    entries.append([float(re.c[0]), float(im.c[0])])
                else:
                    entries.append([_fmt40(re), _fmt40(im)])
        gates.append(entries)
    return {
        "n": circuit.n,
        "slots": [list(s) for s in circuit.architecture.slots],
        "gates": gates,
        "precision": circuit.precision.mode,
    }


def _fmt40(x: Real) -> str:
    import decimal
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        total = sum((decimal.Decimal(float(c)) for c in x.c), decimal.Decimal(0))
        ctx.prec = 40
        return str(+total)


def circuit_from_json(doc: dict) -> Circuit:
    precision = PrecisionConfig(doc.get("precision", "native-double"))
    arch = Architecture(int(doc["n"]), tuple(tuple(s) for s in doc["slots"]))
    gates = []
    for i, entries in enumerate(doc["gates"]):
        dim = arch.slot_dim(i)
        if len(entries) != dim * dim:
            raise ValidationError(f"gate {i}: expected {dim * dim} entries")
        re = Real.zeros((dim, dim), precision.ncomp)
        im = Real.zeros((dim, dim), precision.ncomp)
        for flat, (re_s, im_s) in enumerate(entries):
            r, c = divmod(flat, dim)
            re.setitem((r, c), _parse_entry(re_s, precision.ncomp))
            im.setitem((r, c), _parse_entry(im_s, precision.ncomp))
        gates.append(Complex(re, im))
    return Circuit(arch, gates, precision)


def _parse_entry(x, ncomp):
    if isinstance(x, str):
        return parse_real(x, ncomp)
    return Real.from_float(float(x), ncomp)


def circuit_dumps(circuit: Circuit) -> str:
    return json.dumps(circuit_to_json(circuit))


def circuit_loads(text: str) -> Circuit:
    return circuit_from_json(json.loads(text))


# ---------------------------------------------------------------------------
# one-time pad and the perturbed family
# ---------------------------------------------------------------------------

@dataclass
class PadSeed:
    """Per-slot Haar unitaries with cached margin-good spectra."""

    unitaries: list
    spectra: list
    margin: EigenMargin
    resamples: list

    @property
    def total_resamples(self) -> int:
        return int(sum(self.resamples))

    def all_phases(self):
        return [spec.phases for spec in self.spectra]


def one_time_pad(c0: Circuit, rng: SeededRng, margin: EigenMargin,
                 max_resamples: int = 1000) -> PadSeed:
    """Sample the pad {H_i}, resampling each gate until its spectrum is
    margin-good; spectra are cached so every member(theta) shares them."""
    unitaries = []
    spectra = []
    counts = []
    for i in range(c0.m):
        dim = c0.architecture.slot_dim(i)
        attempts = 0
        while True:
            h = haar_unitary(dim, rng.substream(i * max_resamples + attempts),
                             c0.precision)
            dec = unitary_eigendecomposition(h)
            if margin_good(dec.phases, margin):
                break
            attempts += 1
            if attempts >= max_resamples:
                raise ResampleBudgetExceeded(
                    f"slot {i}: no margin-good seed in {max_resamples} draws")
        unitaries.append(h)
        spectra.append(dec)
        counts.append(attempts)
    return PadSeed(unitaries, spectra, margin, counts)


class PerturbedFamily:
    """The curve C(theta): slot i holds H_i(theta) G_i.

    member(0) is the padded (Haar-distributed) circuit, member(1) is the base
    circuit bit-exactly.
    """

    def __init__(self, base: Circuit, seed: PadSeed,
                 transform: TransformKind = CAYLEY):
        if len(seed.unitaries) != base.m:
            raise ValidationError("pad seed size does not match circuit")
        self.base = base
        self.seed = seed
        self.transform = transform

    @property
    def precision(self) -> PrecisionConfig:
        return self.base.precision

    def gate_batch(self, thetas: Real):
        """Batched slot gates [H_i(theta) G_i] over the theta axis.

        Returns (list of Complex with shape (N, d_i, d_i), truncation_error).
        """
        thetas = thetas.promote(self.precision.ncomp)
        out = []
        worst_trunc = 0.0
        for i in range(self.base.m):
            h_batch, trunc = transform_spectral(self.seed.spectra[i], thetas,
                                                self.transform)
            out.append(h_batch.matmul(self.base.gates[i]))
            worst_trunc = max(worst_trunc, trunc)
        return out, worst_trunc

    def member(self, theta: float) -> Circuit:
        """Single circuit C(theta); endpoints reuse stored gates exactly."""
        if theta == 1.0:
            return Circuit(self.base.architecture, list(self.base.gates),
                           self.precision)
        if theta == 0.0 and self.transform.kind == "cayley":
            gates = [self.seed.unitaries[i].mat.matmul(self.base.gates[i])
                     for i in range(self.base.m)]
            return Circuit(self.base.architecture, gates, self.precision)
        thetas = Real.from_float(np.array([float(theta)]), self.precision.ncomp)
        batch, _ = self.gate_batch(thetas)
        return Circuit(self.base.architecture, [g[0] for g in batch],
                       self.precision)


# ---------------------------------------------------------------------------
# worst-case targets: Fourier sampling
# ---------------------------------------------------------------------------

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
# H (x) H has exactly representable entries +-0.5; pairing the Hadamard wall
# into two-qubit blocks keeps the gapped probabilities k^2/2^(2 n0) exact.
_HH = 0.5 * np.array([
    [1.0, 1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
])


def _hadamard_wall(n0: int):
    slots = []
    gates = []
    q = 0
    while q + 1 < n0:
        slots.append((q, q + 1))
        gates.append(_HH)
        q += 2
    if q < n0:
        slots.append((q,))
        gates.append(_HADAMARD)
    return slots, gates


def fourier_sampling_circuit(truth_table, packed: bool = False,
                             precision: PrecisionConfig = NATIVE) -> Circuit:
    """H^(x n0) U_f H^(x n0) for f: {0,1}^n0 -> {+-1}.

    Pr[0^n0] = (sum_x f(x))^2 / 2^(2 n0), exactly for even n0 (the Hadamard
    walls are paired into +-0.5 blocks).  With packed=True (n0 = 2 only) the
    circuit compresses to two two-qubit gates.
    """
    f = np.asarray(truth_table, dtype=float)
    size = f.shape[0]
    n0 = int(round(math.log2(size)))
    if 2 ** n0 != size:
        raise ValidationError("truth table length must be a power of two")
    if n0 > MAX_SLOT_ARITY:
        raise ValidationError("dense U_f supported only up to 6 qubits")
    if not np.all(np.abs(f) == 1.0):
        raise ValidationError("truth table entries must be +-1")
    uf = np.diag(f)
    if packed:
        if n0 != 2:
            raise ValidationError("packed form is defined for n0 = 2")
        arch = Architecture(2, ((0, 1), (0, 1)))
        return Circuit(arch, [uf @ _HH, _HH], precision)
    wall_slots, wall_gates = _hadamard_wall(n0)
    slots = list(wall_slots) + [tuple(range(n0))] + list(wall_slots)
    gates = list(wall_gates) + [uf] + list(wall_gates)
    return Circuit(Architecture(n0, tuple(slots)), gates, precision)


def fourier_probability(truth_table) -> float:
    """(sum f)^2 / 2^(2 n0), the exact gapped value."""
    f = np.asarray(truth_table, dtype=float)
    return float(f.sum() ** 2 / f.size ** 2)
