"""Exact statevector / density-matrix simulation with stochastic noise.

Probabilities are never clamped here; callers that report to users clamp at
the edge.  Density-matrix channels use a closed form for depolarizing noise
((1-g) rho + g * I/2^k (x) Tr_k rho) and Kraus sums for custom channels; the
two routes are cross-checked in the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuits import Architecture, Circuit
from .errors import TooLarge, TooManyTrajectories, ValidationError
from .numerics import Complex, Real

MAX_STATEVECTOR_QUBITS = 12
MAX_DENSITY_QUBITS = 8

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class Channel:
    """One local stochastic channel placed after a slot."""

    placement: int          # channel applies after this slot index
    qubits: tuple
    kind: str               # depolarizing-1q | depolarizing-2q | custom
    rate: float = 0.0
    kraus: list = field(default_factory=list)   # custom Kraus ops (Complex)

    def branches(self, ncomp: int = 1):
        """Stochastic-unitary branches (probability, operator)."""
        if self.kind == "depolarizing-1q":
            g = self.rate
            probs = [1.0 - 3.0 * g / 4.0] + [g / 4.0] * 3
            ops = [_PAULI_1Q[p] for p in "IXYZ"]
        elif self.kind == "depolarizing-2q":
            g = self.rate
            labels = [a + b for a in "IXYZ" for b in "IXYZ"]
            probs = [1.0 - g] + [g / 15.0] * 15
            ops = [np.kron(_PAULI_1Q[a], _PAULI_1Q[b]) for a, b in labels]
        else:
            # general CPTP: fold the weights into the operators
            return [(1.0, k.promote(ncomp)) for k in self.kraus]
        return [(p, Complex.from_complex128(op, ncomp))
                for p, op in zip(probs, ops)]

    def kraus_operators(self, ncomp: int = 1):
        if self.kind == "custom":
            return [k.promote(ncomp) for k in self.kraus]
        out = []
        for p, op in self.branches(ncomp):
            out.append(op * Real.from_float(np.sqrt(p), ncomp))
        return out

    def completeness_defect(self) -> float:
        """max-norm of sum K†K - I."""
        ops = self.kraus_operators()
        dim = ops[0].shape[0]
        acc = None
        for k in ops:
            term = k.dagger().matmul(k)
            acc = term if acc is None else acc + term
        return (acc - Complex.eye(dim, acc.ncomp)).max_abs()


@dataclass
class NoiseModel:
    """Gate-independent local stochastic channels tied to an architecture."""

    channels: list

    def validate(self, arch: Architecture):
        for ch in self.channels:
            if ch.placement < 0 or ch.placement >= arch.m:
                raise ValidationError("channel placement outside circuit")
            if any(q < 0 or q >= arch.n for q in ch.qubits):
                raise ValidationError("channel qubit out of range")
            if ch.completeness_defect() > 1e-12:
                raise ValidationError("Kraus completeness violated")

    def after_slot(self, i: int):
        return [ch for ch in self.channels if ch.placement == i]


def depolarizing_model(arch: Architecture, gamma: float,
                       arity: str = "2q") -> NoiseModel:
    """One depolarizing channel after every slot.

    arity "2q": a two-qubit channel on each slot's pair (Pauli rate gamma,
    each nontrivial Pauli with probability gamma/15); arity "1q": independent
    single-qubit channels on each wire the slot touches.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError("gamma must lie in [0, 1]")
    channels = []
    for i, slot in enumerate(arch.slots):
        if arity == "2q" and len(slot) == 2:
            channels.append(Channel(i, tuple(slot), "depolarizing-2q", gamma))
        else:
            for q in slot:
                channels.append(Channel(i, (q,), "depolarizing-1q", gamma))
    return NoiseModel(channels)


# ---------------------------------------------------------------------------
# gate embedding
# ---------------------------------------------------------------------------

def _block_indices(qubits, n):
    """Full-space basis indices grouped as M[s, r]: sub-bits s, rest-bits r.

    Qubit 0 is the most significant bit of the basis index.
    """
    qubits = tuple(qubits)
    rest = [q for q in range(n) if q not in qubits]
    d_sub = 2 ** len(qubits)
    d_rest = 2 ** len(rest)
    m = np.zeros((d_sub, d_rest), dtype=np.intp)
    for s in range(d_sub):
        for r in range(d_rest):
            idx = 0
            for pos, q in enumerate(qubits):
                bit = (s >> (len(qubits) - 1 - pos)) & 1
                idx |= bit << (n - 1 - q)
            for pos, q in enumerate(rest):
                bit = (r >> (len(rest) - 1 - pos)) & 1
                idx |= bit << (n - 1 - q)
            m[s, r] = idx
    return m


def embed_gate(gate: Complex, qubits, n: int) -> Complex:
    """Lift a gate on `qubits` to the full 2^n space (batched-friendly)."""
    m = _block_indices(qubits, n)
    d_sub, d_rest = m.shape
    dim = d_sub * d_rest
    batch = gate.shape[:-2]
    out = Complex.zeros(batch + (dim, dim), gate.ncomp)
    for r in range(d_rest):
        idx = m[:, r]
        sel = (..., idx[:, None], idx[None, :])
        out.setitem(sel, gate)
    return out


def _lift_partial_trace(rho: Complex, qubits, n: int) -> Complex:
    """(I/2^k on `qubits`) tensor Tr_qubits(rho); trace preserving."""
    m = _block_indices(qubits, n)
    d_sub, d_rest = m.shape
    tr = None
    for s in range(d_sub):
        idx = m[s]
        block = rho[..., idx[:, None], idx[None, :]]
        tr = block if tr is None else tr + block
    out = Complex.zeros(rho.shape, rho.ncomp)
    scaled = tr * (1.0 / d_sub)
    for s in range(d_sub):
        idx = m[s]
        out.setitem((..., idx[:, None], idx[None, :]), scaled)
    return out


def apply_channel(rho: Complex, channel: Channel, n: int) -> Complex:
    """Apply one channel to a (batched) density matrix."""
    if channel.kind == "depolarizing-1q":
        g_eff = channel.rate
    elif channel.kind == "depolarizing-2q":
        g_eff = 16.0 * channel.rate / 15.0
    else:
        acc = None
        for k in channel.kraus_operators(rho.ncomp):
            full = embed_gate(k, channel.qubits, n)
            term = full.matmul(rho).matmul(full.dagger())
            acc = term if acc is None else acc + term
        return acc
    lift = _lift_partial_trace(rho, channel.qubits, n)
    return rho * (1.0 - g_eff) + lift * g_eff


# ---------------------------------------------------------------------------
# statevector
# ---------------------------------------------------------------------------

def _apply_gate_tensor(state: np.ndarray, gate: np.ndarray, qubits, n: int):
    k = len(qubits)
    gate_t = gate.reshape((2,) * (2 * k))
    state = np.tensordot(gate_t, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(state, list(range(k)), list(qubits))


def output_prob(circuit: Circuit, inserted_ops=None) -> Real:
    """Pr[0^n] = |<0^n| C |0^n>|^2 by sequential gate application.

    ``inserted_ops`` optionally maps slot index -> list of extra operators
    (Complex on that channel's qubits) applied after the slot, used by the
    trajectory expansion.
    """
    n = circuit.n
    if n > MAX_STATEVECTOR_QUBITS:
        raise TooLarge(f"statevector limited to {MAX_STATEVECTOR_QUBITS} qubits")
    inserted = inserted_ops or {}
    if circuit.precision.ncomp == 1:
        state = np.zeros((2,) * n, dtype=complex)
        state[(0,) * n] = 1.0
        for i, gate in enumerate(circuit.gates):
            state = _apply_gate_tensor(state, gate.to_complex128(),
                                       circuit.architecture.slots[i], n)
            for qubits, op in inserted.get(i, ()):
                state = _apply_gate_tensor(state, op.to_complex128(), qubits, n)
        amp = state[(0,) * n]
        return Real.from_float(float(np.abs(amp) ** 2))
    dim = 2 ** n
    psi = Complex.zeros((dim,), circuit.precision.ncomp)
    psi.setitem((0,), Complex.from_complex128(1.0 + 0j, circuit.precision.ncomp))
    for i, gate in enumerate(circuit.gates):
        full = embed_gate(gate, circuit.architecture.slots[i], n)
        psi = full.matvec(psi)
        for qubits, op in inserted.get(i, ()):
            psi = embed_gate(op.promote(psi.ncomp), qubits, n).matvec(psi)
    return psi[0].abs2()


def noisy_output_prob(circuit: Circuit, noise: NoiseModel) -> Real:
    """Pr[0^n](C, N) via density-matrix evolution with channels in place."""
    n = circuit.n
    if n > MAX_DENSITY_QUBITS:
        raise TooLarge(f"density matrix limited to {MAX_DENSITY_QUBITS} qubits")
    noise.validate(circuit.architecture)
    dim = 2 ** n
    ncomp = circuit.precision.ncomp
    rho = Complex.zeros((dim, dim), ncomp)
    rho.setitem((0, 0), Complex.from_complex128(1.0 + 0j, ncomp))
    for i, gate in enumerate(circuit.gates):
        full = embed_gate(gate, circuit.architecture.slots[i], n)
        rho = full.matmul(rho).matmul(full.dagger())
        for ch in noise.after_slot(i):
            rho = apply_channel(rho, ch, n)
    return rho[0, 0].re


def trajectory_weights(noise: NoiseModel, ncomp: int = 1):
    """Per-channel stochastic branches; total count must stay enumerable."""
    per_channel = [ch.branches(ncomp) for ch in noise.channels]
    total = 1
    for branches in per_channel:
        total *= len(branches)
        if total > 10 ** 6:
            raise TooManyTrajectories("trajectory count exceeds 1e6")
    return per_channel


def trajectory_average(circuit: Circuit, noise: NoiseModel) -> Real:
    """Sum over noise trajectories xi of weight(xi) * Pr[0^n](C_xi).

    Exact enumeration; equals noisy_output_prob for stochastic channels.
    """
    noise.validate(circuit.architecture)
    per_channel = trajectory_weights(noise, circuit.precision.ncomp)
    acc = Real.from_float(0.0, circuit.precision.ncomp)
    total_weight = 0.0
    for combo in itertools.product(*per_channel):
        weight = 1.0
        inserted = {}
        for ch, (p, op) in zip(noise.channels, combo):
            weight *= p
            inserted.setdefault(ch.placement, []).append((ch.qubits, op))
        if weight == 0.0:
            continue
        prob = output_prob(circuit, inserted_ops=inserted)
        acc = acc + prob * weight
        total_weight += weight
    if abs(total_weight - 1.0) > 1e-10:
        raise ValidationError(f"trajectory weights sum to {total_weight}")
    return acc


# ---------------------------------------------------------------------------
# batched evaluation over a theta grid (used by the reduction pipelines)
# ---------------------------------------------------------------------------

def family_output_probs(family, thetas: Real, noise: NoiseModel | None = None):
    """Pr[0^n](C(theta)) for every theta at once; returns (Real (N,), trunc).

    Noiseless runs use a batched statevector, noisy runs a batched density
    matrix; both share the batched gate construction from the pad spectra.
    """
    circuit = family.base
    n = circuit.n
    ncomp = circuit.precision.ncomp
    count = thetas.shape[0]
    gates, trunc = family.gate_batch(thetas)
    if noise is None:
        if n > MAX_STATEVECTOR_QUBITS:
            raise TooLarge("statevector limit")
        dim = 2 ** n
        psi = Complex.zeros((count, dim), ncomp)
        psi.setitem((slice(None), 0), Complex.from_complex128(
            np.ones(count, dtype=complex), ncomp))
        for i, gate in enumerate(gates):
            full = embed_gate(gate, circuit.architecture.slots[i], n)
            psi = full.matvec(psi)
        return psi[:, 0].abs2(), trunc
    if n > MAX_DENSITY_QUBITS:
        raise TooLarge("density matrix limit")
    noise.validate(circuit.architecture)
    dim = 2 ** n
    rho = Complex.zeros((count, dim, dim), ncomp)
    rho.setitem((slice(None), 0, 0), Complex.from_complex128(
        np.ones(count, dtype=complex), ncomp))
    for i, gate in enumerate(gates):
        full = embed_gate(gate, circuit.architecture.slots[i], n)
        rho = full.matmul(rho).matmul(full.dagger())
        for ch in noise.after_slot(i):
            rho = apply_channel(rho, ch, n)
    return rho[:, 0, 0].re, trunc
