import json

import numpy as np
import pytest

from cayleylab.cayley import CAYLEY, EigenMargin, TransformKind
from cayleylab.circuits import (
    Architecture,
    Circuit,
    PerturbedFamily,
    brickwork,
    circuit_dumps,
    circuit_from_json,
    circuit_loads,
    circuit_to_json,
    fourier_probability,
    fourier_sampling_circuit,
    one_time_pad,
)
from cayleylab.errors import ResampleBudgetExceeded, ValidationError
from cayleylab.numerics import DOUBLE_DOUBLE, SeededRng, haar_unitary
from cayleylab.simulator import output_prob


def test_brickwork_n2():
    arch = brickwork(2, 1)
    assert arch.slots == ((0, 1),)
    assert arch.m == 1


def test_brickwork_n4_depth2():
    arch = brickwork(4, 2)
    assert arch.slots == ((0, 1), (2, 3), (1, 2))
    assert arch.m == 3


def test_brickwork_n5_depth2():
    arch = brickwork(5, 2)
    assert arch.m == 4
    assert arch.slots == ((0, 1), (2, 3), (1, 2), (3, 4))


def test_architecture_validation():
    with pytest.raises(ValidationError):
        Architecture(2, ((0, 5),))
    with pytest.raises(ValidationError):
        Architecture(2, ((0, 0),))
    with pytest.raises(ValidationError):
        Architecture(2, ())


def test_degree_bound():
    arch = brickwork(3, 2)  # two 2q slots
    assert arch.degree_bound() == 8 * arch.m
    mixed = Architecture(2, ((0,), (0, 1)))
    assert mixed.degree_bound() == 2 * 2 + 2 * 4


def test_one_time_pad_resample_rate():
    c0 = Circuit(brickwork(4, 3), [haar_unitary(4, SeededRng(0, i)).mat
                                   for i in range(brickwork(4, 3).m)])
    margin = EigenMargin(0.1, dim=4)
    total = 0
    trials = 40
    for s in range(trials):
        seed = one_time_pad(c0, SeededRng(100 + s, 0), margin)
        total += seed.total_resamples + c0.m
    mean_draws = total / (trials * c0.m)
    assert mean_draws <= 1.0 / margin.good_probability + 0.15


def test_one_time_pad_determinism():
    c0 = Circuit(brickwork(2, 1), [haar_unitary(4, SeededRng(1, 0)).mat])
    a = one_time_pad(c0, SeededRng(5, 7), EigenMargin(0.1, 4))
    b = one_time_pad(c0, SeededRng(5, 7), EigenMargin(0.1, 4))
    assert np.array_equal(a.unitaries[0].to_complex128(),
                          b.unitaries[0].to_complex128())


def test_one_time_pad_budget():
    c0 = Circuit(brickwork(2, 1), [haar_unitary(4, SeededRng(2, 0)).mat])
    with pytest.raises(ResampleBudgetExceeded):
        one_time_pad(c0, SeededRng(3, 0), EigenMargin(3.14, 4), max_resamples=4)


def _family(n=2, depth=1, seed=11, margin=0.1):
    arch = brickwork(n, depth)
    gates = [haar_unitary(arch.slot_dim(i), SeededRng(seed, i)).mat
             for i in range(arch.m)]
    c0 = Circuit(arch, gates)
    pad = one_time_pad(c0, SeededRng(seed, 1000), EigenMargin(margin, 4))
    return PerturbedFamily(c0, pad)


def test_member_endpoints():
    fam = _family()
    m1 = fam.member(1.0)
    assert np.array_equal(m1.gates[0].to_complex128(),
                          fam.base.gates[0].to_complex128())
    m0 = fam.member(0.0)
    want = fam.seed.unitaries[0].to_complex128() @ fam.base.gates[0].to_complex128()
    assert np.max(np.abs(m0.gates[0].to_complex128() - want)) < 1e-14


def test_member_against_dense_oracle():
    # theta = 0.5, m=1, n=2: Pr[00] from an independent dense evaluation
    fam = _family(seed=23)
    theta = 0.5
    circ = fam.member(theta)
    prob = float(output_prob(circ).to_float())
    # oracle: build H(theta) by eigendecomposition with numpy only
    h = fam.seed.unitaries[0].to_complex128()
    w, v = np.linalg.eig(h)
    phases = np.angle(w)
    factors = (1 + 1j * (1 - theta) * np.tan(phases / 2)) / (1 - 1j * (1 - theta) * np.tan(phases / 2))
    h_theta = v @ np.diag(factors) @ np.linalg.inv(v)
    gate = h_theta @ fam.base.gates[0].to_complex128()
    amp = gate[0, 0]
    assert prob == pytest.approx(float(np.abs(amp) ** 2), abs=1e-12)


def test_family_continuity():
    fam = _family(seed=31)
    a = fam.member(0.4).gates[0].to_complex128()
    b = fam.member(0.4 + 1e-6).gates[0].to_complex128()
    assert np.max(np.abs(a - b)) <= 1e-3
    assert np.max(np.abs(a - b)) > 0


def test_gate_batch_matches_member():
    from cayleylab.numerics import Real
    fam = _family(seed=37)
    thetas = Real.from_float(np.array([0.2, 0.7]))
    batch, trunc = fam.gate_batch(thetas)
    assert trunc == 0.0
    for idx, theta in enumerate([0.2, 0.7]):
        want = fam.member(theta).gates[0].to_complex128()
        got = batch[0].to_complex128()[idx]
        assert np.max(np.abs(got - want)) < 1e-13


def test_json_roundtrip_native_bit_exact():
    fam = _family(seed=41)
    circ = fam.member(0.3)
    doc = circuit_to_json(circ)
    text = json.dumps(doc)
    back = circuit_from_json(json.loads(text))
    for g1, g2 in zip(circ.gates, back.gates):
        assert np.array_equal(g1.to_complex128(), g2.to_complex128())
    assert back.architecture.slots == circ.architecture.slots


def test_json_roundtrip_double_double():
    arch = brickwork(2, 1)
    g = haar_unitary(4, SeededRng(43, 0), DOUBLE_DOUBLE)
    circ = Circuit(arch, [g.mat], DOUBLE_DOUBLE)
    back = circuit_loads(circuit_dumps(circ))
    diff = (back.gates[0] - circ.gates[0]).max_abs()
    assert diff < 1e-39 * 10  # 40 printed significant digits
    assert back.precision.mode == "double-double"


def test_fourier_sampling_probabilities():
    assert fourier_probability([1, 1, 1, 1]) == 1.0
    assert fourier_probability([1, 1, -1, -1]) == 0.0
    assert fourier_probability([1, 1, 1, -1]) == 0.25
    for table in ([1, 1, 1, 1], [1, -1, 1, -1], [1, 1, 1, -1]):
        circ = fourier_sampling_circuit(table)
        prob = float(output_prob(circ).to_float())
        assert prob == pytest.approx(fourier_probability(table), abs=1e-15)


def test_fourier_packed_matches():
    for table in ([1, 1, 1, 1], [1, 1, -1, 1], [-1, 1, 1, 1]):
        packed = fourier_sampling_circuit(table, packed=True)
        assert packed.m == 2
        prob = float(output_prob(packed).to_float())
        assert prob == pytest.approx(fourier_probability(table), abs=1e-15)


def test_fourier_quantization_all_tables_n0_2():
    # all 16 truth tables: Pr is exactly k^2/16, so 0 or >= 1/16
    import itertools
    for bits in itertools.product([1, -1], repeat=4):
        circ = fourier_sampling_circuit(list(bits))
        prob = float(output_prob(circ).to_float())
        want = fourier_probability(list(bits))
        assert prob == want  # exact: entries are +-0.5 and +-1
        assert prob == 0.0 or prob >= 1.0 / 16.0


def test_fourier_validation():
    with pytest.raises(ValidationError):
        fourier_sampling_circuit([1, 1, 1])
    with pytest.raises(ValidationError):
        fourier_sampling_circuit([1, 2, 1, 1])
