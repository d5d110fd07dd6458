import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayleylab.numerics import (
    Complex,
    DOUBLE_DOUBLE,
    NATIVE,
    PrecisionConfig,
    QUAD_DOUBLE,
    Real,
    atan2,
    format_real,
    parse_real,
    pi_real,
    sin_cos,
    sqrt,
)
from cayleylab.numerics.precision import two_prod, two_sum

mpmath.mp.prec = 260

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False)
# error-free transforms are exact only while products stay out of the
# subnormal range (same contract as the classic double-double libraries)
normal_range = st.one_of(
    st.floats(min_value=1e-100, max_value=1e100),
    st.floats(min_value=-1e100, max_value=-1e-100),
)


def to_mp(x: Real):
    return mpmath.mpf(0) + sum(mpmath.mpf(float(c)) for c in x.c)


def rel_err(x: Real, ref) -> float:
    ref = mpmath.mpf(ref)
    if ref == 0:
        return abs(float(to_mp(x)))
    return abs(float((to_mp(x) - ref) / ref))


@given(finite, finite)
def test_two_sum_exact(a, b):
    s, e = two_sum(a, b)
    assert mpmath.mpf(s) + mpmath.mpf(e) == mpmath.mpf(a) + mpmath.mpf(b)


@given(normal_range, normal_range)
def test_two_prod_exact(a, b):
    p, e = two_prod(a, b)
    assert mpmath.mpf(p) + mpmath.mpf(e) == mpmath.mpf(a) * mpmath.mpf(b)


@pytest.mark.parametrize("cfg,tol", [(DOUBLE_DOUBLE, 1e-30), (QUAD_DOUBLE, 1e-60)])
def test_epsilon_invariants(cfg, tol):
    assert cfg.epsilon <= tol


def test_native_epsilon():
    assert abs(NATIVE.epsilon - 1.1e-16) < 2e-17


@pytest.mark.parametrize("ncomp,budget", [(2, 2.0 ** -100), (4, 2.0 ** -196)])
def test_arithmetic_accuracy_vs_mpmath(ncomp, budget):
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = rng.uniform(-10, 10) * 10.0 ** rng.integers(-8, 8)
        b = rng.uniform(-10, 10) * 10.0 ** rng.integers(-8, 8)
        x = Real.from_float(a, ncomp)
        y = Real.from_float(b, ncomp)
        assert rel_err(x + y, mpmath.mpf(a) + mpmath.mpf(b)) < budget
        assert rel_err(x * y, mpmath.mpf(a) * mpmath.mpf(b)) < budget
        assert rel_err(x / y, mpmath.mpf(a) / mpmath.mpf(b)) < budget


@pytest.mark.parametrize("ncomp,budget", [(2, 2.0 ** -98), (4, 2.0 ** -190)])
def test_chained_ops_accuracy(ncomp, budget):
    # (a+b)*c/d - a, all chained, against mpmath
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, c, d = rng.uniform(0.5, 2.0, size=4)
        x = ((Real.from_float(a, ncomp) + b) * c) / d - a
        ref = (mpmath.mpf(a) + mpmath.mpf(b)) * mpmath.mpf(c) / mpmath.mpf(d) - mpmath.mpf(a)
        assert rel_err(x, ref) < budget


@pytest.mark.parametrize("ncomp,budget", [(2, 2.0 ** -98), (4, 2.0 ** -190)])
def test_sqrt_accuracy(ncomp, budget):
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.uniform(1e-6, 1e6)
        assert rel_err(sqrt(Real.from_float(a, ncomp)), mpmath.sqrt(mpmath.mpf(a))) < budget


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(11)
    a = rng.uniform(-1, 1, size=100)
    b = rng.uniform(-1, 1, size=100)
    xv = Real.from_float(a, 2) * Real.from_float(b, 2)
    for i in range(100):
        xs = Real.from_float(a[i], 2) * Real.from_float(b[i], 2)
        assert xv.c[0][i] == xs.c[0] and xv.c[1][i] == xs.c[1]


def test_pairwise_sum_compensates():
    # sum of (1, eps, eps, ...) where eps is far below native resolution
    n = 1000
    vals = np.full(n, 1e-25)
    x = Real.from_float(np.concatenate([[1.0], vals]), 2)
    total = x.sum()
    ref = mpmath.mpf(1) + n * mpmath.mpf(1e-25)
    assert rel_err(total, ref) < 2.0 ** -95


def test_sin_cos_and_atan2_dd():
    rng = np.random.default_rng(13)
    phis = rng.uniform(-np.pi, np.pi, size=40)
    x = Real.from_float(phis, 2)
    s, c = sin_cos(x)
    for i, phi in enumerate(phis):
        assert rel_err(s[i], mpmath.sin(mpmath.mpf(phi))) < 2.0 ** -95
        assert rel_err(c[i], mpmath.cos(mpmath.mpf(phi))) < 2.0 ** -95
    phi = atan2(s, c)
    back = phi.to_float()
    assert np.max(np.abs(back - phis)) < 1e-15
    for i in range(40):
        assert abs(float(to_mp(phi[i]) - mpmath.mpf(phis[i]))) < 1e-30


def test_pi_real_accuracy():
    assert abs(float(to_mp(pi_real(2)) - mpmath.pi)) < 1e-32
    assert abs(float(to_mp(pi_real(4)) - mpmath.pi)) < 1e-60


def test_format_parse_roundtrip_dd():
    x = Real.from_float(1.0, 2) / 3.0
    s = format_real(x, "double-double")
    y = parse_real(s, 2)
    assert abs(float(to_mp(x) - to_mp(y))) < 1e-33


def test_complex_mul_div():
    rng = np.random.default_rng(17)
    z1 = rng.normal(size=10) + 1j * rng.normal(size=10)
    z2 = rng.normal(size=10) + 1j * rng.normal(size=10)
    a = Complex.from_complex128(z1, 2)
    b = Complex.from_complex128(z2, 2)
    prod = (a * b).to_complex128()
    assert np.allclose(prod, z1 * z2, rtol=1e-15, atol=0)
    quot = (a / b).to_complex128()
    assert np.allclose(quot, z1 / z2, rtol=1e-14, atol=0)


def test_complex_matmul_matches_numpy():
    rng = np.random.default_rng(19)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    got = Complex.from_complex128(a, 2).matmul(Complex.from_complex128(b, 2))
    assert np.allclose(got.to_complex128(), a @ b, rtol=1e-14, atol=1e-15)
    # batched against loop
    ab = rng.normal(size=(5, 3, 3)) + 1j * rng.normal(size=(5, 3, 3))
    bb = rng.normal(size=(5, 3, 3)) + 1j * rng.normal(size=(5, 3, 3))
    got = Complex.from_complex128(ab, 2).matmul(Complex.from_complex128(bb, 2))
    assert np.allclose(got.to_complex128(), ab @ bb, rtol=1e-13, atol=1e-14)


def test_precision_config_rejects_unknown_mode():
    with pytest.raises(ValueError):
        PrecisionConfig("octuple")


def test_real_comparisons_below_native_resolution():
    a = Real.from_float(1.0, 2) + 1e-25
    b = Real.from_float(1.0, 2)
    assert bool(a > b)
    assert bool(b < a)
    assert not bool(a <= b)
