import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _fixtures import critical_line_spectrum, random_dense_operator, symmetric_spectrum
from abstract_intersection import (
    OperatorSpec,
    SpectralError,
    SpectrumPoint,
    apply_cutoff_contour,
    apply_cutoff_spectral,
    build_cutoff,
    eigendata_of,
    trace_power,
)


def eig_of(*pts):
    return eigendata_of(OperatorSpec.spectral([SpectrumPoint(complex(s), m) for s, m in pts]))


TWO_PAIRS = [(0.5 + 1j, 1), (0.5 - 1j, 1), (0.5 + 3j, 1), (0.5 - 3j, 1)]


def test_value_map_on_two_pairs():
    phi = build_cutoff(eig_of(*TWO_PAIRS), 2.0, 4.0)
    v = phi.values
    assert v[0.5 + 1j] == pytest.approx(4 ** (0.5 + 1j), rel=1e-15)
    assert v[0.5 - 1j] == pytest.approx(4 ** (0.5 - 1j), rel=1e-15)
    assert v[0.5 + 3j] == 0 and v[0.5 - 3j] == 0
    assert v[0j] == 1 and v[1 + 0j] == 4


def test_value_map_below_all_heights():
    phi = build_cutoff(eig_of(*TWO_PAIRS), 0.5, 4.0)
    assert np.all(phi.point_values == 0)
    assert phi.values[0j] == 1 and phi.values[1 + 0j] == 4
    assert phi.two_g == 0


@pytest.mark.parametrize("q", [1.0, 0.0, -2.0])
def test_bad_q_rejected(q):
    with pytest.raises(SpectralError):
        build_cutoff(eig_of(*TWO_PAIRS), 2.0, q)


def test_single_critical_point():
    eig = eig_of((0.5, 1))
    calc = apply_cutoff_spectral(eig, build_cutoff(eig, 1.0, 4.0))
    np.testing.assert_allclose(calc.phiA, [[2.0]], rtol=1e-15)
    assert calc.genus == 0.5


def test_empty_cut_gives_zero():
    eig = eig_of(*TWO_PAIRS)
    calc = apply_cutoff_spectral(eig, build_cutoff(eig, 0.5))
    assert not calc.phiA.any() and calc.genus == 0


def test_pair_inside_cut_has_genus_one():
    eig = eig_of((0.5 + 1j, 1), (0.5 - 1j, 1))
    calc = apply_cutoff_spectral(eig, build_cutoff(eig, 2.0, 4.0))
    assert np.linalg.matrix_rank(calc.phiA) == 2 and calc.genus == 1


def test_contour_cutoff_two_point_diagonal():
    op = OperatorSpec.from_matrix(np.diag([0.5 + 1j, 0.5 + 3j]))
    eig = eigendata_of(op)
    phi = build_cutoff(eig, 2.0, 4.0)
    M = apply_cutoff_contour(op, phi, nodes=512)
    assert np.linalg.norm(M - np.diag([4 ** (0.5 + 1j), 0])) <= 1e-8


def test_contour_cutoff_empty_and_full():
    op = OperatorSpec.from_matrix(np.diag([0.5 + 1j, 0.5 - 1j, 0.3 + 4j, 0.7 - 4j]))
    eig = eigendata_of(op)
    assert np.linalg.norm(apply_cutoff_contour(op, build_cutoff(eig, 0.5))) <= 1e-8
    full = apply_cutoff_contour(op, build_cutoff(eig, 10.0, 4.0))
    expected = np.diag([cmath.exp(s * math.log(4)) for s in np.diag(op.matrix())])
    assert np.linalg.norm(full - expected) <= 1e-8


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 32))
def test_contour_agrees_with_spectral_on_random_dense(seed, dim):
    rng = np.random.default_rng(seed)
    op, lam = random_dense_operator(rng, dim)
    eig = eigendata_of(op)
    h = np.unique(np.abs(lam.imag))
    gaps = np.diff(h)
    k = int(np.argmax(gaps))
    if gaps[k] < 0.2:
        return
    phi = build_cutoff(eig, 0.5 * (h[k] + h[k + 1]), 4.0)
    diff = apply_cutoff_contour(op, phi) - apply_cutoff_spectral(eig, phi).phiA
    assert np.linalg.norm(diff) <= 1e-8


def test_trace_power_examples():
    eig = eig_of((0.5, 1))
    assert trace_power(eig, build_cutoff(eig, 1.0, 4.0), 3) == pytest.approx(8.0, rel=1e-14)
    eig = eig_of((0.5 + 1j, 1), (0.5 - 1j, 1))
    t = trace_power(eig, build_cutoff(eig, 2.0, 4.0), 1)
    assert t.real == pytest.approx(4 * math.cos(math.log(4)), rel=1e-14)
    mpmath = pytest.importorskip("mpmath")
    oracle = mpmath.mpf(4) ** mpmath.mpc(0.5, 1) + mpmath.mpf(4) ** mpmath.mpc(0.5, -1)
    assert t.real == pytest.approx(float(oracle.real), rel=1e-14)
    assert t.real == pytest.approx(0.73383, abs=5e-6)


def test_trace_power_at_zero_is_two_g():
    eig = eig_of(*TWO_PAIRS)
    assert trace_power(eig, build_cutoff(eig, 2.0), 0) == 2
    with pytest.raises(ValueError):
        trace_power(eig, build_cutoff(eig, 2.0), -1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), pairs=st.integers(1, 12), n=st.integers(0, 20))
def test_trace_power_is_real_on_symmetric_spectra(seed, pairs, n):
    eig = eigendata_of(OperatorSpec.spectral(symmetric_spectrum(np.random.default_rng(seed), pairs)))
    phi = build_cutoff(eig, 25.0, 4.0)
    t = trace_power(eig, phi, n)
    scale = 1.0 + float(np.sum(np.abs(phi.point_values) ** n * np.array(phi.mults)))
    assert abs(t.imag) <= 1e-12 * scale


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), pairs=st.integers(1, 8), n=st.integers(1, 20))
def test_trace_power_equals_matrix_trace(seed, pairs, n):
    rng = np.random.default_rng(seed)
    pts = symmetric_spectrum(rng, pairs)
    dim = sum(p.mult for p in pts)
    B = np.eye(dim) + 0.2 * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    eig = eigendata_of(OperatorSpec.spectral(pts, basis=B))
    Y = float(rng.uniform(0.1, 25.0))
    try:
        phi = build_cutoff(eig, Y, 4.0)
    except SpectralError:
        return
    phiA = apply_cutoff_spectral(eig, phi).phiA
    oracle = np.trace(np.linalg.matrix_power(phiA, n))
    assert abs(trace_power(eig, phi, n) - oracle) <= 1e-10 * (1 + abs(oracle))


def test_value_map_product_is_matrix_product():
    rng = np.random.default_rng(3)
    op, lam = random_dense_operator(rng, 10, im_range=5.0)
    eig = eigendata_of(op)
    a = build_cutoff(eig, 20.0, 4.0)
    b = build_cutoff(eig, 20.0, 2.0)
    A = apply_cutoff_spectral(eig, a).phiA
    B = apply_cutoff_spectral(eig, b).phiA
    AB = apply_cutoff_spectral(eig, a * b).phiA
    assert np.linalg.norm(AB - A @ B) <= 1e-10 * max(1.0, np.linalg.norm(A) * np.linalg.norm(B))
    A3 = apply_cutoff_spectral(eig, a ** 3).phiA
    assert np.linalg.norm(A3 - A @ A @ A) <= 1e-10 * np.linalg.norm(A) ** 3
    assert (a * b).q == 8.0


def test_value_map_product_requires_same_cut():
    eig = eig_of(*TWO_PAIRS)
    with pytest.raises(SpectralError):
        build_cutoff(eig, 2.0) * build_cutoff(eig, 4.0)
    with pytest.raises(ValueError):
        build_cutoff(eig, 2.0) ** 0


def test_genus_grows_by_one_per_pair_inside_cut():
    rng = np.random.default_rng(11)
    pts = critical_line_spectrum(rng, 6, max_height=30.0, min_gap=1.0)
    heights = sorted({abs(p.s.imag) for p in pts})
    for k in range(1, len(heights) + 1):
        eig = eigendata_of(OperatorSpec.spectral(pts[:2 * k]))
        Y = heights[k - 1] + 0.5
        assert build_cutoff(eig, Y).genus == k
        assert apply_cutoff_spectral(eig, build_cutoff(eig, Y)).genus == k
