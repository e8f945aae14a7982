import numpy as np
import pytest

from abstract_intersection import _kernels


def _resolvent_oracle(A, s, w):
    n = A.shape[0]
    return sum(wk * np.linalg.inv(sk * np.eye(n) - A) for sk, wk in zip(s, w))


@pytest.fixture
def resolvent_case():
    rng = np.random.default_rng(5)
    n = 7
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    s = 10.0 * np.exp(2j * np.pi * np.arange(40) / 40)
    w = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    return A, s, w


def test_resolvent_numpy_matches_inverse(resolvent_case):
    A, s, w = resolvent_case
    np.testing.assert_allclose(_kernels.resolvent_sum_numpy(A, s, w), _resolvent_oracle(A, s, w),
                               rtol=0, atol=1e-12)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_resolvent_numba_matches_numpy(resolvent_case):
    A, s, w = resolvent_case
    np.testing.assert_allclose(_kernels.resolvent_sum_numba(A, s, w),
                               _kernels.resolvent_sum_numpy(A, s, w), rtol=0, atol=1e-12)


def test_power_sums_match_direct_sum():
    log_mu = np.array([0.1j, -0.1j, -0.05 + 2j, -0.05 - 2j])
    w = np.array([1, 1, 2, 2], dtype=complex)
    N = 700
    direct = np.array([np.sum(w * np.exp(n * log_mu)) for n in range(1, N + 1)])
    np.testing.assert_allclose(_kernels.power_sums_numpy(log_mu, w, N), direct, rtol=1e-12, atol=1e-12)
    if _kernels.HAVE_NUMBA:
        np.testing.assert_allclose(_kernels.power_sums_numba(log_mu, w, N), direct, rtol=1e-12, atol=1e-12)


def test_power_sums_empty_input():
    assert np.all(_kernels.power_sums(np.array([]), np.array([]), 5) == 0)


@pytest.mark.parametrize("value, expected", [("1", False), ("true", False), ("0", True), ("", True)])
def test_env_flag_selects_path(monkeypatch, value, expected):
    monkeypatch.setenv("ABSINT_DISABLE_NUMBA", value)
    assert _kernels.numba_enabled() is (expected and _kernels.HAVE_NUMBA)


def test_dispatch_agrees_under_both_flags(monkeypatch, resolvent_case):
    A, s, w = resolvent_case
    out = {}
    for flag in ("0", "1"):
        monkeypatch.setenv("ABSINT_DISABLE_NUMBA", flag)
        out[flag] = (_kernels.resolvent_sum(A, s, w),
                     _kernels.power_sums(np.array([0.3j, -0.01]), np.array([1.0, 3.0 + 0j]), 50))
    np.testing.assert_allclose(out["0"][0], out["1"][0], atol=1e-12)
    np.testing.assert_allclose(out["0"][1], out["1"][1], atol=1e-12)
