"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``ABSINT_DISABLE_NUMBA`` is
unset or ``0``. Both paths are always importable under explicit names so the
benchmark and the tests can compare them.
"""
import os

import numpy as np

_FLAG = "ABSINT_DISABLE_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def numba_enabled():
    return HAVE_NUMBA and os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# weighted resolvent sum:  sum_k w_k (s_k I - A)^{-1}
# ---------------------------------------------------------------------------

# solves per batch are capped so that the stacked systems stay ~64 MB
_BATCH_ENTRIES = 4_000_000


def resolvent_sum_numpy(A, s, w):
    n = A.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    acc = np.zeros((n, n), dtype=np.complex128)
    chunk = max(1, _BATCH_ENTRIES // (n * n))
    for start in range(0, s.shape[0], chunk):
        sk = s[start:start + chunk]
        shifted = sk[:, None, None] * eye[None, :, :] - A[None, :, :]
        inv = np.linalg.solve(shifted, np.broadcast_to(eye, shifted.shape))
        acc += np.tensordot(w[start:start + chunk], inv, axes=(0, 0))
    return acc


@njit(cache=True)
def resolvent_sum_numba(A, s, w):
    n = A.shape[0]
    eye = np.eye(n).astype(np.complex128)
    acc = np.zeros((n, n), dtype=np.complex128)
    for k in range(s.shape[0]):
        acc += w[k] * np.linalg.solve(s[k] * eye - A, eye)
    return acc


def resolvent_sum(A, s, w):
    A = np.ascontiguousarray(A, dtype=np.complex128)
    s = np.ascontiguousarray(s, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.complex128)
    if numba_enabled():
        return resolvent_sum_numba(A, s, w)
    return resolvent_sum_numpy(A, s, w)


# ---------------------------------------------------------------------------
# normalized power sums:  S_n = sum_j m_j exp(n * log_mu_j),  n = 1..N
# ---------------------------------------------------------------------------

def power_sums_numpy(log_mu, weights, N):
    n = np.arange(1, N + 1, dtype=np.float64)
    out = np.zeros(N, dtype=np.complex128)
    # row blocks keep the (N, J) exponent table small for long scans
    step = 256
    for start in range(0, N, step):
        block = np.exp(np.outer(n[start:start + step], log_mu))
        out[start:start + step] = block @ weights
    return out


# powers are stepped by multiplication and re-anchored with exp every _ANCHOR steps
_ANCHOR = 32


@njit(cache=True)
def power_sums_numba(log_mu, weights, N):
    out = np.zeros(N, dtype=np.complex128)
    for j in range(log_mu.shape[0]):
        step = np.exp(log_mu[j])
        wj = weights[j]
        z = step
        for i in range(N):
            if i % _ANCHOR == 0:
                z = np.exp((i + 1) * log_mu[j])
            out[i] += wj * z
            z *= step
    return out


def power_sums(log_mu, weights, N):
    log_mu = np.ascontiguousarray(log_mu, dtype=np.complex128)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    if log_mu.size == 0:
        return np.zeros(int(N), dtype=np.complex128)
    if numba_enabled():
        return power_sums_numba(log_mu, weights, int(N))
    return power_sums_numpy(log_mu, weights, int(N))


def warmup():
    """Trigger JIT compilation (or cache load) of every numba kernel."""
    if not numba_enabled():
        return
    A = np.diag(np.array([0.5 + 1j, 0.5 - 1j]))
    resolvent_sum(A, np.array([2.0 + 0j]), np.array([1.0 + 0j]))
    power_sums(np.array([0.1j]), np.array([1.0 + 0j]), 3)
