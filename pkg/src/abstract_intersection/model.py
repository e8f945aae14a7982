"""Block-operator model on K = H + C^2.

Elements are block-diagonal operators stored as an H-block and a 2x2 corner
block. The semidefinite pairing sums only over the embedded H-basis, so the
corner block never contributes to it; the corner is still carried because the
bilinear form reads it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import CalculusResult, CutoffFunction, trace_power
from .spectral import EigenData, SpectralError

V01_CORNER = np.array([[0, 1], [0, 0]], dtype=np.complex128)
V10_CORNER = np.array([[0, 0], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ModelVector:
    h: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        c = np.asarray(self.c, dtype=np.complex128)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or c.shape != (2, 2):
            raise SpectralError(f"bad block shapes {h.shape} / {c.shape}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "c", c)

    @classmethod
    def zero(cls, dim: int) -> "ModelVector":
        return cls(np.zeros((dim, dim)), np.zeros((2, 2)))

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def _check(self, other):
        if not isinstance(other, ModelVector):
            return NotImplemented
        if other.dim != self.dim:
            raise SpectralError(f"dimension mismatch {self.dim} vs {other.dim}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ModelVector(self.h + other.h, self.c + other.c)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ModelVector(self.h - other.h, self.c - other.c)

    def __mul__(self, a):
        # real scalars only: V1 is an R-linear space
        a = float(a)
        return ModelVector(a * self.h, a * self.c)

    __rmul__ = __mul__

    def __neg__(self):
        return ModelVector(-self.h, -self.c)

    def embed(self) -> np.ndarray:
        """Real coordinates of both blocks, for R-linear algebra."""
        return np.concatenate([self.h.real.ravel(), self.h.imag.ravel(),
                               self.c.real.ravel(), self.c.imag.ravel()])

    @classmethod
    def from_embedding(cls, v: np.ndarray, dim: int) -> "ModelVector":
        k = dim * dim
        h = v[:k].reshape(dim, dim) + 1j * v[k:2 * k].reshape(dim, dim)
        c = v[2 * k:2 * k + 4].reshape(2, 2) + 1j * v[2 * k + 4:].reshape(2, 2)
        return cls(h, c)


@dataclass(frozen=True, eq=False)
class ModelBasis:
    dim_H: int
    h_phi_projector: np.ndarray


def make_model_basis(calc: CalculusResult) -> ModelBasis:
    """Orthogonal projector onto Image(phi(A)) from the leading left singular vectors."""
    phiA = calc.phiA
    n = phiA.shape[0]
    r = calc.image_dim
    if r == 0:
        return ModelBasis(n, np.zeros((n, n), dtype=np.complex128))
    U, sv, _ = np.linalg.svd(phiA)
    if r < n and sv[r] > 1e-8 * sv[0]:
        raise SpectralError(f"phi(A) has numerical rank above the expected {r}")
    Ur = U[:, :r]
    P = Ur @ Ur.conj().T
    return ModelBasis(n, 0.5 * (P + P.conj().T))


def make_basic_vectors(basis: ModelBasis):
    z = np.zeros((basis.dim_H, basis.dim_H))
    return ModelVector(z, V01_CORNER), ModelVector(z, V10_CORNER)


def make_v_delta1(basis: ModelBasis) -> ModelVector:
    return ModelVector(basis.h_phi_projector, np.zeros((2, 2)))


def make_v_delta(basis: ModelBasis, calc: CalculusResult) -> ModelVector:
    if calc.phiA.shape != (basis.dim_H, basis.dim_H):
        raise SpectralError("calculus result and model basis disagree on dim H")
    return ModelVector(basis.h_phi_projector, V01_CORNER + V10_CORNER)


def phi_endomorphism(phi: CutoffFunction, calc: CalculusResult, x: ModelVector) -> ModelVector:
    """Left multiplication by diag(phi(A), phi(1), phi(0))."""
    if calc.phiA.shape != x.h.shape:
        raise SpectralError(f"shape mismatch {calc.phiA.shape} vs {x.h.shape}")
    corner = np.diag([phi.q, phi.at_zero]).astype(np.complex128)
    return ModelVector(calc.phiA @ x.h, corner @ x.c)


def _real_dot(a: np.ndarray, b: np.ndarray) -> float:
    # written out so that the result is bitwise symmetric in (a, b)
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def v1_inner(x: ModelVector, y: ModelVector) -> float:
    """Re sum_j <x e_j, y e_j> over the H-basis only."""
    if x.dim != y.dim:
        raise SpectralError(f"dimension mismatch {x.dim} vs {y.dim}")
    return _real_dot(x.h, y.h)


def full_pairing(x: ModelVector, y: ModelVector) -> float:
    """Frobenius real pairing of both blocks; non-degenerate, used for coordinates."""
    return v1_inner(x, y) + _real_dot(x.c, y.c)


def orbit(phi: CutoffFunction, calc: CalculusResult, x: ModelVector, n_max: int) -> list:
    """[x, Phi x, ..., Phi^n_max x] by repeated application."""
    out = [x]
    for _ in range(n_max):
        out.append(phi_endomorphism(phi, calc, out[-1]))
    return out


@dataclass
class IPReport:
    n_max: int
    ip_a: float
    ip_b: float
    ip_c: float
    ip_d_max: float
    ip_e_max: float
    cf: list = field(default_factory=list)
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return max(abs(self.ip_a), abs(self.ip_b), abs(self.ip_c), self.ip_d_max, self.ip_e_max) <= self.tol

    @property
    def cf_max(self) -> float:
        return max(self.cf) if self.cf else 0.0

    def cf_stable(self, factor: float = 2.0) -> bool:
        """Bounded-ratio test for IP-f: the second half of the range must not outgrow the first."""
        if len(self.cf) < 4:
            return True
        h = len(self.cf) // 2
        first = max(self.cf[:h])
        return max(self.cf[h:]) <= factor * first + 1e-300

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "n_max": self.n_max,
                "ip_a": self.ip_a, "ip_b": self.ip_b, "ip_c": self.ip_c,
                "ip_d_max_abs": self.ip_d_max, "ip_e_max_abs": self.ip_e_max,
                "ip_f_constant": self.cf_max, "ip_f_stable": self.cf_stable(),
                "ip_f_ratio_by_n": self.cf}


def check_ip(phi: CutoffFunction, calc: CalculusResult, basis: ModelBasis, n_max: int = 60,
             tol: float = 1e-10) -> IPReport:
    """IP-a..e as assertions-by-value; IP-f as the ratio <Phi^n v, Phi^n v> / q^n per n."""
    v01, v10 = make_basic_vectors(basis)
    vd = make_v_delta(basis, calc)
    d_max = e_max = 0.0
    cf = []
    for n, w in enumerate(orbit(phi, calc, vd, n_max)):
        d_max = max(d_max, abs(v1_inner(w, v01)))
        e_max = max(e_max, abs(v1_inner(w, v10)))
        cf.append(v1_inner(w, w) / phi.q ** n)
    return IPReport(n_max, v1_inner(v01, v01), v1_inner(v10, v10), v1_inner(v01, v10),
                    d_max, e_max, cf, tol)


@dataclass
class LefschetzReport:
    n_max: int
    traces: list
    pairings: list
    tol: float = 1e-9

    @property
    def errors(self) -> list:
        return [abs(t - p) / (1 + abs(t)) for t, p in zip(self.traces, self.pairings)]

    @property
    def max_error(self) -> float:
        return max(self.errors)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "n_max": self.n_max,
                "max_relative_error": self.max_error,
                "max_trace_imag": max(abs(t.imag) for t in self.traces)}


def lefschetz_check(eig: EigenData, phi: CutoffFunction, calc: CalculusResult, basis: ModelBasis,
                    n_max: int = 20, tol: float = 1e-9) -> LefschetzReport:
    """Compare tr(phi(A)^n) with <Phi^n v_delta, v_delta> for n = 0..n_max."""
    vd = make_v_delta(basis, calc)
    traces, pairings = [], []
    for n, w in enumerate(orbit(phi, calc, vd, n_max)):
        traces.append(trace_power(eig, phi, n))
        pairings.append(v1_inner(w, vd))
    return LefschetzReport(n_max, traces, pairings, tol)
