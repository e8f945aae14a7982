"""The bilinear form beta on the span W1 and the INT1/INT2 checks.

W1 is spanned by v01, v10 and the orbit Phi^n v_delta1. beta is fixed by two
linear functionals, beta(., v01) and beta(., v10), which take the values
required on v01 and v10 and vanish on the orbit. Everything else follows from

    <x, y> = beta(x, v01) beta(y, v10) + beta(x, v10) beta(y, v01) - beta(x, y).

Coordinates are taken against an orthonormal basis of W1 under the full
(both-block) pairing. The orbit part of that basis comes from a real Arnoldi
recurrence, because raw powers Phi^n v_delta1 form a Vandermonde-like family
that loses numerical rank long before exact dependence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import CalculusResult, CutoffFunction
from .model import (
    ModelBasis,
    ModelVector,
    make_basic_vectors,
    make_v_delta1,
    orbit,
    phi_endomorphism,
    v1_inner,
)
from .spectral import DEFAULT_RANK_RTOL, SpectralError

log = logging.getLogger(__name__)

DEFAULT_MEMBERSHIP_TOL = 1e-8


class OutsideSpanError(SpectralError):
    """A vector handed to beta does not lie in the span it is defined on."""


@dataclass(frozen=True, eq=False)
class SpanBasis:
    """Spanning family of W1 with an orthonormal coordinate basis.

    ``vectors`` is the family [v01, v10, Phi^0 v_delta1, ..., Phi^m_Y v_delta1].
    ``orthonormal`` spans the same space (plus any adjoined W2 directions) and
    is what coordinates refer to. ``coord_gram`` is the full-pairing Gram of the
    unit-normalized family, kept for diagnostics.
    """

    vectors: tuple
    m_Y: Optional[int]
    coord_gram: np.ndarray
    orthonormal: tuple
    v_delta: ModelVector
    ambiguous: bool = False
    w2_dim: int = 0
    _Q: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.orthonormal)

    @property
    def v01(self) -> ModelVector:
        return self.vectors[0]

    @property
    def v10(self) -> ModelVector:
        return self.vectors[1]

    @property
    def h_a(self) -> ModelVector:
        return self.vectors[0] + self.vectors[1]

    def residual(self, x: ModelVector) -> float:
        v = x.embed()
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        return float(np.linalg.norm(v - self._Q @ (self._Q.T @ v)) / nv)

    def coordinates(self, x: ModelVector, tol: float = DEFAULT_MEMBERSHIP_TOL) -> np.ndarray:
        v = x.embed()
        c = self._Q.T @ v
        nv = np.linalg.norm(v)
        if nv > 0.0:
            res = np.linalg.norm(v - self._Q @ c) / nv
            if res > tol:
                raise OutsideSpanError(f"vector lies outside the span (relative residual {res:.3g})")
        return c

    def from_coordinates(self, c) -> ModelVector:
        dim_h = self.v01.dim
        return ModelVector.from_embedding(self._Q @ np.asarray(c, dtype=np.float64), dim_h)


def _orthonormalize(w: np.ndarray, Q: list) -> tuple:
    """Two passes of classical Gram-Schmidt; returns (residual vector, norm)."""
    if Q:
        M = np.column_stack(Q)
        w = w - M @ (M.T @ w)
        w = w - M @ (M.T @ w)
    return w, float(np.linalg.norm(w))


def build_span_basis(phi: CutoffFunction, calc: CalculusResult, basis: ModelBasis,
                     n_cap: Optional[int] = None, rank_tol: float = DEFAULT_RANK_RTOL) -> SpanBasis:
    """Span basis of W1; m_Y is the last orbit index that is still independent."""
    v01, v10 = make_basic_vectors(basis)
    vd1 = make_v_delta1(basis)
    v_delta = vd1 + v01 + v10
    dim_h = basis.dim_H
    if n_cap is None:
        n_cap = max(1, 2 * calc.image_dim)
    if n_cap < 1:
        raise ValueError("n_cap must be at least 1")
    Q = [v01.embed(), v10.embed()]
    ortho = [v01, v10]
    ambiguous = False
    m_Y = None
    raw = [v01, v10]
    if calc.image_dim > 0:
        q0, r0 = _orthonormalize(vd1.embed(), Q)
        Q.append(q0 / r0)
        ortho.append(ModelVector.from_embedding(Q[-1], dim_h))
        m_Y = 0
        while m_Y < n_cap:
            w = phi_endomorphism(phi, calc, ortho[-1]).embed()
            scale = np.linalg.norm(w)
            w, r = _orthonormalize(w, Q)
            rel = r / scale if scale > 0 else 0.0
            if rank_tol / 10 <= rel <= rank_tol * 10:
                ambiguous = True
                log.warning("span rank decision at power %d is ambiguous (relative residual %.3g)",
                            m_Y + 1, rel)
            if rel < rank_tol:
                break
            Q.append(w / r)
            ortho.append(ModelVector.from_embedding(Q[-1], dim_h))
            m_Y += 1
        raw.extend(orbit(phi, calc, vd1, m_Y))
    units = np.column_stack([v.embed() / np.linalg.norm(v.embed()) for v in raw])
    gram = units.T @ units
    return SpanBasis(tuple(raw), m_Y, gram, tuple(ortho), v_delta, ambiguous, 0,
                     np.column_stack(Q))


@dataclass(frozen=True, eq=False)
class BetaForm:
    """beta(., v01) and beta(., v10) as coefficient vectors on span coordinates."""

    f01: np.ndarray
    f10: np.ndarray


def build_beta_form(span: SpanBasis, w2_dim: int = 0, seed: Optional[int] = None):
    """The form on W1, optionally on W1 + W2 with ``w2_dim`` random extra directions.

    The W2 directions are random H-block operators orthogonal to W1, and the
    two functionals take random values on them. Returns ``(form, span)``; the
    span is extended when W2 is non-trivial.
    """
    k = span.dim
    rng = np.random.default_rng(seed)
    if w2_dim:
        dim_h = span.v01.dim
        Q = [span._Q[:, i] for i in range(k)]
        ortho = list(span.orthonormal)
        while len(Q) < k + w2_dim:
            g = rng.standard_normal((dim_h, dim_h)) + 1j * rng.standard_normal((dim_h, dim_h))
            w, r = _orthonormalize(ModelVector(g, np.zeros((2, 2))).embed(), Q)
            if r > 1e-6:
                Q.append(w / r)
                ortho.append(ModelVector.from_embedding(Q[-1], dim_h))
        span = SpanBasis(span.vectors, span.m_Y, span.coord_gram, tuple(ortho), span.v_delta,
                         span.ambiguous, w2_dim, np.column_stack(Q))
    f01 = np.zeros(span.dim)
    f10 = np.zeros(span.dim)
    # coordinate 0 is v01 and coordinate 1 is v10
    f01[1] = 1.0
    f10[0] = 1.0
    if w2_dim:
        f01[k:] = rng.standard_normal(w2_dim)
        f10[k:] = rng.standard_normal(w2_dim)
    return BetaForm(f01, f10), span


def beta(x: ModelVector, y: ModelVector, form: BetaForm, span: SpanBasis) -> float:
    cx = span.coordinates(x)
    cy = span.coordinates(y)
    return float((form.f01 @ cx) * (form.f10 @ cy) + (form.f10 @ cx) * (form.f01 @ cy)
                 - v1_inner(x, y))


def _random_elements(span: SpanBasis, samples: int, rng) -> list:
    return [span.from_coordinates(rng.standard_normal(span.dim)) for _ in range(samples)]


@dataclass
class Int1Report:
    a: float
    b: float
    c: float
    d_max_error: float
    e_ratios: list
    f_ratios: list
    g_max_asymmetry: float
    closure_residual: float
    tol: float = 1e-9
    outside_span: list = field(default_factory=list)

    @property
    def e_max_error(self) -> float:
        return max(abs(r - 1.0) for r in self.e_ratios)

    @property
    def passed(self) -> bool:
        return (not self.outside_span
                and max(abs(self.a), abs(self.b), abs(self.c - 1.0), self.d_max_error,
                        self.e_max_error, self.g_max_asymmetry) <= self.tol)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "a": self.a, "b": self.b, "c": self.c,
                "d_max_error": self.d_max_error, "e_max_ratio_error": self.e_max_error,
                "f_ratio_max": max(self.f_ratios), "f_ratio_by_n": self.f_ratios,
                "g_max_asymmetry": self.g_max_asymmetry,
                "closure_residual": self.closure_residual, "outside_span_n": self.outside_span}


def check_int1(form: BetaForm, span: SpanBasis, phi: CutoffFunction, calc: CalculusResult,
               n_max: int = 60, pairs: int = 100, seed: int = 0, tol: float = 1e-9) -> Int1Report:
    """Exact checks (a)-(d), the ratio (e), the reported ratio (f) and symmetry (g)."""
    v01, v10 = span.v01, span.v10
    d_err = 0.0
    e_ratios, f_ratios, outside = [], [], []
    closure = 0.0
    for n, w in enumerate(orbit(phi, calc, span.v_delta, n_max)):
        closure = max(closure, span.residual(w))
        try:
            d = beta(w, v01, form, span)
            e = beta(w, v10, form, span)
            f = beta(w, w, form, span)
        except OutsideSpanError:
            outside.append(n)
            continue
        qn = phi.q ** n
        d_err = max(d_err, abs(d - 1.0))
        e_ratios.append(e / qn)
        f_ratios.append(abs(f) / qn)
    rng = np.random.default_rng(seed)
    asym = 0.0
    xs = _random_elements(span, 2 * pairs, rng)
    for x, y in zip(xs[::2], xs[1::2]):
        asym = max(asym, abs(beta(x, y, form, span) - beta(y, x, form, span)))
    return Int1Report(beta(v01, v01, form, span), beta(v10, v10, form, span),
                      beta(v01, v10, form, span), d_err, e_ratios or [float("nan")],
                      f_ratios or [float("nan")], asym, closure, tol, outside)


@dataclass
class Int2Report:
    samples: int
    max_projected_beta: float
    max_orthogonality_residual: float
    complement_gram_max_eig: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return (self.max_projected_beta <= self.tol and self.max_orthogonality_residual <= self.tol
                and self.complement_gram_max_eig <= self.tol)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "samples": self.samples,
                "max_projected_beta": self.max_projected_beta,
                "max_orthogonality_residual": self.max_orthogonality_residual,
                "complement_gram_max_eig": self.complement_gram_max_eig}


def hodge_complement_gram(form: BetaForm, span: SpanBasis) -> np.ndarray:
    """Gram of beta on the beta-orthogonal complement of h_a, in projected coordinates."""
    h_a = span.h_a
    proj = []
    for b in span.orthonormal:
        proj.append(b - (beta(b, h_a, form, span) / 2.0) * h_a)
    k = len(proj)
    G = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            G[i, j] = G[j, i] = beta(proj[i], proj[j], form, span)
    return G


def check_int2_hodge(form: BetaForm, span: SpanBasis, samples: int = 1000, seed: int = 0,
                     tol: float = 1e-9) -> Int2Report:
    """Project random x onto the beta-orthogonal of h_a and require beta(x', x') <= 0."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    h_a = span.h_a
    hh = beta(h_a, h_a, form, span)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    orth = 0.0
    for x in _random_elements(span, samples, rng):
        xp = x - (beta(x, h_a, form, span) / hh) * h_a
        orth = max(orth, abs(beta(xp, h_a, form, span)))
        worst = max(worst, beta(xp, xp, form, span))
    gmax = float(np.max(np.linalg.eigvalsh(hodge_complement_gram(form, span))))
    return Int2Report(samples, float(worst), orth, gmax, tol)


@dataclass
class CastelnuovoReport:
    samples: int
    max_gap: float
    max_e3_residual: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.tol and self.max_e3_residual <= self.tol

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "samples": self.samples,
                "max_gap": self.max_gap, "max_e3_residual": self.max_e3_residual}


def castelnuovo_frame(x: ModelVector, form: BetaForm, span: SpanBasis):
    """The frame E1, E2, E3 with E3 beta-orthogonal to E1 and E2."""
    b01 = beta(x, span.v01, form, span)
    b10 = beta(x, span.v10, form, span)
    E1 = span.v01 + span.v10
    E2 = span.v01 - span.v10
    k1 = -0.5 * (b01 + b10)
    k2 = 0.5 * (b01 - b10)
    E3 = x + k1 * E1 + k2 * E2
    return E1, E2, E3, b01, b10


def check_castelnuovo(form: BetaForm, span: SpanBasis, samples: int = 1000, seed: int = 0,
                      tol: float = 1e-9) -> CastelnuovoReport:
    """beta(x,x) <= 2 beta(x,v01) beta(x,v10) on random x, plus the E3 identities."""
    rng = np.random.default_rng(seed)
    gap_max = -np.inf
    res = 0.0
    for x in _random_elements(span, samples, rng):
        E1, E2, E3, b01, b10 = castelnuovo_frame(x, form, span)
        gap = beta(x, x, form, span) - 2.0 * b01 * b10
        gap_max = max(gap_max, gap)
        res = max(res, abs(beta(E3, E1, form, span)), abs(beta(E3, E2, form, span)),
                  abs(beta(E3, E3, form, span) - gap))
    return CastelnuovoReport(samples, float(gap_max), res, tol)


@dataclass
class PairingReport:
    samples: int
    star_residual: float
    beta_asymmetry: float
    linearity_residual: float
    gram_min_eig: float
    cauchy_schwarz_excess: float
    null_vector_max: float
    tol: float = 1e-9
    psd_tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return (max(self.star_residual, self.beta_asymmetry, self.linearity_residual,
                    self.cauchy_schwarz_excess, self.null_vector_max) <= self.tol
                and self.gram_min_eig >= -self.psd_tol)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "psd_tol": self.psd_tol,
                "samples": self.samples, "star_residual": self.star_residual,
                "beta_asymmetry": self.beta_asymmetry,
                "linearity_residual": self.linearity_residual,
                "gram_min_eig": self.gram_min_eig,
                "cauchy_schwarz_excess": self.cauchy_schwarz_excess,
                "null_vector_max": self.null_vector_max}


def _random_v1(dim_h: int, rng) -> ModelVector:
    h = rng.standard_normal((dim_h, dim_h)) + 1j * rng.standard_normal((dim_h, dim_h))
    c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return ModelVector(h / np.linalg.norm(h), c)


def check_pairing(form: BetaForm, span: SpanBasis, samples: int = 1000, seed: int = 0,
                  family: int = 8, tol: float = 1e-9, psd_tol: float = 1e-10) -> PairingReport:
    """Identity (*), beta symmetry and linearity on W1; PSD, Cauchy-Schwarz and null vectors on V1."""
    rng = np.random.default_rng(seed)
    dim_h = span.v01.dim
    xs = _random_elements(span, samples, rng)
    ys = _random_elements(span, samples, rng)
    star = asym = lin = 0.0
    for i, (x, y) in enumerate(zip(xs, ys)):
        bxy = beta(x, y, form, span)
        rhs = (beta(x, span.v01, form, span) * beta(y, span.v10, form, span)
               + beta(x, span.v10, form, span) * beta(y, span.v01, form, span) - bxy)
        star = max(star, abs(v1_inner(x, y) - rhs))
        asym = max(asym, abs(bxy - beta(y, x, form, span)))
        z = xs[(i + 1) % samples]
        a, b = rng.standard_normal(2)
        lin = max(lin, abs(beta(a * x + b * y, z, form, span)
                           - a * beta(x, z, form, span) - b * beta(y, z, form, span)))
    # general V1 elements, not only W1
    v01, v10 = span.v01, span.v10
    gmin = np.inf
    cs = nul = 0.0
    for _ in range(max(1, samples // family)):
        fam = [_random_v1(dim_h, rng) for _ in range(family)] + [v01, v10]
        G = np.array([[v1_inner(u, w) for w in fam] for u in fam])
        gmin = min(gmin, float(np.min(np.linalg.eigvalsh(G))))
        diag = np.diag(G)
        bound = np.sqrt(np.maximum(np.outer(diag, diag), 0.0))
        cs = max(cs, float(np.max(np.abs(G) - bound)))
        nul = max(nul, float(np.max(np.abs(G[:, -2:]))))
    return PairingReport(samples, star, asym, lin, gmin, max(cs, 0.0), nul, tol, psd_tol)
