"""Operators, spectral data, Riesz projections and the OP1-OP5 validator.

Operators are finite-dimensional: either given spectrally (points with
multiplicities plus an optional eigenbasis) or as a dense complex matrix.
Closedness and the accumulation condition hold trivially in finite
dimension; the validator records them as vacuous passes.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels

log = logging.getLogger(__name__)

DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_RANK_RTOL = 1e-8
DEFAULT_STRIP_MARGIN = 1e-9
DEFAULT_CONTOUR_MARGIN = 1e-6
DEFAULT_EPSILON_Y = 1.0
MAX_DENSE_DIM = 512
BASIS_COND_MAX = 1e12
# eigenvector matrices worse than this switch to generalized-kernel projectors
_EIGVEC_COND_MAX = 1e8


class SpectralError(ValueError):
    """Base class for invalid or degenerate spectral input."""


class DegenerateInputError(SpectralError):
    pass


class DegenerateCutError(SpectralError):
    pass


class ContourError(SpectralError):
    pass


class RankAmbiguityError(SpectralError):
    pass


@dataclass(frozen=True)
class SpectrumPoint:
    """One eigenvalue with its algebraic multiplicity.

    Strip containment is not enforced here; it is what ``validate_op_axioms``
    checks, so out-of-strip points must be representable.
    """

    s: complex
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        if int(self.mult) != self.mult or self.mult < 1:
            raise SpectralError(f"multiplicity must be a positive integer, got {self.mult!r}")
        object.__setattr__(self, "mult", int(self.mult))


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """An operator on C^dim, given spectrally or as a dense matrix.

    Use :meth:`spectral` or :meth:`from_matrix` rather than the constructor.
    """

    dim: int
    points: Optional[tuple] = None
    basis: Optional[np.ndarray] = None
    dense: Optional[np.ndarray] = None

    @classmethod
    def spectral(cls, points: Sequence, basis=None, cond_max: float = BASIS_COND_MAX) -> "OperatorSpec":
        pts = tuple(p if isinstance(p, SpectrumPoint) else SpectrumPoint(*p) for p in points)
        if not pts:
            raise SpectralError("spectral data needs at least one point")
        dim = sum(p.mult for p in pts)
        if basis is not None:
            basis = np.array(basis, dtype=np.complex128)
            if basis.shape != (dim, dim):
                raise SpectralError(f"basis must be {dim}x{dim}, got {basis.shape}")
            cond = np.linalg.cond(basis)
            if not np.isfinite(cond) or cond > cond_max:
                raise SpectralError(f"eigenbasis is not invertible (condition number {cond:.3g})")
        return cls(dim=dim, points=pts, basis=basis)

    @classmethod
    def from_matrix(cls, matrix) -> "OperatorSpec":
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise SpectralError(f"dense operator must be a non-empty square matrix, got shape {m.shape}")
        return cls(dim=m.shape[0], dense=m)

    @property
    def is_spectral(self) -> bool:
        return self.points is not None

    def diagonal(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, in coordinate order."""
        if not self.is_spectral:
            raise SpectralError("diagonal() needs spectral data")
        return np.concatenate([np.full(p.mult, p.s, dtype=np.complex128) for p in self.points])

    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense.copy()
        d = np.diag(self.diagonal())
        if self.basis is None:
            return d
        return self.basis @ d @ np.linalg.inv(self.basis)


@dataclass(frozen=True, eq=False)
class EigenData:
    """Distinct eigenvalues with their Riesz (spectral) projectors."""

    points: tuple
    projectors: tuple

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.s for p in self.points], dtype=np.complex128)

    @property
    def mults(self) -> np.ndarray:
        return np.array([p.mult for p in self.points], dtype=np.int64)

    def index_of(self, s: complex, tol: float = DEFAULT_CLUSTER_TOL) -> int:
        dist = np.abs(self.eigenvalues - complex(s))
        i = int(np.argmin(dist))
        if dist[i] > tol:
            raise SpectralError(f"{s} is not an eigenvalue within {tol:g}")
        return i

    def projector_sum(self, keep: Callable[[complex], bool]) -> np.ndarray:
        n = self.projectors[0].shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for p, P in zip(self.points, self.projectors):
            if keep(p.s):
                out += P
        return out

    def invariant_residuals(self) -> dict:
        """Largest violations of idempotence, mutual annihilation, completeness and rank."""
        n = self.projectors[0].shape[0]
        idem = max(np.linalg.norm(P @ P - P) for P in self.projectors)
        cross = 0.0
        for i, Pi in enumerate(self.projectors):
            for j, Pj in enumerate(self.projectors):
                if i != j:
                    cross = max(cross, np.linalg.norm(Pi @ Pj))
        total = np.linalg.norm(sum(self.projectors) - np.eye(n))
        rank_ok = all(
            numerical_rank(P) == p.mult for p, P in zip(self.points, self.projectors)
        )
        return {"idempotence": float(idem), "annihilation": float(cross),
                "completeness": float(total), "ranks_match": bool(rank_ok)}


def numerical_rank(M: np.ndarray, rtol: float = DEFAULT_RANK_RTOL) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


# ---------------------------------------------------------------------------
# eigendata
# ---------------------------------------------------------------------------

def _cluster(values: np.ndarray, tol: float) -> list:
    """Single-linkage clusters of complex values; returns index lists."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(values[:, None] - values[None, :])
    for i, j in zip(*np.nonzero(np.triu(dist <= tol, k=1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    labels = np.empty(n, dtype=np.int64)
    clusters = list(groups.values())
    for c, idx in enumerate(clusters):
        labels[idx] = c
    near = np.triu(dist <= 2 * tol, k=1) & (labels[:, None] != labels[None, :])
    if near.any():
        i, j = (int(k[0]) for k in np.nonzero(near))
        raise DegenerateInputError(
            f"eigenvalues {values[i]:.12g} and {values[j]:.12g} fall in different clusters "
            f"but lie within 2*cluster_tol={2 * tol:g}"
        )
    # deterministic order: by real part, then imaginary part
    clusters.sort(key=lambda idx: (float(np.mean(values[idx]).real), float(np.mean(values[idx]).imag)))
    return clusters


def _generalized_projector(A: np.ndarray, s: complex, m: int) -> np.ndarray:
    n = A.shape[0]
    N = np.linalg.matrix_power(A - s * np.eye(n), m)
    U, _, Vh = np.linalg.svd(N)
    kernel = Vh[n - m:].conj().T
    image = U[:, : n - m]
    T = np.hstack([kernel, image])
    return kernel @ np.linalg.inv(T)[:m, :]


def eigendata_of(op: OperatorSpec, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> EigenData:
    """Distinct eigenvalues of ``op`` (clustered) with their spectral projectors."""
    if op.is_spectral:
        vals = np.array([p.s for p in op.points], dtype=np.complex128)
        clusters = _cluster(vals, cluster_tol)
        offsets = np.cumsum([0] + [p.mult for p in op.points])
        points, projectors = [], []
        Binv = None if op.basis is None else np.linalg.inv(op.basis)
        for idx in clusters:
            coords = np.concatenate([np.arange(offsets[i], offsets[i + 1]) for i in idx])
            mult = int(sum(op.points[i].mult for i in idx))
            s = complex(np.mean(vals[idx]))
            if op.basis is None:
                P = np.zeros((op.dim, op.dim), dtype=np.complex128)
                P[coords, coords] = 1.0
            else:
                P = op.basis[:, coords] @ Binv[coords, :]
            points.append(SpectrumPoint(s, mult))
            projectors.append(P)
        return EigenData(tuple(points), tuple(projectors))

    A = op.dense
    if op.dim > MAX_DENSE_DIM:
        raise SpectralError(f"dense eigensolve limited to dim <= {MAX_DENSE_DIM}, got {op.dim}")
    try:
        lam, X = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolve failed: {exc}") from exc
    clusters = _cluster(lam, cluster_tol)
    cond = np.linalg.cond(X)
    use_vectors = np.isfinite(cond) and cond <= _EIGVEC_COND_MAX
    Xinv = np.linalg.inv(X) if use_vectors else None
    points, projectors = [], []
    for idx in clusters:
        s = complex(np.mean(lam[idx]))
        m = len(idx)
        if use_vectors:
            P = X[:, idx] @ Xinv[idx, :]
        else:
            P = _generalized_projector(A, s, m)
        points.append(SpectrumPoint(s, m))
        projectors.append(P)
    return EigenData(tuple(points), tuple(projectors))


def riesz_index(op: OperatorSpec, point: SpectrumPoint, eig: EigenData,
                rank_rtol: float = DEFAULT_RANK_RTOL) -> int:
    """Smallest nu >= 1 with (A - s)^nu P_s = 0, i.e. the pole order of the resolvent at s."""
    i = eig.index_of(point.s)
    P = eig.projectors[i]
    A = op.matrix()
    M = A - eig.points[i].s * np.eye(op.dim)
    norm_M = max(np.linalg.norm(M, 2), 1.0)
    norm_P = max(np.linalg.norm(P, 2), 1.0)
    T = P
    for nu in range(1, eig.points[i].mult + 2):
        T = M @ T
        smax = np.linalg.norm(T, 2)
        thresh = rank_rtol * norm_M ** nu * norm_P
        if thresh / 10 < smax < thresh * 10:
            raise RankAmbiguityError(
                f"rank decision for (A - s)^{nu} P at s={point.s} is ambiguous "
                f"(largest singular value {smax:.3g}, threshold {thresh:.3g})"
            )
        if smax <= thresh:
            return nu
    raise RankAmbiguityError(f"nilpotent part at s={point.s} did not vanish by power {eig.points[i].mult + 1}")


# ---------------------------------------------------------------------------
# contours and quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ContourError(f"degenerate rectangle {self}")

    @classmethod
    def strip_box(cls, Y: float, epsilon: float) -> "Rectangle":
        """The cut-off box around the critical strip, widened to Re in [-1/2, 3/2]."""
        h = Y + epsilon
        return cls(-0.5, 1.5, -h, h)

    def corners(self) -> list:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def edges(self) -> list:
        c = self.corners()
        return [(c[k], c[(k + 1) % 4]) for k in range(4)]

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (self.re_min < z.real) & (z.real < self.re_max) & (self.im_min < z.imag) & (z.imag < self.im_max)

    def boundary_distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        return np.min([_segment_distance(a, b, z) for a, b in self.edges()], axis=0)


def _segment_distance(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    d = b - a
    t = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * d))


# panels are bisected until length <= _GRADING * distance to the nearest pole
_GRADING = 2.0
_PANEL_ORDER = 16


def _initial_panels(rect: Rectangle, nodes: int, poles: np.ndarray, order: int) -> list:
    edges = rect.edges()
    lengths = [abs(b - a) for a, b in edges]
    perimeter = sum(lengths)
    stack = []
    for (a, b), L in zip(edges, lengths):
        k = max(1, int(round(nodes * L / perimeter / order)))
        t = np.linspace(0.0, 1.0, k + 1)
        pts = a + (b - a) * t
        stack.extend(zip(pts[:-1], pts[1:]))
    if poles.size == 0:
        return stack
    panels = []
    while stack:
        a, b = stack.pop()
        if abs(b - a) > _GRADING * float(np.min(_segment_distance(a, b, poles))):
            mid = 0.5 * (a + b)
            stack.extend([(mid, b), (a, mid)])
        else:
            panels.append((a, b))
    panels.sort(key=lambda ab: (ab[0].real, ab[0].imag, ab[1].real, ab[1].imag))
    return panels


def _panel_nodes(panels: list, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    a = np.array([p[0] for p in panels])
    b = np.array([p[1] for p in panels])
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    z = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    dz = (half[:, None] * w[None, :]).ravel()
    return z, dz


@dataclass(frozen=True)
class QuadratureInfo:
    nodes: int
    converged: bool
    last_change: float


def contour_integral(A: np.ndarray, rect: Rectangle, weight: Optional[Callable] = None,
                     nodes: int = 512, poles=None, tol: float = 1e-10,
                     max_nodes: int = 8192, full_output: bool = False):
    """(1/2 pi i) * contour integral of weight(s) (s - A)^{-1} ds over the rectangle boundary.

    Composite Gauss-Legendre panels on each edge, graded toward nearby poles,
    with uniform panel doubling until two successive values agree to ``tol``
    in Frobenius norm or the node cap is reached.
    """
    if nodes < 16:
        raise ContourError(f"need at least 16 quadrature nodes, got {nodes}")
    A = np.asarray(A, dtype=np.complex128)
    poles = np.linalg.eigvals(A) if poles is None else np.asarray(poles, dtype=np.complex128)
    panels = _initial_panels(rect, nodes, poles, _PANEL_ORDER)
    cap = max(max_nodes, 2 * len(panels) * _PANEL_ORDER)
    prev = None
    change = math.inf
    while True:
        z, dz = _panel_nodes(panels, _PANEL_ORDER)
        w = dz / (2j * math.pi)
        if weight is not None:
            w = w * weight(z)
        try:
            value = _kernels.resolvent_sum(A, z, w)
        except np.linalg.LinAlgError as exc:
            raise ContourError(f"resolvent solve broke down: {exc}") from exc
        if prev is not None:
            change = float(np.linalg.norm(value - prev))
            if change <= tol:
                break
        if 2 * z.size > cap:
            warnings.warn(f"contour quadrature stopped at {z.size} nodes without reaching {tol:g} "
                          f"(last change {change:.3g})", RuntimeWarning, stacklevel=2)
            break
        prev = value
        panels = [half for a, b in panels for half in ((a, 0.5 * (a + b)), (0.5 * (a + b), b))]
    log.debug("contour quadrature: %d nodes, last change %.3g", z.size, change)
    if full_output:
        return value, QuadratureInfo(int(z.size), change <= tol, change)
    return value


def check_contour_margin(eigenvalues, rect: Rectangle, margin: float = DEFAULT_CONTOUR_MARGIN) -> float:
    dist = rect.boundary_distance(eigenvalues)
    dmin = float(np.min(dist)) if dist.size else math.inf
    if dmin < margin:
        raise ContourError(f"an eigenvalue lies within {dmin:.3g} of the contour (margin {margin:g})")
    return dmin


def riesz_projection_contour(op: OperatorSpec, region: Rectangle, nodes: int = 512,
                             margin: float = DEFAULT_CONTOUR_MARGIN) -> np.ndarray:
    """Riesz projection onto the eigenvalues enclosed by ``region``, by quadrature."""
    A = op.matrix()
    poles = np.linalg.eigvals(A)
    check_contour_margin(poles, region, margin)
    return contour_integral(A, region, None, nodes=nodes, poles=poles)


# ---------------------------------------------------------------------------
# OP1-OP5 validation and the Y cut
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomVerdict:
    passed: bool
    detail: str
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {"passed": self.passed, "vacuous": self.vacuous, "detail": self.detail}


@dataclass
class ValidationReport:
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def failures(self) -> list:
        return [k for k, v in self.verdicts.items() if not v.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()}}


def _conjugate_matching(points: Sequence[SpectrumPoint], tol: float):
    """Greedy nearest-conjugate matching; returns the first unmatched point or None."""
    unmatched = list(range(len(points)))
    while unmatched:
        i = unmatched.pop(0)
        target = points[i].s.conjugate()
        if abs(points[i].s - target) <= tol:
            continue
        if not unmatched:
            return points[i], None
        d = [abs(points[j].s - target) for j in unmatched]
        k = int(np.argmin(d))
        j = unmatched[k]
        if d[k] > tol:
            return points[i], None
        if points[j].mult != points[i].mult:
            return points[i], points[j]
        unmatched.pop(k)
    return None


def validate_op_axioms(op: OperatorSpec, cluster_tol: float = DEFAULT_CLUSTER_TOL,
                       margin: float = DEFAULT_STRIP_MARGIN) -> ValidationReport:
    report = ValidationReport()
    v = report.verdicts
    v["OP1"] = AxiomVerdict(True, "pass (vacuous, finite-dimensional): every matrix is closed", True)
    v["OP2"] = AxiomVerdict(True, "pass (vacuous, finite-dimensional): spectrum is finite point spectrum", True)
    v["OP3-a"] = AxiomVerdict(True, "pass (vacuous, finite-dimensional): spectral subspaces are finite", True)
    try:
        eig = eigendata_of(op, cluster_tol)
    except SpectralError as exc:
        for name in ("OP3-b", "OP4", "OP5-a", "OP5-b"):
            v[name] = AxiomVerdict(False, f"eigendata unavailable: {exc}")
        return report

    bad = []
    for p in eig.points:
        try:
            nu = riesz_index(op, p, eig)
        except RankAmbiguityError as exc:
            bad.append(f"{p.s:.6g}: {exc}")
            continue
        if nu != 1:
            bad.append(f"{p.s:.6g}: Riesz index {nu}")
    v["OP3-b"] = AxiomVerdict(not bad, "; ".join(bad) or "all eigenvalues semisimple")

    re = eig.eigenvalues.real
    dist = np.minimum(re, 1.0 - re)
    worst = int(np.argmin(dist))
    v["OP4"] = AxiomVerdict(bool(dist[worst] > margin),
                            f"minimum distance to strip boundary {dist[worst]:.6g} at s={eig.points[worst].s:.6g}")

    below = bool(np.any(re < 0.5 - cluster_tol))
    above = bool(np.any(re > 0.5 + cluster_tol))
    v["OP5-a"] = AxiomVerdict(below == above,
                              f"Re<1/2 present: {below}; Re>1/2 present: {above}")

    miss = _conjugate_matching(eig.points, cluster_tol)
    if miss is None:
        v["OP5-b"] = AxiomVerdict(True, "spectrum closed under conjugation with equal multiplicities")
    elif miss[1] is None:
        v["OP5-b"] = AxiomVerdict(False, f"no conjugate partner for s={miss[0].s:.6g}")
    else:
        v["OP5-b"] = AxiomVerdict(False, f"multiplicity mismatch between s={miss[0].s:.6g} "
                                         f"and s={miss[1].s:.6g}")
    return report


def sigma_Y(eig: EigenData, Y: float, default_epsilon: float = DEFAULT_EPSILON_Y,
            tol: float = 1e-9):
    """Points with |Im s| <= Y, and the half-gap epsilon_Y to the first excluded |Im s|."""
    if not Y > 0:
        raise SpectralError(f"Y must be positive, got {Y}")
    inside, outside = [], []
    for p in eig.points:
        h = abs(p.s.imag)
        if abs(h - Y) <= tol:
            raise DegenerateCutError(f"Y={Y} coincides with |Im s|={h} of s={p.s}; perturb Y")
        (inside if h <= Y else outside).append(p)
    if outside:
        eps = 0.5 * (min(abs(p.s.imag) for p in outside) - Y)
    else:
        eps = default_epsilon
    return inside, eps
