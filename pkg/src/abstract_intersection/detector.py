"""Power sums of cut-off eigenvalues and the one-sided RH-violation test.

With lambda_j = q**s_j, every |lambda_j| equals q**(1/2) exactly when the
spectrum in the cut lies on Re s = 1/2, so |nu_n| <= 2g q**(n/2) for all n.
Exceeding that bound at any n therefore proves an off-line eigenvalue.
Sums are formed on the normalized values q**(s_j - 1/2) so that long scans
do not overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .calculus import CutoffFunction
from .spectral import EigenData

DETECTION_SLACK = 1e-9
DEFAULT_N_DETECT = 500


@dataclass(frozen=True, eq=False)
class PowerSumSeries:
    """nu_n = sum_j mult_j lambda_j**n for n = 1..N, with the data it came from."""

    q: float
    two_g: int
    points: np.ndarray
    weights: np.ndarray
    normalized: np.ndarray

    @property
    def N(self) -> int:
        return len(self.normalized)

    @property
    def nu(self) -> np.ndarray:
        n = np.arange(1, self.N + 1)
        with np.errstate(over="ignore"):
            return self.normalized * self.q ** (n / 2)

    @property
    def lambdas(self) -> np.ndarray:
        return np.exp(self.points * math.log(self.q))


def power_sums(phi: CutoffFunction, eig: EigenData, N: int = DEFAULT_N_DETECT) -> PowerSumSeries:
    if N < 1:
        raise ValueError("N must be at least 1")
    if len(phi.points) != len(eig.points):
        raise ValueError("cut-off was built from different eigendata")
    keep = phi.support
    pts = np.array(phi.points, dtype=np.complex128)[keep]
    w = np.array(phi.mults, dtype=np.float64)[keep]
    log_mu = (pts - 0.5) * math.log(phi.q)
    S = _kernels.power_sums(log_mu, w.astype(np.complex128), N)
    return PowerSumSeries(phi.q, int(w.sum()), pts, w, S)


def growth_witness(lambdas: Sequence[complex], N: int = DEFAULT_N_DETECT,
                   rtol: float = 1e-12) -> Optional[int]:
    """Smallest n <= N with max|lambda|**n <= |sum lambda**n|, or None.

    The comparison is made after dividing by the largest modulus, with a
    relative slack ``rtol`` for rounding. None only means nothing was found
    up to N.
    """
    lam = np.asarray(lambdas, dtype=np.complex128)
    if lam.size == 0:
        raise ValueError("growth_witness needs at least one value")
    if N < 1:
        raise ValueError("N must be at least 1")
    r = np.max(np.abs(lam))
    if r == 0.0:
        return 1
    nz = lam[lam != 0]
    log_mu = np.log(nz / r)
    S = _kernels.power_sums(log_mu, np.ones(nz.size, dtype=np.complex128), N)
    hits = np.nonzero(np.abs(S) >= 1.0 - rtol)[0]
    return int(hits[0]) + 1 if hits.size else None


@dataclass(frozen=True)
class DetectionVerdict:
    verdict: str
    witness_n: Optional[int]
    margin: float
    N: int

    @property
    def violation(self) -> bool:
        return self.verdict == "violation"

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "margin": self.margin, "N": self.N}
        if self.witness_n is not None:
            out["witness_n"] = self.witness_n
        return out


def detection_margins(series: PowerSumSeries) -> np.ndarray:
    """|nu_n| / (2g q**(n/2)) for n = 1..N."""
    if series.two_g == 0:
        return np.zeros(series.N)
    return np.abs(series.normalized) / series.two_g


def detect_rh_violation(series: PowerSumSeries, slack: float = DETECTION_SLACK) -> DetectionVerdict:
    """'violation' at the first n with |nu_n| > 2g q**(n/2) (1 + slack), else 'no-evidence'."""
    if series.q == 1.0:
        raise ValueError("q must differ from 1")
    m = detection_margins(series)
    hits = np.nonzero(m > 1.0 + slack)[0]
    if hits.size:
        n = int(hits[0])
        return DetectionVerdict("violation", n + 1, float(m[n]), series.N)
    return DetectionVerdict("no-evidence", None, float(m.max()) if m.size else 0.0, series.N)


SENSITIVITY_DELTAS = (0.01, 0.02, 0.05, 0.1, 0.2)


def detection_horizon(q: float, two_g: int, delta: float) -> Optional[int]:
    """Smallest n with q**(|delta| n) > 2 two_g - 2.

    For a spectrum with one off-line conjugate quadruple at distance delta,
    every growth witness of the dominant pair at or beyond this n forces
    |nu_n| over the bound. None when 2g = 0 or delta = 0.
    """
    if two_g == 0 or delta == 0 or q == 1.0:
        return None
    target = max(2.0 * two_g - 2.0, 1.0)
    rate = abs(delta * math.log(q))
    return int(math.floor(math.log(target) / rate)) + 1


def sensitivity_table(q: float, two_g: int, deltas=SENSITIVITY_DELTAS) -> dict:
    return {f"{d:g}": detection_horizon(q, two_g, d) for d in deltas}


def direct_rh_check(eig: EigenData, tol: float = 1e-9) -> bool:
    """True iff every eigenvalue has |Re s - 1/2| <= tol."""
    return bool(np.all(np.abs(eig.eigenvalues.real - 0.5) <= tol))
