"""Cut-off functional calculus: phi_Y(A), its traces, q(Y) and g(Y).

A cut-off is stored as its value map on the spectrum plus the points 0 and 1.
That map is all that the spectral formula, the traces and the model ever
read; the contour route integrates the entire function q**s instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    DEFAULT_CONTOUR_MARGIN,
    EigenData,
    OperatorSpec,
    Rectangle,
    SpectralError,
    check_contour_margin,
    contour_integral,
    sigma_Y,
)

DEFAULT_Q = 4.0


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    """Value map of phi_Y on sigma(A) and {0, 1}.

    ``point_values[i]`` is phi_Y at ``points[i]``: q**s inside the cut,
    zero outside. ``at_zero`` is 1 and ``q`` is the value at 1.
    """

    q: float
    Y: float
    epsilon: float
    points: tuple
    mults: tuple
    point_values: np.ndarray
    at_zero: complex = 1.0

    @property
    def values(self) -> dict:
        out = {complex(s): complex(v) for s, v in zip(self.points, self.point_values)}
        out[0j] = complex(self.at_zero)
        out[1 + 0j] = complex(self.q)
        return out

    @property
    def support(self) -> np.ndarray:
        return self.point_values != 0

    @property
    def two_g(self) -> int:
        return int(sum(m for m, keep in zip(self.mults, self.support) if keep))

    @property
    def genus(self) -> float:
        return self.two_g / 2

    def contour(self) -> Rectangle:
        return Rectangle.strip_box(self.Y, self.epsilon)

    def __mul__(self, other: "CutoffFunction") -> "CutoffFunction":
        """Pointwise product of two value maps over the same spectrum and cut."""
        if not isinstance(other, CutoffFunction):
            return NotImplemented
        if self.points != other.points or self.Y != other.Y:
            raise SpectralError("value maps must share the spectrum and the cut Y")
        return CutoffFunction(self.q * other.q, self.Y, self.epsilon, self.points, self.mults,
                              self.point_values * other.point_values, self.at_zero * other.at_zero)

    def __pow__(self, n: int) -> "CutoffFunction":
        n = int(n)
        if n < 1:
            raise ValueError("only positive powers of a cut-off are supported")
        return CutoffFunction(self.q ** n, self.Y, self.epsilon, self.points, self.mults,
                              self.point_values ** n, self.at_zero ** n)


@dataclass(frozen=True, eq=False)
class CalculusResult:
    phiA: np.ndarray
    image_dim: int

    @property
    def genus(self) -> float:
        return self.image_dim / 2


def build_cutoff(eig: EigenData, Y: float, q: float = DEFAULT_Q) -> CutoffFunction:
    q = float(q)
    if not q > 0 or q == 1.0:
        raise SpectralError(f"q must lie in (0,1) or (1,inf), got {q}")
    inside, eps = sigma_Y(eig, Y)
    keep = {p.s for p in inside}
    log_q = math.log(q)
    vals = np.array([np.exp(p.s * log_q) if p.s in keep else 0.0 for p in eig.points],
                    dtype=np.complex128)
    return CutoffFunction(q, float(Y), float(eps), tuple(p.s for p in eig.points),
                          tuple(p.mult for p in eig.points), vals)


def apply_cutoff_spectral(eig: EigenData, phi: CutoffFunction) -> CalculusResult:
    """phi(A) as the sum of phi(s) P_s over the spectrum."""
    if len(phi.points) != len(eig.points):
        raise SpectralError("cut-off was built from different eigendata")
    n = eig.projectors[0].shape[0]
    phiA = np.zeros((n, n), dtype=np.complex128)
    for v, P in zip(phi.point_values, eig.projectors):
        if v != 0:
            phiA += v * P
    return CalculusResult(phiA, phi.two_g)


def apply_cutoff_contour(op: OperatorSpec, phi: CutoffFunction, nodes: int = 512,
                         margin: float = DEFAULT_CONTOUR_MARGIN, full_output: bool = False):
    """phi_Y(A) by quadrature of q**s (s - A)^{-1} around the cut-off box."""
    A = op.matrix()
    rect = phi.contour()
    poles = np.linalg.eigvals(A)
    check_contour_margin(poles, rect, margin)
    log_q = math.log(phi.q)
    return contour_integral(A, rect, lambda z: np.exp(z * log_q), nodes=nodes, poles=poles,
                            full_output=full_output)


def trace_power(eig: EigenData, phi: CutoffFunction, n: int) -> complex:
    """Sum of mult(s) * phi(s)**n over the spectrum.

    At n = 0 only points in the support of phi count, i.e. the result is
    2g: the trace of the identity on Image(phi(A)).
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    keep = phi.support
    mults = np.asarray(phi.mults, dtype=np.float64)[keep]
    if n == 0:
        return complex(mults.sum())
    return complex(np.sum(mults * phi.point_values[keep] ** n))
