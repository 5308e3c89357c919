"""Unit-area planar lattices, the modular flow, and its periodic orbits.

A lattice is stored by two complex generators (omega1, omega2) with
Im(omega2/omega1) > 0 and unit covolume.  The flow t acts on every point
x + iy as e^t x + i e^{-t} y; periodic orbits come from hyperbolic
elements of SL(2, Z) via the eigenvector construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClosureFailed,
    DegenerateGenerators,
    NotHyperbolic,
    NotUnimodular,
    ReductionDiverged,
)

_AREA_TOL = 1e-12
_DEGENERACY_REL_TOL = 1e-14
_REDUCE_MAX_STEPS = 10_000


def _area(g1: complex, g2: complex) -> float:
    """Signed area of the (g1, g2) parallelogram: Im(conj(g1) * g2)."""
    return (g1.conjugate() * g2).imag


@dataclass(frozen=True)
class Lattice:
    """Oriented unit-area lattice given by generators omega1, omega2."""

    omega1: complex
    omega2: complex

    def __post_init__(self):
        area = _area(self.omega1, self.omega2)
        if area <= 0:
            raise ValueError("generators must satisfy Im(omega2/omega1) > 0")
        if abs(area - 1.0) > _AREA_TOL:
            raise ValueError(f"lattice area {area!r} deviates from 1 by more than {_AREA_TOL}")

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    def points(self, window: int) -> list[complex]:
        """All lattice points m*omega1 + n*omega2 with |m|, |n| <= window."""
        return [
            m * self.omega1 + n * self.omega2
            for m in range(-window, window + 1)
            for n in range(-window, window + 1)
        ]


@dataclass(frozen=True)
class MakeLatticeResult:
    lattice: Lattice
    scale: float  # positive factor the input generators were multiplied by
    swapped: bool  # True if the generators were exchanged to fix orientation


def make_lattice(g1: complex, g2: complex) -> MakeLatticeResult:
    """Normalize a generator pair to a unit-area, positively oriented lattice.

    Rescales by a positive real factor and swaps the generators if needed;
    both adjustments are reported in the result.
    """
    g1 = complex(g1)
    g2 = complex(g2)
    area = _area(g1, g2)
    if abs(area) < _DEGENERACY_REL_TOL * (abs(g1) * abs(g2)) or not math.isfinite(area):
        raise DegenerateGenerators(f"generators {g1}, {g2} span no area")
    swapped = area < 0
    if swapped:
        g1, g2 = g2, g1
        area = -area
    scale = 1.0 / math.sqrt(area)
    return MakeLatticeResult(Lattice(g1 * scale, g2 * scale), scale, swapped)


def flow(L: Lattice, t: float) -> Lattice:
    """Apply the modular flow: each generator x + iy maps to e^t x + i e^{-t} y."""
    et = math.exp(t)
    emt = math.exp(-t)

    def act(g: complex) -> complex:
        return complex(et * g.real, emt * g.imag)

    g1, g2 = act(L.omega1), act(L.omega2)
    area = _area(g1, g2)
    assert abs(area - 1.0) < _AREA_TOL, "modular flow must preserve area"
    return Lattice(g1, g2)


@dataclass(frozen=True)
class UnimodularMatrix:
    """Row-major integer 2x2 matrix with determinant +1 or -1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.det not in (1, -1):
            raise NotUnimodular(f"determinant {self.det} not in {{+1, -1}}")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    @staticmethod
    def identity() -> "UnimodularMatrix":
        return UnimodularMatrix(1, 0, 0, 1)

    @staticmethod
    def from_array(m: np.ndarray) -> "UnimodularMatrix":
        return UnimodularMatrix(int(m[0, 0]), int(m[0, 1]), int(m[1, 0]), int(m[1, 1]))


@dataclass(frozen=True)
class PeriodicOrbit:
    """Solution (U, t0) of diag(e^t0, e^-t0) U = U B' for a hyperbolic B."""

    U: np.ndarray  # 2x2 real, |det| = 1; columns are the lattice generators
    t0: float
    B: UnimodularMatrix
    lambda1: float  # dominant eigenvalue of B (or -B if negated), > 1
    negated: bool  # True if B had trace < -2 and -B was solved instead
    swapped: bool  # True if U's columns were exchanged to fix orientation

    @property
    def lattice(self) -> Lattice:
        g1 = complex(self.U[0, 0], self.U[1, 0])
        g2 = complex(self.U[0, 1], self.U[1, 1])
        return make_lattice(g1, g2).lattice


def solve_periodic_orbit(B: UnimodularMatrix) -> PeriodicOrbit:
    """Find the unit-area lattice fixed (as a point set) by the flow at time t0.

    The rows of U are left eigenvectors of B, computed in closed form;
    lambda1 > 1 gives t0 = ln(lambda1) > 0.
    """
    if B.det != 1:
        raise NotUnimodular(f"orbit solver needs det = +1, got {B.det}")
    tr = B.trace
    if abs(tr) <= 2:
        raise NotHyperbolic(f"|trace| = {abs(tr)} <= 2: no periodic orbit with t0 > 0")
    negated = tr < 0
    M = -B if negated else B
    tr = M.trace
    disc = math.sqrt(tr * tr - 4)
    lam1 = (tr + disc) / 2.0
    lam2 = 1.0 / lam1
    t0 = math.log(lam1)

    def left_eigvec(lam: float) -> tuple[float, float]:
        # Row vector r with r M = lam r, i.e. eigenvector of M^T = [[a, c], [b, d]].
        if M.c != 0:
            return (M.c, lam - M.a)
        if M.b != 0:
            return (lam - M.d, M.b)
        raise AssertionError("integer hyperbolic matrix cannot be diagonal")

    U = np.array([left_eigvec(lam1), left_eigvec(lam2)], dtype=float)
    detU = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
    U /= math.sqrt(abs(detU))
    g1 = complex(U[0, 0], U[1, 0])
    g2 = complex(U[0, 1], U[1, 1])
    swapped = _area(g1, g2) < 0
    if swapped:
        U = U[:, ::-1].copy()
    return PeriodicOrbit(U=U, t0=t0, B=B, lambda1=lam1, negated=negated, swapped=swapped)


def verify_closure(orbit: PeriodicOrbit, tol: float = 1e-9) -> UnimodularMatrix:
    """Certify t0 * Lambda = Lambda: round U^-1 diag(e^t0, e^-t0) U to integers.

    Returns the integer matrix; its failure to be integral within tol (or
    unimodular) raises ClosureFailed with the worst entrywise deviation.
    """
    D = np.diag([math.exp(orbit.t0), math.exp(-orbit.t0)])
    M = np.linalg.solve(orbit.U, D @ orbit.U)
    R = np.rint(M)
    dev = float(np.max(np.abs(M - R)))
    if dev >= tol:
        raise ClosureFailed(dev)
    det = round(R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0])
    if abs(det) != 1:
        raise ClosureFailed(dev)
    return UnimodularMatrix.from_array(R)


@dataclass(frozen=True)
class TauReduction:
    """Reduced period ratio tau plus the basis change that produced it.

    Applying `transform` to the original generators and dividing by `scale`
    yields the pair (1, tau).
    """

    tau: complex
    transform: UnimodularMatrix
    scale: complex

    @property
    def period1(self) -> complex:
        return self.scale

    @property
    def period2(self) -> complex:
        return self.scale * self.tau


def apply_basis_change(T: UnimodularMatrix, g1: complex, g2: complex) -> tuple[complex, complex]:
    """New generators for the basis change acting on tau = g2/g1 by Mobius action."""
    new_g1 = T.c * g2 + T.d * g1
    new_g2 = T.a * g2 + T.b * g1
    return new_g1, new_g2


def reduce_tau(L: Lattice) -> TauReduction:
    """Reduce tau = omega2/omega1 into |Re tau| <= 1/2, |tau| >= 1 by shift/invert."""
    tau = L.tau
    T = np.eye(2, dtype=np.int64)
    shift = lambda n: np.array([[1, -n], [0, 1]], dtype=np.int64)
    invert = np.array([[0, -1], [1, 0]], dtype=np.int64)
    try:
        for _ in range(_REDUCE_MAX_STEPS):
            n = round(tau.real)
            if n:
                tau -= n
                T = shift(n) @ T
            if abs(tau) < 1.0 - 1e-15:
                tau = -1.0 / tau
                T = invert @ T
            elif abs(tau.real) <= 0.5 + 1e-15:
                break
        else:
            raise ReductionDiverged("reduction iteration cap exceeded")
    except (ValueError, OverflowError) as exc:  # round() on NaN / overflow
        raise ReductionDiverged(str(exc)) from exc
    transform = UnimodularMatrix.from_array(T)
    new_g1, new_g2 = apply_basis_change(transform, L.omega1, L.omega2)
    assert abs(new_g2 / new_g1 - tau) < 1e-9 * max(1.0, abs(tau))
    return TauReduction(tau=tau, transform=transform, scale=new_g1)
