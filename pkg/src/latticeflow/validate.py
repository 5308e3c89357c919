"""Embedded cross-validation suites.

Each suite compares independent computation paths (q-series vs truncated
lattice sums, analytic identities, end-to-end loop closure) and reports its
worst residual against a fixed threshold. `quick` keeps the direct sums
small for a sub-minute run; `full` widens sample counts and truncation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import elliptic
from .elliptic import TruncationSpec, invariants_of, is_pole, wp, wp_prime, zeta_w
from .lattice import UnimodularMatrix, flow, make_lattice, solve_periodic_orbit


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold


def _sample_lattices(rng: random.Random, count: int):
    out = []
    for _ in range(count):
        while True:
            re = rng.uniform(-0.5, 0.5)
            im = rng.uniform(0.9, 1.8)
            if abs(complex(re, im)) >= 1:
                break
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        out.append(make_lattice(phase, phase * complex(re, im)).lattice)
    return out


def _sample_points(rng: random.Random, L, count: int, min_dist=0.08):
    pts = []
    while len(pts) < count:
        z = rng.uniform(-0.45, 0.45) * L.omega1 + rng.uniform(-0.45, 0.45) * L.omega2
        near = min(
            abs(z - (m * L.omega1 + n * L.omega2))
            for m in (-1, 0, 1)
            for n in (-1, 0, 1)
        )
        if near > min_dist * abs(L.omega1):
            pts.append(z)
    return pts


def _suite_oracle(rng, lattices, points_per, shells) -> CheckResult:
    """Fast q-series wp against the truncated direct lattice sum."""
    spec = TruncationSpec(shells=shells)
    worst = 0.0
    for L in lattices:
        inv = invariants_of(L)
        for z in _sample_points(rng, L, points_per):
            fast = wp(z, L, inv)
            direct = elliptic.wp_direct(z, L, spec)
            if is_pole(fast) or is_pole(direct):
                continue
            worst = max(worst, abs(fast - direct) / (1 + abs(direct)))
    # direct-sum truncation tail scales as 1/shells^2; threshold follows it
    return CheckResult("oracle-equivalence", worst, max(1e-6, 0.6 / shells**2))


def _suite_differential_equation(rng, lattices, points_per) -> CheckResult:
    """wp'^2 = 4 wp^3 - g2 wp - g3, normalized by 1 + |wp|^3."""
    worst = 0.0
    for L in lattices:
        inv = invariants_of(L)
        for z in _sample_points(rng, L, points_per):
            p = wp(z, L, inv)
            dp = wp_prime(z, L, inv)
            if is_pole(p) or is_pole(dp):
                continue
            res = abs(dp**2 - (4 * p**3 - inv.g2 * p - inv.g3)) / (1 + abs(p) ** 3)
            worst = max(worst, res)
    return CheckResult("differential-equation", worst, 1e-6)


def _suite_legendre(lattices) -> CheckResult:
    """eta1 omega2 - eta2 omega1 = 2 pi i."""
    worst = 0.0
    for L in lattices:
        inv = invariants_of(L)
        res = abs(inv.eta1 * inv.period2 - inv.eta2 * inv.period1 - 2j * np.pi)
        worst = max(worst, res)
    return CheckResult("legendre-relation", worst, 1e-8)


def _suite_loop_closure(rng, points) -> CheckResult:
    """wp is identical on the orbit lattice and its image under flow by t0."""
    orbit = solve_periodic_orbit(UnimodularMatrix(2, 1, 1, 1))
    L0 = orbit.lattice
    L1 = flow(L0, orbit.t0)
    inv0, inv1 = invariants_of(L0), invariants_of(L1)
    worst = 0.0
    for z in _sample_points(rng, L0, points):
        a = wp(z, L0, inv0)
        b = wp(z, L1, inv1)
        worst = max(worst, abs(a - b) / (1 + abs(a)))
        za = zeta_w(z, L0, inv0)
        zb = zeta_w(z, L1, inv1)
        worst = max(worst, abs(za - zb) / (1 + abs(za)))
    return CheckResult("loop-closure", worst, 1e-7)


def run_suites(level: str = "quick") -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown validation level {level!r}")
    rng = random.Random(20240515)
    if level == "quick":
        lattices = _sample_lattices(rng, 3)
        return [
            _suite_oracle(rng, lattices[:2], 4, shells=200),
            _suite_differential_equation(rng, lattices, 12),
            _suite_legendre(lattices),
            _suite_loop_closure(rng, 8),
        ]
    lattices = _sample_lattices(rng, 10)
    return [
        _suite_oracle(rng, lattices[:4], 10, shells=800),
        _suite_differential_equation(rng, lattices, 50),
        _suite_legendre(lattices),
        _suite_loop_closure(rng, 30),
    ]
