import cmath
import math
import random

import numpy as np
import pytest

from latticeflow.elliptic import (
    DEFAULT_TRUNCATION,
    POLE,
    TruncationSpec,
    _jacobi_sn,
    eisenstein,
    invariants_of,
    is_pole,
    jacobi_cn,
    modulus_from_tau,
    quarter_period,
    sigma_w,
    wp,
    wp_direct,
    wp_prime,
    wp_prime_direct,
    zeta_w,
)
from latticeflow.lattice import UnimodularMatrix, flow, make_lattice, solve_periodic_orbit

SQUARE = make_lattice(1, 1j).lattice
HEX = make_lattice(1, cmath.exp(1j * math.pi / 3)).lattice


def random_reduced_lattice(rng):
    while True:
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.8))
        if abs(tau) >= 1:
            break
    phase = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    return make_lattice(phase, phase * tau).lattice


def random_cell_point(rng, L, min_dist=0.05):
    while True:
        z = rng.uniform(-0.5, 0.5) * L.omega1 + rng.uniform(-0.5, 0.5) * L.omega2
        d = min(
            abs(z - (i * L.omega1 + j * L.omega2)) for i in (-1, 0, 1) for j in (-1, 0, 1)
        )
        if d > min_dist * abs(L.omega1):
            return z


class TestTruncationSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            TruncationSpec(shells=1)
        with pytest.raises(ValueError):
            TruncationSpec(qterms=2)
        with pytest.raises(ValueError):
            TruncationSpec(tol=0.0)


class TestEisenstein:
    def test_square_k6_vanishes(self):
        assert abs(eisenstein(SQUARE, 6)) < 1e-10

    def test_hexagonal_k4_vanishes(self):
        # the symmetry forces G4(hex) = 0, but the square index window is not
        # invariant under the sixth root of unity, so the truncated sum only
        # tends to 0 at the 1/shells^2 truncation rate
        a = abs(eisenstein(HEX, 4, TruncationSpec(shells=60)))
        b = abs(eisenstein(HEX, 4, TruncationSpec(shells=120)))
        assert a < 1e-3
        assert b < a / 3  # consistent with the 1/s^2 tail

    def test_square_k4_self_convergence(self):
        a = eisenstein(SQUARE, 4, TruncationSpec(shells=60))
        b = eisenstein(SQUARE, 4, TruncationSpec(shells=120))
        c = eisenstein(SQUARE, 4, TruncationSpec(shells=240))
        assert a.real > 0
        assert abs(a.imag) < 1e-10
        assert abs(a - b) / abs(b) <= 1e-4
        # error quarters when shells double: 1/s^2 truncation tail
        assert abs(b - c) < abs(a - b) / 3

    def test_odd_k_rejected(self):
        with pytest.raises(ValueError):
            eisenstein(SQUARE, 5)


class TestInvariants:
    def test_square_symmetry(self):
        inv = invariants_of(SQUARE)
        assert abs(inv.g3) < 1e-9
        assert abs(inv.g2.imag) < 1e-9

    def test_hexagonal_symmetry(self):
        inv = invariants_of(HEX)
        assert abs(inv.g2) < 1e-9

    def test_e_sum_and_vieta(self):
        rng = random.Random(10)
        for _ in range(5):
            L = random_reduced_lattice(rng)
            inv = invariants_of(L)
            scale = max(1.0, abs(inv.e1), abs(inv.e2), abs(inv.e3))
            assert abs(inv.e1 + inv.e2 + inv.e3) < 1e-9 * scale
            assert abs(inv.g2 + 4 * (inv.e1 * inv.e2 + inv.e1 * inv.e3 + inv.e2 * inv.e3)) < 1e-9 * abs(inv.g2)
            assert abs(inv.g3 - 4 * inv.e1 * inv.e2 * inv.e3) < 1e-9 * max(1.0, abs(inv.g3))

    def test_g2_g3_match_lattice_sums(self):
        # fast q-series invariants vs the truncated Eisenstein sums
        rng = random.Random(20)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        spec = TruncationSpec(shells=300)
        assert abs(inv.g2 - 60 * eisenstein(L, 4, spec)) / abs(inv.g2) < 1e-5
        assert abs(inv.g3 - 140 * eisenstein(L, 6, spec)) / abs(inv.g3) < 1e-7

    def test_nome_inside_disk(self):
        rng = random.Random(30)
        for _ in range(5):
            inv = invariants_of(random_reduced_lattice(rng))
            assert abs(inv.q) < 1


class TestWpDirect:
    def test_laurent_leading_term(self):
        z = 1e-4 * SQUARE.omega1
        assert abs(z * z * wp_direct(z, SQUARE) - 1) < 1e-6

    def test_even(self):
        z = 0.31 + 0.17j
        assert abs(wp_direct(-z, SQUARE) - wp_direct(z, SQUARE)) < 1e-9

    def test_periodicity(self):
        L = random_reduced_lattice(random.Random(1))
        z = random_cell_point(random.Random(2), L)
        a = wp_direct(z, L)
        b = wp_direct(z + L.omega1, L)
        c = wp_direct(z + L.omega2, L)
        assert abs(a - b) / abs(a) < 1e-7
        assert abs(a - c) / abs(a) < 1e-7

    def test_pole_signal(self):
        assert is_pole(wp_direct(0, SQUARE))
        assert is_pole(wp_direct(SQUARE.omega1 + 1e-14, SQUARE))


class TestWpFast:
    def test_half_period_values(self):
        rng = random.Random(3)
        for _ in range(3):
            L = random_reduced_lattice(rng)
            inv = invariants_of(L)
            for e, h in [(inv.e1, inv.period1 / 2), (inv.e2, inv.period2 / 2),
                         (inv.e3, (inv.period1 + inv.period2) / 2)]:
                assert abs(wp(h, L, inv) - e) < 1e-8 * max(1.0, abs(e))

    def test_differential_equation(self):
        rng = random.Random(4)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        for _ in range(50):
            z = random_cell_point(rng, L)
            p = wp(z, L, inv)
            pp = wp_prime(z, L, inv)
            res = pp * pp - (4 * p**3 - inv.g2 * p - inv.g3)
            assert abs(res) / (1 + abs(p) ** 3) < 1e-6

    def test_oracle_equivalence_sample(self):
        # small-sample version of the acceptance sweep (same tolerance)
        rng = random.Random(5)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        zs = np.array([random_cell_point(rng, L) for _ in range(10)])
        d = wp_direct(zs, L, TruncationSpec(shells=800))
        f = wp(zs, L, inv)
        assert np.max(np.abs(f - d) / (1 + np.abs(d))) <= 1e-6

    def test_double_periodicity_both_paths(self):
        rng = random.Random(6)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        z = random_cell_point(rng, L)
        for fn in (lambda x: wp(x, L, inv), lambda x: wp_direct(x, L)):
            a = fn(z)
            assert abs(fn(z + L.omega1) - a) / abs(a) < 1e-7
            assert abs(fn(z + L.omega2) - a) / abs(a) < 1e-7

    def test_flow_compatibility(self):
        # the mathematical heart of exact looping: wp depends only on the
        # lattice as a point set, so the orbit period leaves it unchanged
        orbit = solve_periodic_orbit(UnimodularMatrix(2, 1, 1, 1))
        L = orbit.lattice
        Lt = flow(L, orbit.t0)
        inv0 = invariants_of(L)
        invt = invariants_of(Lt)
        rng = random.Random(7)
        for _ in range(20):
            z = random_cell_point(rng, L)
            a = wp(z, L, inv0)
            b = wp(z, Lt, invt)
            assert abs(a - b) / abs(a) < 1e-7

    def test_homogeneity(self):
        rng = random.Random(8)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        for _ in range(5):
            c = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if abs(c) < 0.1:
                continue
            res = make_lattice(c * L.omega1, c * L.omega2)
            eff = c * res.scale  # the actual factor relating the point sets
            if res.swapped:
                eff = eff  # swap changes basis order, not the point set
            inv2 = invariants_of(res.lattice)
            z = random_cell_point(rng, L)
            a = wp(eff * z, res.lattice, inv2)
            b = wp(z, L, inv) / eff**2
            assert abs(a - b) / abs(b) < 1e-8

    def test_pole_signal(self):
        inv = invariants_of(SQUARE)
        assert is_pole(wp(0, SQUARE, inv))
        vals = wp(np.array([0.0 + 0j, 0.3 + 0.2j]), SQUARE, inv)
        assert is_pole(vals[0]) and not is_pole(vals[1])


class TestWpPrime:
    def test_odd(self):
        L = random_reduced_lattice(random.Random(9))
        inv = invariants_of(L)
        z = random_cell_point(random.Random(10), L)
        assert abs(wp_prime(-z, L, inv) + wp_prime(z, L, inv)) < 1e-9 * abs(wp_prime(z, L, inv))

    def test_half_period_critical_point(self):
        L = random_reduced_lattice(random.Random(11))
        inv = invariants_of(L)
        assert abs(wp_prime(inv.period1 / 2, L, inv)) < 1e-7
        # oracle confirmation at its own (coarser) truncation floor
        assert abs(wp_prime_direct(inv.period1 / 2, L, TruncationSpec(shells=200))) < 1e-4

    def test_finite_difference_consistency(self):
        rng = random.Random(12)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        h = 1e-5
        for _ in range(10):
            z = random_cell_point(rng, L)
            fd = (wp(z + h, L, inv) - wp(z - h, L, inv)) / (2 * h)
            pp = wp_prime(z, L, inv)
            assert abs(fd - pp) / abs(pp) < 1e-5

    def test_oracle_equivalence_sample(self):
        rng = random.Random(13)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        zs = np.array([random_cell_point(rng, L) for _ in range(10)])
        d = wp_prime_direct(zs, L, TruncationSpec(shells=800))
        f = wp_prime(zs, L, inv)
        assert np.max(np.abs(f - d) / (1 + np.abs(d))) <= 1e-6


class TestZeta:
    def test_odd(self):
        L = random_reduced_lattice(random.Random(14))
        inv = invariants_of(L)
        z = random_cell_point(random.Random(15), L)
        assert abs(zeta_w(-z, L, inv) + zeta_w(z, L, inv)) < 1e-9 * abs(zeta_w(z, L, inv))

    def test_derivative_is_minus_wp(self):
        rng = random.Random(16)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        h = 1e-5
        for _ in range(10):
            z = random_cell_point(rng, L)
            fd = (zeta_w(z + h, L, inv) - zeta_w(z - h, L, inv)) / (2 * h)
            p = wp(z, L, inv)
            assert abs(fd + p) / abs(p) < 1e-5

    def test_legendre_relation(self):
        rng = random.Random(17)
        for _ in range(10):
            L = random_reduced_lattice(rng)
            inv = invariants_of(L)
            eta1 = 2 * zeta_w(inv.period1 / 2, L, inv)
            eta2 = 2 * zeta_w(inv.period2 / 2, L, inv)
            assert abs(eta1 * inv.period2 - eta2 * inv.period1 - 2j * math.pi) < 1e-8

    def test_quasi_periodicity(self):
        L = random_reduced_lattice(random.Random(18))
        inv = invariants_of(L)
        z = random_cell_point(random.Random(19), L)
        assert abs(zeta_w(z + L.omega1, L, inv) - zeta_w(z, L, inv)
                   - 2 * zeta_w(L.omega1 / 2, L, inv)) < 1e-9


class TestSigma:
    def test_zero_and_normalization(self):
        L = random_reduced_lattice(random.Random(20))
        inv = invariants_of(L)
        assert sigma_w(0, L, inv) == 0
        z = 1e-5 * L.omega1
        assert abs(sigma_w(z, L, inv) / z - 1) < 1e-6

    def test_odd(self):
        L = random_reduced_lattice(random.Random(21))
        inv = invariants_of(L)
        z = random_cell_point(random.Random(22), L)
        assert abs(sigma_w(-z, L, inv) + sigma_w(z, L, inv)) < 1e-9 * abs(sigma_w(z, L, inv))

    def test_log_second_derivative_is_minus_wp(self):
        rng = random.Random(23)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        h = 1e-4
        checked = 0
        while checked < 20:
            z = random_cell_point(rng, L, min_dist=0.15)
            vals = [sigma_w(z + k * h, L, inv) for k in (-1, 0, 1)]
            if any(abs(v) < 1e-12 for v in vals):
                continue
            lnc = [cmath.log(v) for v in vals]
            # unwrap: branch jumps make the second difference meaningless
            if max(abs(lnc[0].imag - lnc[1].imag), abs(lnc[2].imag - lnc[1].imag)) > 1:
                continue
            d2 = (lnc[0] - 2 * lnc[1] + lnc[2]) / h**2
            p = wp(z, L, inv)
            assert abs(d2 + p) / abs(p) < 1e-4
            checked += 1

    def test_quasi_periodicity(self):
        rng = random.Random(24)
        L = random_reduced_lattice(rng)
        inv = invariants_of(L)
        eta1 = 2 * zeta_w(L.omega1 / 2, L, inv)
        for _ in range(5):
            z = random_cell_point(rng, L)
            lhs = sigma_w(z + L.omega1, L, inv)
            rhs = -sigma_w(z, L, inv) * cmath.exp(eta1 * (z + L.omega1 / 2))
            assert abs(lhs - rhs) / abs(lhs) < 1e-7


class TestModulusFromTau:
    def test_square_point(self):
        assert abs(modulus_from_tau(1j) - 0.5) < 1e-10

    def test_cusp_limit(self):
        assert abs(modulus_from_tau(10j)) < 1e-10

    def test_lambda_identity(self):
        rng = random.Random(25)
        for _ in range(10):
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.0))
            if abs(tau) < 1:
                continue
            assert abs(modulus_from_tau(tau) + modulus_from_tau(-1 / tau) - 1) < 1e-9


class TestJacobiCn:
    def test_cn_zero_is_one(self):
        for m in (0.3, 0.3 + 0.1j, 0.9):
            assert abs(jacobi_cn(0, m) - 1) < 1e-12

    def test_degenerate_m_zero(self):
        u = 0.7 - 0.2j
        assert abs(jacobi_cn(u, 0) - cmath.cos(u)) < 1e-10

    def test_degenerate_m_one(self):
        u = 0.4 + 0.1j
        assert abs(jacobi_cn(u, 1) - 1 / cmath.cosh(u)) < 1e-10

    def test_pythagorean_identity(self):
        rng = random.Random(26)
        for _ in range(10):
            m = complex(rng.uniform(0.05, 0.9), rng.uniform(-0.2, 0.2))
            u = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
            s = _jacobi_sn(u, m)
            c = jacobi_cn(u, m)
            assert abs(s * s + c * c - 1) < 1e-8

    def test_real_quarter_period(self):
        # cn(K, m) = 0 for real 0 < m < 1
        m = 0.37
        K = quarter_period(m)
        assert abs(jacobi_cn(K, m)) < 1e-10
