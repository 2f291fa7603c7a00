from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import pytest

from rscong.congruence import (check_congruent, eisenstein_screen,
                               excluded_primes, sturm_bound)
from rscong.exactnum import (AlgNum, NotIntegral, QuadField, RATIONAL,
                             factor_rational_prime)
from rscong.forms import delta_family_qexp

F26 = QuadField(-26)
L13 = factor_rational_prime(13, F26)[0]


def rational_prime(l):
    return factor_rational_prime(l, RATIONAL)[0]


class TestSturm:
    def test_paper_cases(self):
        assert sturm_bound(13, 3) == 5
        assert sturm_bound(26, 1) == 3
        assert sturm_bound(12, 1) == 1

    def test_monotone(self):
        # monotone in the weight, and in the level along divisibility
        for N in (1, 2, 3, 6, 10):
            for k in (2, 4, 8, 16):
                assert sturm_bound(k + 2, N) >= sturm_bound(k, N)
                assert sturm_bound(k, 2 * N) >= sturm_bound(k, N)
                assert sturm_bound(k, 3 * N) >= sturm_bound(k, N)


class TestCheckCongruent:
    def test_74_pair(self, h_prime, h_dprime):
        rep = check_congruent(h_prime, h_dprime, L13, n_extra=50)
        assert rep.congruent and rep.first_failure is None
        assert rep.bound_used == 50

    def test_reflexive(self, h_prime):
        assert check_congruent(h_prime, h_prime, L13).congruent

    def test_symmetric(self, h_prime, h_dprime):
        a = check_congruent(h_prime, h_dprime, L13, n_extra=30)
        b = check_congruent(h_dprime, h_prime, L13, n_extra=30)
        assert a.congruent == b.congruent

    def test_constructed_failure(self):
        d = delta_family_qexp(12, 12)
        coeffs = list(d.coeffs)
        coeffs[2] = coeffs[2] + 1
        tweaked = replace(d, coeffs=tuple(coeffs), is_eigenform=False)
        rep = check_congruent(d, tweaked, rational_prime(5), n_extra=10)
        assert not rep.congruent and rep.first_failure == 2

    def test_integrality_guard(self):
        d = delta_family_qexp(12, 12)
        coeffs = list(d.coeffs)
        coeffs[3] = AlgNum.rational(Fraction(1, 5))
        bad = replace(d, coeffs=tuple(coeffs), is_eigenform=False)
        with pytest.raises(NotIntegral):
            check_congruent(d, bad, rational_prime(5), n_extra=10)


class TestEisensteinScreen:
    def test_ramanujan_fires(self):
        d = delta_family_qexp(12, 30)
        assert eisenstein_screen(d, rational_prime(691)) == "eis-12-1"

    def test_small_primes_do_not_fire(self):
        d = delta_family_qexp(12, 30)
        assert eisenstein_screen(d, rational_prime(5)) is None
        assert eisenstein_screen(d, rational_prime(11)) is None

    def test_74_alarm(self, h_prime, h_dprime):
        assert eisenstein_screen(h_prime, L13) == "eis-13-3"
        assert eisenstein_screen(h_dprime, L13) == "eis-13-3"


class TestExcludedPrimes:
    def test_74_sets(self):
        out = excluded_primes(13, 26, 3, 1)
        assert out["S_weight"][-1] == 23 and 13 in out["S_weight"]
        assert out["S_level"] == [3]

    def test_tiny(self):
        out = excluded_primes(2, 2, 1, 1)
        assert out["S_weight"] == [2] and out["S_level"] == []

    def test_level_factorization(self):
        out = excluded_primes(4, 8, 6, 35)
        assert out["S_level"] == [2, 3, 5, 7]
