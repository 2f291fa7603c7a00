from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from rscong.exactnum import (AlgNum, QuadField, RATIONAL, factor_rational_prime,
                             valuation, workdps)
from rscong.ratio import (CONGRUENT, INDETERMINATE, NOT_CONGRUENT, RatioVerdict,
                          ReconstructionFailed, compare_ratios, height_bits,
                          reconstruct_algebraic)

F26 = QuadField(-26)
L13 = factor_rational_prime(13, F26)[0]


class TestReconstruct:
    def test_third_from_forty_digits(self):
        with workdps(45):
            x = mpmath.mpf(1) / 3
        y, res = reconstruct_algebraic(x, RATIONAL, P=40)
        assert y == Fraction(1, 3) and res < mp.mpf(10) ** -38

    def test_quadratic_round_trip_sixty_digits(self):
        target = AlgNum(F26, Fraction(2, 5), Fraction(1, 5))
        x = target.embed(60)
        y, res = reconstruct_algebraic(x, F26, P=60)
        assert y == target

    def test_pi_fails_under_cap(self):
        with workdps(60):
            x = +mpmath.pi
        with pytest.raises(ReconstructionFailed):
            reconstruct_algebraic(x, RATIONAL, height_cap=10 ** 6, P=60)

    def test_real_quadratic_branch(self):
        F5 = QuadField(5)
        target = AlgNum(F5, Fraction(-3, 7), Fraction(2, 7))
        y, _ = reconstruct_algebraic(target.embed(80), F5, P=80)
        assert y == target

    def test_imaginary_part_in_rational_field_rejected(self):
        with workdps(50):
            x = mpmath.mpc(1, 1) / 3
        with pytest.raises(ReconstructionFailed):
            reconstruct_algebraic(x, RATIONAL, P=50)

    def test_round_trip_500_random(self):
        rng = random.Random(123)
        fields = [RATIONAL, F26, QuadField(-1), QuadField(3)]
        for _ in range(500):
            F = rng.choice(fields)
            num = lambda: Fraction(rng.randrange(-10 ** 4, 10 ** 4 + 1),
                                   rng.randrange(1, 10 ** 4))
            x = AlgNum(F, num(), num() if not F.is_rational else Fraction(0))
            y, res = reconstruct_algebraic(x.embed(80), F, P=80)
            assert y == x
            assert res <= mp.mpf(10) ** -40 * max(1, abs(x.embed(30)))

    def test_height_bits(self):
        x = AlgNum(F26, Fraction(1023, 7), Fraction(0))
        assert height_bits(x) == 10


def mk_verdict(exact: AlgNum | None, pair=(24, 25)):
    return RatioVerdict(pair, mpmath.mpc(0), exact,
                        mp.mpf(0) if exact is not None else None,
                        height_bits(exact) if exact is not None else 0)


class TestCompare:
    def test_identical(self):
        v = mk_verdict(AlgNum(F26, Fraction(3, 7), Fraction(1)))
        assert compare_ratios(v, mk_verdict(AlgNum(F26, Fraction(3, 7), Fraction(1))), L13) == CONGRUENT

    def test_missing_side_indeterminate(self):
        v1 = mk_verdict(AlgNum.rational(1).promote(F26))
        v2 = mk_verdict(None)
        assert compare_ratios(v1, v2, L13) == INDETERMINATE

    def test_difference_of_thirteen(self):
        v1 = mk_verdict(AlgNum.rational(Fraction(1, 5)).promote(F26))
        v2 = mk_verdict(AlgNum.rational(Fraction(1, 5) + 13).promote(F26))
        assert compare_ratios(v1, v2, L13) == CONGRUENT

    def test_unit_difference(self):
        v1 = mk_verdict(AlgNum.rational(Fraction(1, 5)).promote(F26))
        v2 = mk_verdict(AlgNum.rational(Fraction(2, 5)).promote(F26))
        assert compare_ratios(v1, v2, L13) == NOT_CONGRUENT

    def test_rational_vs_quadratic_promotion(self):
        v1 = mk_verdict(AlgNum.rational(Fraction(1, 2)))
        v2 = mk_verdict(AlgNum(F26, Fraction(1, 2), Fraction(13)))
        assert compare_ratios(v1, v2, L13) == CONGRUENT

    def test_nonintegral_sides_still_decided(self):
        v1 = mk_verdict(AlgNum.rational(Fraction(1, 13)).promote(F26))
        v2 = mk_verdict(AlgNum.rational(Fraction(2, 13)).promote(F26))
        assert compare_ratios(v1, v2, L13) == NOT_CONGRUENT
        assert v1.v_l == -2

    def test_ultrametric_transitivity(self):
        rng = random.Random(8)
        for _ in range(200):
            vals = [AlgNum(F26, Fraction(rng.randrange(-40, 41), rng.choice([1, 2, 5])),
                           Fraction(rng.randrange(-40, 41))) for _ in range(3)]
            v1, v2, v3 = (mk_verdict(v) for v in vals)
            c12 = compare_ratios(v1, v2, L13) == CONGRUENT
            c23 = compare_ratios(v2, v3, L13) == CONGRUENT
            c13 = compare_ratios(v1, v3, L13) == CONGRUENT
            if c12 and c23:
                assert c13  # v(a-c) >= min(v(a-b), v(b-c))
