"""Dirichlet characters, newform q-expansion data, built-in generators.

Coefficients are AlgNum throughout so rational and quadratic eigenforms share
one code path.  The built-in generators cover what the verification pipeline
needs internally: the sigma-type Eisenstein family E_k(chi) with exact
constant term, and the one-dimensional level-1 cuspform family computed as
Delta * E_{k-12}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from .exactnum import (AlgNum, ExactError, QuadField, RATIONAL, compositum,
                       kronecker, quad_normalize, workdps)

import mpmath


# ---------------------------------------------------------------------------
# integer power series (index = exponent of q), fast multiply
# ---------------------------------------------------------------------------

def series_mul_int(f: list[int], g: list[int], n_max: int) -> list[int]:
    """Product of integer q-expansions truncated at q^n_max, via Kronecker
    substitution: pack into one big int per series and use int multiply."""
    la, lb = min(len(f), n_max + 1), min(len(g), n_max + 1)
    if la == 0 or lb == 0:
        return [0] * (n_max + 1)
    bits = max((abs(c).bit_length() for c in f[:la] + g[:lb]), default=1)
    b = 2 * bits + (min(la, lb)).bit_length() + 2
    B = 1 << b
    nf = sum(c << (b * i) for i, c in enumerate(f[:la]))
    ng = sum(c << (b * i) for i, c in enumerate(g[:lb]))
    prod = nf * ng
    out = []
    for _ in range(n_max + 1):
        d = prod % B
        if d > B // 2:
            d -= B
        prod = (prod - d) >> b
        out.append(d)
    return out


def series_pow_int(f: list[int], e: int, n_max: int) -> list[int]:
    out = [1]
    base = f[: n_max + 1]
    while e:
        if e & 1:
            out = series_mul_int(out, base, n_max)
        e >>= 1
        if e:
            base = series_mul_int(base, base, n_max)
    out += [0] * (n_max + 1 - len(out))
    return out


def eta_series(n_max: int) -> list[int]:
    """prod_{n>=1} (1 - q^n) via the pentagonal number theorem."""
    out = [0] * (n_max + 1)
    out[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > n_max and g2 > n_max:
            break
        s = 1 if k % 2 == 0 else -1
        if g1 <= n_max:
            out[g1] += s
        if g2 <= n_max:
            out[g2] += s
        k += 1
    return out


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, fl in enumerate(sieve) if fl]


# ---------------------------------------------------------------------------
# Bernoulli numbers, generalized Bernoulli numbers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2, by the defining recurrence."""
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n % 2:
        return Fraction(0)
    acc = Fraction(0)
    for k in range(n):
        acc += math.comb(n + 1, k) * bernoulli(k)
    return -acc / (n + 1)


def bernoulli_poly(n: int, x: Fraction) -> Fraction:
    """B_n(x) = sum C(n,k) B_k x^(n-k)."""
    return sum(math.comb(n, k) * bernoulli(k) * x ** (n - k) for k in range(n + 1))


# ---------------------------------------------------------------------------
# Dirichlet characters (stored by full value table; moduli here are tiny)
# ---------------------------------------------------------------------------

EVEN, ODD = "even", "odd"


@dataclass(frozen=True)
class DirichletChar:
    modulus: int
    values: tuple  # values[r] for r in range(modulus), AlgNum; 0 off units

    def __post_init__(self):
        assert len(self.values) == max(self.modulus, 1)

    def __call__(self, n: int) -> AlgNum:
        if self.modulus == 1:
            return AlgNum.rational(1)
        return self.values[n % self.modulus]

    @property
    def parity(self) -> str:
        return EVEN if self(-1) == 1 else ODD

    @property
    def field(self) -> QuadField:
        F = RATIONAL
        for v in self.values:
            if isinstance(v, AlgNum):
                F = compositum(F, v.field)
        return F

    def is_trivial(self) -> bool:
        return all(not v or v == 1 for v in self.values) or self.modulus == 1

    def inverse(self) -> "DirichletChar":
        vals = tuple(v.conj() if v else v for v in self.values)
        return DirichletChar(self.modulus, vals)

    def times(self, other: "DirichletChar", modulus: int) -> "DirichletChar":
        """Product character viewed at the given modulus (lcm of the two)."""
        assert modulus % self.modulus == 0 and modulus % other.modulus == 0
        vals = []
        for r in range(max(modulus, 1)):
            if modulus > 1 and math.gcd(r, modulus) != 1:
                vals.append(AlgNum.rational(0))
            else:
                vals.append(self(r) * other(r))
        return DirichletChar(modulus, tuple(vals))

    def check_multiplicative(self) -> bool:
        N = self.modulus
        for a in range(N):
            for b in range(N):
                if math.gcd(a, N) == 1 and math.gcd(b, N) == 1:
                    if self(a * b) != self(a) * self(b):
                        return False
        return True


def trivial_char(modulus: int = 1) -> DirichletChar:
    vals = tuple(
        AlgNum.rational(1 if (modulus == 1 or math.gcd(r, modulus) == 1) else 0)
        for r in range(max(modulus, 1))
    )
    return DirichletChar(modulus, vals)


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True
    if D % 4 == 1:
        return quad_normalize(D)[1] == 1
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and quad_normalize(m)[1] == 1
    return False


def char_from_kronecker(D: int) -> DirichletChar:
    """The quadratic character a -> (D|a), of modulus |D|."""
    if not is_fundamental_discriminant(D):
        raise ExactError(f"{D} is not a fundamental discriminant")
    N = abs(D)
    vals = tuple(AlgNum.rational(kronecker(D, r)) for r in range(max(N, 1)))
    return DirichletChar(N, vals)


def bernoulli_chi(k: int, chi: DirichletChar) -> AlgNum:
    """Generalized Bernoulli number B_{k,chi} (values of chi must be exact)."""
    f = chi.modulus
    if f == 1:
        b = bernoulli(k)
        if k == 1:
            b = Fraction(1, 2)  # convention: B_{1,triv} = +1/2 for L(0) bookkeeping
        return AlgNum.rational(b)
    acc = AlgNum.rational(0)
    for a in range(1, f + 1):
        acc = acc + chi(a) * bernoulli_poly(k, Fraction(a, f))
    return acc * Fraction(f) ** (k - 1)


# ---------------------------------------------------------------------------
# q-expansion containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewformData:
    """Primitive-form data: a(1..n_max) plus level, weight, nebentypus."""

    level: int
    weight: int
    char: DirichletChar
    coeffs: tuple  # coeffs[n] = a(n) for 1 <= n <= n_max; coeffs[0] unused
    label: str = ""
    is_eigenform: bool = True

    def __post_init__(self):
        if self.n_max >= 1 and self.is_eigenform and self.a(1) != 1:
            raise ExactError(f"{self.label or 'form'}: a(1) must be 1")

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def a(self, n: int) -> AlgNum:
        if not 1 <= n <= self.n_max:
            raise ExactError(f"coefficient a({n}) not available (n_max={self.n_max})")
        return self.coeffs[n]

    @property
    def field(self) -> QuadField:
        F = self.char.field
        for c in self.coeffs[1:]:
            F = compositum(F, c.field)
        return F

    def check_hecke_multiplicativity(self, pairs: list[tuple[int, int]]) -> bool:
        for m, n in pairs:
            if math.gcd(m, n) == 1 and m * n <= self.n_max:
                if self.a(m * n) != self.a(m) * self.a(n):
                    return False
        return True

    def check_deligne_bound(self, P: int = 30) -> bool:
        """|a(p)| <= 2 p^((k-1)/2) under the complex embedding."""
        with workdps(P):
            for p in primes_upto(min(self.n_max, 200)):
                bound = 2 * mpmath.mpf(p) ** (Fraction(self.weight - 1, 2))
                if abs(self.a(p).embed(P)) > bound * (1 + mpmath.mpf(10) ** (-P // 2)):
                    return False
        return True


@dataclass(frozen=True)
class EisensteinData(NewformData):
    constant_term: AlgNum = field(default_factory=lambda: AlgNum.rational(0))

    def __post_init__(self):
        pass  # Eisenstein a(1)=1 holds for the implemented family anyway


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def sigma_chi_coeffs(k: int, chi: DirichletChar, n_max: int,
                     twist_outside: bool = False) -> list[AlgNum]:
    """a(n) = sum_{d|n} chi(d) d^(k-1)  (or chi(n/d) d^(k-1) if twist_outside)."""
    zero = AlgNum.rational(0)
    out = [zero] * (n_max + 1)
    for d in range(1, n_max + 1):
        dk = Fraction(d) ** (k - 1)
        for n in range(d, n_max + 1, d):
            c = chi(n // d) if twist_outside else chi(d)
            if c:
                out[n] = out[n] + c * dk
    return out


def eisenstein_qexp(k: int, chi: DirichletChar, n_max: int) -> EisensteinData:
    """E_k(chi) = L(1-k, chi)/2 + sum_n (sum_{d|n} chi(d) d^(k-1)) q^n."""
    if k < 1:
        raise ExactError("weight must be >= 1")
    want = ODD if k % 2 else EVEN
    if chi.parity != want:
        raise ExactError(f"parity mismatch: weight {k} needs an {want} character")
    coeffs = sigma_chi_coeffs(k, chi, n_max)
    coeffs[0] = AlgNum.rational(0)
    # L(1-k, chi) = -B_{k,chi}/k
    const = -bernoulli_chi(k, chi) / Fraction(2 * k)
    return EisensteinData(level=chi.modulus, weight=k, char=chi,
                          coeffs=tuple(coeffs), label=f"eis-{k}-{chi.modulus}",
                          is_eigenform=False, constant_term=const)


_E_SERIES = {  # level-1 normalized Eisenstein series with integer expansion
    0: None,
    4: 240, 6: -504, 8: 480, 10: -264, 14: -24,
}

DELTA_WEIGHTS = (12, 16, 18, 20, 22, 26)


def _sigma_int(r: int, n_max: int) -> list[int]:
    out = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dr = d ** r
        for n in range(d, n_max + 1, d):
            out[n] += dr
    return out


@lru_cache(maxsize=None)
def _delta_int(n_max: int) -> tuple[int, ...]:
    eta = eta_series(n_max)
    d = series_pow_int(eta, 24, n_max)
    return tuple([0] + d[: n_max])  # multiply by q


def delta_family_qexp(k: int, n_max: int) -> NewformData:
    """The unique normalized cuspform of level 1 and weight k, for the
    weights where the space is one-dimensional."""
    if k not in DELTA_WEIGHTS:
        raise ExactError(f"weight {k} is not in the one-dimensional family {DELTA_WEIGHTS}")
    delta = list(_delta_int(n_max))
    if k == 12:
        coeffs = delta
    else:
        c = _E_SERIES[k - 12]
        sig = _sigma_int(k - 13, n_max)
        ek = [1] + [c * s for s in sig[1:]]
        coeffs = series_mul_int(delta, ek, n_max)
    out = [AlgNum.rational(v) for v in coeffs]
    return NewformData(level=1, weight=k, char=trivial_char(1),
                       coeffs=tuple(out), label=f"1.{k}.a")


def conjugate_form(h: NewformData) -> NewformData:
    """h^rho: conjugate coefficients, nebentypus replaced by its inverse."""
    coeffs = tuple(c.conj() if isinstance(c, AlgNum) else c for c in h.coeffs)
    return replace(h, coeffs=coeffs, char=h.char.inverse(),
                   label=h.label + "-rho" if h.label else "")


class MissingPrimeData(ExactError):
    def __init__(self, p: int):
        self.p = p
        super().__init__(f"no eigenvalue data for prime {p}")


def hecke_extend(h: NewformData, n_target: int) -> NewformData:
    """Extend eigenform coefficients to n_target via Hecke multiplicativity.

    Prime eigenvalues a(p) must be available for every p <= n_target; for
    p | N the newform relation a(p^r) = a(p)^r is used, otherwise the usual
    weight-(k-1) recursion.
    """
    if not h.is_eigenform:
        raise ExactError("hecke_extend needs an eigenform")
    if n_target <= h.n_max:
        return h
    one = AlgNum.rational(1)
    zero = AlgNum.rational(0)
    a: list = [zero, one] + [None] * (n_target - 1)
    for n in range(1, min(h.n_max, n_target) + 1):
        a[n] = h.a(n)
    for p in primes_upto(n_target):
        if a[p] is None:
            raise MissingPrimeData(p)
        # prime powers
        pk = p * p
        while pk <= n_target:
            if a[pk] is None:
                if h.level % p == 0:
                    a[pk] = a[pk // p] * a[p]
                else:
                    tw = h.char(p) * (Fraction(p) ** (h.weight - 1))
                    a[pk] = a[p] * a[pk // p] - tw * a[pk // p // p]
            pk *= p
    # fill composites multiplicatively
    for n in range(2, n_target + 1):
        if a[n] is None:
            m = n
            p = _least_prime_factor(n)
            q = 1
            while m % p == 0:
                m //= p
                q *= p
            a[n] = a[q] * a[m]
    return replace(h, coeffs=tuple(a))


def _least_prime_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n
