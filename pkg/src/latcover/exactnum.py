"""Exact arithmetic in cyclotomic fields Q(zeta_N) with rational coefficients.

Elements are dense coefficient vectors modulo the N-th cyclotomic polynomial
Phi_N, with `fractions.Fraction` coefficients.  A certified midpoint-radius
embedding into complex floating point (mpmath) feeds the numerical layers.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Tuple

import mpmath

Rational = Fraction


def euler_phi(n: int) -> int:
    """Euler totient of n >= 1."""
    if n < 1:
        raise ValueError(f"totient undefined for {n}")
    result = n
    m, p = n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_mul_int(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_div_exact_int(num: list, den: list) -> list:
    """Exact division of integer polynomials (ascending coefficients)."""
    num = list(num)
    dd = len(den) - 1
    lead = den[-1]
    quot = [0] * (len(num) - dd)
    for k in range(len(quot) - 1, -1, -1):
        c = num[k + dd]
        if c % lead != 0:
            raise ArithmeticError("non-exact polynomial division")
        q = c // lead
        quot[k] = q
        if q:
            for j, dj in enumerate(den):
                num[k + j] -= q * dj
    if any(num[: dd]):
        raise ArithmeticError("non-exact polynomial division")
    return quot


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> Tuple[int, ...]:
    """Integer coefficients of Phi_n, ascending degree."""
    if n < 1:
        raise ValueError(f"no cyclotomic polynomial for {n}")
    if n == 1:
        return (-1, 1)
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_div_exact_int(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _reduce_mod_phi(n: int, coeffs: list) -> Tuple[Fraction, ...]:
    """Reduce a Fraction polynomial in zeta_n modulo Phi_n; pad to phi(n)."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    work = [Fraction(c) for c in coeffs]
    for k in range(len(work) - 1, deg - 1, -1):
        c = work[k]
        if c:
            for j in range(deg + 1):
                work[k - deg + j] -= c * phi[j]
        work.pop()
    while len(work) < deg:
        work.append(Fraction(0))
    return tuple(work)


class CycloElt:
    """An element of Q(zeta_n), stored as phi(n) Fraction coefficients."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable):
        coeffs = list(coeffs)
        self.n = n
        self.coeffs = _reduce_mod_phi(n, coeffs)

    @staticmethod
    def rational(value, n: int = 1) -> "CycloElt":
        return CycloElt(n, [Fraction(value)])

    @staticmethod
    def zero(n: int = 1) -> "CycloElt":
        return CycloElt(n, [])

    @staticmethod
    def one(n: int = 1) -> "CycloElt":
        return CycloElt(n, [Fraction(1)])

    def promote(self, m: int) -> "CycloElt":
        """Coerce into Q(zeta_m) for a multiple m of the conductor."""
        if m == self.n:
            return self
        if m % self.n != 0:
            raise ValueError(f"cannot promote conductor {self.n} to {m}")
        step = m // self.n
        out = [Fraction(0)] * ((len(self.coeffs) - 1) * step + 1 or 1)
        for k, c in enumerate(self.coeffs):
            out[k * step] = c
        return CycloElt(m, out)

    def _unified(self, other) -> Tuple["CycloElt", "CycloElt"]:
        other = _coerce(other, self.n)
        m = self.n * other.n // gcd(self.n, other.n)
        return self.promote(m), other.promote(m)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def __bool__(self) -> bool:
        return not self.is_zero

    def __add__(self, other) -> "CycloElt":
        a, b = self._unified(other)
        return CycloElt(a.n, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "CycloElt":
        return CycloElt(self.n, [-c for c in self.coeffs])

    def __sub__(self, other) -> "CycloElt":
        return self + (-_coerce(other, self.n))

    def __rsub__(self, other) -> "CycloElt":
        return _coerce(other, self.n) + (-self)

    def __mul__(self, other) -> "CycloElt":
        a, b = self._unified(other)
        out = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, ai in enumerate(a.coeffs):
            if ai:
                for j, bj in enumerate(b.coeffs):
                    if bj:
                        out[i + j] += ai * bj
        return CycloElt(a.n, out)

    __rmul__ = __mul__

    def inv(self) -> "CycloElt":
        """Multiplicative inverse via extended gcd with Phi_n."""
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero cyclotomic element")
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.n)]
        r0, r1 = phi, list(self.coeffs)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while any(c != 0 for c in r1):
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        # r0 = gcd, a nonzero constant since Phi_n is irreducible
        g = next(c for c in reversed(r0) if c != 0)
        return CycloElt(self.n, [c / g for c in s0])

    def __truediv__(self, other) -> "CycloElt":
        return self * _coerce(other, self.n).inv()

    def __rtruediv__(self, other) -> "CycloElt":
        return _coerce(other, self.n) * self.inv()

    def __pow__(self, k: int) -> "CycloElt":
        if k < 0:
            return self.inv() ** (-k)
        result = CycloElt.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycloElt.rational(other)
        if not isinstance(other, CycloElt):
            return NotImplemented
        a, b = self._unified(other)
        return a.coeffs == b.coeffs

    __hash__ = None  # equality crosses conductors; no cheap canonical hash

    def conjugate(self) -> "CycloElt":
        """Complex conjugation, zeta_n -> zeta_n^(n-1)."""
        out = [Fraction(0)] * ((len(self.coeffs) - 1) * (self.n - 1) + 1 or 1)
        for k, c in enumerate(self.coeffs):
            out[k * (self.n - 1) if self.n > 1 else 0] += c
        return CycloElt(self.n, out)

    def root_of_unity_exponent(self) -> Optional[Tuple[int, int]]:
        """Return (M, a) with self = zeta_M^a and M = lcm(2, n), else None."""
        if self.is_zero:
            return None
        m = self.n if self.n % 2 == 0 else 2 * self.n
        if m == 1:
            m = 2
        if (self ** m) != 1:
            return None
        arg = mpmath.arg(self.embed(64).mid)
        a = int(mpmath.nint(arg * m / (2 * mpmath.pi))) % m
        if self == zeta_power(m, a):
            return (m, a)
        for a in range(m):  # fallback scan; unreachable in practice
            if self == zeta_power(m, a):
                return (m, a)
        return None

    def embed(self, bits: int = 128) -> "ComplexInterval":
        return embed_complex(self, bits)

    def __repr__(self) -> str:
        return f"CycloElt({self.n}, {to_literal(self)!r})"


def _coerce(value, n: int) -> CycloElt:
    if isinstance(value, CycloElt):
        return value
    if isinstance(value, (int, Fraction)):
        return CycloElt.rational(value, 1)
    raise TypeError(f"cannot interpret {value!r} as a cyclotomic element")


def _poly_divmod(num: list, den: list) -> Tuple[list, list]:
    num = list(num)
    while den and den[-1] == 0:
        den = den[:-1]
    dd = len(den) - 1
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(num) - 1 < dd:
        return [Fraction(0)], num
    quot = [Fraction(0)] * (len(num) - dd)
    for k in range(len(quot) - 1, -1, -1):
        c = num[k + dd] / den[-1]
        quot[k] = c
        if c:
            for j, dj in enumerate(den):
                num[k + j] -= c * dj
    rem = num[:dd] or [Fraction(0)]
    return quot, rem


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


def zeta(n: int, k: int = 1) -> CycloElt:
    """Primitive n-th root of unity zeta_n^k."""
    return CycloElt(n, [Fraction(0)] * (k % n) + [Fraction(1)])


def zeta_power(m: int, a: int) -> CycloElt:
    """zeta_m^a at conductor m (m >= 1)."""
    return zeta(m, a % m) if m > 1 else CycloElt.one()


def cyclo_add(a: CycloElt, b: CycloElt) -> CycloElt:
    """Exact sum with conductor unification."""
    return a + b


def cyclo_mul(a: CycloElt, b: CycloElt) -> CycloElt:
    """Exact product with conductor unification."""
    return a * b


def cyclo_inv(a: CycloElt) -> CycloElt:
    """Exact multiplicative inverse; raises ZeroDivisionError on zero."""
    return a.inv()


class ComplexInterval:
    """Complex midpoint-radius interval; radius is a rigorous error bound."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad):
        self.mid = mpmath.mpc(mid)
        self.rad = mpmath.mpf(rad)
        if self.rad < 0:
            raise ValueError("negative interval radius")

    def contains(self, z) -> bool:
        return abs(mpmath.mpc(z) - self.mid) <= self.rad

    def intersects(self, other: "ComplexInterval") -> bool:
        return abs(self.mid - other.mid) <= self.rad + other.rad

    def __add__(self, other: "ComplexInterval") -> "ComplexInterval":
        mid = self.mid + other.mid
        slack = mpmath.mpf(2) ** (4 - mpmath.mp.prec) * (1 + abs(mid))
        return ComplexInterval(mid, self.rad + other.rad + slack)

    def __mul__(self, other: "ComplexInterval") -> "ComplexInterval":
        mid = self.mid * other.mid
        rad = (abs(self.mid) * other.rad + abs(other.mid) * self.rad
               + self.rad * other.rad)
        slack = mpmath.mpf(2) ** (4 - mpmath.mp.prec) * (1 + abs(mid))
        return ComplexInterval(mid, rad + slack)

    def __complex__(self) -> complex:
        return complex(self.mid)

    def __repr__(self) -> str:
        return f"ComplexInterval({self.mid}, {self.rad})"


def embed_complex(a: CycloElt, bits: int = 128) -> ComplexInterval:
    """Certified image of a under zeta_n -> exp(2*pi*i/n)."""
    if bits < 53:
        raise ValueError(f"need at least 53 bits, got {bits}")
    prec = bits + 16
    with mpmath.workprec(prec):
        mid = mpmath.mpc(0)
        scale = mpmath.mpf(0)
        for k, c in enumerate(a.coeffs):
            if c:
                term = mpmath.mpf(c.numerator) / c.denominator
                root = mpmath.expjpi(mpmath.mpf(2 * k) / a.n)
                mid += term * root
                scale += abs(term)
        # every term carries O(ulp) relative error; bound the accumulation
        nterms = max(1, len(a.coeffs))
        rad = mpmath.mpf(2) ** (6 - prec) * (scale + abs(mid) + 1) * nterms
        return ComplexInterval(mid, rad)


_TOKEN = re.compile(r"\s*(?:(?P<rat>\d+(?:/\d+)?)|(?P<z>z\d+)"
                    r"|(?P<pow>\^-?\d+)|(?P<op>[+\-*]))")


def _tokenize(text: str) -> list:
    pos, tokens = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"bad cyclotomic literal near {text[pos:pos+12]!r}")
        pos = m.end()
        if m.group("rat") is not None:
            tokens.append(("rat", Fraction(m.group("rat"))))
        elif m.group("z") is not None:
            tokens.append(("z", int(m.group("z")[1:])))
        elif m.group("pow") is not None:
            tokens.append(("pow", int(m.group("pow")[1:])))
        else:
            tokens.append(("op", m.group("op")))
    return tokens


def parse_cyclo(text: str, conductor: int) -> CycloElt:
    """Parse a cyclotomic literal like '1/2*z12^2 - 1' at a fixed conductor.

    Terms are rational constants, optionally times zN or zN^k (a bare zN^k is
    also accepted); the zN token must match the declared conductor.
    """
    tokens = _tokenize(text)
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None)

    def take_zpart() -> int:
        nonlocal i
        kind, val = tokens[i]
        if val != conductor:
            raise ValueError(
                f"literal uses z{val} but the declared conductor is {conductor}")
        i += 1
        if peek()[0] == "pow":
            exp = tokens[i][1]
            i += 1
            return exp
        return 1

    def take_term() -> Tuple[Fraction, Optional[int]]:
        nonlocal i
        kind, val = peek()
        if kind == "rat":
            i += 1
            if peek() == ("op", "*"):
                i += 1
                if peek()[0] != "z":
                    raise ValueError(f"expected z-term after '*' in {text!r}")
                return val, take_zpart()
            return val, None
        if kind == "z":
            return Fraction(1), take_zpart()
        raise ValueError(f"expected a term in {text!r}")

    terms = []
    sign = 1
    kind, val = peek()
    if kind == "op" and val in "+-":
        sign = -1 if val == "-" else 1
        i += 1
    coeff, exp = take_term()
    terms.append((sign * coeff, exp))
    while i < len(tokens):
        kind, val = peek()
        if kind != "op" or val not in "+-":
            raise ValueError(f"expected '+' or '-' in {text!r}")
        i += 1
        coeff, exp = take_term()
        terms.append((-coeff if val == "-" else coeff, exp))

    result = CycloElt.zero(conductor)
    for coeff, exp in terms:
        if exp is None:
            result = result + CycloElt.rational(coeff).promote(conductor)
        else:
            result = result + coeff * zeta(conductor, exp % conductor)
    return result


def to_literal(a: CycloElt) -> str:
    """Canonical literal string for a, parseable by parse_cyclo."""
    parts = []
    for k, c in enumerate(a.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        coeff = str(mag) if mag.denominator != 1 else str(mag.numerator)
        if k == 0:
            body = coeff
        elif k == 1:
            body = f"z{a.n}" if mag == 1 else f"{coeff}*z{a.n}"
        else:
            body = f"z{a.n}^{k}" if mag == 1 else f"{coeff}*z{a.n}^{k}"
        parts.append(("- " if c < 0 else "+ ") + body)
    if not parts:
        return "0"
    first = parts[0]
    text = ("-" + first[2:]) if first.startswith("- ") else first[2:]
    for p in parts[1:]:
        text += " " + p
    return text
