"""Exact Clebsch-Gordan coefficients and Wigner 6j symbols.

All arithmetic up to the final square root is carried out with
arbitrary-precision rationals, so coefficients stay accurate for the large
angular momenta (2j up to a few hundred) that appear in multipole expansions.
Angular momenta may be integers or half-integers; internally everything is
keyed on doubled values so half-integers are exact.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt
from numbers import Real


def _two(x, name: str) -> int:
    """Return 2*x as an exact integer, rejecting non-(half-)integers."""
    if isinstance(x, float):
        tx = 2.0 * x
        if tx != round(tx):
            raise ValueError(f"{name} = {x!r} is not an integer or half-integer")
        return int(round(tx))
    if isinstance(x, Fraction):
        tx = 2 * x
        if tx.denominator != 1:
            raise ValueError(f"{name} = {x!r} is not an integer or half-integer")
        return int(tx)
    if isinstance(x, Real):
        return int(2 * x)
    raise TypeError(f"{name} must be a real number, got {type(x).__name__}")


def _fact2(two_n: int) -> int:
    # factorial of two_n/2, valid only when two_n is a non-negative even int
    if two_n < 0 or two_n % 2:
        raise ValueError(f"factorial argument {two_n}/2 is not a non-negative integer")
    return factorial(two_n // 2)


def _triangle_ok(ta: int, tb: int, tc: int) -> bool:
    return abs(ta - tb) <= tc <= ta + tb and (ta + tb + tc) % 2 == 0


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention.

    Returns 0.0 for violated selection rules (M != m1+m2 or broken triangle
    condition).  Raises ValueError for arguments that are not integers or
    half-integers, for |m| > j, or for j-m not an integer.
    """
    tj1, tm1 = _two(j1, "j1"), _two(m1, "m1")
    tj2, tm2 = _two(j2, "j2"), _two(m2, "m2")
    tJ, tM = _two(J, "J"), _two(M, "M")
    for tj, tm, nm in ((tj1, tm1, "m1"), (tj2, tm2, "m2"), (tJ, tM, "M")):
        if tj < 0:
            raise ValueError("angular momentum must be non-negative")
        if abs(tm) > tj:
            raise ValueError(f"|{nm}| exceeds its angular momentum")
        if (tj - tm) % 2:
            raise ValueError(f"{nm} is not of the form j, j-1, ..., -j")
    return _cg_exact(tj1, tm1, tj2, tm2, tJ, tM)


@lru_cache(maxsize=None)
def _cg_exact(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    if tM != tm1 + tm2 or not _triangle_ok(tj1, tj2, tJ):
        return 0.0
    # Racah's closed form: CG = sqrt(prefactor) * sum, with prefactor and sum
    # exact rationals.  The final value is sign(sum)*sqrt(prefactor*sum^2).
    pref = Fraction(tJ + 1)
    pref *= Fraction(
        _fact2(tj1 + tj2 - tJ) * _fact2(tj1 - tj2 + tJ) * _fact2(-tj1 + tj2 + tJ),
        _fact2(tj1 + tj2 + tJ + 2),
    )
    pref *= (
        _fact2(tJ + tM) * _fact2(tJ - tM)
        * _fact2(tj1 - tm1) * _fact2(tj1 + tm1)
        * _fact2(tj2 - tm2) * _fact2(tj2 + tm2)
    )
    ksum = Fraction(0)
    kmin = max(0, -(tJ - tj2 + tm1) // 2, -(tJ - tj1 - tm2) // 2)
    kmax = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    for k in range(kmin, kmax + 1):
        den = (
            factorial(k)
            * _fact2(tj1 + tj2 - tJ - 2 * k)
            * _fact2(tj1 - tm1 - 2 * k)
            * _fact2(tj2 + tm2 - 2 * k)
            * _fact2(tJ - tj2 + tm1 + 2 * k)
            * _fact2(tJ - tj1 - tm2 + 2 * k)
        )
        ksum += Fraction(-1 if k % 2 else 1, den)
    if ksum == 0:
        return 0.0
    value_sq = pref * ksum * ksum
    sign = 1.0 if ksum > 0 else -1.0
    return sign * sqrt(float(value_sq))


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """{j1 j2 j3; j4 j5 j6}, exact rational internals, float result.

    Returns 0.0 when any of the four triads (j1 j2 j3), (j1 j5 j6),
    (j4 j2 j6), (j4 j5 j3) violates the triangle condition.
    """
    targs = tuple(_two(j, f"j{k+1}") for k, j in enumerate((j1, j2, j3, j4, j5, j6)))
    if any(t < 0 for t in targs):
        raise ValueError("angular momentum must be non-negative")
    return _6j_exact(*targs)


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact2(ta + tb - tc) * _fact2(ta - tb + tc) * _fact2(-ta + tb + tc),
        _fact2(ta + tb + tc + 2),
    )


@lru_cache(maxsize=None)
def _6j_exact(tj1: int, tj2: int, tj3: int, tj4: int, tj5: int, tj6: int) -> float:
    triads = (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    )
    if not all(_triangle_ok(*tr) for tr in triads):
        return 0.0
    pref = Fraction(1)
    for tr in triads:
        pref *= _delta_sq(*tr)
    quads = (
        tj1 + tj2 + tj4 + tj5,
        tj2 + tj3 + tj5 + tj6,
        tj3 + tj1 + tj6 + tj4,
    )
    tmin = max(sum(tr) for tr in triads)
    tmax = min(quads)
    ksum = Fraction(0)
    for tt in range(tmin, tmax + 1, 2):
        den = Fraction(_fact2(tt + 2))
        for tr in triads:
            den /= _fact2(tt - sum(tr))
        for q in quads:
            den /= _fact2(q - tt)
        ksum += -den if (tt // 2) % 2 else den
    if ksum == 0:
        return 0.0
    sign = 1.0 if ksum > 0 else -1.0
    return sign * sqrt(float(pref * ksum * ksum))
