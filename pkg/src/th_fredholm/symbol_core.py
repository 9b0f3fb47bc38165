"""Canonical piecewise-continuous symbols on the unit circle.

A symbol is stored in product form

    phi(t) = scale * t**kappa * exp(sum_k gamma_k t**k) * prod_j u(tau_j, beta_j)(t)

where u(tau, beta) is the canonical unit with a single jump at tau,
defined on t = tau*exp(i*x), x in (0, 2*pi), by u = exp(i*beta*(x - pi)).
Jump locations are exact rational multiples of 2*pi and jump exponents keep
an exact rational real part, so conjugate pairing of jump points and all
mod-1 arithmetic downstream are free of floating error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

TWO_PI = 2.0 * math.pi

ExponentLike = Union["Exponent", Fraction, int, float, complex, str]


class EvalAtJump(ValueError):
    """Raised when a symbol is evaluated exactly at one of its jump angles."""


class ConditionViolated(ValueError):
    """The pair (a, b) does not satisfy a*tilde(a) = b*tilde(b).

    Attributes
    ----------
    deviation : float
        Largest observed deviation from the identity.
    point : UnitPoint | None
        Offending jump point, when the violation is a mismatched jump.
    """

    def __init__(self, message: str, deviation: float, point: "UnitPoint | None" = None):
        super().__init__(message)
        self.deviation = deviation
        self.point = point


def as_fraction(x: Union[int, float, str, Fraction]) -> Fraction:
    """Exact conversion; floats convert via their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class Exponent:
    """Complex exponent with exact rational real part."""

    re: Fraction
    im: float = 0.0

    @staticmethod
    def of(x: ExponentLike) -> "Exponent":
        if isinstance(x, Exponent):
            return x
        if isinstance(x, complex):
            return Exponent(as_fraction(x.real), float(x.imag))
        return Exponent(as_fraction(x), 0.0)

    @property
    def value(self) -> complex:
        return complex(float(self.re), self.im)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0.0

    def __add__(self, other: ExponentLike) -> "Exponent":
        o = Exponent.of(other)
        return Exponent(self.re + o.re, self.im + o.im)

    def __sub__(self, other: ExponentLike) -> "Exponent":
        o = Exponent.of(other)
        return Exponent(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "Exponent":
        return Exponent(-self.re, -self.im)

    def half(self) -> "Exponent":
        return Exponent(self.re / 2, self.im / 2.0)

    def shift(self, n: int) -> "Exponent":
        return Exponent(self.re + n, self.im)


@dataclass(frozen=True, order=True)
class UnitPoint:
    """Point tau = exp(2*pi*i*num/den) on the unit circle, reduced, 0 <= num < den."""

    num: int
    den: int = 1

    def __post_init__(self):
        f = Fraction(self.num, self.den) % 1
        object.__setattr__(self, "num", f.numerator)
        object.__setattr__(self, "den", f.denominator)

    @property
    def turns(self) -> Fraction:
        """Angle as a fraction of a full turn."""
        return Fraction(self.num, self.den)

    @property
    def angle(self) -> float:
        return TWO_PI * self.num / self.den

    def value(self) -> complex:
        return cmath.exp(2j * math.pi * self.num / self.den)

    def conjugate(self) -> "UnitPoint":
        return UnitPoint((self.den - self.num) % self.den, self.den)

    @property
    def is_one(self) -> bool:
        return self.num == 0

    @property
    def is_minus_one(self) -> bool:
        return 2 * self.num == self.den

    @property
    def in_upper_half(self) -> bool:
        """Strictly inside the open upper half circle."""
        return 0 < 2 * self.num < self.den


ONE = UnitPoint(0, 1)
MINUS_ONE = UnitPoint(1, 2)


@dataclass(frozen=True)
class JumpFactor:
    """The unit u(tau, beta) with jump ratio exp(2*pi*i*beta) at tau."""

    point: UnitPoint
    beta: Exponent


@dataclass(frozen=True)
class FourierLogPoly:
    """Finite Fourier polynomial used as the logarithm of the smooth part."""

    coeffs: tuple[tuple[int, complex], ...] = ()

    @staticmethod
    def of(data: "FourierLogPoly | Mapping[int, complex] | Iterable[tuple[int, complex]] | None") -> "FourierLogPoly":
        if data is None:
            return FourierLogPoly()
        if isinstance(data, FourierLogPoly):
            return data
        items = data.items() if isinstance(data, Mapping) else data
        kept = {}
        for k, v in items:
            v = complex(v)
            if v != 0:
                kept[int(k)] = kept.get(int(k), 0j) + v
        return FourierLogPoly(tuple(sorted((k, v) for k, v in kept.items() if v != 0)))

    def as_dict(self) -> dict[int, complex]:
        return dict(self.coeffs)

    @property
    def is_empty(self) -> bool:
        return not self.coeffs

    def tilde(self) -> "FourierLogPoly":
        return FourierLogPoly.of({-k: v for k, v in self.coeffs})

    def plus(self, other: "FourierLogPoly", sign: int = 1) -> "FourierLogPoly":
        out = self.as_dict()
        for k, v in other.coeffs:
            out[k] = out.get(k, 0j) + sign * v
        return FourierLogPoly.of(out)

    def odd_defect(self) -> float:
        """Max |gamma_k + gamma_{-k}|; zero iff the log is an odd function."""
        d = self.as_dict()
        worst = 0.0
        for k, v in d.items():
            worst = max(worst, abs(v + d.get(-k, 0j)))
        return worst

    def eval_at(self, z: complex) -> complex:
        return sum(v * z**k for k, v in self.coeffs)


def _canonical_jumps(jumps: Iterable[JumpFactor]) -> tuple[JumpFactor, ...]:
    merged: dict[UnitPoint, Exponent] = {}
    for j in jumps:
        cur = merged.get(j.point)
        merged[j.point] = j.beta if cur is None else cur + j.beta
    kept = [JumpFactor(pt, b) for pt, b in merged.items() if not b.is_zero]
    kept.sort(key=lambda j: j.point.turns)
    return tuple(kept)


@dataclass(frozen=True)
class CanonicalSymbol:
    """Invertible piecewise-continuous symbol in canonical product form."""

    kappa: int = 0
    scale: complex = 1.0 + 0j
    log_smooth: FourierLogPoly = field(default_factory=FourierLogPoly)
    jumps: tuple[JumpFactor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scale", complex(self.scale))
        object.__setattr__(self, "log_smooth", FourierLogPoly.of(self.log_smooth))
        object.__setattr__(self, "jumps", _canonical_jumps(self.jumps))
        if self.scale == 0:
            raise ValueError("scale must be nonzero")

    @staticmethod
    def one() -> "CanonicalSymbol":
        return CanonicalSymbol()

    @staticmethod
    def monomial(k: int, scale: complex = 1.0) -> "CanonicalSymbol":
        return CanonicalSymbol(kappa=k, scale=scale)

    def beta_at(self, point: UnitPoint) -> Exponent:
        for j in self.jumps:
            if j.point == point:
                return j.beta
        return Exponent(Fraction(0))

    @property
    def jump_points(self) -> tuple[UnitPoint, ...]:
        return tuple(j.point for j in self.jumps)


def jump_unit(num: int, den: int, beta: ExponentLike, *, kappa: int = 0, scale: complex = 1.0) -> CanonicalSymbol:
    """Convenience builder: scale * t**kappa * u(exp(2*pi*i*num/den), beta)."""
    return CanonicalSymbol(kappa=kappa, scale=scale, jumps=(JumpFactor(UnitPoint(num, den), Exponent.of(beta)),))


def _jump_value_interior(point: UnitPoint, beta: Exponent, x: float) -> complex:
    # u(tau, beta) at angle x with exp(i*x) != tau; x' in (0, 2*pi).
    xp = (x - point.angle) % TWO_PI
    return cmath.exp(1j * beta.value * (xp - math.pi))


def eval_symbol(s: CanonicalSymbol, x: float) -> complex:
    """Evaluate s at t = exp(i*x), x taken mod 2*pi, away from jump angles.

    Raises
    ------
    EvalAtJump
        If x coincides with a jump angle of s (use one_sided_limits there).
    """
    x = float(x) % TWO_PI
    for j in s.jumps:
        d = abs((x - j.point.angle + math.pi) % TWO_PI - math.pi)
        if d < 1e-13:
            raise EvalAtJump(f"angle {x!r} hits the jump at {j.point}")
    val = s.scale * cmath.exp(1j * s.kappa * x)
    if not s.log_smooth.is_empty:
        val *= cmath.exp(s.log_smooth.eval_at(cmath.exp(1j * x)))
    for j in s.jumps:
        val *= _jump_value_interior(j.point, j.beta, x)
    return val


def eval_many(s: CanonicalSymbol, xs: np.ndarray) -> np.ndarray:
    """Vectorized eval_symbol over a jump-avoiding grid of angles."""
    xs = np.asarray(xs, dtype=float) % TWO_PI
    for j in s.jumps:
        d = np.abs((xs - j.point.angle + math.pi) % TWO_PI - math.pi)
        if np.any(d < 1e-13):
            raise EvalAtJump(f"grid hits the jump at {j.point}")
    z = np.exp(1j * xs)
    val = np.full(xs.shape, s.scale, dtype=complex) * np.exp(1j * s.kappa * xs)
    if not s.log_smooth.is_empty:
        acc = np.zeros(xs.shape, dtype=complex)
        for k, v in s.log_smooth.coeffs:
            acc += v * z**k
        val *= np.exp(acc)
    for j in s.jumps:
        xp = (xs - j.point.angle) % TWO_PI
        val *= np.exp(1j * j.beta.value * (xp - math.pi))
    return val


def one_sided_limits(s: CanonicalSymbol, point: UnitPoint) -> tuple[complex, complex]:
    """One-sided limits (phi_minus(tau), phi_plus(tau)).

    phi_minus is the limit approaching tau counterclockwise from before,
    phi_plus from after; a jump factor at tau contributes exp(+pi*i*beta)
    and exp(-pi*i*beta) respectively, every other factor its continuous value.
    """
    x = point.angle
    cont = s.scale * cmath.exp(1j * s.kappa * x)
    if not s.log_smooth.is_empty:
        cont *= cmath.exp(s.log_smooth.eval_at(point.value()))
    beta = None
    for j in s.jumps:
        if j.point == point:
            beta = j.beta
        else:
            cont *= _jump_value_interior(j.point, j.beta, x)
    if beta is None:
        return cont, cont
    b = beta.value
    return cont * cmath.exp(1j * math.pi * b), cont * cmath.exp(-1j * math.pi * b)


def tilde(s: CanonicalSymbol) -> CanonicalSymbol:
    """The involution s~(t) = s(1/t): kappa negates, log reverses, jumps conjugate."""
    return CanonicalSymbol(
        kappa=-s.kappa,
        scale=s.scale,
        log_smooth=s.log_smooth.tilde(),
        jumps=tuple(JumpFactor(j.point.conjugate(), -j.beta) for j in s.jumps),
    )


def multiply(s1: CanonicalSymbol, s2: CanonicalSymbol) -> CanonicalSymbol:
    return CanonicalSymbol(
        kappa=s1.kappa + s2.kappa,
        scale=s1.scale * s2.scale,
        log_smooth=s1.log_smooth.plus(s2.log_smooth),
        jumps=s1.jumps + s2.jumps,
    )


def invert(s: CanonicalSymbol) -> CanonicalSymbol:
    return CanonicalSymbol(
        kappa=-s.kappa,
        scale=1.0 / s.scale,
        log_smooth=FourierLogPoly.of({k: -v for k, v in s.log_smooth.coeffs}),
        jumps=tuple(JumpFactor(j.point, -j.beta) for j in s.jumps),
    )


def rotate_half(s: CanonicalSymbol) -> CanonicalSymbol:
    """The symbol s(-t): jumps rotate by half a turn, odd log coefficients flip sign."""
    return CanonicalSymbol(
        kappa=s.kappa,
        scale=s.scale * (-1.0) ** (s.kappa % 2),
        log_smooth=FourierLogPoly.of({k: v * (-1.0) ** (k % 2) for k, v in s.log_smooth.coeffs}),
        jumps=tuple(
            JumpFactor(UnitPoint(j.point.num * 2 + j.point.den, 2 * j.point.den), j.beta) for j in s.jumps
        ),
    )


def symbols_equal(s1: CanonicalSymbol, s2: CanonicalSymbol, tol: float = 1e-12) -> bool:
    """Representation equality: exact on integers and rational data, tol on floats."""
    if s1.kappa != s2.kappa or abs(s1.scale - s2.scale) > tol * max(1.0, abs(s1.scale)):
        return False
    d1, d2 = s1.log_smooth.as_dict(), s2.log_smooth.as_dict()
    for k in set(d1) | set(d2):
        if abs(d1.get(k, 0j) - d2.get(k, 0j)) > tol:
            return False
    if len(s1.jumps) != len(s2.jumps):
        return False
    for j1, j2 in zip(s1.jumps, s2.jumps):
        if j1.point != j2.point or j1.beta.re != j2.beta.re or abs(j1.beta.im - j2.beta.im) > tol:
            return False
    return True


@dataclass(frozen=True)
class SymbolPair:
    """Validated pair (a, b) with the derived auxiliary functions c = a/b, d = a~/b."""

    a: CanonicalSymbol
    b: CanonicalSymbol
    c: CanonicalSymbol
    d: CanonicalSymbol


def validate_pair(a: CanonicalSymbol, b: CanonicalSymbol, tol: float = 1e-9) -> SymbolPair:
    """Verify a*tilde(a) = b*tilde(b) and build the auxiliary pair (c, d).

    The structural parts are checked exactly: the residual e = a*a~*(b*b~)^{-1}
    must have winding index 0 and no jumps (exponent real parts cancel as
    Fractions); the remaining smooth part is sampled on a dense jump-avoiding
    grid and compared to 1 within tol.

    Raises
    ------
    ConditionViolated
        With the largest deviation and the offending jump point, if any.
    """
    e = multiply(multiply(a, tilde(a)), invert(multiply(b, tilde(b))))
    for j in e.jumps:
        if j.beta.re != 0 or abs(j.beta.im) > tol:
            dev = abs(cmath.exp(2j * math.pi * j.beta.value) - 1.0)
            raise ConditionViolated(
                f"a*a~ and b*b~ disagree at the jump {j.point}: residual exponent {j.beta.value}",
                deviation=dev,
                point=j.point,
            )
    if e.kappa != 0:
        raise ConditionViolated(
            f"a*a~ and b*b~ have different winding index (residual kappa {e.kappa})",
            deviation=math.inf,
        )
    grid = TWO_PI * (np.arange(512) + 0.2026) / 512
    dev = float(np.max(np.abs(eval_many(e, grid) - 1.0)))
    if dev > tol:
        raise ConditionViolated(f"a*a~ != b*b~ on the circle (max deviation {dev:.3e})", deviation=dev)
    b_inv = invert(b)
    return SymbolPair(a=a, b=b, c=multiply(a, b_inv), d=multiply(tilde(a), b_inv))


def aux_functions(pair: SymbolPair) -> tuple[CanonicalSymbol, CanonicalSymbol]:
    """The stored auxiliary functions (c, d); both satisfy c*c~ = d*d~ = 1."""
    return pair.c, pair.d
