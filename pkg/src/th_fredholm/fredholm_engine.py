"""Fredholm conditions, normalization, index, and arc-augmented winding curves.

Two independent routes to the same integers live here.  The symbolic route
tests exact coset conditions on the jump data of the auxiliary functions c and
d and normalizes their product representations, producing (n, m) and the index
m - n.  The geometric route traces the closed curve obtained from the image of
the upper half circle by joining the one-sided limits at 1, -1, and every
interior jump with circular arcs whose inscribed-angle parameter depends on p,
then counts the winding about the origin.  Agreement of the two routes is a
standing invariant of the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .symbol_core import (
    MINUS_ONE,
    ONE,
    TWO_PI,
    CanonicalSymbol,
    Exponent,
    FourierLogPoly,
    JumpFactor,
    SymbolPair,
    UnitPoint,
    as_fraction,
    eval_many,
    one_sided_limits,
)

PLike = Union[int, float, str, Fraction]


class NotFredholm(ValueError):
    """The operator is not Fredholm at the requested p."""


class NotFredholmOnSide(NotFredholm):
    """A normalization interval placement hit a boundary on one side.

    Attributes
    ----------
    side : str
        "c" or "d".
    point : UnitPoint
        The jump point whose exponent could not be placed.
    tested : Fraction
        The real part whose placement failed.
    """

    def __init__(self, side: str, point: UnitPoint, tested: Fraction):
        super().__init__(f"not Fredholm: side {side}, jump {point}, exponent real part {tested} on a boundary")
        self.side = side
        self.point = point
        self.tested = tested


class BoundaryCase(NotFredholm):
    """A tested quantity lies within eps_boundary of the forbidden set."""


class CurveThroughOrigin(ValueError):
    """The traced curve meets the origin; the winding number is undefined."""


def exponent_pair(p: PLike) -> tuple[Fraction, Fraction]:
    """Exact (p, q) with 1/p + 1/q = 1; floats enter through their binary value."""
    pf = as_fraction(p)
    if not pf > 1:
        raise ValueError(f"p must lie in (1, infinity), got {p!r}")
    return pf, pf / (pf - 1)


def structural_sign(scale: complex, tol: float = 1e-9) -> int:
    """0 for scale near +1, 1 for scale near -1; anything else is non-structural."""
    if abs(scale - 1.0) <= tol:
        return 0
    if abs(scale + 1.0) <= tol:
        return 1
    raise ValueError(f"scale {scale!r} is not +-1; the symbol does not satisfy s*s~ = 1")


def ensure_unimodular(s: CanonicalSymbol, tol: float = 1e-9) -> None:
    """Check the structural identity s*s~ = 1 on the canonical data.

    Requires scale in {+1, -1}, an odd logarithm, and equal exponents on
    conjugate jump points; the exponent at 1 and at -1 is unconstrained.
    """
    structural_sign(s.scale, tol)
    if s.log_smooth.odd_defect() > tol:
        raise ValueError("smooth log is not odd; the symbol does not satisfy s*s~ = 1")
    for j in s.jumps:
        partner = s.beta_at(j.point.conjugate())
        if j.point.in_upper_half and (j.beta.re != partner.re or abs(j.beta.im - partner.im) > tol):
            raise ValueError(
                f"jump exponents at {j.point} and its conjugate differ; s*s~ = 1 fails"
            )


@dataclass(frozen=True)
class SiteCondition:
    """One tested coset condition: tested value must avoid offset + Z."""

    side: str
    point: UnitPoint
    tested: Fraction
    forbidden_offset: Fraction
    distance: Fraction
    verdict: str  # "pass" | "fail" | "boundary"

    @property
    def margin(self) -> float:
        return float(self.distance)


@dataclass(frozen=True)
class ConditionReport:
    p: Fraction
    q: Fraction
    sites: tuple[SiteCondition, ...]
    overall: str  # "pass" | "fail" | "boundary"

    @property
    def fredholm(self) -> bool:
        return self.overall == "pass"

    def failures(self) -> tuple[SiteCondition, ...]:
        return tuple(s for s in self.sites if s.verdict != "pass")


def _coset_distance(x: Fraction, offset: Fraction) -> Fraction:
    f = (x - offset) % 1
    return min(f, 1 - f)


def _site(side: str, point: UnitPoint, tested: Fraction, offset: Fraction, eps: float) -> SiteCondition:
    dist = _coset_distance(tested, offset)
    if dist == 0:
        verdict = "fail"
    elif float(dist) < eps:
        verdict = "boundary"
    else:
        verdict = "pass"
    return SiteCondition(side=side, point=point, tested=tested, forbidden_offset=offset, distance=dist, verdict=verdict)


def side_condition_sites(
    s: CanonicalSymbol, big_p: Fraction, side: str, eps_boundary: float = 1e-9
) -> list[SiteCondition]:
    """Coset conditions for one side; big_p is p on the c side and q on the d side.

    The tested values come from the exact jump data: at 1 the half exponent
    plus the sign of the scale, at -1 additionally half the winding power,
    at an interior jump the exponent itself.  The imaginary parts change only
    moduli of one-sided limits and never the tested arguments.
    """
    ensure_unimodular(s)
    sigma = Fraction(structural_sign(s.scale), 2)
    kappa_half = Fraction(s.kappa, 2)
    sites = [
        _site(side, ONE, sigma + s.beta_at(ONE).re / 2, Fraction(1, 2) + 1 / (2 * big_p), eps_boundary),
        _site(side, MINUS_ONE, kappa_half + sigma + s.beta_at(MINUS_ONE).re / 2, 1 / (2 * big_p), eps_boundary),
    ]
    for j in s.jumps:
        if j.point.in_upper_half:
            sites.append(_site(side, j.point, j.beta.re, 1 / big_p, eps_boundary))
    return sites


def fredholm_conditions(pair: SymbolPair, p: PLike, eps_boundary: float = 1e-9) -> ConditionReport:
    """Tri-state coset conditions at every site of c (with p) and d (with q)."""
    pf, qf = exponent_pair(p)
    sites = side_condition_sites(pair.c, pf, "c", eps_boundary) + side_condition_sites(
        pair.d, qf, "d", eps_boundary
    )
    if any(s.verdict == "fail" for s in sites):
        overall = "fail"
    elif any(s.verdict == "boundary" for s in sites):
        overall = "boundary"
    else:
        overall = "pass"
    return ConditionReport(p=pf, q=qf, sites=tuple(sites), overall=overall)


@dataclass(frozen=True)
class NormalizedRep:
    """Unique product representation s = t^{2n} a0 u(1,2g+) u(-1,2g-) prod u(tau,g) u(conj tau,g).

    gammas holds the common exponent of each conjugate pair, keyed by the
    upper-half point.  smooth_scale stays within 1e-9 of 1; it is kept so the
    reconstruction reproduces the input bit for bit.
    """

    side: str
    n: int
    gamma_plus: Exponent
    gamma_minus: Exponent
    gammas: tuple[tuple[UnitPoint, Exponent], ...]
    smooth_scale: complex
    smooth_log: FourierLogPoly

    def reconstruct(self) -> CanonicalSymbol:
        jumps = [
            JumpFactor(ONE, self.gamma_plus + self.gamma_plus),
            JumpFactor(MINUS_ONE, self.gamma_minus + self.gamma_minus),
        ]
        for pt, g in self.gammas:
            jumps.append(JumpFactor(pt, g))
            jumps.append(JumpFactor(pt.conjugate(), g))
        return CanonicalSymbol(
            kappa=2 * self.n, scale=self.smooth_scale, log_smooth=self.smooth_log, jumps=tuple(jumps)
        )

    def exponents(self) -> dict[UnitPoint, Exponent]:
        out = {ONE: self.gamma_plus, MINUS_ONE: self.gamma_minus}
        for pt, g in self.gammas:
            out[pt] = g
        return out


def _window_lows(big_p: Fraction, big_q: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    # open unit windows (lo, lo+1) for the endpoint and pair exponents
    return -1 / (2 * big_q), Fraction(-1, 2) - 1 / (2 * big_q), -1 / big_q


def _place(
    base: Exponent, lo: Fraction, side: str, point: UnitPoint, half_open: bool = False
) -> tuple[Exponent, int]:
    f = base.re - lo
    if f.denominator == 1 and not half_open:
        raise NotFredholmOnSide(side, point, base.re)
    s = math.floor(f)
    return base.shift(-s), s


def normalize(
    s: CanonicalSymbol, p: PLike, side: str = "c", half_open: bool = False
) -> NormalizedRep:
    """Normalize a structural symbol on one side, extracting the winding integer.

    The scale sign is absorbed into the exponents at 1 and -1, an odd power of
    t moves to the exponent at -1, and each exponent is then shifted by the
    unique integer that lands its real part in the open window of width one
    for this side.  Every unit shift transfers t^{+-2} into the t^{2n} front
    factor, so n collects the half winding plus all shifts.

    With half_open an exponent sitting exactly on the window edge is kept at
    the low edge instead of raising.  That placement has no Fredholm meaning;
    it exists so upper-bound estimates can proceed past a failed condition.
    """
    ensure_unimodular(s)
    pf, qf = exponent_pair(p)
    big_p, big_q = (pf, qf) if side == "c" else (qf, pf)
    lo_plus, lo_minus, lo_pair = _window_lows(big_p, big_q)

    kappa = s.kappa
    scale = s.scale
    beta_plus = s.beta_at(ONE)
    beta_minus = s.beta_at(MINUS_ONE)
    if structural_sign(scale) == 1:
        # u(1,1) * u(-1,-1) = -1 exactly
        beta_plus = beta_plus.shift(1)
        beta_minus = beta_minus.shift(-1)
        scale = -scale
    if kappa % 2:
        # u(-1,1) = t, with no extra sign
        beta_minus = beta_minus.shift(1)
        kappa -= 1
    n = kappa // 2

    gamma_plus, sh = _place(beta_plus.half(), lo_plus, side, ONE, half_open)
    n += sh
    gamma_minus, sh = _place(beta_minus.half(), lo_minus, side, MINUS_ONE, half_open)
    n += sh
    gammas = []
    for j in s.jumps:
        if j.point.in_upper_half:
            g, sh = _place(j.beta, lo_pair, side, j.point, half_open)
            n += sh
            gammas.append((j.point, g))
    return NormalizedRep(
        side=side,
        n=n,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        gammas=tuple(gammas),
        smooth_scale=scale,
        smooth_log=s.log_smooth,
    )


def normalized_pair(pair: SymbolPair, p: PLike) -> tuple[NormalizedRep, NormalizedRep]:
    """Normalize c at p and d at q; raises NotFredholmOnSide on failure."""
    return normalize(pair.c, p, side="c"), normalize(pair.d, p, side="d")


def fredholm_index(pair: SymbolPair, p: PLike) -> int:
    """Index m - n of the operator at p; raises if not Fredholm or on a boundary."""
    report = fredholm_conditions(pair, p)
    if report.overall == "fail":
        bad = report.failures()[0]
        raise NotFredholm(f"not Fredholm at p={report.p}: side {bad.side}, site {bad.point}")
    if report.overall == "boundary":
        bad = report.failures()[0]
        raise BoundaryCase(
            f"within eps of the forbidden set at p={report.p}: side {bad.side}, site {bad.point}"
        )
    rep_c, rep_d = normalized_pair(pair, p)
    return rep_d.n - rep_c.n


@dataclass(frozen=True, eq=False)
class CurveData:
    """Closed polyline tracing the arc-augmented image of the upper half circle."""

    segments: tuple[tuple[str, np.ndarray], ...]

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([seg for _, seg in self.segments])

    def tags(self) -> tuple[str, ...]:
        return tuple(tag for tag, _ in self.segments)


def _arc_points(z1: complex, z2: complex, theta: float, samples: int) -> np.ndarray:
    """Circular arc from z1 to z2 on which arg((z-z1)/(z-z2)) = 2*pi*theta.

    The origin lies on the closed arc exactly when arg(z1/z2) falls in the
    same coset, which reproduces the coset condition this arc encodes; that
    degeneracy is checked analytically, not by sampling.
    """
    if abs(z1 - z2) < 1e-14:
        return np.empty(0, dtype=complex)
    if min(abs(z1), abs(z2)) < 1e-9:
        raise CurveThroughOrigin("an arc endpoint sits at the origin")
    gap = (cmath.phase(z1 / z2) / TWO_PI - theta) % 1.0
    if min(gap, 1.0 - gap) < 1e-9:
        raise CurveThroughOrigin(f"the arc from {z1:.6g} to {z2:.6g} passes through the origin")
    s = (np.arange(samples) + 1.0) / (samples + 1.0)
    w = np.tan(math.pi * s / 2.0) * cmath.exp(2j * math.pi * theta)
    pts = (z1 - z2 * w) / (1.0 - w)
    return np.concatenate([[z1], pts, [z2]])


def build_hash_curve(
    s: CanonicalSymbol, p: PLike, image_samples: int = 2048, arc_samples: int = 256
) -> CurveData:
    """Trace the closed curve for one side; pass p for c and q for d.

    Starts at the point 1, runs the arc to the plus limit at 1, follows the
    image of the upper half circle with an inserted arc at every interior
    jump, and closes with the arc from the minus limit at -1 back to 1.
    """
    pf = float(as_fraction(p))
    if pf <= 1:
        raise ValueError("exponent parameter must exceed 1")
    breaks: list[Fraction] = [Fraction(0)]
    for j in s.jumps:
        if j.point.in_upper_half:
            breaks.append(j.point.turns)
    breaks.append(Fraction(1, 2))
    breaks.sort()

    segments: list[tuple[str, np.ndarray]] = []

    def add_arc(pt: UnitPoint, z1: complex, z2: complex, theta: float) -> None:
        arc = _arc_points(z1, z2, theta, arc_samples)
        if arc.size:
            segments.append((f"arc({pt.num}/{pt.den})", arc))

    _, plus_at_one = one_sided_limits(s, ONE)
    add_arc(ONE, 1.0 + 0j, plus_at_one, 0.5 + 0.5 / pf)

    for t0, t1 in zip(breaks[:-1], breaks[1:]):
        pt0 = UnitPoint(t0.numerator, t0.denominator)
        pt1 = UnitPoint(t1.numerator, t1.denominator)
        _, start = one_sided_limits(s, pt0)
        end, _ = one_sided_limits(s, pt1)
        count = max(32, int(round(image_samples * float(t1 - t0) * 2)))
        xs = np.linspace(TWO_PI * float(t0), TWO_PI * float(t1), count + 2)[1:-1]
        vals = eval_many(s, xs)
        segments.append(("image", np.concatenate([[start], vals, [end]])))
        if pt1 != MINUS_ONE:
            minus, plus = one_sided_limits(s, pt1)
            add_arc(pt1, minus, plus, 1.0 / pf)

    minus_at_minus_one, _ = one_sided_limits(s, MINUS_ONE)
    add_arc(MINUS_ONE, minus_at_minus_one, 1.0 + 0j, 0.5 / pf)

    curve = CurveData(segments=tuple(segments))
    if float(np.min(np.abs(curve.points))) < 1e-9:
        raise CurveThroughOrigin("a sampled curve point lies at the origin")
    return curve


def winding_from_curve(curve: CurveData) -> int:
    """Winding about the origin by continuous argument tracking along the polyline."""
    pts = curve.points
    closed = np.concatenate([pts, pts[:1]])
    increments = np.angle(closed[1:] / closed[:-1])
    total = float(np.sum(increments))
    w = total / TWO_PI
    nearest = round(w)
    if abs(w - nearest) > 0.1:
        raise ValueError(f"winding {w:.4f} is not close to an integer; refine the sampling")
    return int(nearest)
