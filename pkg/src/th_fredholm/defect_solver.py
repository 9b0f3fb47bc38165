"""Defect numbers dim ker and dim coker from the sign pattern of (n, m).

Three of the four sign cases are pure arithmetic.  Only n > 0, m > 0 needs
numerics: the n x m matrix with entries rho_{i-j} + rho_{i+j}, whose kernel
dimension feeds both defect numbers.  Since the matrix is assembled from a
truncated series, the rank decision is audited: a singular-value gap report
accompanies every kernel dimension, and when the rho tail bound is large
enough to move singular values across the rank threshold the solver refuses
to answer instead of guessing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fredholm_engine import (
    BoundaryCase,
    NotFredholm,
    fredholm_conditions,
    normalize,
)
from .symbol_core import SymbolPair
from .wiener_hopf import RhoSeries, build_plus_factor, rho_coefficients


class InsufficientCoefficients(ValueError):
    """The rho series does not hold enough coefficients for the matrix."""


class RankUndecidable(RuntimeError):
    """The rho tail bound could flip the rank decision.

    Attributes
    ----------
    tail_bound : float
        Coefficient uncertainty propagated to the matrix.
    critical_sv : float
        Distance from the nearest singular value to the rank threshold.
    """

    def __init__(self, message: str, tail_bound: float, critical_sv: float):
        super().__init__(message)
        self.tail_bound = tail_bound
        self.critical_sv = critical_sv


class IllConditionedRankWarning(UserWarning):
    """The singular-value gap at the rank cut is below the audit ratio."""


@dataclass(frozen=True, eq=False)
class DefectMatrix:
    """The n x m matrix [rho_{i-j} + rho_{i+j}] with its source series."""

    n: int
    m: int
    matrix: np.ndarray
    rho: RhoSeries


@dataclass(frozen=True, eq=False)
class RankDecision:
    rank: int
    kernel_dim: int
    singular_values: np.ndarray
    gap_ratio: float
    threshold: float


@dataclass(frozen=True, eq=False)
class DefectReport:
    fredholm: bool
    n: int
    m: int
    dim_ker: int
    dim_coker: int
    case_tag: str  # "G-zero" | "G-count" | "F-count" | "F-matrix"
    matrix: DefectMatrix | None = None
    kernel_tolerance: float | None = None
    gap_ratio: float | None = None
    bounds_only: bool = False
    rho: RhoSeries | None = None
    rep_c: object = None
    rep_d: object = None

    @property
    def index(self) -> int:
        return self.m - self.n


def case_tag(n: int, m: int) -> str:
    """Which of the four sign cases (exactly one) applies."""
    if n > 0 and m <= 0:
        return "G-zero"
    if n <= 0 and m <= 0:
        return "G-count"
    if n <= 0 and m > 0:
        return "F-count"
    return "F-matrix"


def defect_matrix(rho: RhoSeries, n: int, m: int) -> DefectMatrix:
    """Assemble [rho_{i-j} + rho_{i+j}] for 0 <= i < n, 0 <= j < m."""
    if n < 1 or m < 1:
        raise ValueError("the defect matrix exists only for n >= 1 and m >= 1")
    if rho.N_keep < n + m - 1:
        raise InsufficientCoefficients(
            f"need rho up to |k| = {n + m - 2}, kept only {rho.N_keep}"
        )
    out = np.empty((n, m), dtype=complex)
    for i in range(n):
        for j in range(m):
            out[i, j] = rho.get(i - j) + rho.get(i + j)
    return DefectMatrix(n=n, m=m, matrix=out, rho=rho)


def rank_decision(matrix: np.ndarray, tol_rel: float = 1e-8) -> RankDecision:
    """Numerical rank with the singular-value gap around the threshold."""
    a = np.asarray(matrix, dtype=complex)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return RankDecision(
            rank=0,
            kernel_dim=a.shape[1],
            singular_values=sv,
            gap_ratio=np.inf,
            threshold=0.0,
        )
    threshold = tol_rel * sv[0]
    rank = int(np.sum(sv > threshold))
    if 0 < rank < sv.size and sv[rank] > 0:
        gap = float(sv[rank - 1] / sv[rank])
    else:
        gap = np.inf
    return RankDecision(
        rank=rank,
        kernel_dim=a.shape[1] - rank,
        singular_values=sv,
        gap_ratio=gap,
        threshold=threshold,
    )


def numerical_kernel_dim(matrix: np.ndarray, tol_rel: float = 1e-8) -> int:
    """Columns minus numerical rank; warns when the deciding gap is thin."""
    decision = rank_decision(matrix, tol_rel)
    if decision.gap_ratio < 10:
        warnings.warn(
            f"singular-value gap ratio {decision.gap_ratio:.2f} at the rank cut",
            IllConditionedRankWarning,
        )
    return decision.kernel_dim


def _audit_rank(decision: RankDecision, dm: DefectMatrix) -> None:
    tail = dm.rho.tail_bound
    if not np.isfinite(tail):
        raise RankUndecidable("rho carries no finite tail bound", tail, 0.0)
    # every entry moves by at most 2*tail, so the spectral norm by at most this
    perturbation = 2.0 * tail * np.sqrt(dm.n * dm.m)
    sv = decision.singular_values
    distances = np.abs(sv - decision.threshold)
    critical = float(distances.min()) if sv.size else np.inf
    if perturbation >= max(critical, 1e-300):
        raise RankUndecidable(
            f"rho tail bound {tail:.3e} perturbs singular values by up to "
            f"{perturbation:.3e}, within {critical:.3e} of the rank threshold",
            tail,
            critical,
        )


def defect_numbers(
    pair: SymbolPair,
    p,
    tol_rel: float = 1e-8,
    bounds_only: bool = False,
    N_keep: int | None = None,
    factor_order: int = 2048,
    **rho_options,
) -> DefectReport:
    """Full defect report at p per the four-case dispatch.

    With bounds_only the interval placements become half-open so boundary
    hits stop being errors; the reported dimensions are then only upper
    bounds and the report says so.

    Raises
    ------
    NotFredholm
        When the conditions fail (or sit within eps of failing) and
        bounds_only is False.
    RankUndecidable
        When the matrix path cannot commit to a rank at the requested
        confidence.
    """
    report = fredholm_conditions(pair, p)
    fredholm = report.overall == "pass"
    if not fredholm and not bounds_only:
        bad = report.failures()[0]
        err = BoundaryCase if report.overall == "boundary" else NotFredholm
        raise err(f"not Fredholm at p={report.p}: side {bad.side}, site {bad.point}")
    half_open = not fredholm
    rep_c = normalize(pair.c, p, side="c", half_open=half_open)
    rep_d = normalize(pair.d, p, side="d", half_open=half_open)
    n, m = rep_c.n, rep_d.n
    tag = case_tag(n, m)
    common = dict(
        fredholm=fredholm,
        n=n,
        m=m,
        case_tag=tag,
        bounds_only=not fredholm,
        rep_c=rep_c,
        rep_d=rep_d,
    )
    if tag == "G-zero":
        return DefectReport(dim_ker=0, dim_coker=n - m, **common)
    if tag == "G-count":
        return DefectReport(dim_ker=-n, dim_coker=-m, **common)
    if tag == "F-count":
        return DefectReport(dim_ker=m - n, dim_coker=0, **common)

    keep = N_keep if N_keep is not None else max(n + m, 16)
    c_plus = build_plus_factor(rep_c, factor_order)
    d_plus = build_plus_factor(rep_d, factor_order)
    rho = rho_coefficients(c_plus, d_plus, pair.b, n, m, keep, **rho_options)
    dm = defect_matrix(rho, n, m)
    decision = rank_decision(dm.matrix, tol_rel)
    if fredholm:
        _audit_rank(decision, dm)
    if decision.gap_ratio < 10:
        warnings.warn(
            f"singular-value gap ratio {decision.gap_ratio:.2f} at the rank cut",
            IllConditionedRankWarning,
        )
    r = decision.rank
    return DefectReport(
        dim_ker=m - r,
        dim_coker=n - r,
        matrix=dm,
        kernel_tolerance=tol_rel,
        gap_ratio=decision.gap_ratio,
        rho=rho,
        **common,
    )


def invertibility(pair: SymbolPair, p) -> str:
    """Verdict "invertible", "not-invertible", or "not-fredholm".

    Invertible means Fredholm with trivial kernel and cokernel, which per the
    case table happens exactly for n = m = 0 or n = m > 0 with a nonsingular
    matrix.  A RankUndecidable audit failure propagates; no verdict is
    fabricated over an unstable rank.
    """
    try:
        report = defect_numbers(pair, p)
    except NotFredholm:
        return "not-fredholm"
    if report.dim_ker == 0 and report.dim_coker == 0:
        return "invertible"
    return "not-invertible"
