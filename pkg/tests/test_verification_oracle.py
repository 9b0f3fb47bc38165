"""Dual-route coefficients, finite sections, and explicit kernel elements."""

import math
from fractions import Fraction

import numpy as np
import pytest

from th_fredholm.defect_solver import defect_numbers
from th_fredholm.symbol_core import (
    CanonicalSymbol,
    FourierLogPoly,
    jump_unit,
    multiply,
    validate_pair,
)
from th_fredholm.verification_oracle import (
    MethodDisagreement,
    ResidualTooLarge,
    TwoSidedSeries,
    finite_section,
    fourier_coeffs,
    hankel_matrix,
    kernel_residual_check,
    rho_crosscheck,
    sampled_fft_coeffs,
    toeplitz_matrix,
)
from th_fredholm.wiener_hopf import rho_for_pair


def smooth(kappa=0, scale=1.0, log=None):
    return CanonicalSymbol(
        kappa=kappa, scale=scale, log_smooth=FourierLogPoly.of(log or {}), jumps=()
    )


def test_monomial_coefficients():
    series = fourier_coeffs(CanonicalSymbol.monomial(3), 8)
    expected = np.zeros(17, dtype=complex)
    expected[8 + 3] = 1.0
    assert np.allclose(series.as_array(), expected, atol=1e-12)
    assert series.cross_deviation < 1e-9


def test_exponential_coefficients():
    series = fourier_coeffs(smooth(log={1: 1.0}), 12)
    for k in range(-12, 13):
        want = 1.0 / math.factorial(k) if k >= 0 else 0.0
        assert abs(series.get(k) - want) < 1e-12


def test_single_jump_against_integral_closed_form():
    beta = 0.3
    series = fourier_coeffs(jump_unit(0, 1, beta), 64)
    assert series.cross_deviation < 1e-6
    for k in range(-16, 17):
        want = math.sin(math.pi * beta) / (math.pi * (beta - k))
        assert abs(series.get(k) - want) < 2e-6


def test_series_matches_fft_for_smooth_symbol():
    s = smooth(kappa=1, scale=0.7 - 0.2j, log={1: 0.3, -2: 0.1j})
    a = fourier_coeffs(s, 32).as_array()
    b = sampled_fft_coeffs(s, 32).as_array()
    assert np.max(np.abs(a - b)) < 1e-9


def test_two_sided_series_accessors():
    series = fourier_coeffs(smooth(log={1: 0.5}), 8)
    with pytest.raises(IndexError):
        series.get(9)
    flipped = series.tilde()
    assert flipped.get(-3) == series.get(3)
    energy = series.tail_energy()
    assert np.all(np.diff(energy) <= 1e-15)


def test_method_disagreement_on_absurd_tolerance():
    with pytest.raises(MethodDisagreement):
        fourier_coeffs(jump_unit(0, 1, 0.3), 32, tol=1e-16)


def test_finite_section_identity_cases():
    one = CanonicalSymbol.one()
    sec = finite_section(validate_pair(one, one), 6)
    assert np.allclose(sec.matrix, np.eye(6), atol=1e-12)
    # b = t^{-1} stores its only coefficient at -1, which j+k+1 >= 1 never hits
    pair = validate_pair(one, CanonicalSymbol.monomial(-1))
    sec = finite_section(pair, 6)
    assert np.allclose(sec.matrix, np.eye(6), atol=1e-12)


def test_finite_section_shift_plus_corner():
    t = CanonicalSymbol.monomial(1)
    sec = finite_section(validate_pair(t, t), 5)
    expected = np.diag(np.ones(4), -1)
    expected[0, 0] = 1.0
    assert np.allclose(sec.matrix, expected, atol=1e-12)


def _random_banded(rng, M, band):
    coeffs = np.zeros(2 * M + 1, dtype=complex)
    idx = np.arange(-band, band + 1)
    coeffs[idx + M] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    return TwoSidedSeries(coeffs, "series-convolution")


def test_toeplitz_hankel_product_identities():
    rng = np.random.default_rng(71)
    N = 64
    M = 2 * N
    from scipy.signal import fftconvolve

    for _ in range(5):
        a = _random_banded(rng, M, N // 4)
        b = _random_banded(rng, M, N // 4)
        ab = TwoSidedSeries(
            fftconvolve(a.as_array(), b.as_array())[M : 3 * M + 1], "series-convolution"
        )
        ta, tb = toeplitz_matrix(a, N), toeplitz_matrix(b, N)
        ha, hb = hankel_matrix(a, N), hankel_matrix(b, N)
        tbt = toeplitz_matrix(b.tilde(), N)
        hbt = hankel_matrix(b.tilde(), N)
        mid = slice(N // 4, 3 * N // 4)
        lhs = toeplitz_matrix(ab, N)[mid, mid]
        rhs = (ta @ tb + ha @ hbt)[mid, mid]
        assert np.max(np.abs(lhs - rhs)) < 1e-10
        lhs = hankel_matrix(ab, N)[mid, mid]
        rhs = (ta @ hb + ha @ tbt)[mid, mid]
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_kernel_check_shift_by_one():
    t_inv = CanonicalSymbol.monomial(-1)
    pair = validate_pair(t_inv, t_inv)
    basis = kernel_residual_check(pair, 2, N=64)
    assert len(basis.vectors) == 1
    assert basis.tags == ("particular[0]",)
    assert basis.residuals.max() < 1e-8
    assert basis.gram_rank == 1


def test_kernel_check_vacuous_for_identity():
    basis = kernel_residual_check(
        validate_pair(CanonicalSymbol.one(), CanonicalSymbol.one()), 2, N=32
    )
    assert basis.vectors == () and basis.tags == ()
    assert basis.residuals.size == 0 and basis.gram_rank == 0


def test_kernel_check_shift_by_two():
    t2 = CanonicalSymbol.monomial(-2)
    basis = kernel_residual_check(validate_pair(t2, t2), 2, N=64)
    assert len(basis.vectors) == 2
    assert basis.gram_rank == 2
    assert basis.residuals.max() < 1e-8


def test_kernel_check_mixed_homogeneous_and_particular():
    c = smooth(kappa=-2, log={1: 0.3, -1: -0.3})
    b = CanonicalSymbol.one()
    pair = validate_pair(multiply(c, b), b)
    report = defect_numbers(pair, 2)
    assert (report.n, report.m) == (-1, 1)
    basis = kernel_residual_check(pair, 2, report, N=96)
    assert sorted(basis.tags) == ["homogeneous[0]", "particular[0]"]
    assert basis.residuals.max() < 1e-6
    assert basis.gram_rank == 2


def test_kernel_check_smooth_b():
    c = smooth(kappa=-2, log={1: 0.3, -1: -0.3})
    b = smooth(log={1: 0.2, -1: 0.1})
    pair = validate_pair(multiply(c, b), b)
    report = defect_numbers(pair, 2)
    assert report.dim_ker == report.m - report.n
    basis = kernel_residual_check(pair, 2, report, N=128)
    assert len(basis.vectors) == report.dim_ker
    assert basis.residuals.max() < 1e-6


def test_residual_gate_trips_on_absurd_tolerance():
    c = smooth(kappa=-2, log={1: 0.3, -1: -0.3})
    pair = validate_pair(multiply(c, CanonicalSymbol.one()), CanonicalSymbol.one())
    with pytest.raises(ResidualTooLarge):
        kernel_residual_check(pair, 2, N=96, tol=1e-18)


def test_rho_crosscheck_trivial_pair():
    one = CanonicalSymbol.one()
    _, _, rho = rho_for_pair(validate_pair(one, one), 2, N_keep=16)
    assert rho_crosscheck(rho, validate_pair(one, one), N=8) < 1e-9


def test_rho_crosscheck_smooth_pair():
    c = smooth(kappa=2, log={1: 0.2, -1: -0.2})
    b = smooth(kappa=-1, scale=0.8 - 0.3j, log={1: 0.1 + 0.2j, -2: -0.15})
    pair = validate_pair(multiply(c, b), b)
    _, _, rho = rho_for_pair(pair, 2, N_keep=32)
    assert rho_crosscheck(rho, pair, N=16) < 1e-8


def test_rho_crosscheck_mild_jump():
    b = jump_unit(0, 1, Fraction(1, 8))
    pair = validate_pair(CanonicalSymbol.one(), b)
    _, _, rho = rho_for_pair(pair, 2, N_keep=32)
    assert rho_crosscheck(rho, pair, N=16, tol=1e-6) < 1e-6
