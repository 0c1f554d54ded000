"""Closed-form divergences of spectral estimators and the resulting SURE.

The divergence of a map g is the sum of the partial derivatives of each
output entry with respect to the matching input entry. For complex data the
real and imaginary parts are treated as separate coordinates, so the sum
runs over 2mn terms.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import (
    FZeroNotZeroError,
    NonDifferentiablePointError,
    NonUniformFunctionError,
    StepTooSmallError,
    ThresholdTieError,
)
from .linalg import (
    default_gap_tol,
    group_spectrum,
    is_simple_full_rank,
    require_simple_full_rank,
    svd,
)
from .spectral import HARD, SOFT, SpectralFunction, apply_spectral
from .validation import (
    COMPLEX,
    REAL,
    check_matrix,
    check_nonnegative,
    check_positive,
    check_sigma,
    field_factor,
    field_of,
)

EXTEND = "extend"
STRICT = "strict"
ZERO = "zero"
TIE_MODES = (EXTEND, STRICT, ZERO)


def n_workers():
    """Worker count from ``SURE_SVT_THREADS`` (0 or unset means automatic)."""
    try:
        k = int(os.environ.get("SURE_SVT_THREADS", "0"))
    except ValueError:
        k = 0
    if k <= 0:
        k = os.cpu_count() or 1
    return k


def ordered_map(func, items):
    """``list(map(func, items))``, run on a thread pool when allowed.

    Results come back in input order, so reductions over them are
    deterministic regardless of scheduling.
    """
    items = list(items)
    k = n_workers()
    if k <= 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(func, items))


def _cross_sum(sigma, fvals):
    """``sum_{i != j} sigma_i f_i / (sigma_i^2 - sigma_j^2)``."""
    s2 = sigma**2
    diff = s2[:, None] - s2[None, :]
    np.fill_diagonal(diff, np.inf)
    return float(np.sum((sigma * fvals)[:, None] / diff))


def _tie_mask(sigma, kinks, gap_tol):
    mask = np.zeros(sigma.shape, dtype=bool)
    for k in kinks:
        mask |= np.abs(sigma - k) <= gap_tol
    return mask


def _values_and_slopes(sigma, f, gap_tol, on_tie):
    """f and f' on the spectrum, with threshold ties resolved.

    A tie is classified as "not above the threshold": slope 0 and, for
    soft thresholding, value 0. Returns ``(values, slopes, tied)``.
    """
    fv = f.value(sigma)
    fd = f.derivative(sigma)
    tied = _tie_mask(sigma, [k for k in f.kinks if k > 0], gap_tol)
    if tied.any():
        if not f.continuous:
            raise NonDifferentiablePointError(
                f"{f!r} is discontinuous at a singular value"
            )
        if on_tie == "raise":
            i = int(np.argmax(tied))
            raise ThresholdTieError(
                f"singular value {sigma[i]!r} is within {gap_tol:.3e} of the threshold"
            )
        fd = np.where(tied, 0.0, fd)
        if f.kind == SOFT:
            fv = np.where(tied, 0.0, fv)
    return fv, fd, bool(tied.any())


def _field_coeffs(field):
    field_factor(field)
    if field == COMPLEX:
        return 2, 1, 4  # |m-n| weight, extra f/sigma weight, cross weight
    return 1, 0, 2


def _div_simple(sigma, m, n, f, field, gap_tol, on_tie):
    s = check_sigma(sigma)
    if gap_tol is None:
        gap_tol = default_gap_tol(s)
    require_simple_full_rank(s, gap_tol)
    fv, fd, tied = _values_and_slopes(s, f, gap_tol, on_tie)
    w_mn, w_one, w_cross = _field_coeffs(field)
    gap = abs(m - n)
    val = np.sum(fd + (w_mn * gap + w_one) * fv / s) + w_cross * _cross_sum(s, fv)
    return float(val), tied


def div_spectral_simple(sigma, m, n, f, field=REAL, gap_tol=None, on_tie="nudge"):
    """Divergence of a spectral function at a simple, full-rank matrix.

    Real data::

        sum_i [f_i'(s_i) + |m-n| f_i(s_i)/s_i] + 2 sum_{i!=j} s_i f_i(s_i)/(s_i^2 - s_j^2)

    Complex data::

        sum_i [f_i'(s_i) + (2|m-n|+1) f_i(s_i)/s_i] + 4 sum_{i!=j} s_i f_i(s_i)/(s_i^2 - s_j^2)

    Parameters
    ----------
    sigma : array_like
        Singular values, descending, length min(m, n).
    m, n : int
        Matrix shape.
    f : SpectralFunction
    field : {"real", "complex"}
    gap_tol : float, optional
        Defaults to ``1e-8 * max(1, sigma_max)``.
    on_tie : {"nudge", "raise"}
        What to do when a singular value sits on a kink of ``f``.

    Raises
    ------
    NotSimpleError, RankDeficientError, ThresholdTieError,
    NonDifferentiablePointError
    """
    return _div_simple(sigma, m, n, f, field, gap_tol, on_tie)[0]


def _svt_simple(sigma, m, n, lam, gap_tol, on_tie, cross_weight, gap_weight, extra):
    s = check_sigma(sigma)
    lam = check_nonnegative(lam, "lam")
    if gap_tol is None:
        gap_tol = default_gap_tol(s)
    require_simple_full_rank(s, gap_tol)
    tied = np.abs(s - lam) <= gap_tol if lam > 0 else np.zeros(s.shape, dtype=bool)
    if tied.any() and on_tie == "raise":
        raise ThresholdTieError(f"a singular value is within {gap_tol:.3e} of lam={lam}")
    above = (s > lam) & ~tied
    shrunk = np.where(above, s - lam, 0.0)
    ratio = np.where(above, 1.0 - lam / s, 0.0)
    val = np.sum(above + (gap_weight * abs(m - n) + extra) * ratio)
    val += cross_weight * _cross_sum(s, shrunk)
    return float(val), bool(tied.any())


def div_svt_real_simple(sigma, m, n, lam, gap_tol=None, on_tie="nudge"):
    """Divergence of real SVT at a simple, full-rank matrix.

    ``sum_i [1(s_i > lam) + |m-n| (1 - lam/s_i)_+]
    + 2 sum_{i!=j} s_i (s_i - lam)_+ / (s_i^2 - s_j^2)``
    """
    return _svt_simple(sigma, m, n, lam, gap_tol, on_tie, 2, 1, 0)[0]


def div_svt_complex_simple(sigma, m, n, lam, gap_tol=None, on_tie="nudge"):
    """Divergence of complex SVT at a simple, full-rank matrix.

    The inverse-singular-value term carries weight ``2|m-n| + 1``, so it
    survives even for square matrices, and the cross sum has weight 4.
    """
    return _svt_simple(sigma, m, n, lam, gap_tol, on_tie, 4, 2, 1)[0]


def _slope_at_zero(f):
    # Right derivative: singular values approach zero from above.
    if f.kind in (SOFT, HARD):
        return 1.0 if f.lam == 0 else 0.0
    return float(f.derivative(np.zeros(1))[0])


def _div_repeated(profile, m, n, f, field, on_tie):
    if not f.uniform:
        raise NonUniformFunctionError("repeated-spectrum divergence needs a uniform f")
    if not f.f_at_zero_is_zero:
        raise FZeroNotZeroError("repeated-spectrum divergence needs f(0) = 0")
    s = np.asarray(profile.distinct, dtype=np.float64)
    d = np.asarray(profile.multiplicities, dtype=np.float64)
    pairs = np.array([comb(int(k), 2) for k in profile.multiplicities], dtype=np.float64)
    gap = abs(m - n)
    pos = s > 0
    sp = s[pos]
    fv = np.zeros_like(s)
    fd = np.zeros_like(s)
    tied = False
    if sp.size:
        fv[pos], fd[pos], tied = _values_and_slopes(sp, f, profile.gap_tol, on_tie)

    if field == COMPLEX:
        c_slope = d + 2 * pairs
        c_ratio = (2 * gap + 1) * d + 2 * pairs
        c_zero = 2 * (gap + 1) * d + 4 * pairs
        w_cross = 4
    else:
        field_factor(field)
        c_slope = d + pairs
        c_ratio = gap * d + pairs
        c_zero = (gap + 1) * d + 2 * pairs
        w_cross = 2

    val = np.sum(c_slope[pos] * fd[pos] + c_ratio[pos] * fv[pos] / sp)
    if (~pos).any():
        val += np.sum(c_zero[~pos]) * _slope_at_zero(f)
    s2 = s**2
    diff = s2[:, None] - s2[None, :]
    np.fill_diagonal(diff, np.inf)
    val += w_cross * np.sum((d[:, None] * d[None, :]) * (s * fv)[:, None] / diff)
    return float(val), tied


def div_spectral_repeated(profile, m, n, f, field=REAL, on_tie="nudge"):
    """Continuous extension of the divergence to tied or zero singular values.

    Parameters
    ----------
    profile : SpectrumProfile
        Distinct singular values ``s_i`` and multiplicities ``d_i``.
    m, n : int
    f : SpectralFunction
        Must be uniform with ``f(0) = 0``.
    field : {"real", "complex"}

    Notes
    -----
    Real data::

        sum_{s_i>0} [(d_i + C(d_i,2)) f'(s_i) + (|m-n| d_i + C(d_i,2)) f(s_i)/s_i]
        + sum_{s_i=0} [(|m-n|+1) d_i + 2 C(d_i,2)] f'(0)
        + 2 sum_{i!=j} d_i d_j s_i f(s_i) / (s_i^2 - s_j^2)

    Complex data uses ``d_i + 2C(d_i,2)``, ``(2|m-n|+1) d_i + 2C(d_i,2)``,
    ``2(|m-n|+1) d_i + 4C(d_i,2)`` and a cross weight of 4. ``f'(0)`` is the
    right derivative.

    Raises
    ------
    NonUniformFunctionError, FZeroNotZeroError
    """
    return _div_repeated(profile, m, n, f, field, on_tie)[0]


def spectral_divergence(sigma, m, n, f, field=REAL, gap_tol=None,
                        tie_mode=EXTEND, on_tie="nudge"):
    """Divergence with automatic simple/repeated dispatch.

    Returns ``(value, repeated, tied)``. ``tie_mode`` controls tied or
    vanishing spectra: ``"extend"`` uses the continuous extension,
    ``"strict"`` raises, ``"zero"`` returns 0 (the weak-divergence
    convention that ignores the measure-zero set).
    """
    if tie_mode not in TIE_MODES:
        raise ValueError(f"tie_mode must be one of {TIE_MODES}, got {tie_mode!r}")
    s = check_sigma(sigma)
    if gap_tol is None:
        gap_tol = default_gap_tol(s)
    if is_simple_full_rank(s, gap_tol):
        if f.kind == SOFT:
            cw, gw, ex = (4, 2, 1) if field == COMPLEX else (2, 1, 0)
            val, tied = _svt_simple(s, m, n, f.lam, gap_tol, on_tie, cw, gw, ex)
        else:
            val, tied = _div_simple(s, m, n, f, field, gap_tol, on_tie)
        return val, False, tied
    if tie_mode == STRICT:
        require_simple_full_rank(s, gap_tol)
    if tie_mode == ZERO:
        return 0.0, True, False
    profile = group_spectrum(s, gap_tol)
    val, tied = _div_repeated(profile, m, n, f, field, on_tie)
    return val, True, tied


def fd_divergence(func, x, h, workers=None):
    """Central-difference divergence of an arbitrary matrix map ``func``.

    Perturbs every real coordinate of ``x`` (and every imaginary one for
    complex ``x``) by ``+-h`` and sums the matching output derivatives.
    Terms are accumulated in fixed index order.
    """
    x = check_matrix(x)
    m, n = x.shape
    directions = [(i, j, 1.0) for i in range(m) for j in range(n)]
    if np.iscomplexobj(x):
        directions += [(i, j, 1j) for i in range(m) for j in range(n)]

    def term(d):
        i, j, unit = d
        xp = x.copy()
        xm = x.copy()
        xp[i, j] += h * unit
        xm[i, j] -= h * unit
        diff = func(xp)[i, j] - func(xm)[i, j]
        comp = diff.real if unit == 1.0 else np.imag(diff)
        return comp / (2 * h)

    if workers == 1:
        terms = [term(d) for d in directions]
    else:
        terms = ordered_map(term, directions)
    return float(sum(terms))


def fd_divergence_oracle(x, f, h=None, check_step=False, rtol=1e-3):
    """Finite-difference divergence of ``Y -> f(Y)``; the reference oracle.

    Parameters
    ----------
    x : array_like
    f : SpectralFunction
    h : float, optional
        Step; defaults to ``1e-5 * max(1, sigma_max(x))``.
    check_step : bool
        Also evaluate at ``h/2`` and ``h/4``. If successive estimates
        disagree by more than ``rtol`` and the disagreement grows as the
        step shrinks (the roundoff signature), raise
        :class:`StepTooSmallError`.
    """
    x = check_matrix(x)
    if h is None:
        h = 1e-5 * max(1.0, float(svd(x, check=False).sigma[0]))
    h = check_positive(h, "h")

    def func(z):
        return apply_spectral(z, f)

    d1 = fd_divergence(func, x, h)
    if check_step:
        d2 = fd_divergence(func, x, h / 2)
        d4 = fd_divergence(func, x, h / 4)
        e1 = abs(d1 - d2)
        e2 = abs(d2 - d4)
        scale = max(1.0, abs(d1))
        if e2 > rtol * scale and e2 > e1:
            raise StepTooSmallError(
                f"finite differences unstable under step halving (h={h:.3e})"
            )
    return d1


@dataclass(frozen=True)
class SureReport:
    """Stored terms of a SURE evaluation.

    ``sure == constant_term + residual_term + 2 * tau**2 * divergence``.
    ``repeated`` flags use of the tied/rank-deficient formula and
    ``threshold_tie`` flags a singular value classified onto the threshold.
    """

    lam: float
    divergence: float
    residual_term: float
    constant_term: float
    sure: float
    tau: float
    field: str = REAL
    shape: tuple = ()
    repeated: bool = False
    threshold_tie: bool = False

    @classmethod
    def build(cls, lam, divergence, residual, shape, field, tau, **flags):
        m, n = shape
        const = -field_factor(field) * m * n * tau**2
        sure = const + residual + 2 * tau**2 * divergence
        return cls(
            lam=float(lam),
            divergence=float(divergence),
            residual_term=float(residual),
            constant_term=float(const),
            sure=float(sure),
            tau=float(tau),
            field=field,
            shape=(int(m), int(n)),
            **flags,
        )


def sure_svt_from_sigma(sigma, shape, field, lam, tau, gap_tol=None,
                        tie_mode=EXTEND, on_tie="nudge"):
    """SURE of SVT given only the singular values of the observation."""
    s = check_sigma(sigma)
    lam = check_nonnegative(lam, "lam")
    tau = check_positive(tau, "tau")
    m, n = shape
    div, rep, tied = spectral_divergence(
        s, m, n, SpectralFunction.soft(lam), field, gap_tol, tie_mode, on_tie
    )
    residual = float(np.sum(np.minimum(lam**2, s**2)))
    return SureReport.build(lam, div, residual, (m, n), field, tau,
                            repeated=rep, threshold_tie=tied)


def sure_svt(y, lam, tau, gap_tol=None, tie_mode=EXTEND, on_tie="nudge"):
    """Stein unbiased risk estimate of ``svt(y, lam)``.

    ``-beta*m*n*tau^2 + sum_i min(lam^2, s_i^2) + 2 tau^2 div`` with
    ``beta = 1`` for real and ``2`` for complex data.

    Returns
    -------
    SureReport
    """
    y = check_matrix(y, "y")
    s = svd(y).sigma
    return sure_svt_from_sigma(s, y.shape, field_of(y), lam, tau, gap_tol,
                               tie_mode, on_tie)


def sure_spectral(y, f, tau, gap_tol=None, tie_mode=EXTEND, on_tie="nudge"):
    """SURE of a general spectral estimator ``f``.

    The residual ``||f(y) - y||_F^2`` is evaluated on the spectrum as
    ``sum_i (f_i(s_i) - s_i)^2``.
    """
    y = check_matrix(y, "y")
    tau = check_positive(tau, "tau")
    m, n = y.shape
    field = field_of(y)
    s = svd(y).sigma
    div, rep, tied = spectral_divergence(s, m, n, f, field, gap_tol, tie_mode, on_tie)
    residual = float(np.sum((f.value(s) - s) ** 2))
    lam = f.lam if f.kind in (SOFT, HARD) else float("nan")
    return SureReport.build(lam, div, residual, (m, n), field, tau,
                            repeated=rep, threshold_tie=tied)


def degrees_of_freedom(y, lam, gap_tol=None, tie_mode=EXTEND):
    """Plug-in degrees of freedom of SVT: its divergence at ``y``."""
    y = check_matrix(y, "y")
    m, n = y.shape
    s = svd(y).sigma
    val, _, _ = spectral_divergence(
        s, m, n, SpectralFunction.soft(lam), field_of(y), gap_tol, tie_mode
    )
    return val


__all__ = [
    "SureReport",
    "degrees_of_freedom",
    "div_spectral_repeated",
    "div_spectral_simple",
    "div_svt_complex_simple",
    "div_svt_real_simple",
    "fd_divergence",
    "fd_divergence_oracle",
    "spectral_divergence",
    "sure_spectral",
    "sure_svt",
    "sure_svt_from_sigma",
]
