"""Synthetic ground truth, seeded noise, Monte-Carlo risk and threshold search.

Random streams come from :func:`numpy.random.default_rng`. An observation
drawn by :func:`add_noise` uses the stream seeded by ``seed`` alone; Monte
Carlo trial ``j`` uses the stream seeded by the pair ``(seed, j)``, so trials
are independent of each other and of the single observation, and results do
not depend on evaluation order.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blockwise import BlockConfig, BlockSpectra
from .divergence import ordered_map, sure_svt_from_sigma
from .exceptions import BadBracketError, BadKindError, BadShapeError
from .linalg import svd
from .validation import (
    COMPLEX,
    REAL,
    check_matrix,
    check_positive,
    field_factor,
    field_of,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _gaussian(rng, shape, field):
    if field == COMPLEX:
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return rng.standard_normal(shape)


def haar_orthonormal(rng, m, r, field=REAL):
    """m x r matrix with orthonormal columns, Haar distributed."""
    q, rr = np.linalg.qr(_gaussian(rng, (m, r), field))
    d = np.diag(rr)
    ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return q * ph


def sigmoid_spectrum(p):
    """``sqrt(p) / (1 + exp((i - p/2) / (p/10)))`` for i = 1..p."""
    i = np.arange(1, p + 1, dtype=np.float64)
    return math.sqrt(p) / (1.0 + np.exp((i - p / 2) / (p / 10)))


def kind_rank(kind, m, n):
    """Target rank of the test ensembles (None for the sigmoid spectrum)."""
    p = min(m, n)
    if kind == 1:
        return p
    if kind == 2:
        return max(1, int(round(p / 2)))
    if kind == 3:
        return max(1, int(round(p / 20)))
    return None


def gen_low_rank(m, n, rank, seed, field=REAL):
    """Product of iid Gaussian m x rank and n x rank factors, unit Frobenius norm."""
    if m < 1 or n < 1 or not 1 <= rank <= min(m, n):
        raise BadShapeError(f"need m, n >= 1 and 1 <= rank <= min(m, n); got {m}, {n}, {rank}")
    field_factor(field)
    rng = np.random.default_rng(seed)
    g1 = _gaussian(rng, (m, rank), field)
    g2 = _gaussian(rng, (n, rank), field)
    x = g1 @ g2.conj().T
    return x / np.linalg.norm(x)


def gen_test_matrix(kind, m, n, seed, field=REAL):
    """One of the four test ensembles, normalized to unit Frobenius norm.

    kind 1
        iid standard Gaussian (full rank).
    kind 2, 3
        Gaussian factor products of rank ``min(m,n)/2`` and ``min(m,n)/20``
        (100 and 10 at 200 x 500).
    kind 4
        Haar singular vectors with the sigmoid spectrum of
        :func:`sigmoid_spectrum` of length ``min(m, n)``.
    """
    if kind not in (1, 2, 3, 4):
        raise BadKindError("kind must be 1..4")
    if int(m) < 1 or int(n) < 1:
        raise BadShapeError(f"dimensions must be positive, got {m}x{n}")
    m, n = int(m), int(n)
    field_factor(field)
    if kind in (2, 3):
        return gen_low_rank(m, n, kind_rank(kind, m, n), seed, field)
    rng = np.random.default_rng(seed)
    if kind == 1:
        x = _gaussian(rng, (m, n), field)
    else:
        p = min(m, n)
        u = haar_orthonormal(rng, m, p, field)
        v = haar_orthonormal(rng, n, p, field)
        x = (u * sigmoid_spectrum(p)) @ v.conj().T
    return x / np.linalg.norm(x)


@dataclass(frozen=True)
class NoiseModel:
    """iid Gaussian noise with per-real-coordinate standard deviation ``tau``.

    Complex noise has independent real and imaginary parts, each N(0, tau^2).
    """

    tau: float
    seed: int = 0
    field: Optional[str] = None

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 0:
            raise ValueError("tau must be a nonnegative finite number")
        if self.field is not None:
            field_factor(self.field)

    def draw(self, shape, counter=None):
        entropy = self.seed if counter is None else [self.seed, counter]
        rng = np.random.default_rng(entropy)
        return self.tau * _gaussian(rng, shape, self.field or REAL)


def add_noise(x0, noise, counter=None):
    """``x0 + w`` with ``w`` drawn from ``noise`` (stream ``counter`` if given)."""
    x0 = check_matrix(x0, "x0")
    fld = noise.field or field_of(x0)
    if fld == REAL and np.iscomplexobj(x0):
        raise ValueError("real noise model applied to complex data")
    nm = NoiseModel(noise.tau, noise.seed, fld)
    return x0 + nm.draw(x0.shape, counter)


def tau_from_snr(snr, m, n):
    """Noise level for ``SNR = 1 / (sqrt(m n) tau)`` at unit-norm signal."""
    snr = check_positive(snr, "snr")
    return 1.0 / (snr * math.sqrt(m * n))


def log_grid(lo, hi, count):
    """``count`` log-spaced values from ``lo`` to ``hi`` (both > 0)."""
    if not (0 < lo < hi) or count < 2:
        raise BadBracketError("log grid needs 0 < lo < hi and count >= 2")
    return np.logspace(math.log10(lo), math.log10(hi), int(count))


def _svt_losses(y, x0, lambdas):
    """``||svt(y, lam) - x0||_F^2`` for every lam from one SVD."""
    fac = svd(y, check=False)
    s = fac.sigma
    proj = np.real(np.sum(fac.u.conj() * (x0 @ fac.v), axis=0))
    x0sq = float(np.sum(np.abs(x0) ** 2))
    shr = np.maximum(s[None, :] - np.asarray(lambdas)[:, None], 0.0)
    return np.sum(shr**2, axis=1) - 2 * shr @ proj + x0sq, fac


def _trial(x0, lambdas, noise, j, estimator, tau_for_sure):
    y = add_noise(x0, noise, counter=j)
    if isinstance(estimator, BlockConfig):
        spectra = BlockSpectra(y, estimator)
        loss = np.array([np.sum(np.abs(spectra.estimate(lam) - x0) ** 2) for lam in lambdas])
        if tau_for_sure is None:
            return loss, None
        sure = np.array([spectra.sure(lam, tau_for_sure).sure for lam in lambdas])
        return loss, sure
    loss, fac = _svt_losses(y, x0, lambdas)
    if tau_for_sure is None:
        return loss, None
    fld = field_of(y)
    sure = np.array([
        sure_svt_from_sigma(fac.sigma, y.shape, fld, lam, tau_for_sure).sure
        for lam in lambdas
    ])
    return loss, sure


def _check_estimator(estimator):
    if isinstance(estimator, BlockConfig) or estimator == "svt":
        return estimator
    raise ValueError("estimator must be 'svt' or a BlockConfig")


def mc_risk(x0, lambdas, noise, trials, estimator="svt"):
    """Monte-Carlo mean squared error of SVT (or block-wise SVT) per lambda.

    Parameters
    ----------
    x0 : array_like
        Ground truth.
    lambdas : sequence of float
    noise : NoiseModel
    trials : int
    estimator : "svt" or BlockConfig

    Returns
    -------
    ndarray
        Mean of ``||est_lam(y_j) - x0||_F^2`` over trials, one per lambda.
    """
    return mc_trials(x0, lambdas, noise, trials, estimator)[0].mean(axis=0)


def mc_trials(x0, lambdas, noise, trials, estimator="svt", with_sure=False):
    """Per-trial losses (and SURE values on the same draws).

    Returns ``(losses, sures)`` with shape (trials, len(lambdas)); ``sures``
    is None unless ``with_sure``.
    """
    x0 = check_matrix(x0, "x0")
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    estimator = _check_estimator(estimator)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    tau_s = noise.tau if with_sure else None
    if with_sure:
        check_positive(noise.tau, "tau")
    results = ordered_map(
        lambda j: _trial(x0, lambdas, noise, j, estimator, tau_s), range(int(trials))
    )
    losses = np.array([r[0] for r in results])
    sures = np.array([r[1] for r in results]) if with_sure else None
    return losses, sures


@dataclass
class SweepResult:
    """SURE (and optionally Monte-Carlo risk) over a threshold grid."""

    lambdas: np.ndarray
    sure_values: np.ndarray
    argmin_lambda: float
    mc_risk: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    @property
    def argmin_index(self):
        return int(np.argmin(self.sure_values))


def sure_curve(y, lambdas, tau, estimator="svt"):
    """SURE of SVT or block-wise SVT at each lambda of a grid."""
    y = check_matrix(y, "y")
    tau = check_positive(tau, "tau")
    estimator = _check_estimator(estimator)
    if isinstance(estimator, BlockConfig):
        spectra = BlockSpectra(y, estimator)
        return np.array([spectra.sure(lam, tau).sure for lam in lambdas])
    s = svd(y).sigma
    fld = field_of(y)
    return np.array([sure_svt_from_sigma(s, y.shape, fld, lam, tau).sure for lam in lambdas])


def sweep(y, lambdas, tau, estimator="svt", x0=None, trials=0, seed=0):
    """Evaluate SURE on an ascending grid, optionally with Monte-Carlo risk.

    Monte-Carlo trials (when ``x0`` and ``trials`` are given) draw fresh
    observations of ``x0`` with noise level ``tau`` from streams keyed by
    ``seed``; they never reuse ``y``.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64).ravel()
    if lambdas.size == 0 or np.any(np.diff(lambdas) <= 0):
        raise BadBracketError("lambda grid must be non-empty and strictly ascending")
    y = check_matrix(y, "y")
    sure = sure_curve(y, lambdas, tau, estimator)
    risk = None
    if x0 is not None and trials:
        noise = NoiseModel(tau, seed, field_of(y))
        risk = mc_risk(x0, lambdas, noise, trials, estimator)
    i = int(np.argmin(sure))
    m, n = y.shape
    meta = {
        "shape": (m, n),
        "field": field_of(y),
        "tau": float(tau),
        "seed": int(seed),
        "snr": 1.0 / (math.sqrt(m * n) * tau),
        "estimator": "svt" if estimator == "svt" else f"bsvt(k={estimator.k})",
        "trials": int(trials),
    }
    return SweepResult(lambdas, sure, float(lambdas[i]), risk, meta)


def golden_section_min(objective, lo, hi, tol, log=None, max_iter=1000):
    """Minimize a unimodal function on ``[lo, hi]`` by golden-section search.

    The search runs in log-lambda space when ``lo > 0`` (or ``log=True``) and
    in linear space otherwise. It stops once the bracket width, measured in
    lambda, is at most ``tol`` and returns the bracket midpoint. Unimodality
    is assumed, not checked.

    Raises
    ------
    BadBracketError
        If ``lo >= hi``, ``tol <= 0`` or log space is requested with ``lo <= 0``.
    """
    lo, hi, tol = float(lo), float(hi), float(tol)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise BadBracketError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise BadBracketError("tol must be positive")
    if log is None:
        log = lo > 0
    if log and lo <= 0:
        raise BadBracketError("log-space search needs lo > 0")
    fwd, back = (math.log, math.exp) if log else ((lambda v: v), (lambda v: v))

    a, b = fwd(lo), fwd(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = objective(back(c)), objective(back(d))
    for _ in range(max_iter):
        if back(b) - back(a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = objective(back(c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = objective(back(d))
    return 0.5 * (back(a) + back(b))


def default_bracket(sigma_max):
    """Search interval ``[1e-6 s, s]`` with tolerance ``1e-6 s`` for ``s = sigma_max``."""
    s = max(float(sigma_max), np.finfo(float).tiny)
    return 1e-6 * s, s, 1e-6 * s


def select_lambda(y, tau, lo=None, hi=None, tol=None, estimator="svt"):
    """Golden-section SURE minimization; returns ``(lam, SureReport)``."""
    y = check_matrix(y, "y")
    tau = check_positive(tau, "tau")
    estimator = _check_estimator(estimator)
    if isinstance(estimator, BlockConfig):
        spectra = BlockSpectra(y, estimator)
        smax = spectra.sigma_max

        def report(lam):
            return spectra.sure(lam, tau)
    else:
        s = svd(y).sigma
        smax = float(s[0])
        fld = field_of(y)

        def report(lam):
            return sure_svt_from_sigma(s, y.shape, fld, lam, tau)

    dlo, dhi, dtol = default_bracket(smax)
    lo = dlo if lo is None else lo
    hi = dhi if hi is None else hi
    tol = dtol if tol is None else tol
    lam = golden_section_min(lambda v: report(v).sure, lo, hi, tol)
    return lam, report(lam)


def block_size_sweep(x, nx, ny, sizes, lambdas, tau):
    """SURE sweeps for several block sizes and their lower envelope.

    Returns ``(results, envelope)`` where ``results`` maps block size to a
    :class:`SweepResult` and ``envelope`` is the pointwise minimum SURE.
    """
    results = {}
    for k in sizes:
        cfg = BlockConfig(nx, ny, int(k))
        results[int(k)] = sweep(x, lambdas, tau, cfg)
    envelope = np.min(np.stack([r.sure_values for r in results.values()]), axis=0)
    return results, envelope
