"""scikit-learn compatible denoisers.

Each estimator treats the whole input matrix as one noisy observation. With
``lam="auto"`` the threshold is chosen in :meth:`fit` by minimizing SURE,
which needs the noise level ``tau``; :meth:`transform` then applies the
fitted threshold.

>>> import numpy as np
>>> from suresvt.estimators import SVTDenoiser
>>> y = np.diag([3.0, 1.0])
>>> SVTDenoiser(lam=2.0).fit_transform(y)
array([[1., 0.],
       [0., 0.]])
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .blockwise import BlockConfig, BlockSpectra, bsvt
from .divergence import sure_spectral, sure_svt
from .exceptions import ShapeMismatchError
from .risk import select_lambda
from .spectral import SpectralFunction, apply_spectral, svt
from .validation import check_matrix, check_nonnegative, field_of


def _resolve_lambda(lam, tau, y, lo, hi, tol, estimator):
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lam must be a number or 'auto', got {lam!r}")
        if tau is None:
            raise ValueError("lam='auto' needs the noise level tau")
        return select_lambda(y, tau, lo, hi, tol, estimator)
    return check_nonnegative(lam, "lam"), None


class SVTDenoiser(TransformerMixin, BaseEstimator):
    """Singular value thresholding with optional SURE-based threshold choice.

    Parameters
    ----------
    lam : float or "auto", default="auto"
        Threshold. ``"auto"`` minimizes SURE by golden-section search.
    tau : float, optional
        Noise standard deviation per real coordinate. Required for
        ``lam="auto"`` and for :meth:`score`.
    lo, hi, tol : float, optional
        Search bracket and tolerance for ``lam="auto"``; defaults scale with
        the largest singular value.

    Attributes
    ----------
    lambda_ : float
        Threshold used by :meth:`transform`.
    sure_ : SureReport or None
        SURE at ``lambda_`` for the fitted matrix (None when ``tau`` is unset).
    n_features_in_ : int
    """

    def __init__(self, lam="auto", tau=None, lo=None, hi=None, tol=None):
        self.lam = lam
        self.tau = tau
        self.lo = lo
        self.hi = hi
        self.tol = tol

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        lam, report = _resolve_lambda(self.lam, self.tau, X, self.lo, self.hi,
                                      self.tol, "svt")
        if report is None and self.tau is not None:
            report = sure_svt(X, lam, self.tau)
        self.lambda_ = float(lam)
        self.sure_ = report
        self.field_ = field_of(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "lambda_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatchError(
                f"X has {X.shape[1]} columns, fitted with {self.n_features_in_}"
            )
        return svt(X, self.lambda_)

    def score(self, X, y=None):
        """Negative SURE of the fitted threshold on ``X`` (higher is better)."""
        check_is_fitted(self, "lambda_")
        if self.tau is None:
            raise ValueError("score needs the noise level tau")
        return -sure_svt(X, self.lambda_, self.tau).sure


class BlockSVTDenoiser(TransformerMixin, BaseEstimator):
    """Block-wise SVT on a Casorati matrix with one block per pixel.

    Parameters
    ----------
    nx, ny : int
        Image size; the input must have ``nx * ny`` rows.
    block_size : int
        Block side ``k``.
    lam, tau, lo, hi, tol
        As for :class:`SVTDenoiser`.
    """

    def __init__(self, nx, ny, block_size, lam="auto", tau=None, lo=None,
                 hi=None, tol=None):
        self.nx = nx
        self.ny = ny
        self.block_size = block_size
        self.lam = lam
        self.tau = tau
        self.lo = lo
        self.hi = hi
        self.tol = tol

    def _config(self):
        return BlockConfig(int(self.nx), int(self.ny), int(self.block_size))

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        cfg = self._config()
        lam, report = _resolve_lambda(self.lam, self.tau, X, self.lo, self.hi,
                                      self.tol, cfg)
        if report is None and self.tau is not None:
            report = BlockSpectra(X, cfg).sure(lam, self.tau)
        self.config_ = cfg
        self.lambda_ = float(lam)
        self.sure_ = report
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "lambda_")
        return bsvt(X, self.config_, self.lambda_)

    def score(self, X, y=None):
        check_is_fitted(self, "lambda_")
        if self.tau is None:
            raise ValueError("score needs the noise level tau")
        return -BlockSpectra(X, self.config_).sure(self.lambda_, self.tau).sure


class SpectralDenoiser(TransformerMixin, BaseEstimator):
    """Apply a fixed :class:`SpectralFunction`; reports its SURE when ``tau`` is set."""

    def __init__(self, func=None, tau=None):
        self.func = func
        self.tau = tau

    def _func(self):
        return SpectralFunction.identity() if self.func is None else self.func

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.sure_ = None if self.tau is None else sure_spectral(X, self._func(), self.tau)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return apply_spectral(X, self._func())

    def score(self, X, y=None):
        if self.tau is None:
            raise ValueError("score needs the noise level tau")
        return -sure_spectral(X, self._func(), self.tau).sure


__all__ = ["BlockSVTDenoiser", "SVTDenoiser", "SpectralDenoiser"]
