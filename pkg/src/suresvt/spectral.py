"""Spectral matrix functions ``f(Y) = U f(Sigma) V^H``."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import AmbiguousSpectrumError
from .linalg import default_gap_tol, is_simple_full_rank, svd
from .validation import check_matrix, check_nonnegative

SOFT = "soft"
HARD = "hard"
IDENTITY = "identity"
SCALE = "scale"
CUSTOM = "custom"


@dataclass(frozen=True)
class SpectralFunction:
    """A rule applied to the singular values of a matrix.

    Use the constructors :meth:`soft`, :meth:`hard`, :meth:`identity`,
    :meth:`scale` and :meth:`custom` rather than instantiating directly.

    For custom rules, ``func`` and ``deriv`` receive the whole descending
    vector of singular values and return one value per entry, so a
    non-uniform rule (a different f_i per index) is expressed by looking at
    positions. Mark such rules with ``uniform=False``.
    """

    kind: str
    lam: float = 0.0
    a: float = 1.0
    func: Optional[Callable] = None
    deriv: Optional[Callable] = None
    f_at_zero_is_zero: bool = True
    uniform: bool = True

    @classmethod
    def soft(cls, lam):
        return cls(SOFT, lam=check_nonnegative(lam, "lam"))

    @classmethod
    def hard(cls, lam):
        return cls(HARD, lam=check_nonnegative(lam, "lam"))

    @classmethod
    def identity(cls):
        return cls(IDENTITY)

    @classmethod
    def scale(cls, a):
        return cls(SCALE, a=float(a))

    @classmethod
    def custom(cls, func, deriv, f_at_zero_is_zero, uniform=True):
        return cls(
            CUSTOM,
            func=func,
            deriv=deriv,
            f_at_zero_is_zero=bool(f_at_zero_is_zero),
            uniform=bool(uniform),
        )

    @property
    def kinks(self):
        """Points where the rule is not differentiable."""
        if self.kind in (SOFT, HARD):
            return (self.lam,)
        return ()

    @property
    def is_identity(self):
        """True when the rule is the identity on nonnegative reals."""
        if self.kind in (SOFT, HARD):
            return self.lam == 0
        if self.kind == SCALE:
            return self.a == 1
        return self.kind == IDENTITY

    @property
    def continuous(self):
        return self.kind != HARD

    def value(self, sigma):
        s = np.asarray(sigma, dtype=np.float64)
        if self.kind == SOFT:
            return np.maximum(s - self.lam, 0.0)
        if self.kind == HARD:
            return np.where(s > self.lam, s, 0.0)
        if self.kind == IDENTITY:
            return s.copy()
        if self.kind == SCALE:
            return self.a * s
        return np.asarray(self.func(s), dtype=np.float64)

    def derivative(self, sigma):
        s = np.asarray(sigma, dtype=np.float64)
        if self.kind in (SOFT, HARD):
            return (s > self.lam).astype(np.float64)
        if self.kind == IDENTITY:
            return np.ones_like(s)
        if self.kind == SCALE:
            return np.full_like(s, self.a)
        return np.asarray(self.deriv(s), dtype=np.float64)

    def __repr__(self):
        if self.kind in (SOFT, HARD):
            return f"SpectralFunction.{self.kind}({self.lam!r})"
        if self.kind == SCALE:
            return f"SpectralFunction.scale({self.a!r})"
        if self.kind == IDENTITY:
            return "SpectralFunction.identity()"
        return f"SpectralFunction.custom(uniform={self.uniform})"


def soft_threshold_scalar(sigma, lam):
    """``max(sigma - lam, 0)``."""
    return max(float(sigma) - float(lam), 0.0)


def apply_spectral(x, f, gap_tol=None, factors=None):
    """Evaluate ``U f(Sigma) V^H``.

    Parameters
    ----------
    x : array_like
        Real or complex matrix.
    f : SpectralFunction
    gap_tol : float, optional
        Tie tolerance used to refuse non-uniform rules on tied spectra.
    factors : SvdFactors, optional
        Precomputed SVD of ``x``.

    Raises
    ------
    AmbiguousSpectrumError
        If ``f`` is not uniform and ``x`` has tied singular values.
    """
    x = check_matrix(x)
    if f.is_identity:
        return x.copy()
    if factors is None:
        factors = svd(x)
    if not f.uniform:
        tol = default_gap_tol(factors.sigma) if gap_tol is None else gap_tol
        chk = is_simple_full_rank(factors.sigma, tol)
        if not chk and chk.reason == "repeated":
            raise AmbiguousSpectrumError(
                "non-uniform spectral function applied to a tied spectrum"
            )
    out = factors.reconstruct(f.value(factors.sigma))
    return out.astype(x.dtype, copy=False)


def svt(y, lam):
    """Singular value thresholding: the prox of ``lam * nuclear norm``."""
    return apply_spectral(y, SpectralFunction.soft(lam))


def svht(y, lam):
    """Hard thresholding: keep the terms whose singular value exceeds ``lam``."""
    return apply_spectral(y, SpectralFunction.hard(lam))
