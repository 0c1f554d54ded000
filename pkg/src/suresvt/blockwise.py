"""Block-wise SVT for image series.

An image series of ``t`` frames of ``nx x ny`` pixels is flattened into a
Casorati matrix with one row per pixel and one column per frame. Pixel
``(ix, iy)`` maps to row ``ix + nx * iy`` (column-major pixel order).

Blocks are ``k x k`` pixel windows anchored at every pixel with periodic
wraparound, so each pixel is covered by exactly ``k**2`` blocks. Anchors are
visited in row-major pixel order; every accumulation follows that order.
"""

from dataclasses import dataclass

import numpy as np

from .divergence import (
    EXTEND,
    SureReport,
    ordered_map,
    spectral_divergence,
)
from .exceptions import NonFiniteError, ShapeMismatchError
from .linalg import svd
from .spectral import SpectralFunction
from .validation import check_matrix, check_nonnegative, check_positive, field_of

PERIODIC = "periodic"
SINGLE = "single"


@dataclass(frozen=True)
class ImageSeries:
    """``t`` frames of ``nx x ny`` pixels stored as an (nx, ny, t) array."""

    frames: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.frames)
        if arr.ndim != 3 or 0 in arr.shape:
            raise ShapeMismatchError(f"frames must be a non-empty (nx, ny, t) array, got {arr.shape}")
        dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
        arr = np.ascontiguousarray(arr, dtype=dtype)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("series contains NaN or Inf")
        object.__setattr__(self, "frames", arr)

    @property
    def nx(self):
        return self.frames.shape[0]

    @property
    def ny(self):
        return self.frames.shape[1]

    @property
    def t(self):
        return self.frames.shape[2]

    @property
    def field(self):
        return field_of(self.frames)


@dataclass(frozen=True)
class BlockConfig:
    """Block geometry for block-wise SVT.

    Parameters
    ----------
    nx, ny : int
        Image size in pixels.
    k : int
        Block side, ``1 <= k <= min(nx, ny)``.
    tiling : {"periodic", "single"}
        ``"periodic"`` anchors one block at every pixel (normalization
        ``c = k**2``). ``"single"`` is the degenerate one-block tiling that
        requires ``k == nx == ny`` and has ``c = 1``.
    """

    nx: int
    ny: int
    k: int
    tiling: str = PERIODIC

    def __post_init__(self):
        for name in ("nx", "ny", "k"):
            if int(getattr(self, name)) < 1:
                raise ShapeMismatchError(f"{name} must be a positive integer")
        if self.k > min(self.nx, self.ny):
            raise ShapeMismatchError(
                f"block size k={self.k} exceeds the image size {self.nx}x{self.ny}"
            )
        if self.tiling not in (PERIODIC, SINGLE):
            raise ValueError(f"unknown tiling {self.tiling!r}")
        if self.tiling == SINGLE and not (self.k == self.nx == self.ny):
            raise ShapeMismatchError("single-block tiling needs k == nx == ny")

    @property
    def c(self):
        return 1 if self.tiling == SINGLE else self.k**2

    @property
    def n_pixels(self):
        return self.nx * self.ny

    def anchors(self):
        """Block anchors in accumulation order."""
        if self.tiling == SINGLE:
            return [(0, 0)]
        return [(ax, ay) for ax in range(self.nx) for ay in range(self.ny)]

    def index_table(self):
        """(n_blocks, k**2) array of Casorati row indices, one row per block."""
        return np.array(
            [block_rows(a, self.k, self.nx, self.ny) for a in self.anchors()],
            dtype=np.int64,
        )


def casorati(series):
    """Flatten an image series into its (nx*ny) x t Casorati matrix."""
    if not isinstance(series, ImageSeries):
        series = ImageSeries(series)
    f = series.frames
    return f.reshape(series.nx * series.ny, series.t, order="F").copy()


def inverse_casorati(x, nx, ny):
    """Inverse of :func:`casorati`."""
    x = check_matrix(x)
    if x.shape[0] != nx * ny:
        raise ShapeMismatchError(f"expected {nx * ny} rows for a {nx}x{ny} image, got {x.shape[0]}")
    return ImageSeries(x.reshape(nx, ny, x.shape[1], order="F"))


def block_rows(anchor, k, nx, ny):
    """Casorati rows of the ``k x k`` block anchored at pixel ``anchor``.

    Rows are listed row-major within the block and wrap periodically.
    """
    ax, ay = anchor
    if not (0 <= ax < nx and 0 <= ay < ny):
        raise ShapeMismatchError(f"anchor {anchor} outside a {nx}x{ny} image")
    px = (ax + np.arange(k)) % nx
    py = (ay + np.arange(k)) % ny
    return (px[:, None] + nx * py[None, :]).ravel()


def extract_block(x, anchor, k, nx, ny):
    """``R_b x``: the k**2 x t submatrix for one block."""
    x = check_matrix(x)
    if x.shape[0] != nx * ny:
        raise ShapeMismatchError(f"expected {nx * ny} rows, got {x.shape[0]}")
    return x[block_rows(anchor, k, nx, ny)]


def _check_config(x, cfg):
    if x.shape[0] != cfg.n_pixels:
        raise ShapeMismatchError(
            f"matrix has {x.shape[0]} rows but the config describes {cfg.n_pixels} pixels"
        )


def _block_svds(x, cfg):
    table = cfg.index_table()
    factors = ordered_map(lambda rows: svd(x[rows], check=False), table)
    return table, factors


def _assemble(x, table, factors, values_fn):
    out = np.zeros_like(x)
    for rows, fac in zip(table, factors):
        out[rows] += fac.reconstruct(values_fn(fac.sigma))
    return out


def bsvt(x, cfg, lam):
    """Block-wise SVT ``c^-1 sum_b R_b^* svt(R_b x, lam)``.

    Parameters
    ----------
    x : array_like, shape (nx*ny, t)
        Casorati matrix (several channels may be pre-stacked by the caller
        only when they share the pixel grid described by ``cfg``).
    cfg : BlockConfig
    lam : float
    """
    x = check_matrix(x)
    _check_config(x, cfg)
    lam = check_nonnegative(lam, "lam")
    if lam == 0:
        return x.copy()
    table, factors = _block_svds(x, cfg)
    out = _assemble(x, table, factors, lambda s: np.maximum(s - lam, 0.0))
    return out / cfg.c


class BlockSpectra:
    """Per-block SVDs of a Casorati matrix, reusable across thresholds."""

    def __init__(self, x, cfg):
        x = check_matrix(x)
        _check_config(x, cfg)
        self.x = x
        self.cfg = cfg
        self.table, self.factors = _block_svds(x, cfg)
        self.field = field_of(x)
        self.block_shape = (cfg.k**2, x.shape[1])

    @property
    def sigma_max(self):
        return max(float(f.sigma[0]) for f in self.factors)

    def estimate(self, lam):
        if lam == 0:
            return self.x.copy()
        out = _assemble(self.x, self.table, self.factors, lambda s: np.maximum(s - lam, 0.0))
        return out / self.cfg.c

    def divergence(self, lam, gap_tol=None, tie_mode=EXTEND):
        f = SpectralFunction.soft(lam)
        m, n = self.block_shape
        total = 0.0
        repeated = tied = False
        for fac in self.factors:
            val, rep, tie = spectral_divergence(fac.sigma, m, n, f, self.field,
                                                gap_tol, tie_mode)
            total += val
            repeated |= rep
            tied |= tie
        return total / self.cfg.c, repeated, tied

    def residual(self, lam):
        acc = _assemble(self.x, self.table, self.factors, lambda s: np.minimum(lam, s))
        return float(np.sum(np.abs(acc) ** 2)) / self.cfg.c**2

    def sure(self, lam, tau, gap_tol=None, tie_mode=EXTEND):
        lam = check_nonnegative(lam, "lam")
        tau = check_positive(tau, "tau")
        div, rep, tie = self.divergence(lam, gap_tol, tie_mode)
        return SureReport.build(lam, div, self.residual(lam), self.x.shape, self.field,
                                tau, repeated=rep, threshold_tie=tie)


def div_bsvt(x, cfg, lam, gap_tol=None, tie_mode=EXTEND):
    """Divergence of block-wise SVT: ``c^-1 sum_b div svt(R_b x, lam)``."""
    return BlockSpectra(x, cfg).divergence(check_nonnegative(lam, "lam"), gap_tol, tie_mode)[0]


def sure_bsvt(x, cfg, lam, tau, gap_tol=None, tie_mode=EXTEND):
    """SURE of block-wise SVT.

    ``-beta*rows*t*tau^2 + c^-2 || sum_b R_b^* U_b min(lam, S_b) V_b^H ||_F^2
    + 2 tau^2 c^-1 sum_b div svt(R_b x, lam)``
    """
    return BlockSpectra(x, cfg).sure(lam, tau, gap_tol, tie_mode)
