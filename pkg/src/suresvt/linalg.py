"""Dense SVD with quality contracts, spectrum grouping and SVD differentials.

Matrices are plain numpy arrays; the field is read off the dtype (float64
for real data, complex128 for complex data). All functions are pure.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConvergenceFailure,
    NotSimpleError,
    RankDeficientError,
    UnsortedInputError,
)
from .validation import check_matrix, check_same_shape, field_of

GAP_RTOL = 1e-8
SVD_TOL = 1e-10


@dataclass(frozen=True)
class SvdFactors:
    """Reduced SVD ``x = u @ diag(sigma) @ v.conj().T``.

    ``u`` is m x r, ``v`` is n x r with r = min(m, n), and ``sigma`` is
    non-increasing. The largest-magnitude entry of every column of ``u`` is
    real and positive, which pins down the column phases.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    field: str

    @property
    def shape(self):
        return (self.u.shape[0], self.v.shape[0])

    def reconstruct(self, values=None):
        """Return ``u @ diag(values) @ v^H`` (``values`` defaults to sigma)."""
        s = self.sigma if values is None else np.asarray(values)
        return (self.u * s) @ self.v.conj().T


@dataclass(frozen=True)
class SpectrumProfile:
    """Distinct singular values ``distinct`` with their ``multiplicities``."""

    distinct: np.ndarray
    multiplicities: np.ndarray
    gap_tol: float

    @property
    def kappa(self):
        return len(self.distinct)

    @property
    def rank(self):
        return int(self.multiplicities[self.distinct > 0].sum())

    @property
    def is_simple(self):
        return bool(np.all(self.multiplicities == 1))

    def expand(self):
        """Singular values with multiplicity, in descending order."""
        return np.repeat(self.distinct, self.multiplicities)


@dataclass(frozen=True)
class SimplicityCheck:
    """Outcome of :func:`is_simple_full_rank`; truthy when the check passed."""

    ok: bool
    reason: str = ""
    index: int = -1
    min_gap: float = np.inf

    def __bool__(self):
        return self.ok


def default_gap_tol(sigma):
    """Absolute grouping tolerance ``1e-8 * max(1, sigma_max)``."""
    s = np.asarray(sigma, dtype=np.float64)
    smax = float(s.max()) if s.size else 0.0
    return GAP_RTOL * max(1.0, smax)


def _fix_phases(u, v):
    idx = np.argmax(np.abs(u), axis=0)
    pivot = u[idx, np.arange(u.shape[1])]
    mag = np.abs(pivot)
    phase = np.where(mag > 0, pivot / np.where(mag > 0, mag, 1.0), 1.0)
    return u * phase.conj(), v * phase.conj()


def svd(x, check=True):
    """Reduced SVD with deterministic column phases.

    Parameters
    ----------
    x : array_like, shape (m, n)
        Real or complex finite matrix.
    check : bool
        Verify orthonormality (``1e-10 * max(m, n)`` componentwise) and the
        reconstruction residual (``1e-10 * max(1, sigma_max)``) before
        returning.

    Returns
    -------
    SvdFactors

    Raises
    ------
    NonFiniteError
        If ``x`` has NaN or Inf entries.
    ConvergenceFailure
        If LAPACK fails or the result misses the tolerances above.
    """
    x = check_matrix(x)
    m, n = x.shape
    wide = m < n
    a = x.conj().T if wide else x
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    v = vh.conj().T
    if wide:
        u, v = v, u
    u, v = _fix_phases(u, v)
    s = np.maximum(s, 0.0)
    factors = SvdFactors(u=u, sigma=s, v=v, field=field_of(x))
    if check:
        _check_factors(x, factors)
    return factors


def _check_factors(x, factors):
    m, n = x.shape
    r = factors.sigma.size
    eye = np.eye(r)
    tol_orth = SVD_TOL * max(m, n)
    for name, q in (("u", factors.u), ("v", factors.v)):
        err = np.max(np.abs(q.conj().T @ q - eye))
        if err > tol_orth:
            raise ConvergenceFailure(f"{name} not orthonormal: max deviation {err:.3e}")
    resid = np.linalg.norm(factors.reconstruct() - x)
    smax = factors.sigma[0] if r else 0.0
    if resid > SVD_TOL * max(1.0, smax):
        raise ConvergenceFailure(f"reconstruction residual {resid:.3e} too large")
    if np.any(np.diff(factors.sigma) > 0):
        raise ConvergenceFailure("singular values not sorted")


def group_spectrum(sigma, gap_tol=None):
    """Group singular values into distinct values with multiplicities.

    Walks ``sigma`` left to right and opens a new group whenever the drop
    from the previous value exceeds ``gap_tol``. Each group is represented by
    the mean of its members; a group whose mean is at most ``gap_tol`` is
    snapped to exactly zero.

    Increases smaller than ``gap_tol`` are tolerated (they are roundoff in a
    tied spectrum); larger increases raise :class:`UnsortedInputError`.

    Examples
    --------
    >>> p = group_spectrum([2.0, 2.0, 1.0], 1e-8)
    >>> p.distinct.tolist(), p.multiplicities.tolist()
    ([2.0, 1.0], [2, 1])
    """
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if s.size == 0:
        raise UnsortedInputError("sigma must be non-empty")
    if gap_tol is None:
        gap_tol = default_gap_tol(s)
    gap_tol = float(gap_tol)
    if gap_tol < 0:
        raise ValueError("gap_tol must be nonnegative")
    if np.any(s < -gap_tol):
        raise UnsortedInputError("sigma must be nonnegative")
    if np.any(np.diff(s) > gap_tol):
        raise UnsortedInputError("sigma must be non-increasing")

    groups = [[s[0]]]
    for prev, cur in zip(s[:-1], s[1:]):
        if prev - cur > gap_tol:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    distinct = np.array([np.mean(g) for g in groups])
    distinct[distinct <= gap_tol] = 0.0
    mult = np.array([len(g) for g in groups], dtype=np.int64)
    return SpectrumProfile(distinct=distinct, multiplicities=mult, gap_tol=gap_tol)


def is_simple_full_rank(sigma, gap_tol=None):
    """Check that consecutive gaps and the smallest value exceed ``gap_tol``.

    Returns a :class:`SimplicityCheck`; it is falsy on failure and records
    the offending index (first index of a tied pair, or the index of the
    vanishing singular value).
    """
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if gap_tol is None:
        gap_tol = default_gap_tol(s)
    gaps = s[:-1] - s[1:]
    min_gap = float(gaps.min()) if gaps.size else np.inf
    if gaps.size and min_gap <= gap_tol:
        i = int(np.argmax(gaps <= gap_tol))
        return SimplicityCheck(False, "repeated", i, min_gap)
    if s[-1] <= gap_tol:
        return SimplicityCheck(False, "rank-deficient", s.size - 1, min_gap)
    return SimplicityCheck(True, "", -1, min_gap)


def require_simple_full_rank(sigma, gap_tol=None):
    chk = is_simple_full_rank(sigma, gap_tol)
    if not chk:
        if chk.reason == "repeated":
            raise NotSimpleError(
                f"singular values {chk.index} and {chk.index + 1} coincide "
                f"(gap {chk.min_gap:.3e})"
            )
        raise RankDeficientError(f"singular value {chk.index} is numerically zero")
    return chk


@dataclass(frozen=True)
class SvdDifferential:
    """First-order perturbation of the SVD in a direction ``delta``.

    For a tall (or square) matrix ``omega_u`` is the m x r matrix
    ``U_full^H dU`` whose top r x r block is skew-symmetric (skew-Hermitian
    for complex data) and ``omega_v = dV^H V`` is r x r skew. For a wide
    matrix the omegas describe the decomposition of ``x^H`` in direction
    ``delta^H`` and ``adjoint`` is True; ``du`` and ``dv`` always refer to
    ``x`` itself.
    """

    d_sigma: np.ndarray
    omega_u: np.ndarray
    omega_v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    factors: SvdFactors
    adjoint: bool = False
    df_reconstruction: np.ndarray = field(default=None, repr=False)

    def directional_derivative(self, f):
        """Product-rule derivative of the spectral map ``f`` along ``delta``.

        ``f`` needs ``value(sigma)`` and ``derivative(sigma)`` methods, e.g.
        a :class:`suresvt.spectral.SpectralFunction`.
        """
        u, s, v = self.factors.u, self.factors.sigma, self.factors.v
        fs = np.asarray(f.value(s), dtype=np.float64)
        dfs = np.asarray(f.derivative(s), dtype=np.float64) * self.d_sigma
        return (
            (self.du * fs) @ v.conj().T
            + (u * dfs) @ v.conj().T
            + (u * fs) @ self.dv.conj().T
        )


def _complete_basis(u):
    m, r = u.shape
    if m == r:
        return u
    q, _ = np.linalg.qr(u, mode="complete")
    return np.concatenate([u, q[:, r:]], axis=1)


def _tall_differential(u, s, v, delta, u_tilde):
    m, r = u.shape
    if u_tilde is None:
        u_tilde = _complete_basis(u)
    else:
        u_tilde = np.asarray(u_tilde)
        if u_tilde.shape != (m, m):
            raise ValueError(f"u_tilde must be {m}x{m}")
        u_tilde = np.concatenate([u, u_tilde[:, r:]], axis=1)
    lmat = u_tilde.conj().T @ delta @ v
    top = lmat[:r, :]
    diag = np.diag(top)
    d_sigma = diag.real.copy()

    si = s[:, None]
    sj = s[None, :]
    denom = si**2 - sj**2
    np.fill_diagonal(denom, 1.0)
    lt = top.T.conj()  # entry (i, j) holds conj(L_ji)
    om_u = -(sj * top + si * lt) / denom
    om_v = (si * top + sj * lt) / denom
    if np.iscomplexobj(lmat):
        gauge = 1j * diag.imag / (2 * s)
    else:
        gauge = np.zeros(r)
    np.fill_diagonal(om_u, gauge)
    np.fill_diagonal(om_v, gauge)

    tail = lmat[r:, :] / sj
    omega_u = np.concatenate([om_u, tail], axis=0)
    du = u_tilde @ omega_u
    dv = v @ om_v.conj().T
    return d_sigma, omega_u, om_v, du, dv


def svd_differential(x, delta, gap_tol=None, u_tilde=None):
    """Closed-form differentials of the SVD factors at a simple full-rank ``x``.

    Off-diagonal entries of the rotation generators solve the 2 x 2 systems
    coupling (i, j) and (j, i); the rows below the top block follow from
    dividing by the singular values; ``d_sigma`` is the (real part of the)
    diagonal of ``U_full^H delta V``. For complex data the free imaginary
    diagonal is split equally between the two generators.

    Parameters
    ----------
    x, delta : array_like, shape (m, n)
        Base point and direction, same field.
    gap_tol : float, optional
        Tolerance for the simplicity and rank checks.
    u_tilde : array_like, shape (m, m), optional
        Completion of U to a unitary basis; only its trailing m - r columns
        are used. ``du`` does not depend on this choice.

    Raises
    ------
    NotSimpleError, RankDeficientError
    """
    x = check_matrix(x)
    delta = check_matrix(delta, "delta")
    check_same_shape(x, delta)
    if np.iscomplexobj(delta) and not np.iscomplexobj(x):
        x = x.astype(np.complex128)
    elif np.iscomplexobj(x) and not np.iscomplexobj(delta):
        delta = delta.astype(np.complex128)
    factors = svd(x)
    require_simple_full_rank(factors.sigma, gap_tol)

    m, n = x.shape
    adjoint = m < n
    if adjoint:
        # x^H = V S U^H: differentiate the tall adjoint, then swap roles.
        d_sigma, omega_u, omega_v, du_a, dv_a = _tall_differential(
            factors.v, factors.sigma, factors.u, delta.conj().T, u_tilde
        )
        du, dv = dv_a, du_a
    else:
        d_sigma, omega_u, omega_v, du, dv = _tall_differential(
            factors.u, factors.sigma, factors.v, delta, u_tilde
        )
    u, s, v = factors.u, factors.sigma, factors.v
    recon = (du * s) @ v.conj().T + (u * d_sigma) @ v.conj().T + (u * s) @ dv.conj().T
    return SvdDifferential(
        d_sigma=d_sigma,
        omega_u=omega_u,
        omega_v=omega_v,
        du=du,
        dv=dv,
        factors=factors,
        adjoint=adjoint,
        df_reconstruction=recon,
    )
