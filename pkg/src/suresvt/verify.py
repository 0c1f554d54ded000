"""Self-verification suites run by ``suresvt verify``.

Each suite compares a closed-form quantity against an independent reference
(finite differences, exact algebra or a limit along simple matrices) and
returns a :class:`SuiteResult`. ``fault=True`` negates the closed-form
divergence before comparing; it exists so the harness can be shown to fail.
"""

from dataclasses import dataclass

import numpy as np

from .blockwise import BlockConfig, bsvt
from .divergence import (
    div_spectral_repeated,
    div_spectral_simple,
    fd_divergence_oracle,
    spectral_divergence,
)
from .linalg import SpectrumProfile, svd, svd_differential
from .spectral import SpectralFunction, svt
from .validation import COMPLEX, REAL, field_factor

FIELDS = (REAL, COMPLEX)
DEFAULT_SIZES = ((4, 3), (5, 5), (3, 6))

# (distinct values, multiplicities, threshold) for the continuity suite
PROFILES = (
    ([2.0], [2], 1.0),
    ([2.0, 1.0], [2, 1], 0.5),
    ([1.0, 0.0], [2, 1], 0.5),
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    max_error: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} {self.name} ({self.checks} checks, max err {self.max_error:.2e})"
        return msg if self.passed else f"{msg}: {self.detail}"


class _Tally:
    def __init__(self, name):
        self.name = name
        self.checks = 0
        self.worst = 0.0
        self.first_fail = ""

    def add(self, err, tol, label):
        self.checks += 1
        self.worst = max(self.worst, err)
        if not err <= tol and not self.first_fail:
            self.first_fail = f"{label}: error {err:.3e} > {tol:.1e}"

    def result(self):
        return SuiteResult(self.name, not self.first_fail, self.checks, self.worst,
                           self.first_fail)


def parse_sizes(text):
    """``"5x4,3x6"`` -> ``[(5, 4), (3, 6)]``."""
    sizes = []
    for tok in text.split(","):
        parts = tok.strip().lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"bad size {tok!r}; expected MxN")
        m, n = (int(p) for p in parts)
        if m < 1 or n < 1:
            raise ValueError(f"bad size {tok!r}; dimensions must be positive")
        sizes.append((m, n))
    return sizes


def random_matrix(rng, m, n, field):
    x = rng.standard_normal((m, n))
    if field == COMPLEX:
        x = x + 1j * rng.standard_normal((m, n))
    return x


def _sign(fault):
    return -1.0 if fault else 1.0


def suite_lambda_zero(sizes, seed, fault=False, count=5):
    """SVT at lambda = 0 is the identity, whose divergence is beta * m * n."""
    tally = _Tally("lambda0-identity")
    rng = np.random.default_rng([seed, 1])
    f = SpectralFunction.soft(0.0)
    for m, n in sizes:
        for field in FIELDS:
            expect = field_factor(field) * m * n
            for _ in range(count):
                s = svd(random_matrix(rng, m, n, field)).sigma
                val = _sign(fault) * spectral_divergence(s, m, n, f, field)[0]
                tally.add(abs(val - expect) / expect, 1e-9, f"{m}x{n} {field}")
    return tally.result()


def _fd_cases(s):
    # thresholds kept well away from every singular value
    d = np.unique(np.round(s, 9))[::-1]
    if d.size == 1:
        lams = [0.5 * d[0]]
    else:
        lams = [0.5 * d[-1], 0.5 * (d[0] + d[1]), 0.5 * (d[-2] + d[-1])]
    return [SpectralFunction.soft(lam) for lam in lams] + [
        SpectralFunction.identity(),
        SpectralFunction.scale(0.7),
    ]


def suite_fd_oracle(sizes, seed, fault=False):
    """Closed-form divergence against central differences, simple and tied spectra."""
    tally = _Tally("fd-oracle")
    rng = np.random.default_rng([seed, 2])
    for m, n in sizes:
        for field in FIELDS:
            x = random_matrix(rng, m, n, field)
            mats = [x]
            p = min(m, n)
            if p >= 3:
                # tied spectrum diag(a, a, 1, ...) with random singular vectors
                u, _ = np.linalg.qr(random_matrix(rng, m, m, field))
                v, _ = np.linalg.qr(random_matrix(rng, n, n, field))
                t = np.linspace(1.0, 0.5, p)
                t[0] = t[1] = 2.0
                mats.append((u[:, :p] * t) @ v[:, :p].conj().T)
            for y in mats:
                sy = svd(y).sigma
                for f in _fd_cases(sy):
                    ref = fd_divergence_oracle(y, f, h=1e-5)
                    val = _sign(fault) * spectral_divergence(sy, m, n, f, field)[0]
                    err = abs(val - ref) / max(1.0, abs(val))
                    tally.add(err, 1e-4, f"{m}x{n} {field} {f!r}")
    return tally.result()


def suite_tiling(sizes, seed, fault=False):
    """Periodic tiling covers every pixel k**2 times; single tiling reduces to SVT."""
    tally = _Tally("tiling-partition")
    rng = np.random.default_rng([seed, 3])
    for nx, ny in sizes:
        for k in range(1, min(nx, ny) + 1):
            cfg = BlockConfig(nx, ny, k)
            cover = np.zeros(nx * ny)
            for rows in cfg.index_table():
                cover[rows] += 1
            tally.add(float(np.max(np.abs(cover - cfg.c))), 0.0, f"{nx}x{ny} k={k}")
        k = min(nx, ny)
        for field in FIELDS:
            x = random_matrix(rng, k * k, 3, field)
            lam = 0.5 * float(svd(x).sigma[0])
            want = svt(x, lam)
            got = bsvt(x, BlockConfig(k, k, k, tiling="single"), lam)
            if fault:
                got = -got
            err = np.linalg.norm(got - want) / max(np.linalg.norm(want), 1e-300)
            tally.add(float(err), 1e-12, f"single tiling k={k} {field}")
    return tally.result()


def _pad_profile(distinct, mult, p):
    """Prepend simple values above the profile so it has p singular values."""
    extra = p - sum(mult)
    top = max(distinct) + 1.0
    pad = [top + j for j in range(extra, 0, -1)]
    return pad + list(distinct), [1] * extra + list(mult)


def _simple_neighbor(distinct, mult, t):
    vals = []
    for s, d in zip(distinct, mult):
        # spread a group over distinct values; zero groups stay nonnegative
        offs = np.arange(d, 0, -1) if s == 0 else np.arange(d - 1, -1, -1)
        vals.extend(s + t * offs)
    return np.sort(np.asarray(vals, dtype=np.float64))[::-1]


def suite_continuity(sizes, seed, fault=False, t=1e-6):
    """Grouped divergence against the simple formula along shrinking gaps."""
    tally = _Tally("continuity-limit")
    for m, n in sizes:
        for base, base_mult, lam in PROFILES:
            p = min(m, n)
            if sum(base_mult) > p:
                continue
            distinct, mult = _pad_profile(base, base_mult, p)
            prof = SpectrumProfile(np.array(distinct), np.array(mult), 1e-8)
            f = SpectralFunction.soft(lam)
            near = _simple_neighbor(distinct, mult, t)
            for field in FIELDS:
                val = _sign(fault) * div_spectral_repeated(prof, m, n, f, field)
                ref = div_spectral_simple(near, m, n, f, field, gap_tol=1e-9)
                tally.add(abs(val - ref), 1e-5, f"{m}x{n} {field} s={distinct} d={mult}")
    # the worked example: m = n = 2, s = 2 twice, lam = 1
    val = _sign(fault) * div_spectral_repeated(
        SpectrumProfile(np.array([2.0]), np.array([2]), 1e-8), 2, 2,
        SpectralFunction.soft(1.0))
    tally.add(abs(val - 3.5), 1e-12, "worked example 2x2")
    return tally.result()


def suite_svd_differential(sizes, seed, fault=False, lam=0.5, h=1e-6, count=3):
    """Product-rule derivative of SVT against central differences."""
    tally = _Tally("svd-differential")
    rng = np.random.default_rng([seed, 5])
    f = SpectralFunction.soft(lam)
    for m, n in sizes:
        for field in FIELDS:
            done = 0
            while done < count:
                x = random_matrix(rng, m, n, field)
                delta = random_matrix(rng, m, n, field)
                s = svd(x).sigma
                if np.min(np.abs(s - lam)) < 1e-3 or np.min(np.abs(np.diff(s))) < 1e-3:
                    continue
                dd = svd_differential(x, delta).directional_derivative(f)
                ref = (svt(x + h * delta, lam) - svt(x - h * delta, lam)) / (2 * h)
                err = float(np.max(np.abs(_sign(fault) * dd - ref)))
                tally.add(err, 1e-5, f"{m}x{n} {field}")
                done += 1
    return tally.result()


SUITES = (
    suite_lambda_zero,
    suite_fd_oracle,
    suite_tiling,
    suite_continuity,
    suite_svd_differential,
)


def run_all(sizes=DEFAULT_SIZES, seed=0, fault=False):
    """Run every suite; returns the list of :class:`SuiteResult`."""
    return [suite(sizes, seed, fault) for suite in SUITES]
