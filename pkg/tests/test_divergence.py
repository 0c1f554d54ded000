import numpy as np
import pytest

from suresvt.divergence import (
    SureReport,
    degrees_of_freedom,
    div_spectral_repeated,
    div_spectral_simple,
    div_svt_complex_simple,
    div_svt_real_simple,
    fd_divergence,
    fd_divergence_oracle,
    ordered_map,
    spectral_divergence,
    sure_spectral,
    sure_svt,
)
from suresvt.exceptions import (
    FZeroNotZeroError,
    NonDifferentiablePointError,
    NonUniformFunctionError,
    NotSimpleError,
    ThresholdTieError,
)
from suresvt.linalg import SpectrumProfile, group_spectrum, svd
from suresvt.spectral import SpectralFunction, apply_spectral

from conftest import random_matrix


def test_real_svt_worked_value():
    assert div_svt_real_simple([3, 1], 2, 2, 2) == pytest.approx(1.75, abs=1e-15)
    x = np.diag([3.0, 1.0])
    assert fd_divergence_oracle(x, SpectralFunction.soft(2), h=1e-5) == pytest.approx(1.75, abs=1e-4)
    assert degrees_of_freedom(x, 2) == pytest.approx(1.75, abs=1e-15)


def test_complex_svt_worked_value():
    # frozen closed form (17/6), cross-checked by the oracle
    assert div_svt_complex_simple([3, 1], 2, 2, 2) == pytest.approx(17 / 6, abs=1e-15)
    x = np.diag([3.0, 1.0]).astype(complex)
    assert fd_divergence_oracle(x, SpectralFunction.soft(2), h=1e-5) == pytest.approx(17 / 6, abs=1e-4)


@pytest.mark.parametrize("shape", [(4, 3), (5, 5), (3, 6)])
def test_zero_threshold_identity(rng, shape):
    m, n = shape
    s = svd(random_matrix(rng, m, n)).sigma
    assert div_svt_real_simple(s, m, n, 0) == pytest.approx(m * n, rel=1e-12)
    assert div_svt_complex_simple(s, m, n, 0) == pytest.approx(2 * m * n, rel=1e-12)


def test_full_shrinkage_has_zero_divergence():
    assert div_svt_real_simple([3, 1], 4, 2, 3) == 0
    assert div_svt_complex_simple([3, 1], 4, 2, 5) == 0


@pytest.mark.parametrize("field", ["real", "complex"])
def test_general_formula_reduces_to_svt(rng, field):
    s = svd(random_matrix(rng, 6, 4, field)).sigma
    lam = float(np.median(s))
    fast = spectral_divergence(s, 6, 4, SpectralFunction.soft(lam), field)[0]
    general = div_spectral_simple(s, 6, 4, SpectralFunction.soft(lam), field)
    assert general == pytest.approx(fast, rel=1e-12)


def test_scale_matches_oracle():
    x = np.diag([3.0, 1.0])
    val = div_spectral_simple([3, 1], 2, 2, SpectralFunction.scale(0.5))
    assert val == pytest.approx(2.0, abs=1e-14)
    assert fd_divergence_oracle(x, SpectralFunction.scale(0.5), h=1e-5) == pytest.approx(val, abs=1e-4)


@pytest.mark.parametrize("shape", [(5, 3), (3, 5)])
@pytest.mark.parametrize("field", ["real", "complex"])
def test_rectangular_oracle(rng, shape, field):
    x = random_matrix(rng, *shape, field)
    s = svd(x).sigma
    f = SpectralFunction.soft(0.5 * (s[0] + s[1]))
    val = spectral_divergence(s, *shape, f, field)[0]
    assert fd_divergence_oracle(x, f) == pytest.approx(val, rel=1e-5)


def test_repeated_worked_value():
    prof = SpectrumProfile(np.array([2.0]), np.array([2]), 1e-8)
    assert div_spectral_repeated(prof, 2, 2, SpectralFunction.soft(1)) == pytest.approx(3.5, abs=1e-14)


def test_repeated_complex_frozen_value():
    prof = group_spectrum([2, 2, 1], 1e-8)
    val = div_spectral_repeated(prof, 3, 3, SpectralFunction.soft(0.5), "complex")
    assert val == pytest.approx(15.166666666666668, rel=1e-14)


@pytest.mark.parametrize("field, beta", [("real", 1), ("complex", 2)])
def test_repeated_identity_gives_mn(field, beta):
    prof = SpectrumProfile(np.array([3.0, 1.0, 0.0]), np.array([2, 1, 2]), 1e-8)
    val = div_spectral_repeated(prof, 6, 5, SpectralFunction.identity(), field)
    assert val == pytest.approx(beta * 30, rel=1e-12)


def test_repeated_reduces_to_simple():
    s = np.array([4.0, 2.5, 1.0])
    prof = SpectrumProfile(s, np.ones(3, dtype=int), 1e-8)
    for field in ("real", "complex"):
        f = SpectralFunction.soft(1.5)
        assert div_spectral_repeated(prof, 5, 3, f, field) == pytest.approx(
            div_spectral_simple(s, 5, 3, f, field), rel=1e-12
        )


@pytest.mark.parametrize("field", ["real", "complex"])
def test_tied_spectrum_matches_oracle(rng, field):
    u, _ = np.linalg.qr(random_matrix(rng, 4, 4, field))
    v, _ = np.linalg.qr(random_matrix(rng, 3, 3, field))
    y = (u[:, :3] * [2.0, 2.0, 1.0]) @ v.conj().T
    f = SpectralFunction.soft(0.7)
    val, repeated, _ = spectral_divergence(svd(y).sigma, 4, 3, f, field)
    assert repeated
    assert fd_divergence_oracle(y, f) == pytest.approx(val, rel=1e-4)


def test_tie_modes():
    s = np.array([1.0, 1.0])
    f = SpectralFunction.soft(0.5)
    assert spectral_divergence(s, 2, 2, f, tie_mode="zero") == (0.0, True, False)
    with pytest.raises(NotSimpleError):
        spectral_divergence(s, 2, 2, f, tie_mode="strict")
    with pytest.raises(ValueError):
        spectral_divergence(s, 2, 2, f, tie_mode="other")


def test_threshold_tie_handling():
    val, _, tied = spectral_divergence(np.array([3.0, 2.0]), 2, 2, SpectralFunction.soft(2.0))
    assert tied
    # the tied value is treated as thresholded away
    assert val == pytest.approx(div_svt_real_simple([3, 2], 2, 2, 2.0 + 1e-6), abs=1e-5)
    with pytest.raises(ThresholdTieError):
        div_svt_real_simple([3, 2], 2, 2, 2.0, on_tie="raise")
    with pytest.raises(NonDifferentiablePointError):
        div_spectral_simple([3, 2], 2, 2, SpectralFunction.hard(2.0))


def test_repeated_preconditions():
    prof = SpectrumProfile(np.array([1.0]), np.array([2]), 1e-8)
    shifted = SpectralFunction.custom(lambda s: s + 1, np.ones_like, f_at_zero_is_zero=False)
    with pytest.raises(FZeroNotZeroError):
        div_spectral_repeated(prof, 2, 2, shifted)
    nonuni = SpectralFunction.custom(lambda s: s, np.ones_like, True, uniform=False)
    with pytest.raises(NonUniformFunctionError):
        div_spectral_repeated(prof, 2, 2, nonuni)


def test_fd_divergence_of_linear_map(rng):
    x = random_matrix(rng, 3, 2, "complex")
    assert fd_divergence(lambda z: 2 * z, x, 1e-3) == pytest.approx(24.0, rel=1e-12)


def test_oracle_identity_and_complex_zero_threshold():
    x = np.array([[1.0, 2.0], [0.5, -1.0], [3.0, 0.2]])
    assert fd_divergence_oracle(x, SpectralFunction.identity(), h=1e-5) == pytest.approx(6, abs=1e-8)
    z = np.diag([3.0, 1.0]).astype(complex)
    assert fd_divergence_oracle(z, SpectralFunction.soft(0), h=1e-5) == pytest.approx(8, abs=1e-6)


def test_ordered_map_keeps_order(monkeypatch):
    monkeypatch.setenv("SURE_SVT_THREADS", "4")
    assert ordered_map(lambda v: v * v, range(50)) == [v * v for v in range(50)]


def test_sure_closed_forms(rng):
    y = random_matrix(rng, 5, 4)
    tau = 0.3
    assert sure_svt(y, 0, tau).sure == pytest.approx(20 * tau**2, rel=1e-12)
    big = np.linalg.svd(y, compute_uv=False)[0] + 1
    assert sure_svt(y, big, tau).sure == pytest.approx(np.sum(y**2) - 20 * tau**2, rel=1e-12)
    z = random_matrix(rng, 5, 4, "complex")
    assert sure_svt(z, 0, tau).sure == pytest.approx(40 * tau**2, rel=1e-12)


def test_sure_report_consistency(rng):
    y = random_matrix(rng, 6, 4)
    r = sure_svt(y, 0.9, 0.2)
    assert isinstance(r, SureReport)
    assert r.sure == pytest.approx(r.constant_term + r.residual_term + 2 * 0.04 * r.divergence)
    est = apply_spectral(y, SpectralFunction.soft(0.9))
    assert r.residual_term == pytest.approx(np.sum((est - y) ** 2), rel=1e-10)


def test_sure_spectral_agrees_with_sure_svt(rng):
    y = random_matrix(rng, 6, 4)
    a = sure_spectral(y, SpectralFunction.soft(0.9), 0.2).sure
    assert a == pytest.approx(sure_svt(y, 0.9, 0.2).sure, rel=1e-12)
    assert sure_spectral(y, SpectralFunction.identity(), 0.2).sure == pytest.approx(24 * 0.04)


def test_sure_spectral_scale_complex():
    rng = np.random.default_rng(20)
    y = random_matrix(rng, 20, 10, "complex")
    f = SpectralFunction.scale(0.9)
    r = sure_spectral(y, f, 0.5)
    assert r.divergence == pytest.approx(fd_divergence_oracle(y, f), rel=1e-4)
    assert r.sure == pytest.approx(r.constant_term + r.residual_term + 0.5 * r.divergence)


def test_sure_frozen_value():
    from suresvt.risk import NoiseModel, add_noise, gen_test_matrix, tau_from_snr

    tau = tau_from_snr(1, 30, 20)
    y = add_noise(gen_test_matrix(2, 30, 20, seed=3), NoiseModel(tau, seed=4))
    r = sure_svt(y, 0.1, tau)
    assert r.divergence == pytest.approx(407.3228872541999, rel=1e-10)
    assert r.sure == pytest.approx(0.5465288661469324, rel=1e-10)
