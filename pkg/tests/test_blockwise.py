import numpy as np
import pytest

from suresvt.blockwise import (
    BlockConfig,
    BlockSpectra,
    ImageSeries,
    block_rows,
    bsvt,
    casorati,
    div_bsvt,
    extract_block,
    inverse_casorati,
    sure_bsvt,
)
from suresvt.divergence import fd_divergence, sure_svt
from suresvt.exceptions import ShapeMismatchError
from suresvt.linalg import svd
from suresvt.spectral import svt

from conftest import random_matrix


def test_casorati_columns_are_frames():
    frames = np.broadcast_to(np.arange(3.0), (2, 2, 3))
    x = casorati(frames)
    assert x.shape == (4, 3)
    np.testing.assert_array_equal(x, np.tile(np.arange(3.0), (4, 1)))


def test_casorati_pixel_order():
    frames = np.arange(6.0).reshape(2, 3, 1)
    x = casorati(frames)
    # pixel (ix, iy) lands in row ix + nx * iy
    for ix in range(2):
        for iy in range(3):
            assert x[ix + 2 * iy, 0] == frames[ix, iy, 0]


def test_casorati_round_trip(rng):
    frames = rng.standard_normal((3, 4, 5))
    back = inverse_casorati(casorati(frames), 3, 4)
    np.testing.assert_array_equal(back.frames, frames)
    assert casorati(np.ones((1, 1, 7))).shape == (1, 7)


def test_series_validation():
    with pytest.raises(ShapeMismatchError):
        ImageSeries(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ImageSeries(np.full((1, 1, 2), np.inf))


def test_block_rows():
    assert sorted(block_rows((1, 1), 2, 2, 2)) == [0, 1, 2, 3]
    assert list(block_rows((1, 2), 1, 4, 4)) == [1 + 4 * 2]
    # corner anchor of a 3x3 image wraps to pixels (2,2),(2,0),(0,2),(0,0)
    want = {2 + 3 * 2, 2 + 3 * 0, 0 + 3 * 2, 0}
    assert set(block_rows((2, 2), 2, 3, 3)) == want


def test_extract_block(rng):
    x = rng.standard_normal((9, 2))
    blk = extract_block(x, (2, 2), 2, 3, 3)
    np.testing.assert_array_equal(blk, x[block_rows((2, 2), 2, 3, 3)])


@pytest.mark.parametrize("nx, ny", [(3, 3), (4, 5), (6, 2)])
def test_tiling_partition(nx, ny):
    for k in range(1, min(nx, ny) + 1):
        cfg = BlockConfig(nx, ny, k)
        gram = np.zeros((nx * ny, nx * ny))
        for rows in cfg.index_table():
            r = np.zeros((k * k, nx * ny))
            r[np.arange(k * k), rows] = 1
            gram += r.T @ r
        np.testing.assert_array_equal(gram, k * k * np.eye(nx * ny))


def test_config_validation():
    with pytest.raises(ShapeMismatchError):
        BlockConfig(3, 3, 4)
    with pytest.raises(ShapeMismatchError):
        BlockConfig(3, 4, 3, tiling="single")
    with pytest.raises(ValueError):
        BlockConfig(3, 3, 2, tiling="random")


@pytest.mark.parametrize("field", ["real", "complex"])
def test_single_tiling_is_svt(rng, field):
    x = random_matrix(rng, 9, 4, field)
    want = svt(x, 0.8)
    got = bsvt(x, BlockConfig(3, 3, 3, tiling="single"), 0.8)
    assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)
    single = sure_bsvt(x, BlockConfig(3, 3, 3, tiling="single"), 0.8, 0.3).sure
    assert single == pytest.approx(sure_svt(x, 0.8, 0.3).sure, rel=1e-12)


def test_zero_threshold_and_full_shrinkage(rng):
    x = random_matrix(rng, 12, 3)
    cfg = BlockConfig(3, 4, 2)
    np.testing.assert_array_equal(bsvt(x, cfg, 0), x)
    spectra = BlockSpectra(x, cfg)
    np.testing.assert_array_equal(bsvt(x, cfg, spectra.sigma_max), np.zeros_like(x))
    assert div_bsvt(x, cfg, 0) == pytest.approx(12 * 3, rel=1e-12)
    assert sure_bsvt(x, cfg, 0, 0.5).sure == pytest.approx(36 * 0.25, rel=1e-12)


def test_matches_finite_differences():
    rng = np.random.default_rng(6)
    x = casorati(rng.standard_normal((6, 6, 4)))
    cfg = BlockConfig(6, 6, 2)
    val = div_bsvt(x, cfg, 0.5)
    ref = fd_divergence(lambda z: bsvt(z, cfg, 0.5), x, 1e-5)
    assert abs(val - ref) <= 1e-3 * max(1.0, abs(val))


def test_residual_term_matches_direct_evaluation(rng):
    x = random_matrix(rng, 16, 3, "complex")
    cfg = BlockConfig(4, 4, 2)
    spectra = BlockSpectra(x, cfg)
    direct = np.sum(np.abs(spectra.estimate(0.7) - x) ** 2)
    assert spectra.residual(0.7) == pytest.approx(direct, rel=1e-10)


def test_sigma_max_covers_all_blocks(rng):
    x = random_matrix(rng, 9, 2)
    cfg = BlockConfig(3, 3, 2)
    want = max(svd(x[rows]).sigma[0] for rows in cfg.index_table())
    assert BlockSpectra(x, cfg).sigma_max == pytest.approx(want)
