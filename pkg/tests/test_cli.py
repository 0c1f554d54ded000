import numpy as np
import pytest

from suresvt.cli import ArgError, main, parse_grid
from suresvt.io import read_matrix, read_series, write_series


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    g = parse_grid("1e-1:1e7:101:log")
    assert g.size == 101 and g[0] == pytest.approx(0.1)
    np.testing.assert_array_equal(parse_grid("0:1:3:lin"), [0, 0.5, 1])
    for bad in ("0:1:3:log", "1:0:3:lin", "0:1:1:lin", "0:1:3", "a:1:3:lin"):
        with pytest.raises(ArgError):
            parse_grid(bad)


def test_gen_and_svd(tmp_path, capsys):
    out = tmp_path / "x.mat"
    code, _, _ = run(["gen", "--kind", 4, "--m", 20, "--n", 50, "--seed", 7, "--out", out], capsys)
    assert code == 0
    assert abs(np.linalg.norm(read_matrix(out)) - 1) <= 1e-12
    run(["gen", "--kind", 3, "--m", 200, "--n", 500, "--seed", 7, "--out", out], capsys)
    code, text, _ = run(["svd", out], capsys)
    assert code == 0 and "rank=10" in text.splitlines()


def test_gen_bad_kind(tmp_path, capsys):
    code, _, err = run(["gen", "--kind", 5, "--m", 3, "--n", 3, "--out", tmp_path / "a"], capsys)
    assert code != 0 and "kind must be 1..4" in err


def test_missing_file_is_io_error(tmp_path, capsys):
    code, _, _ = run(["svd", tmp_path / "nope.mat"], capsys)
    assert code == 3


def test_bad_arguments(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "x.mat", "--tau", "1", "--snr", "1", "--grid", "0:1:3:lin"])
    assert exc.value.code == 2
    path = tmp_path / "x.mat"
    run(["gen", "--kind", 1, "--m", 4, "--n", 3, "--out", path], capsys)
    code, _, _ = run(["sweep", path, "--tau", 1, "--grid", "0:1:3:log"], capsys)
    assert code == 2
    code, _, _ = run(["sweep", path, "--tau", 1, "--grid", "0:1:3:lin", "--estimator", "bsvt",
                      "--block-size", 2], capsys)
    assert code == 2


def test_sweep_csv(tmp_path, capsys):
    x0 = tmp_path / "x0.mat"
    y = tmp_path / "y.mat"
    csv = tmp_path / "s.csv"
    run(["gen", "--kind", 2, "--m", 12, "--n", 8, "--seed", 1, "--out", x0], capsys)
    run(["gen", "--kind", 1, "--m", 12, "--n", 8, "--seed", 2, "--out", y], capsys)
    code, _, _ = run(["sweep", y, "--tau", 0.1, "--grid", "0:0.5:6:lin", "--mc", 4,
                      "--x0", x0, "--out", csv], capsys)
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "lambda,sure,mc_risk"
    assert len(lines) == 8 and lines[-1].startswith("# argmin_lambda=")
    lam0, sure0, _ = (float(v) for v in lines[1].split(","))
    assert lam0 == 0 and sure0 == pytest.approx(96 * 0.01, rel=1e-12)
    code, text, _ = run(["sweep", y, "--snr", 1, "--grid", "1e-3:1:5:log"], capsys)
    assert code == 0 and text.splitlines()[0] == "lambda,sure"


def test_select_and_denoise(tmp_path, capsys):
    y = tmp_path / "y.mat"
    run(["gen", "--kind", 2, "--m", 12, "--n", 8, "--seed", 1, "--out", y], capsys)
    code, text, _ = run(["select", y, "--tau", 0.01], capsys)
    assert code == 0
    lam = float(text.splitlines()[0].split("=")[1])
    out = tmp_path / "d.mat"
    code, text2, _ = run(["denoise", y, "--auto", "--tau", 0.01, "--out", out], capsys)
    assert code == 0
    assert text2.splitlines()[0] == text.splitlines()[0]
    run(["denoise", y, "--lambda", 0, "--out", out], capsys)
    assert out.read_bytes() == y.read_bytes()
    run(["denoise", y, "--lambda", 1e9, "--out", out], capsys)
    assert not read_matrix(out).any()
    code, _, err = run(["denoise", y, "--auto", "--out", out], capsys)
    assert code == 2 and "--tau" in err


def test_series_denoise(tmp_path, capsys):
    rng = np.random.default_rng(0)
    path = tmp_path / "s.ser"
    write_series(path, rng.standard_normal((4, 4, 3)))
    out = tmp_path / "o.ser"
    code, _, _ = run(["denoise", path, "--lambda", 0, "--estimator", "bsvt", "--block-size", 2,
                      "--out", out], capsys)
    assert code == 0 and out.read_bytes() == path.read_bytes()
    run(["denoise", path, "--lambda", 1e9, "--estimator", "bsvt", "--block-size", 2,
         "--out", out], capsys)
    assert not read_series(out).frames.any()
    code, text, _ = run(["sweep", path, "--tau", 0.5, "--grid", "0.1:2:4:log",
                         "--estimator", "bsvt", "--block-size", 2], capsys)
    assert code == 0 and len(text.splitlines()) == 6


def test_verify(capsys):
    code, text, _ = run(["verify", "--sizes", "5x4"], capsys)
    assert code == 0
    assert [ln.split()[0] for ln in text.splitlines()] == ["PASS"] * 5
    code, _, err = run(["verify", "--sizes", "5x4", "--inject-fault"], capsys)
    assert code == 1 and "verification failed: lambda0-identity" in err
    code, _, _ = run(["verify", "--sizes", "5by4"], capsys)
    assert code == 2
