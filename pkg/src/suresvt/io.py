"""Plain-text matrix (MAT1) and image-series (SER1) files.

MAT1::

    MAT1 <rows> <cols> <real|complex>
    <rows lines of cols values; complex entries as "re im" pairs>

SER1::

    SER1 <nx> <ny> <t> <real|complex>
    <t frame blocks of nx lines of ny values, separated by blank lines>

Values are written with 17 significant digits and a '.' decimal point, which
round-trips every float64 exactly.
"""

import numpy as np

from .blockwise import ImageSeries
from .exceptions import SureSVTError
from .validation import COMPLEX, REAL, check_matrix, field_of


class FormatError(SureSVTError, ValueError):
    """Malformed MAT1/SER1 content."""


def fmt(value):
    """Locale-independent 17-significant-digit representation."""
    return format(float(value), ".17g")


def _row_tokens(row):
    if np.iscomplexobj(row):
        out = []
        for z in row:
            out.append(fmt(z.real))
            out.append(fmt(z.imag))
        return out
    return [fmt(v) for v in row]


def _parse_row(line, count, field, where):
    toks = line.split()
    width = count * (2 if field == COMPLEX else 1)
    if len(toks) != width:
        raise FormatError(f"{where}: expected {width} values, found {len(toks)}")
    try:
        vals = np.array([float(t) for t in toks])
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from exc
    if field == COMPLEX:
        # assign parts separately; arithmetic would lose signed zeros
        z = np.empty(count, dtype=np.complex128)
        z.real = vals[0::2]
        z.imag = vals[1::2]
        return z
    return vals


def _parse_field(tok):
    if tok not in (REAL, COMPLEX):
        raise FormatError(f"field must be 'real' or 'complex', got {tok!r}")
    return tok


def _parse_dims(toks, names):
    try:
        dims = [int(t) for t in toks]
    except ValueError as exc:
        raise FormatError(f"bad header dimensions {toks}") from exc
    for name, d in zip(names, dims):
        if d < 1:
            raise FormatError(f"{name} must be positive")
    return dims


def dumps_matrix(x):
    x = check_matrix(x)
    rows, cols = x.shape
    lines = [f"MAT1 {rows} {cols} {field_of(x)}"]
    lines += [" ".join(_row_tokens(r)) for r in x]
    return "\n".join(lines) + "\n"


def loads_matrix(text):
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty MAT1 content")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "MAT1":
        raise FormatError(f"bad MAT1 header {lines[0]!r}")
    rows, cols = _parse_dims(head[1:3], ("rows", "cols"))
    field = _parse_field(head[3])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != rows:
        raise FormatError(f"expected {rows} data lines, found {len(body)}")
    data = [_parse_row(ln, cols, field, f"line {i + 2}") for i, ln in enumerate(body)]
    return np.array(data, dtype=np.complex128 if field == COMPLEX else np.float64)


def dumps_series(series):
    if not isinstance(series, ImageSeries):
        series = ImageSeries(series)
    f = series.frames
    out = [f"SER1 {series.nx} {series.ny} {series.t} {series.field}"]
    for j in range(series.t):
        if j:
            out.append("")
        out += [" ".join(_row_tokens(f[ix, :, j])) for ix in range(series.nx)]
    return "\n".join(out) + "\n"


def loads_series(text):
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty SER1 content")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "SER1":
        raise FormatError(f"bad SER1 header {lines[0]!r}")
    nx, ny, t = _parse_dims(head[1:4], ("nx", "ny", "t"))
    field = _parse_field(head[4])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != nx * t:
        raise FormatError(f"expected {nx * t} data lines, found {len(body)}")
    frames = np.empty((nx, ny, t), dtype=np.complex128 if field == COMPLEX else np.float64)
    for j in range(t):
        for ix in range(nx):
            k = j * nx + ix
            frames[ix, :, j] = _parse_row(body[k], ny, field, f"frame {j} row {ix}")
    return ImageSeries(frames)


def read_matrix(path):
    with open(path, encoding="ascii") as fh:
        return loads_matrix(fh.read())


def write_matrix(path, x):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_matrix(x))


def read_series(path):
    with open(path, encoding="ascii") as fh:
        return loads_series(fh.read())


def write_series(path, series):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_series(series))


def read_any(path):
    """Read a MAT1 or SER1 file; returns ``(kind, obj)`` with kind "mat"/"ser"."""
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    tag = text.split(None, 1)[0] if text.strip() else ""
    if tag == "MAT1":
        return "mat", loads_matrix(text)
    if tag == "SER1":
        return "ser", loads_series(text)
    raise FormatError(f"{path}: unknown file type {tag!r}")


__all__ = [
    "FormatError",
    "dumps_matrix",
    "dumps_series",
    "loads_matrix",
    "loads_series",
    "read_any",
    "read_matrix",
    "read_series",
    "write_matrix",
    "write_series",
]
