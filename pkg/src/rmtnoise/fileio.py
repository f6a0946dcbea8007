"""Matrix CSV and PGM I/O, patch extraction, and report serialisation.

Matrix CSV: ASCII decimal, comma separated, one observation per row, no
header. Values are written with 17 significant digits so a written matrix
re-parses to the identical array.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ImageTooSmallError, InvalidArgumentError, ParseError, UnsupportedFormatError
from .simulation import STREAM_PATCH_CORNERS, STREAM_PATCH_NOISE, counter_generator, standard_normals


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def read_matrix_csv(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        if not all(math.isfinite(v) for v in row):
            raise ParseError(f"{path}:{lineno}: non-finite value")
        rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def write_matrix_csv(path, data) -> None:
    arr = np.asarray(data, dtype=np.float64)
    with open(path, "w") as fh:
        for row in arr:
            fh.write(",".join(format_float(v) for v in row))
            fh.write("\n")


def _pgm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens and the offset just past the last one."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace() and raw[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError("truncated PGM header")
        tokens.append(raw[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """8-bit grayscale PGM (binary P5 or ASCII P2) as a float64 array."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    magic = raw[:2]
    if magic not in (b"P5", b"P2"):
        raise UnsupportedFormatError(f"{path}: not a P2/P5 PGM file (magic {magic!r})")
    tokens, pos = _pgm_tokens(raw, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise ParseError(f"{path}: bad PGM header") from exc
    if width < 1 or height < 1:
        raise ParseError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedFormatError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")

    if magic == b"P5":
        body = raw[pos + 1 : pos + 1 + width * height]
        if len(body) != width * height:
            raise ParseError(f"{path}: truncated P5 pixel data")
        pixels = np.frombuffer(body, dtype=np.uint8)
    else:
        try:
            pixels = np.array([int(t) for t in raw[pos:].split()], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(f"{path}: bad P2 pixel data") from exc
        if pixels.size != width * height:
            raise ParseError(f"{path}: expected {width * height} pixels, got {pixels.size}")
    if np.any(pixels > maxval):
        raise ParseError(f"{path}: pixel value exceeds maxval {maxval}")
    return pixels.reshape(height, width).astype(np.float64)


def write_pgm(path, image, binary: bool = True) -> None:
    img = np.asarray(image)
    if img.ndim != 2:
        raise InvalidArgumentError("PGM image must be 2-d")
    if np.any(img < 0) or np.any(img > 255):
        raise InvalidArgumentError("PGM pixels must lie in [0, 255]")
    img = np.rint(img).astype(np.uint8)
    height, width = img.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{width} {height}\n255\n".encode())
            fh.write(img.tobytes())
        else:
            fh.write(f"P2\n{width} {height}\n255\n".encode())
            for row in img:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


def grating_image(height: int = 512, width: int = 768, amplitude: float = 100.0, period: float = 6.5, angle_deg: float = 30.0) -> np.ndarray:
    """8-bit oriented sinusoidal grating around mid-gray.

    Patches of a single grating span a 2-dimensional subspace, which gives a
    textured test image whose signal part is known to be low rank.
    """
    if not 0 < amplitude <= 127:
        raise InvalidArgumentError("amplitude must lie in (0, 127]")
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    theta = math.radians(angle_deg)
    phase = 2.0 * math.pi * (xx * math.cos(theta) + yy * math.sin(theta)) / period
    return np.rint(128.0 + amplitude * np.sin(phase)).astype(np.uint8)


def extract_patches(image, patch_side: int, count: int, seed: int) -> np.ndarray:
    """``count`` square patches at uniform random corners, flattened row-major."""
    img = np.asarray(image, dtype=np.float64)
    if patch_side < 1 or count < 1:
        raise InvalidArgumentError("patch_side and count must be positive")
    height, width = img.shape
    if height < patch_side or width < patch_side:
        raise ImageTooSmallError(f"image {height}x{width} is smaller than patch side {patch_side}")
    gen = counter_generator(seed, 0, STREAM_PATCH_CORNERS)
    rows = gen.integers(0, height - patch_side + 1, size=count)
    cols = gen.integers(0, width - patch_side + 1, size=count)
    out = np.empty((count, patch_side * patch_side))
    for k, (r, c) in enumerate(zip(rows, cols)):
        out[k] = img[r : r + patch_side, c : c + patch_side].ravel()
    return out


def add_patch_noise(patches, sigma: float, seed: int) -> np.ndarray:
    """Additive N(0, sigma^2) noise; no clipping or re-quantisation."""
    if not (math.isfinite(sigma) and sigma >= 0):
        raise InvalidArgumentError(f"noise sigma must be >= 0, got {sigma!r}")
    patches = np.asarray(patches, dtype=np.float64)
    if sigma == 0:
        return patches.copy()
    return patches + sigma * standard_normals(seed, 0, patches.shape, STREAM_PATCH_NOISE)


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_report(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else "nan"
    return str(v)


def csv_report(header: dict, columns: list[str], rows: list[list]) -> str:
    """Provenance lines (``# key: value``), one header row, one line per row."""
    lines = [f"# {k}: {v if isinstance(v, str) else dumps_report(v, indent=0).replace(chr(10), '')}" for k, v in header.items()]
    lines.append(",".join(columns))
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
