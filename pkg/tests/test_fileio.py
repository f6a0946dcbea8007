import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from rmtnoise.errors import ImageTooSmallError, InvalidArgumentError, ParseError, UnsupportedFormatError
from rmtnoise.fileio import (
    add_patch_noise,
    csv_report,
    dumps_report,
    extract_patches,
    format_float,
    grating_image,
    read_matrix_csv,
    read_pgm,
    write_matrix_csv,
    write_pgm,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=100, deadline=None, derandomize=True)
@given(finite)
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


@settings(max_examples=100, deadline=None, derandomize=True)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_matrix_csv_round_trip(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    write_matrix_csv(path, data)
    np.testing.assert_array_equal(read_matrix_csv(path), data)


@pytest.mark.parametrize(
    "text",
    ["1,2\n3\n", "1,abc\n", "1,nan\n", "", "\n\n", "1,inf\n2,3\n"],
)
def test_matrix_csv_parse_errors(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ParseError):
        read_matrix_csv(path)


def test_matrix_csv_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_matrix_csv(tmp_path / "missing.csv")


def test_matrix_csv_skips_blank_lines(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n\n3,4\n")
    np.testing.assert_array_equal(read_matrix_csv(path), [[1, 2], [3, 4]])


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_round_trip(tmp_path, binary):
    img = np.arange(35, dtype=np.uint8).reshape(5, 7) * 7
    path = tmp_path / "img.pgm"
    write_pgm(path, img, binary=binary)
    np.testing.assert_array_equal(read_pgm(path), img.astype(float))


def test_pgm_header_comments(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P2\n# a comment\n3 2 # trailing\n255\n0 1 2\n3 4 255\n")
    np.testing.assert_array_equal(read_pgm(path), [[0, 1, 2], [3, 4, 255]])


@pytest.mark.parametrize(
    "raw, err",
    [
        (b"P6\n1 1\n255\n\x00\x00\x00", UnsupportedFormatError),
        (b"P5\n2 2\n65535\n" + b"\x00" * 8, UnsupportedFormatError),
        (b"P5\n2 2\n255\n\x00", ParseError),
        (b"P2\n2 2\n255\n1 2 3\n", ParseError),
        (b"P2\n1 1\n10\n11\n", ParseError),
        (b"P2\nx 1\n255\n1\n", ParseError),
        (b"P2\n2", ParseError),
    ],
)
def test_pgm_errors(tmp_path, raw, err):
    path = tmp_path / "bad.pgm"
    path.write_bytes(raw)
    with pytest.raises(err):
        read_pgm(path)


def test_write_pgm_validation(tmp_path):
    with pytest.raises(InvalidArgumentError):
        write_pgm(tmp_path / "x.pgm", np.full((2, 2), 300))
    with pytest.raises(InvalidArgumentError):
        write_pgm(tmp_path / "x.pgm", np.zeros(4))


def test_grating_image_range_and_rank():
    img = grating_image()
    assert img.shape == (512, 768) and img.dtype == np.uint8
    assert img.min() >= 28 and img.max() <= 228
    patches = extract_patches(img, 16, 300, seed=0)
    s = np.linalg.svd(patches - patches.mean(axis=0), compute_uv=False)
    # two dominant directions (sine/cosine pair); the rest is quantisation noise
    assert s[1] > 20 * s[2]


def test_extract_patches_bounds_and_determinism():
    img = np.arange(20 * 30, dtype=float).reshape(20, 30)
    p = extract_patches(img, 4, 50, seed=3)
    assert p.shape == (50, 16)
    np.testing.assert_array_equal(p, extract_patches(img, 4, 50, seed=3))
    assert not np.array_equal(p, extract_patches(img, 4, 50, seed=4))
    # every patch is a contiguous window: rows step by 30, columns by 1
    blocks = p.reshape(50, 4, 4)
    np.testing.assert_array_equal(np.diff(blocks, axis=2), 1.0)
    np.testing.assert_array_equal(np.diff(blocks, axis=1), 30.0)
    tops = blocks[:, 0, 0]
    assert np.all(tops // 30 <= 16) and np.all(tops % 30 <= 26)


def test_extract_patches_errors():
    with pytest.raises(ImageTooSmallError):
        extract_patches(np.zeros((5, 20)), 8, 10, seed=0)
    with pytest.raises(InvalidArgumentError):
        extract_patches(np.zeros((5, 20)), 0, 10, seed=0)


def test_patch_noise_statistics_and_no_clipping():
    patches = np.full((2000, 64), 250.0)
    noisy = add_patch_noise(patches, 10.0, seed=1)
    assert (noisy - patches).std() == pytest.approx(10.0, rel=0.02)
    assert noisy.max() > 255
    np.testing.assert_array_equal(noisy, add_patch_noise(patches, 10.0, seed=1))
    np.testing.assert_array_equal(add_patch_noise(patches, 0.0, seed=1), patches)
    with pytest.raises(InvalidArgumentError):
        add_patch_noise(patches, -1.0, seed=1)


def test_dumps_report_full_precision():
    obj = {"a": 0.1, "b": [1, 2.5, math.nan], "c": None, "d": True, "e": {}, "f": np.float64(1 / 3)}
    text = dumps_report(obj)
    back = json.loads(text)
    assert back["a"] == 0.1 and back["b"][2] is None and back["f"] == 1 / 3
    assert "0.33333333333333331" in text


def test_dumps_report_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps_report({"x": object()})


def test_csv_report_layout():
    text = csv_report({"command": "x", "config": {"a": 1}}, ["p", "z"], [[0.5, 1 / 3], [0.9, math.nan]])
    lines = text.splitlines()
    assert lines[0] == "# command: x"
    assert lines[1].startswith("# config: ")
    assert lines[2] == "p,z"
    assert lines[3] == "0.5,0.33333333333333331"
    assert lines[4] == "0.90000000000000002,nan"
