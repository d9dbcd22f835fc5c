import numpy as np
import pytest

from pokegrasp.errors import IoError
from pokegrasp.imgfiles import read_pfm, read_pgm, read_ppm, write_pfm, write_pgm, write_ppm


def test_pfm_gray_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.uniform(-5, 5, size=(33, 47)).astype(np.float32)
    path = tmp_path / "d.pfm"
    write_pfm(path, data)
    assert np.array_equal(read_pfm(path), data)


def test_pfm_three_channel_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    data = rng.standard_normal((12, 9, 3)).astype(np.float32)
    path = tmp_path / "n.pfm"
    write_pfm(path, data)
    assert np.array_equal(read_pfm(path), data)


def test_pfm_header_is_little_endian_negative_scale(tmp_path):
    path = tmp_path / "d.pfm"
    write_pfm(path, np.zeros((2, 2), dtype=np.float32))
    head = path.read_bytes()[:32]
    assert head.startswith(b"Pf\n2 2\n-1.0\n")


def test_pfm_rejects_non_finite(tmp_path):
    with pytest.raises(IoError):
        write_pfm(tmp_path / "bad.pfm", np.array([[np.inf]], dtype=np.float32))


def test_pgm_roundtrip(tmp_path):
    data = np.arange(256, dtype=np.uint8).reshape(16, 16)
    path = tmp_path / "m.pgm"
    write_pgm(path, data)
    assert np.array_equal(read_pgm(path), data)


def test_pgm_rejects_out_of_range(tmp_path):
    with pytest.raises(IoError):
        write_pgm(tmp_path / "m.pgm", np.array([[300]]))


def test_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    data = rng.integers(0, 256, size=(8, 5, 3), dtype=np.uint8)
    path = tmp_path / "v.ppm"
    write_ppm(path, data)
    assert np.array_equal(read_ppm(path), data)


def test_truncated_pgm_raises(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\nab")
    with pytest.raises(IoError):
        read_pgm(path)
