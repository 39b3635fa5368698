import numpy as np
import pytest

from polybergman.cache import GramCache, read_file, write_file
from polybergman.gram import BasisSpec, gram_kernel_build
from polybergman.potential import DomainSpec, quartic


def test_round_trip_is_bitwise(tmp_path):
    arrays = {"a": np.arange(6, dtype=float).reshape(2, 3) / 7, "b": np.array([1 + 2j, 3 - 1j]),
              "c": np.array([True, False])}
    write_file(tmp_path / "x.gram", "k", arrays, {"note": 1})
    back, header = read_file(tmp_path / "x.gram")
    assert header["key"] == "k" and header["meta"] == {"note": 1}
    for k, v in arrays.items():
        assert back[k].dtype == v.dtype and back[k].tobytes() == v.tobytes()


def test_warm_build_equals_cold_build(tmp_path):
    cache = GramCache(tmp_path)
    dom = DomainSpec("plane", m=10.0)
    cold = gram_kernel_build(dom, quartic(0.1), BasisSpec(2, 25), cache=cache)
    warm = gram_kernel_build(dom, quartic(0.1), BasisSpec(2, 25), cache=cache)
    assert cache.hits == 1
    for k, v in cold.arrays().items():
        assert warm.arrays()[k].tobytes() == v.tobytes()
    z = np.array([0.1, 0.2j])
    assert np.array_equal(cold.normalized(z, z[::-1]), warm.normalized(z, z[::-1]))


def test_corrupt_file_is_a_miss(tmp_path, caplog):
    cache = GramCache(tmp_path)
    dom = DomainSpec("plane", m=5.0)
    gram_kernel_build(dom, quartic(0.1), BasisSpec(1, 10), cache=cache)
    (path,) = tmp_path.glob("*.gram")
    path.write_bytes(path.read_bytes()[:40])
    k = gram_kernel_build(dom, quartic(0.1), BasisSpec(1, 10), cache=cache)
    assert cache.hits == 0 and k.diag(0.0) > 0


def test_key_mismatch_is_a_miss(tmp_path):
    cache = GramCache(tmp_path)
    cache.store("a" * 64, {"x": np.zeros(1)}, {})
    assert cache.load("a" * 32 + "b" * 32) is None
    assert cache.load("a" * 64) is not None


def test_inspect_and_clear(tmp_path):
    cache = GramCache(tmp_path)
    gram_kernel_build(DomainSpec("plane", m=5.0), quartic(0.1), BasisSpec(1, 10), cache=cache)
    (entry,) = cache.entries()
    assert set(entry["arrays"]) == {"r", "j", "mask", "lognorm", "W"}
    assert cache.clear() == 1 and cache.entries() == []


def test_magic_is_checked(tmp_path):
    (tmp_path / "bad.gram").write_bytes(b"NOTMAGIC" + bytes(16))
    with pytest.raises(ValueError):
        read_file(tmp_path / "bad.gram")
