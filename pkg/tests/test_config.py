import pytest
from hypothesis import given
from hypothesis import strategies as st

from polybergman import config as cfgmod
from polybergman.config import RunConfig
from polybergman.errors import ConfigError, ValidationError


def test_defaults_round_trip():
    cfg = RunConfig()
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


@given(st.floats(0.1, 1e3), st.integers(1, 4), st.lists(st.floats(1, 500), max_size=4),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_round_trip_after_overrides(m, q, ms, z):
    cfg = cfgmod.apply_overrides(RunConfig(), [f"m={m!r}", f"q={q}", f"blowup.m_list={ms!r}",
                                               f"metrics.z=[{z.real!r}, {z.imag!r}]"])
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg
    assert cfg.metrics.z == z


def test_complex_spellings():
    cfg = cfgmod.loads("metrics:\n  z: 0.3-0.1j\n  points: [[0.1, 0.2], 1, '2j']\n")
    assert cfg.metrics.z == 0.3 - 0.1j
    assert cfg.metrics.points == [0.1 + 0.2j, 1 + 0j, 2j]


def test_unknown_field_reports_path_and_line():
    with pytest.raises(ConfigError, match=r"blowup\.mlist \(line 3\)"):
        cfgmod.loads("m: 5\nblowup:\n  mlist: [1]\n")


def test_wrong_type_reports_path():
    with pytest.raises(ConfigError, match=r"q \(line 1\).*integer"):
        cfgmod.loads("q: two\n")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        cfgmod.loads("a: 1\n  b: 2\n")


def test_bool_is_not_an_integer():
    with pytest.raises(ConfigError):
        cfgmod.loads("seed: true\n")


def test_range_validation():
    with pytest.raises(ValidationError):
        cfgmod.loads("m: -2\n").validate()
    with pytest.raises(ValidationError):
        cfgmod.loads("threads: 0\n").validate()


def test_override_errors():
    with pytest.raises(ConfigError):
        cfgmod.apply_overrides(RunConfig(), ["nonsense"])
    with pytest.raises(ConfigError):
        cfgmod.apply_overrides(RunConfig(), ["m.x=1"])


def test_potential_kinds(tmp_path):
    assert RunConfig().build_potential().is_radial
    cfg = cfgmod.loads("potential:\n  kind: terms\n  terms: [[1, 1, 1, 0], [2, 0, 0.1, 0], [0, 2, 0.1, 0]]\n")
    assert not cfg.build_potential().is_radial
    path = tmp_path / "p.yaml"
    path.write_text(cfgmod.RunConfig().build_potential().dumps())
    assert cfgmod.loads(f"potential:\n  kind: file\n  path: {path}\n").build_potential().is_radial
    with pytest.raises(ValidationError):
        cfgmod.loads("potential:\n  kind: constant\n").build_potential()


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    assert cfgmod.load(p) == RunConfig()


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load(tmp_path / "nope.yaml")


def test_exponent_floats_without_a_dot():
    cfg = cfgmod.loads("metrics:\n  step: 1e-3\n  z: [1e-5, 0]\n")
    assert cfg.metrics.step == 1e-3 and cfg.metrics.z == 1e-5
