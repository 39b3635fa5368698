"""Run configuration: YAML in, typed dataclasses out, and a resolved echo back.

Every field has an explicit default, so the echo written next to the
outputs is a complete configuration that reproduces the run. Syntax and
schema problems raise ConfigError with the offending field path and, where
the YAML parser knows it, the line number.
"""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError, ValidationError
from .gram import QuadratureSpec
from .potential import DomainSpec, HermitianPotential, gaussian, quartic

SCHEMA_VERSION = 1


@dataclass
class PotentialConfig:
    """``kind``: gaussian | quartic | terms | file | constant.

    ``terms`` rows are [a, b, re, im] for z^a conj(z)^b. ``constant`` means the
    unit disk with weight 1/pi; it has no potential and ignores ``m``.
    """

    kind: str = "gaussian"
    s: float = 0.1
    terms: list[list[float]] = field(default_factory=list)
    path: Optional[str] = None


@dataclass
class DomainConfig:
    kind: str = "plane"
    center: complex = 0j
    radius: Optional[float] = None


@dataclass
class KernelConfig:
    sources: list[str] = field(default_factory=lambda: ["gram", "gaussian", "approx"])
    pairs: list[list[complex]] = field(default_factory=list)
    random_pairs: int = 25
    radius: float = 0.6
    near_diagonal: Optional[float] = None


@dataclass
class BlowupConfig:
    source: str = "gram"
    z0: list[complex] = field(default_factory=lambda: [0j, 0.3 + 0j])
    m_list: list[float] = field(default_factory=lambda: [20.0, 40.0, 80.0, 160.0])
    grid: list[list[complex]] = field(default_factory=list)
    signed: bool = False
    refine: bool = True


@dataclass
class MetricsConfig:
    source: str = "koshelev"
    points: list[complex] = field(default_factory=lambda: [0j, 0.3 + 0j, 0.2 + 0.4j])
    eps: list[complex] = field(default_factory=lambda: [0j, 0.1 + 0j, 0.05 + 0.05j])
    z: complex = 0j
    eps_prime: list[complex] = field(default_factory=lambda: [0j, 0.5 + 0j, 0.7 + 0.3j, -1j, -0.6 - 0.6j])
    m_list: list[float] = field(default_factory=list)
    step: float = 1e-2
    heatmap: int = 0


@dataclass
class BoundsConfig:
    trials: int = 1000
    rtol: float = 1e-8
    propositions: list[str] = field(default_factory=list)


@dataclass
class SymbolicConfig:
    action: str = "solve"
    q: int = 2
    order: int = 1
    reading: str = "dbeta"
    truncation: Optional[int] = None
    trials: int = 50


@dataclass
class AssumptionsConfig:
    center: complex = 0j
    radius: float = 1.0
    n_radii: int = 64
    n_angles: int = 64


@dataclass
class OutputConfig:
    dir: str = "out"
    format: str = "both"
    svg: bool = True


@dataclass
class CacheConfig:
    enabled: bool = True
    dir: Optional[str] = None


@dataclass
class RunConfig:
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    domain: DomainConfig = field(default_factory=DomainConfig)
    m: Optional[float] = 10.0
    q: int = 2
    n: Optional[int] = None
    k: int = 0
    seed: int = 0
    threads: int = 1
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    blowup: BlowupConfig = field(default_factory=BlowupConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    symbolic: SymbolicConfig = field(default_factory=SymbolicConfig)
    assumptions: AssumptionsConfig = field(default_factory=AssumptionsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)

    def validate(self) -> "RunConfig":
        """Range checks that the type coercion cannot express."""
        if self.m is not None and not self.m > 0:
            raise ValidationError("m must be positive")
        if self.q < 1:
            raise ValidationError("q must be >= 1")
        if self.n is not None and self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.k < 0:
            raise ValidationError("k must be >= 0")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")
        if self.output.format not in ("csv", "json", "both"):
            raise ValidationError("output.format must be csv, json or both")
        if any(not m > 0 for m in self.blowup.m_list + self.metrics.m_list):
            raise ValidationError("every m in m_list must be positive")
        if self.metrics.step <= 0:
            raise ValidationError("metrics.step must be positive")
        if self.bounds.trials < 0:
            raise ValidationError("bounds.trials must be >= 0")
        return self

    # -- derived objects ---------------------------------------------------------
    def build_potential(self) -> HermitianPotential:
        p = self.potential
        if p.kind == "gaussian":
            return gaussian()
        if p.kind == "quartic":
            return quartic(p.s)
        if p.kind == "terms":
            if not p.terms:
                raise ValidationError("potential.terms is empty")
            deg = max(max(int(t[0]), int(t[1])) for t in p.terms)
            return HermitianPotential.from_dict({"degree": deg, "coeffs": p.terms})
        if p.kind == "file":
            if not p.path:
                raise ValidationError("potential.path is required for kind 'file'")
            return HermitianPotential.loads(Path(p.path).read_text())
        if p.kind == "constant":
            raise ValidationError("potential kind 'constant' has no potential; use a weighted kind here")
        raise ValidationError(f"unknown potential kind {p.kind!r}")

    def build_domain(self, m: float | None = None) -> DomainSpec:
        d = self.domain
        return DomainSpec(kind=d.kind, center=d.center, radius=d.radius, m=self.m if m is None else m)


# -- loading ------------------------------------------------------------------------------


def _line_map(text: str) -> dict[tuple, int]:
    """Map field paths to 1-based line numbers using the YAML node tree."""
    out: dict[tuple, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out

    def walk(node, path):
        out[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                out[path + (k.value,)] = k.start_mark.line + 1
                walk(v, path + (k.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return out


def _number(value) -> float | None:
    """Float from a YAML scalar; strings such as '1e-5' count (YAML 1.1 leaves them unparsed)."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


class _Loader:
    def __init__(self, lines: dict[tuple, int]):
        self.lines = lines

    def fail(self, path: tuple, msg: str):
        where = ".".join(str(p) for p in path) or "<root>"
        line = self.lines.get(path)
        loc = f" (line {line})" if line else ""
        raise ConfigError(f"{where}{loc}: {msg}")

    def coerce(self, value: Any, tp, path: tuple):
        origin = typing.get_origin(tp)
        args = typing.get_args(tp)
        if origin is typing.Union or origin is types.UnionType:
            if value is None and type(None) in args:
                return None
            inner = [a for a in args if a is not type(None)]
            return self.coerce(value, inner[0], path)
        if dataclasses.is_dataclass(tp):
            return self.dataclass(value, tp, path)
        if origin is list:
            if not isinstance(value, list):
                self.fail(path, f"expected a list, got {type(value).__name__}")
            return [self.coerce(v, args[0], path + (i,)) for i, v in enumerate(value)]
        if tp is complex:
            return self.complex(value, path)
        if tp is bool:
            if not isinstance(value, bool):
                self.fail(path, f"expected true/false, got {value!r}")
            return value
        if tp is int:
            if isinstance(value, bool) or not isinstance(value, int):
                self.fail(path, f"expected an integer, got {value!r}")
            return value
        if tp is float:
            num = _number(value)
            if num is None:
                self.fail(path, f"expected a number, got {value!r}")
            return num
        if tp is str:
            if not isinstance(value, str):
                self.fail(path, f"expected a string, got {value!r}")
            return value
        self.fail(path, f"unsupported field type {tp!r}")

    def complex(self, value, path):
        if isinstance(value, bool):
            self.fail(path, "expected a complex number")
        if isinstance(value, (int, float)):
            return complex(value)
        if isinstance(value, list) and len(value) == 2:
            re, im = (_number(v) for v in value)
            if re is not None and im is not None:
                return complex(re, im)
        if isinstance(value, str):
            try:
                return complex(value.replace(" ", ""))
            except ValueError:
                pass
        self.fail(path, f"expected a complex number ([re, im], a number or 'a+bj'), got {value!r}")

    def dataclass(self, value, cls, path):
        if value is None:
            return cls()
        if not isinstance(value, dict):
            self.fail(path, f"expected a mapping for section {cls.__name__}")
        hints = typing.get_type_hints(cls)
        names = {f.name for f in dataclasses.fields(cls)}
        for key in value:
            if key not in names:
                self.fail(path + (key,), f"unknown field; allowed: {', '.join(sorted(names))}")
        kwargs = {k: self.coerce(v, hints[k], path + (k,)) for k, v in value.items()}
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            self.fail(path, str(exc))


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from exc
    return from_dict(data, _line_map(text))


def from_dict(data: Any, lines: dict | None = None) -> RunConfig:
    loader = _Loader(lines or {})
    return loader.dataclass(data or {}, RunConfig, ())


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def _plain(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def to_dict(cfg: RunConfig) -> dict:
    return _plain(dataclasses.asdict(cfg))


def dumps(cfg: RunConfig) -> str:
    """Resolved configuration as YAML; ``loads(dumps(cfg)) == cfg``."""
    return yaml.safe_dump(to_dict(cfg), sort_keys=True)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.field=value`` overrides (value parsed as YAML)."""
    data = to_dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value")
        key, raw = item.split("=", 1)
        try:
            val = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: cannot parse value") from exc
        node = data
        parts = key.strip().split(".")
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                raise ConfigError(f"override {item!r}: {p!r} is not a section")
            node = node[p]
        node[parts[-1]] = val
    return from_dict(data)
