"""JSON experiment configuration.

One document with a section per module plus a global seed and output
directory. Unknown keys are rejected, and every section is checked against
the invariants of the object it configures when it is loaded, so a bad value
fails before any work starts.

Seed fan-out: the global ``seed`` feeds :func:`hybridnet.rng.substream` with a
module tag (``"generator"``, ``"visibility"``, ``"propagation"``, ...), so
changing one module's draws never shifts another's.
"""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

from .generators import GeneratorParams, NetworkKind
from .meanfield import MeanFieldParams
from .propagation import PropagationConfig

__all__ = [
    "AnalysisSection",
    "CompareSection",
    "ConfigError",
    "DegreeSource",
    "DegreeSupport",
    "ExperimentConfig",
    "GeneratorSection",
    "GraphSection",
    "MeanFieldSection",
    "DEFAULT_MIXTURES",
    "PropagationSection",
    "load_config",
]

DEFAULT_MIXTURES: tuple[tuple[float, float, float], ...] = (
    (0.8, 0.05, 0.15),
    (0.65, 0.05, 0.30),
    (0.5, 0.05, 0.45),
)


class ConfigError(ValueError):
    """The configuration is malformed or violates a parameter invariant."""


class DegreeSource(str, Enum):
    POWER_LAW = "power_law"
    HYBRID = "hybrid"
    EXPLICIT = "explicit"
    GRAPH = "graph"


def _check(build, section: str):
    try:
        return build()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


@dataclass
class GeneratorSection:
    kind: NetworkKind = NetworkKind.I
    n_total: int = 1000
    a: float = 0.5
    k_ring: int = 4
    p_rewire: float = 0.3
    m_attach: int = 4
    delta: Optional[int] = None  # label implicit edges on the stored graph

    def __post_init__(self):
        self.kind = _check(lambda: NetworkKind(self.kind), "generator")
        self.params(0)
        if self.delta is not None and self.delta <= 1:
            raise ConfigError(f"[generator] delta must exceed 1, got {self.delta}")

    def params(self, seed: int) -> GeneratorParams:
        return _check(
            lambda: GeneratorParams(self.n_total, self.a, self.k_ring, self.p_rewire, self.m_attach, seed),
            "generator",
        )


@dataclass
class GraphSection:
    """An existing graph on disk (paths relative to the config file)."""

    edge_list: str
    node_metadata: Optional[str] = None


@dataclass
class PropagationSection:
    lam: float = 0.1
    beta: float = 0.2
    sigma: float = 0.1
    mixture: tuple[float, float, float] = (0.8, 0.05, 0.15)
    phi_trigger: float = 0.1
    horizon: int = 100
    i0: float = 0.01
    replicas: int = 20
    delta: Optional[int] = 2
    freeze_models: bool = False
    keep_replicas: bool = False

    def __post_init__(self):
        self.mixture = tuple(self.mixture)
        self.config(0)

    def config(self, seed: int, **changes) -> PropagationConfig:
        values = dict(
            lam=self.lam,
            beta=self.beta,
            sigma=self.sigma,
            mixture=self.mixture,
            phi_trigger=self.phi_trigger,
            horizon=self.horizon,
            i0=self.i0,
            replicas=self.replicas,
            rng_seed=seed,
            delta=self.delta,
            freeze_models=self.freeze_models,
        )
        values.update(changes)
        return _check(lambda: PropagationConfig(**values), "propagation")


@dataclass
class DegreeSupport:
    """Where the mean-field ``P(k)`` comes from.

    ``power_law``: ``k^-exponent`` on ``[k_min, k_max]``; ``hybrid``: the
    small-world plus power-law prediction for the generator section's
    parameters, truncated to ``[k_min, k_max]``; ``explicit``: the listed
    ``degrees``/``weights``; ``graph``: the empirical distribution of the
    configured graph.
    """

    source: DegreeSource = DegreeSource.POWER_LAW
    k_min: int = 4
    k_max: int = 100
    exponent: float = 3.0
    degrees: Optional[list[int]] = None
    weights: Optional[list[float]] = None
    classical_ws: bool = True

    def __post_init__(self):
        self.source = _check(lambda: DegreeSource(self.source), "meanfield.support")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError(f"[meanfield.support] need 1 <= k_min <= k_max, got {self.k_min}, {self.k_max}")
        if self.source is DegreeSource.EXPLICIT:
            if not self.degrees or self.weights is None or len(self.degrees) != len(self.weights):
                raise ConfigError("[meanfield.support] explicit source needs equal-length degrees and weights")
            if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise ConfigError("[meanfield.support] weights must be non-negative with a positive sum")


@dataclass
class MeanFieldSection:
    lam: float = 0.1
    mixture: tuple[float, float, float] = (0.8, 0.05, 0.15)
    sigma: float = 0.1
    dt: float = 0.05
    t_max: float = 200.0
    i0: float = 0.01
    record_every: int = 20
    m: int = 4
    a: float = 0.0
    M: Optional[float] = None
    support: DegreeSupport = field(default_factory=DegreeSupport)

    def __post_init__(self):
        self.mixture = tuple(self.mixture)
        self.params()
        if self.dt <= 0 or self.t_max <= 0:
            raise ConfigError(f"[meanfield] dt and t_max must be positive, got {self.dt}, {self.t_max}")
        if not 0 <= self.i0 <= 1:
            raise ConfigError(f"[meanfield] i0 must lie in [0, 1], got {self.i0}")
        if self.record_every < 1:
            raise ConfigError(f"[meanfield] record_every must be >= 1, got {self.record_every}")

    def params(self) -> MeanFieldParams:
        return _check(lambda: MeanFieldParams(self.lam, *self.mixture, self.sigma), "meanfield")


@dataclass
class AnalysisSection:
    bins_per_decade: int = 10
    tail_k_min: float = 10**1.5
    tail_k_max: float = 10**2.5
    head_k: int = 10
    classical_ws: bool = True

    def __post_init__(self):
        if self.bins_per_decade < 1:
            raise ConfigError(f"[analysis] bins_per_decade must be >= 1, got {self.bins_per_decade}")
        if not 0 < self.tail_k_min < self.tail_k_max:
            raise ConfigError("[analysis] need 0 < tail_k_min < tail_k_max")


@dataclass
class CompareSection:
    """External curve plus the mixtures to rank against it.

    The simulated ``quantity`` (one of s, i, r, phi) is mapped onto the
    external time axis as ``t_scale * t + t_offset`` before resampling.
    """

    curve: str
    mixtures: list[tuple[float, float, float]] = field(default_factory=lambda: [tuple(m) for m in DEFAULT_MIXTURES])
    quantity: str = "i"
    t_scale: float = 1.0
    t_offset: float = 0.0

    def __post_init__(self):
        self.mixtures = [tuple(float(x) for x in m) for m in self.mixtures]
        if not self.mixtures:
            raise ConfigError("[compare] at least one mixture is required")
        for mix in self.mixtures:
            _check(lambda: MeanFieldParams(0.0, *mix, 0.0), "compare")
        if self.quantity not in ("s", "i", "r", "phi"):
            raise ConfigError(f"[compare] quantity must be one of s, i, r, phi; got {self.quantity!r}")
        if self.t_scale <= 0:
            raise ConfigError(f"[compare] t_scale must be positive, got {self.t_scale}")


@dataclass
class ExperimentConfig:
    seed: int = 0
    output_dir: str = "out"
    generator: Optional[GeneratorSection] = None
    graph: Optional[GraphSection] = None
    propagation: PropagationSection = field(default_factory=PropagationSection)
    meanfield: MeanFieldSection = field(default_factory=MeanFieldSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    compare: Optional[CompareSection] = None
    base_dir: Path = field(default=Path("."), compare=False, repr=False, metadata={"internal": True})

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.seed >= 2**64:
            raise ConfigError("seed must fit in 64 bits")

    # -- (de)serialisation ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base_dir: Union[str, Path] = ".") -> "ExperimentConfig":
        cfg = _build(cls, data, "config")
        cfg.base_dir = Path(base_dir)
        return cfg

    def to_dict(self) -> dict:
        return _dump(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def with_overrides(self, seed=None, output_dir=None, replicas=None) -> "ExperimentConfig":
        cfg = dataclasses.replace(self)
        if seed is not None:
            cfg = dataclasses.replace(cfg, seed=seed)
        if output_dir is not None:
            cfg = dataclasses.replace(cfg, output_dir=str(output_dir))
        if replicas is not None:
            cfg = dataclasses.replace(cfg, propagation=_check(lambda: dataclasses.replace(self.propagation, replicas=replicas), "propagation"))
        cfg.base_dir = self.base_dir
        return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return ExperimentConfig.from_dict(data, base_dir=path.parent)


# -- generic dataclass mapping ----------------------------------------------------


def _public_fields(cls):
    return [f for f in dataclasses.fields(cls) if not f.metadata.get("internal")]


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in _public_fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"[{where}] unknown key(s): {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        kwargs[name] = _convert(hints[name], value, f"{where}.{name}")
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except TypeError as exc:
        raise ConfigError(f"[{where}] {exc}") from exc


def _convert(tp, value, where: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is Union:
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"[{where}] may not be null")
        (inner,) = [a for a in args if a is not type(None)]
        return _convert(inner, value, where)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, where)
    if origin in (list, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"[{where}] expected a list, got {value!r}")
        item = args[0] if args else Any
        if origin is tuple and len(args) > 1 and args[-1] is not Ellipsis:
            if len(value) != len(args):
                raise ConfigError(f"[{where}] expected {len(args)} entries, got {len(value)}")
            return tuple(_convert(a, v, where) for a, v in zip(args, value))
        return [_convert(item, v, where) for v in value]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"[{where}] expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"[{where}] expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{where}] expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"[{where}] expected a string, got {value!r}")
        return value
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(value)
        except ValueError as exc:
            choices = ", ".join(repr(m.value) for m in tp)
            raise ConfigError(f"[{where}] must be one of {choices}, got {value!r}") from exc
    return value


def _dump(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _dump(getattr(obj, f.name)) for f in _public_fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [_dump(v) for v in obj]
    return obj
