"""Flat ``key = value`` configuration files.

Grammar (one entry per line)::

    # comment
    key = value          # trailing comments allowed

Blank lines are ignored, keys are case-sensitive, unknown keys are errors.
Sweep files use the same grammar; list-valued keys take whitespace-separated
items (``n = 2 3``, ``damping = zero const:1 sat:1,2``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .damping import DampingProfile, parse_damping
from .errors import DomainError
from .pde_solver import InitialData, ProblemParams, SolverConfig, build_initial


class ConfigError(ValueError):
    pass


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    """Everything a single simulation needs; every field has a default."""

    n: int = 2
    damping: str = "zero"
    family: str = "sin2"
    amplitude: float = 2.0
    samples: str = ""  # path to N+1 whitespace-separated v0 values (family = custom)
    N: int = 1024
    cfl: float = 0.5
    dt_min: float = 1e-12
    v_max: float = 1e6
    t_end: float = 2.0
    rk_tol: float = 1e-8
    reaction_safety: float = 0.1
    output: str = "out"

    @classmethod
    def from_mapping(cls, mapping: dict, base: "RunConfig | None" = None) -> "RunConfig":
        base = base or cls()
        types = {f.name: f.type for f in fields(cls)}
        updates = {}
        for key, raw in mapping.items():
            if raw is None:
                continue
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            conv = {"int": int, "float": float, "str": str}[types[key]]
            try:
                updates[key] = conv(raw) if conv is not int else int(str(raw), 10)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return replace(base, **updates)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_mapping(parse_kv(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())

    # resolved objects -------------------------------------------------------

    def params(self) -> ProblemParams:
        return ProblemParams(self.n)

    def profile(self) -> DampingProfile:
        return parse_damping(self.damping)

    def solver(self) -> SolverConfig:
        return SolverConfig(
            N=self.N, cfl=self.cfl, dt_min=self.dt_min, v_max=self.v_max,
            t_end=self.t_end, rk_tol=self.rk_tol, reaction_safety=self.reaction_safety,
        )

    def initial(self) -> InitialData:
        samples = None
        if self.family == "custom":
            if not self.samples:
                raise ConfigError("family = custom needs 'samples = <path>'")
            samples = np.loadtxt(self.samples, dtype=float).ravel()
        data, _ = build_initial(self.family, self.amplitude, self.N, samples)
        return data


@dataclass(frozen=True)
class SweepSpec:
    n: tuple = (2,)
    damping: tuple = ("zero",)
    amplitude: tuple = (2.0,)
    h0: tuple = ()  # when given, replaces amplitude: A = h0 / h0(A = 1)
    workers: int = 1
    template: RunConfig = field(default_factory=RunConfig)

    LIST_KEYS = ("n", "damping", "amplitude", "h0")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SweepSpec":
        mapping = dict(mapping)
        lists = {}
        for key in cls.LIST_KEYS:
            if key in mapping:
                items = mapping.pop(key).split()
                if not items:
                    raise ConfigError(f"sweep list {key!r} is empty")
                lists[key] = items
        workers = int(mapping.pop("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        template = RunConfig.from_mapping(mapping)
        try:
            spec = cls(
                n=tuple(int(x) for x in lists.get("n", [template.n])),
                damping=tuple(lists.get("damping", [template.damping])),
                amplitude=tuple(float(x) for x in lists.get("amplitude", [template.amplitude])),
                h0=tuple(float(x) for x in lists.get("h0", [])),
                workers=workers,
                template=template,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for lit in spec.damping:
            try:
                parse_damping(lit)
            except DomainError as exc:
                raise ConfigError(str(exc)) from exc
        return spec

    @classmethod
    def from_file(cls, path) -> "SweepSpec":
        return cls.from_mapping(parse_kv(Path(path).read_text()))

    def points(self) -> list[RunConfig]:
        """Cartesian product in a fixed order (n, damping, amplitude)."""
        amps = self.amplitude
        if self.h0:
            if self.template.family == "custom":
                raise ConfigError("h0 sweeps need a parametric initial family")
            unit = replace(self.template, amplitude=1.0).initial().h0
            amps = tuple(h / unit for h in self.h0)
        return [
            replace(self.template, n=n, damping=d, amplitude=a)
            for n in self.n
            for d in self.damping
            for a in amps
        ]
