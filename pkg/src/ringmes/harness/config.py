"""Run configuration: a JSON file plus command-line overrides (flags win)."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

import numpy as np

from ..errors import ConfigError, DomainError
from ..model import ModelParams

TASKS = ("spectrum", "mes-check", "protocol", "alpha-scan", "uv-sweep")


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    num: int
    log: bool = False

    def values(self) -> np.ndarray:
        if self.log:
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.num)
        return np.linspace(self.start, self.stop, self.num)

    def validate(self, name: str, positive: bool = False) -> None:
        if int(self.num) != self.num or self.num < 1:
            raise ConfigError(name, f"needs at least one point (num={self.num})")
        if self.num > 1 and not self.stop > self.start:
            raise ConfigError(name, f"must be ascending (start={self.start}, stop={self.stop})")
        if (positive or self.log) and self.start <= 0:
            raise ConfigError(name, "must be strictly positive")


def _default_model() -> ModelParams:
    # strong coupling, C = U/10 = V/10
    return ModelParams(L=3, N=2, C=1.0, U=10.0, V=10.0)


@dataclass(frozen=True)
class RunConfig:
    task: str = "spectrum"
    model: ModelParams = field(default_factory=_default_model)
    phi_grid: Grid = Grid(0.0, math.pi, 241)
    zero_tol: float = 1e-10
    m_list: Optional[tuple[int, ...]] = None
    mes_delta: float = 0.0
    residual_tol: float = 1e-12
    alpha: float = 0.02
    alpha_grid: Grid = Grid(1e-3, 1e-1, 30, log=True)
    samples: int = 201
    eps: float = 1e-10
    uv_phi: float = math.pi / 2
    u_grid: Grid = Grid(1.0 / 81, 1.0, 81)
    v_grid: Grid = Grid(1.0 / 81, 1.0, 81)
    out: Optional[str] = None
    threads: int = 1
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.task not in TASKS:
            raise ConfigError("task", f"unknown task {self.task!r}; choose one of {', '.join(TASKS)}")
        self.phi_grid.validate("phi_grid")
        self.alpha_grid.validate("alpha_grid", positive=True)
        self.u_grid.validate("u_grid", positive=True)
        self.v_grid.validate("v_grid", positive=True)
        for name in ("zero_tol", "residual_tol", "eps", "alpha"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if not 1e-12 <= self.eps <= 1e-6:
            raise ConfigError("eps", "must lie in [1e-12, 1e-6]")
        if not 2 <= self.samples <= 400:
            raise ConfigError("samples", "must lie in [2, 400]")
        if self.threads < 1:
            raise ConfigError("threads", "must be >= 1")
        if self.m_list is not None and len(self.m_list) == 0:
            raise ConfigError("m_list", "must not be empty")
        if self.task == "uv-sweep" and self.model.C <= 0:
            raise ConfigError("C", "the current renormalisation 1 - J/C needs C > 0")
        if self.out is not None:
            parent = os.path.dirname(os.path.abspath(self.out))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError("out", f"directory {parent!r} is not writable")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if self.m_list is not None:
            d["m_list"] = list(self.m_list)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        kw: dict[str, Any] = {}
        for key, value in data.items():
            if key == "model":
                try:
                    kw[key] = ModelParams(**value)
                except (TypeError, DomainError) as exc:
                    raise ConfigError("model", str(exc)) from exc
            elif key.endswith("_grid"):
                try:
                    kw[key] = Grid(**value)
                except TypeError as exc:
                    raise ConfigError(key, str(exc)) from exc
            elif key == "m_list" and value is not None:
                kw[key] = tuple(int(m) for m in value)
            else:
                kw[key] = value
        return cls(**kw)

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path!r}: {exc}") from exc

    def override(self, **changes) -> "RunConfig":
        """Apply non-None overrides; model fields (L, N, C, U, V, phi_a, phi_b) go to ``model``."""
        model_keys = {"L", "N", "C", "U", "V", "phi_a", "phi_b"}
        model_changes = {k: v for k, v in changes.items() if k in model_keys and v is not None}
        rest = {k: v for k, v in changes.items() if k not in model_keys and v is not None}
        cfg = self
        if model_changes:
            try:
                cfg = replace(cfg, model=self.model.replace(**model_changes))
            except DomainError as exc:
                raise ConfigError(next(iter(model_changes)), str(exc)) from exc
        return replace(cfg, **rest) if rest else cfg
