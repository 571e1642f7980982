"""Run configuration: JSON document plus command-line overrides."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import DomainError, StructuralError
from .game import BoxSpace, GameSchedule, QuadraticGame
from .presets import PRESETS, build_preset, default_x1

PresetName = Literal["theta1", "theta2", "theta3", "tv-cournot", "remark1"]
Bound = Union[float, Literal["inf", "-inf"]]
DEFAULT_T = 100


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 1."""


def _bound(v: Bound) -> float:
    return {"inf": math.inf, "-inf": -math.inf}.get(v, v) if isinstance(v, str) else float(v)


class BoxConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    lower: Union[Bound, list[Bound]]
    upper: Union[Bound, list[Bound]]

    def to_space(self, dims: tuple[int, ...]) -> BoxSpace:
        n = sum(dims)

        def expand(v, field):
            arr = np.array([_bound(b) for b in v] if isinstance(v, list) else [_bound(v)] * n, dtype=float)
            if arr.shape != (n,):
                raise ConfigError(f"box.{field}: expected {n} entries, got {arr.size}")
            return arr

        try:
            return BoxSpace(dims, expand(self.lower, "lower"), expand(self.upper, "upper"))
        except StructuralError as exc:
            raise ConfigError(f"box: {exc}") from None


class QuadraticSpec(BaseModel):
    """Inline quadratic game: per-agent matrices and vectors as nested lists."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    A: list[list[list[float]]]
    B: list[list[list[float]]]
    e: list[list[float]]
    c: Optional[list[float]] = None

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.A)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    preset: Optional[PresetName] = None
    game: Optional[QuadraticSpec] = None
    T: Optional[int] = Field(default=None, ge=1)
    x1: Union[Literal["midpoint"], list[float], None] = None
    box: Optional[BoxConfig] = None
    tol: float = Field(default=1e-12, gt=0)
    out: Optional[str] = None
    emit: list[Literal["csv", "svg"]] = Field(default_factory=lambda: ["csv"])
    require_contractive: bool = False
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.game is None):
            raise ValueError("exactly one of 'preset' or 'game' must be given")
        return self

    @field_validator("box", mode="before")
    @classmethod
    def _box_pair(cls, v):
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return {"lower": v[0], "upper": v[1]}
        return v

    @property
    def name(self) -> str:
        return self.preset or "custom"

    @property
    def horizon(self) -> int:
        if self.T is not None:
            return self.T
        return PRESETS[self.preset].default_T if self.preset else DEFAULT_T

    def space(self) -> BoxSpace:
        dims = (1, 1) if self.preset else self.game.dims
        if self.box is not None:
            return self.box.to_space(dims)
        if self.preset:
            lo, hi = PRESETS[self.preset].default_box
            return BoxSpace.uniform(dims, lo, hi)
        return BoxSpace.uniform(dims, -math.inf, math.inf)

    def build(self) -> Union[QuadraticGame, GameSchedule]:
        space = self.space()
        if self.preset:
            return build_preset(self.preset, T=self.horizon, space=space)
        g = self.game
        c = g.c if g.c is not None else [0.0] * len(g.A)
        try:
            return QuadraticGame(tuple(map(np.array, g.A)), tuple(map(np.array, g.B)), tuple(map(np.array, g.e)), tuple(c), space)
        except (StructuralError, ValueError) as exc:
            raise ConfigError(f"game: {exc}") from None

    def initial_action(self, space: BoxSpace) -> np.ndarray:
        if self.x1 is None:
            x = default_x1(self.preset, space) if self.preset else space.midpoint()
        elif self.x1 == "midpoint":
            x = space.midpoint()
        else:
            x = np.array(self.x1, dtype=float)
        if x.shape != (space.size,):
            raise ConfigError(f"x1: expected {space.size} entries, got {x.size}")
        if not space.contains(x):
            raise ConfigError("x1: initial action lies outside the box")
        return x


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<config>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read the JSON config (if any), apply overrides, validate.

    Raises:
        ConfigError: unreadable file, malformed JSON, or a field that
            fails validation (the message names the field).
    """
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

        def reject(const):
            raise ConfigError(f"config {path}: non-finite number {const} is not allowed")

        try:
            data = json.loads(text, parse_constant=reject)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path}: top level must be an object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
