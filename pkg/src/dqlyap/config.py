"""JSON run configuration for the command-line front end."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .boundary import BoundaryCondition, Face
from .dq import GridAxis, GridSpec
from .exceptions import DQError

__all__ = ["ConfigError", "RunConfig", "load_config"]

METHOD_TAGS = ("auto", "bartels-stewart", "hessenberg-schur", "kronecker-gauss", "centro-split")


class ConfigError(DQError, ValueError):
    """Unreadable or invalid run configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FaceConfig(_Strict):
    kind: Literal["dirichlet", "neumann"] = "dirichlet"
    value: float = 0.0

    def build(self) -> Face:
        return Face(self.kind, self.value)


class AxisBoundary(_Strict):
    left: FaceConfig = FaceConfig()
    right: FaceConfig = FaceConfig()

    def build(self) -> BoundaryCondition:
        return BoundaryCondition(self.left.build(), self.right.build())


class AxisGrid(_Strict):
    kind: Literal["chebyshev", "uniform"] = "chebyshev"
    n: int = Field(11, ge=3)


class ConstantSource(_Strict):
    constant: float


class TransientConfig(_Strict):
    dt: float = Field(gt=0)
    steps: int = Field(gt=0)
    scheme: Literal["backward-euler", "rk4"] = "backward-euler"
    initial: Union[Literal["zero", "manufactured-sin"], ConstantSource] = "zero"


class OutputConfig(_Strict):
    field: Optional[str] = None
    report: Optional[str] = None


class RunConfig(_Strict):
    problem: Literal["poisson", "convdiff", "convdiff3d", "transient"]
    grid: Union[AxisGrid, list[AxisGrid]] = AxisGrid()
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    bc: dict[Literal["x", "y", "z"], AxisBoundary] = {}
    source: Union[Literal["zero", "manufactured-sin"], ConstantSource] = "zero"
    method: Literal[METHOD_TAGS] = "auto"
    transient: Optional[TransientConfig] = None
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _consistent(self):
        ndim = self.ndim
        if isinstance(self.grid, list) and len(self.grid) != ndim:
            raise ValueError(f"{self.problem} needs {ndim} grid axes, got {len(self.grid)}")
        if ndim == 2 and "z" in self.bc:
            raise ValueError("2-D problems take no z boundary")
        if (self.problem == "transient") != (self.transient is not None):
            raise ValueError("the transient block is required for, and only for, transient runs")
        if self.problem == "convdiff3d" and self.source != "zero":
            raise ValueError("convdiff3d takes no source term")
        if self.problem in ("convdiff", "transient") and self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.problem == "poisson" and not self.beta > 0:
            raise ValueError("beta must be positive")
        try:
            self.grid_spec()
            for axis in self.bc:
                self.boundary(axis)
        except DQError as exc:
            raise ValueError(str(exc)) from exc
        return self

    @property
    def ndim(self) -> int:
        return 3 if self.problem == "convdiff3d" else 2

    def grid_spec(self) -> GridSpec:
        axes = self.grid if isinstance(self.grid, list) else [self.grid] * self.ndim
        return GridSpec(tuple(GridAxis.from_kind(a.kind, a.n) for a in axes))

    def boundary(self, axis: str):
        """BoundaryCondition for ``axis``, or None to use the problem default."""
        return self.bc[axis].build() if axis in self.bc else None


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return RunConfig.model_validate(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}:\n{exc}") from exc
    except DQError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
