"""Strict JSON experiment configuration.

A config file holds one top-level ``experiment`` object. Unknown keys are
errors, and so are known keys that the chosen experiment kind does not use.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .informed import InformedParams
from .market import CashFlowSpec, DiscountCurve
from .metrics import QuadratureConfig
from .montecarlo import MCConfig
from .paths import TimeGrid
from .strategy import StrategyConfig

KINDS = (
    "mutual-info-curve",
    "sample-paths",
    "averaged-paths",
    "delta-J-curve",
    "pnl-backtest",
    "invariant-suite",
)
PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "invariants")


class ConfigError(Exception):
    """Raised with a list of ``(location, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in self.errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CashFlowModel(_Strict):
    values: list[float] = Field(min_length=1)
    probabilities: list[float] = Field(min_length=1)

    @field_validator("values")
    @classmethod
    def _sorted(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("values must be strictly increasing (distinct and sorted)")
        return v

    @field_validator("probabilities")
    @classmethod
    def _simplex(cls, p):
        if any(q <= 0 for q in p):
            raise ValueError("probabilities must all be positive")
        if abs(sum(p) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 within 1e-12 (got {sum(p):.15g})")
        return p

    @model_validator(mode="after")
    def _lengths(self):
        if len(self.values) != len(self.probabilities):
            raise ValueError("values and probabilities must have the same length")
        return self

    def build(self) -> CashFlowSpec:
        return CashFlowSpec(tuple(self.values), tuple(self.probabilities))


class DiscountModel(_Strict):
    rate: float | None = None
    times: list[float] | None = None
    prices: list[float] | None = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.rate is None) == (self.times is None) or (self.times is None) != (self.prices is None):
            raise ValueError("give either 'rate' or both 'times' and 'prices'")
        return self

    def build(self) -> DiscountCurve:
        if self.rate is not None:
            return DiscountCurve.flat(self.rate)
        return DiscountCurve(times=tuple(self.times), prices=tuple(self.prices))


class InformedModel(_Strict):
    sigma_prime: float = Field(ge=0)
    rho: float

    @field_validator("rho")
    @classmethod
    def _open_interval(cls, r):
        if not -1.0 < r < 1.0:
            raise ValueError("rho must lie in the open interval (-1, 1); |rho| = 1 is not simulable")
        return r

    def build(self) -> InformedParams:
        return InformedParams(self.sigma_prime, self.rho)


class GridModel(_Strict):
    horizon: float = Field(gt=0)
    steps: int = Field(ge=2)
    guard: float | None = None

    @model_validator(mode="after")
    def _guard(self):
        if self.guard is not None and not 0 < self.guard < self.horizon:
            raise ValueError("guard must lie in (0, horizon)")
        return self

    def build(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.steps, self.guard)


class MCModel(_Strict):
    paths: int = Field(default=2000, ge=1)
    seed: int = Field(default=0, ge=0)

    def build(self) -> MCConfig:
        return MCConfig(paths=self.paths, seed=self.seed)


class StrategyModel(_Strict):
    threshold: float
    decision_times: list[float] = Field(min_length=1)

    def build(self) -> StrategyConfig:
        return StrategyConfig(self.threshold, tuple(self.decision_times))


class QuadratureModel(_Strict):
    half_width: float = Field(default=10.0, gt=0)
    nodes: int = Field(default=2001, ge=3)
    rule: Literal["simpson"] = "simpson"

    @field_validator("nodes")
    @classmethod
    def _odd(cls, n):
        if n % 2 == 0:
            raise ValueError("nodes must be odd")
        return n

    def build(self) -> QuadratureConfig:
        return QuadratureConfig(self.half_width, self.nodes, self.rule)


# fields each kind accepts; anything else present is an error
_REQUIRED = {
    "mutual-info-curve": {"cash_flow", "sigma", "grid"},
    "sample-paths": {"cash_flow", "discount", "sigma", "informed", "grid", "mc"},
    "averaged-paths": {"cash_flow", "discount", "sigma", "informed", "grid", "mc", "eval_times"},
    "delta-J-curve": {"cash_flow", "sigma", "informed", "grid", "mc", "eval_times"},
    "pnl-backtest": {"cash_flow", "discount", "sigma", "informed", "grid", "mc", "strategy"},
    "invariant-suite": {"cash_flow", "discount", "sigma", "informed", "grid", "mc"},
}
_OPTIONAL = {
    "mutual-info-curve": {"quadrature", "mc"},
    "sample-paths": set(),
    "averaged-paths": set(),
    "delta-J-curve": {"quadrature"},
    "pnl-backtest": set(),
    "invariant-suite": {"quadrature"},
}
_ALWAYS = {"kind", "name", "output_dir"}
_SECTIONS = {
    "cash_flow", "discount", "sigma", "informed", "grid", "mc", "strategy", "quadrature", "eval_times"
}


class ExperimentConfig(_Strict):
    kind: Literal[
        "mutual-info-curve", "sample-paths", "averaged-paths", "delta-J-curve", "pnl-backtest", "invariant-suite"
    ]
    name: str = "experiment"
    cash_flow: CashFlowModel
    discount: DiscountModel | None = None
    sigma: Union[float, list[float]]
    informed: Union[InformedModel, list[InformedModel], None] = None
    grid: GridModel
    mc: MCModel | None = None
    strategy: StrategyModel | None = None
    quadrature: QuadratureModel | None = None
    eval_times: list[float] | None = None
    output_dir: str = "out"

    @field_validator("sigma")
    @classmethod
    def _positive(cls, s):
        vals = s if isinstance(s, list) else [s]
        if not vals or any(not v > 0 for v in vals):
            raise ValueError("sigma must be positive (a number or a non-empty list)")
        return s

    @model_validator(mode="after")
    def _fields_for_kind(self):
        present = {f for f in _SECTIONS if getattr(self, f) is not None}
        missing = _REQUIRED[self.kind] - present
        unused = present - _REQUIRED[self.kind] - _OPTIONAL[self.kind]
        problems = []
        if missing:
            problems.append(f"kind {self.kind!r} requires: {', '.join(sorted(missing))}")
        if unused:
            problems.append(f"kind {self.kind!r} does not use: {', '.join(sorted(unused))}")
        if problems:
            raise ValueError("; ".join(problems))
        rows_s = len(self.sigma) if isinstance(self.sigma, list) else 1
        rows_i = len(self.informed) if isinstance(self.informed, list) else 1
        if rows_s > 1 and rows_i > 1 and rows_s != rows_i:
            raise ValueError("sigma and informed lists must have the same length")
        if self.kind in ("delta-J-curve", "pnl-backtest") and (rows_s > 1 or rows_i > 1):
            raise ValueError(f"kind {self.kind!r} takes a single sigma and a single informed block")
        return self

    # convenience accessors -------------------------------------------------
    def spec(self) -> CashFlowSpec:
        return self.cash_flow.build()

    def curve(self) -> DiscountCurve | None:
        return None if self.discount is None else self.discount.build()

    def sigmas(self) -> list[float]:
        return list(self.sigma) if isinstance(self.sigma, list) else [self.sigma]

    def scenarios(self) -> list[tuple[float, InformedParams | None]]:
        """Rows of ``(sigma, informed)``; a scalar on either side is broadcast."""
        s = self.sigmas()
        if self.informed is None:
            inf = [None]
        else:
            inf = [m.build() for m in (self.informed if isinstance(self.informed, list) else [self.informed])]
        n = max(len(s), len(inf))
        s = s * n if len(s) == 1 else s
        inf = inf * n if len(inf) == 1 else inf
        return list(zip(s, inf))

    def time_grid(self) -> TimeGrid:
        return self.grid.build()

    def mc_config(self) -> MCConfig | None:
        return None if self.mc is None else self.mc.build()

    def quad(self) -> QuadratureConfig:
        return QuadratureConfig() if self.quadrature is None else self.quadrature.build()


class ConfigFile(_Strict):
    experiment: ExperimentConfig


def _format_errors(exc: ValidationError):
    out = []
    for e in exc.errors():
        loc = ".".join(str(p) for p in e["loc"] if not str(p).startswith("function-"))
        msg = e["msg"].removeprefix("Value error, ")
        out.append((loc or "<root>", msg))
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; raises :class:`ConfigError` listing every problem."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<root>", f"invalid JSON: {exc}")]) from exc
    try:
        return ConfigFile.model_validate(raw).experiment
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialise a config; ``parse_config(dump_config(c)) == c``."""
    body = cfg.model_dump(mode="json", exclude_none=True)
    return json.dumps({"experiment": body}, indent=2) + "\n"


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("infotrade.presets").joinpath(f"{name}.json").read_text()


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name))
